#pragma once

#include <stdexcept>

namespace psd {

// Invalid scenario or component parameters (bad key, violated invariant).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Payload does not fit the declared framing (bit count, block length).
struct FramingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Out-of-range table selection.
struct SelectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mismatched operands in a comparison (BER over unequal lengths, empty input).
struct ComparisonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Degenerate channel (all taps numerically zero, tap count mismatch).
struct ChannelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace psd
