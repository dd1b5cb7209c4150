#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace psd {

using cplx = std::complex<double>;

// One bit per byte, each value 0 or 1.
using BitVec = std::vector<std::uint8_t>;

}  // namespace psd
