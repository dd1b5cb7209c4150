#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "psd/phy.hpp"
#include "psd/rng.hpp"
#include "psd/types.hpp"

namespace psd::seqtable {

// Public table of T constellation symbols stored conceptually twice
// back-to-back, so any run of up to T symbols that starts in the first half
// is contiguous. Indices are 0-based throughout.
class SymbolTable {
 public:
  explicit SymbolTable(std::vector<cplx> base);

  std::size_t size() const { return base_.size(); }  // T
  const std::vector<cplx>& base() const { return base_; }
  cplx doubled(std::size_t i) const;                  // i ∈ [0, 2T)
  std::vector<cplx> doubled_view() const;             // length 2T

 private:
  std::vector<cplx> base_;
};

struct PrecheckSelection {
  std::size_t start_index = 0;  // in [0, T)
  std::size_t length = 0;       // in [1, T]
};

// T independent uniform draws from the constellation.
SymbolTable generate_table(std::size_t table_length,
                           const phy::Modulation& mod, Rng& rng);

// Contiguous doubled-view slice; equals circular indexing into the base.
std::vector<cplx> select_precheck(const SymbolTable& table,
                                  const PrecheckSelection& sel);

// Uniform start index over [0, T); the length is always exactly the request.
PrecheckSelection random_selection(std::size_t table_length,
                                   std::size_t length, Rng& rng);

// Plain-text dump, one "index,re,im" line per base symbol.
void dump_table(const SymbolTable& table, std::ostream& out);
void dump_table_file(const SymbolTable& table, const std::string& path);
SymbolTable load_table(std::istream& in);
SymbolTable load_table_file(const std::string& path);

}  // namespace psd::seqtable
