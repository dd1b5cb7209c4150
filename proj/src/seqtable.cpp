#include "psd/seqtable.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "psd/errors.hpp"

namespace psd::seqtable {

SymbolTable::SymbolTable(std::vector<cplx> base) : base_(std::move(base)) {
  if (base_.size() < 2)
    throw ConfigError("table length must be >= 2, got " +
                      std::to_string(base_.size()));
}

cplx SymbolTable::doubled(std::size_t i) const {
  if (i >= 2 * base_.size())
    throw SelectionError("doubled index " + std::to_string(i) +
                         " out of range");
  return base_[i % base_.size()];
}

std::vector<cplx> SymbolTable::doubled_view() const {
  std::vector<cplx> v;
  v.reserve(2 * base_.size());
  v.insert(v.end(), base_.begin(), base_.end());
  v.insert(v.end(), base_.begin(), base_.end());
  return v;
}

SymbolTable generate_table(std::size_t table_length,
                           const phy::Modulation& mod, Rng& rng) {
  if (table_length < 2)
    throw ConfigError("table length must be >= 2, got " +
                      std::to_string(table_length));
  const auto& points = mod.constellation();
  std::vector<cplx> base(table_length);
  for (std::size_t i = 0; i < table_length; ++i)
    base[i] = points[rng.uniform_int(points.size())];
  return SymbolTable(std::move(base));
}

std::vector<cplx> select_precheck(const SymbolTable& table,
                                  const PrecheckSelection& sel) {
  const std::size_t t = table.size();
  if (sel.start_index >= t)
    throw SelectionError("start index " + std::to_string(sel.start_index) +
                         " must lie in the first half (T = " +
                         std::to_string(t) + ")");
  if (sel.length < 1 || sel.length > t)
    throw SelectionError("selection length " + std::to_string(sel.length) +
                         " must be in [1, " + std::to_string(t) + "]");
  std::vector<cplx> out(sel.length);
  for (std::size_t k = 0; k < sel.length; ++k)
    out[k] = table.base()[(sel.start_index + k) % t];
  return out;
}

PrecheckSelection random_selection(std::size_t table_length,
                                   std::size_t length, Rng& rng) {
  if (table_length < 1 || length < 1 || length > table_length)
    throw ConfigError("selection length " + std::to_string(length) +
                      " must be in [1, T] with T = " +
                      std::to_string(table_length));
  return {rng.uniform_int(table_length), length};
}

void dump_table(const SymbolTable& table, std::ostream& out) {
  char line[96];
  for (std::size_t i = 0; i < table.size(); ++i) {
    const cplx s = table.base()[i];
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", i, s.real(),
                  s.imag());
    out << line;
  }
}

void dump_table_file(const SymbolTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  dump_table(table, out);
  if (!out) throw IoError("write failed: " + path);
}

SymbolTable load_table(std::istream& in) {
  std::vector<cplx> base;
  std::string line;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t idx = 0;
    double re = 0.0, im = 0.0;
    if (std::sscanf(line.c_str(), "%zu,%lg,%lg", &idx, &re, &im) != 3)
      throw IoError("malformed table line: " + line);
    if (idx != expected)
      throw IoError("table indices must be sequential from 0, got " + line);
    ++expected;
    base.emplace_back(re, im);
  }
  return SymbolTable(std::move(base));
}

SymbolTable load_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  return load_table(in);
}

}  // namespace psd::seqtable
