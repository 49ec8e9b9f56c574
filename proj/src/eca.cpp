#include "envdiff/eca.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace envdiff::eca {

RuleTable rule_from_number(int rule_number) {
  if (rule_number < 0 || rule_number > 255) {
    throw std::invalid_argument("rule number must be in 0..255, got " + std::to_string(rule_number));
  }
  RuleTable table;
  table.rule_number = rule_number;
  for (int p = 0; p < 8; ++p) table.outputs[p] = ((rule_number >> p) & 1) != 0;
  return table;
}

int rule_number_of(const std::array<bool, 8>& outputs) {
  int n = 0;
  for (int p = 0; p < 8; ++p) n |= (outputs[p] ? 1 : 0) << p;
  return n;
}

Configuration::Configuration(std::vector<std::uint8_t> cells) : cells_(std::move(cells)) {
  if (cells_.size() < 3) throw std::invalid_argument("configuration needs at least 3 cells");
  for (auto& c : cells_) {
    if (c > 1) throw std::invalid_argument("configuration cells must be 0 or 1");
  }
}

Configuration Configuration::zeros(std::size_t n) { return Configuration(std::vector<std::uint8_t>(n, 0)); }

Configuration Configuration::ones(std::size_t n) { return Configuration(std::vector<std::uint8_t>(n, 1)); }

Configuration Configuration::parse(std::string_view bits) {
  std::vector<std::uint8_t> cells;
  cells.reserve(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    char ch = bits[i];
    if (ch != '0' && ch != '1') {
      throw std::invalid_argument("seed: invalid character '" + std::string(1, ch) + "' at position " +
                                  std::to_string(i + 1));
    }
    cells.push_back(ch == '1' ? 1 : 0);
  }
  if (cells.size() < 3) throw std::invalid_argument("seed: need at least 3 cells");
  return Configuration(std::move(cells));
}

std::size_t Configuration::popcount() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

std::string Configuration::to_string() const {
  std::string s(cells_.size(), '0');
  for (std::size_t i = 0; i < cells_.size(); ++i) s[i] = cells_[i] ? '1' : '0';
  return s;
}

Configuration step_configuration(const Configuration& cfg, const RuleTable& rule) {
  const auto& old = cfg.cells();
  const std::size_t n = old.size();
  std::vector<std::uint8_t> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool l = old[(i + n - 1) % n];
    bool c = old[i];
    bool r = old[(i + 1) % n];
    next[i] = rule.apply(l, c, r) ? 1 : 0;
  }
  return Configuration(std::move(next));
}

SpaceTime evolve(const Configuration& cfg0, const RuleTable& rule, int steps) {
  if (steps < 0) throw std::invalid_argument("evolve: negative step count");
  SpaceTime rows;
  rows.reserve(static_cast<std::size_t>(steps) + 1);
  rows.push_back(cfg0);
  for (int j = 0; j < steps; ++j) rows.push_back(step_configuration(rows.back(), rule));
  return rows;
}

void write_pbm(std::ostream& out, const SpaceTime& rows) {
  const std::size_t width = rows.empty() ? 0 : rows.front().size();
  out << "P1\n" << width << ' ' << rows.size() << '\n';
  for (const auto& row : rows) out << row.to_string() << '\n';
}

void write_csv(std::ostream& out, const SpaceTime& rows) {
  const std::size_t width = rows.empty() ? 0 : rows.front().size();
  out << 't';
  for (std::size_t i = 1; i <= width; ++i) out << ",cell_" << i;
  out << '\n';
  for (std::size_t t = 0; t < rows.size(); ++t) {
    out << t;
    for (auto c : rows[t].cells()) out << ',' << static_cast<int>(c);
    out << '\n';
  }
}

}  // namespace envdiff::eca
