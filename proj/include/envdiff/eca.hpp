#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace envdiff::eca {

// Wolfram-numbered elementary rule. outputs[p] is the new cell value for the
// neighbourhood (l, c, r) read as the binary number p = 4l + 2c + r.
struct RuleTable {
  int rule_number = 0;
  std::array<bool, 8> outputs{};

  bool apply(bool l, bool c, bool r) const { return outputs[(l << 2) | (c << 1) | r]; }
  friend bool operator==(const RuleTable&, const RuleTable&) = default;
};

RuleTable rule_from_number(int rule_number);

// Rebuilds the Wolfram number from an output table.
int rule_number_of(const std::array<bool, 8>& outputs);

// Finite circular array of cells, at least three long. The public accessors
// are 1-based with wrap-around: cell(0) is cell(n), cell(n+1) is cell(1).
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<std::uint8_t> cells);
  static Configuration zeros(std::size_t n);
  static Configuration ones(std::size_t n);
  // Parses a '0'/'1' string; throws std::invalid_argument naming the offending
  // position (1-based) or a too-short input.
  static Configuration parse(std::string_view bits);

  std::size_t size() const { return cells_.size(); }

  // 1-based circular read. Any integer index is accepted.
  bool cell(long long i) const { return cells_[wrap(i)] != 0; }
  void set_cell(long long i, bool v) { cells_[wrap(i)] = v ? 1 : 0; }

  // Zero-based raw view.
  const std::vector<std::uint8_t>& cells() const { return cells_; }

  std::size_t popcount() const;
  std::string to_string() const;

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::size_t wrap(long long i) const {
    long long n = static_cast<long long>(cells_.size());
    long long z = (i - 1) % n;
    return static_cast<std::size_t>(z < 0 ? z + n : z);
  }

  std::vector<std::uint8_t> cells_;
};

// One synchronous update with circular neighbourhood.
Configuration step_configuration(const Configuration& cfg, const RuleTable& rule);

// t+1 rows: row 0 is cfg0, row j is cfg0 stepped j times.
using SpaceTime = std::vector<Configuration>;
SpaceTime evolve(const Configuration& cfg0, const RuleTable& rule, int steps);

// Plain PBM (P1): header "P1", "<width> <height>", then one '0'/'1' row per
// time step.
void write_pbm(std::ostream& out, const SpaceTime& rows);
// CSV with header t,cell_1..cell_n.
void write_csv(std::ostream& out, const SpaceTime& rows);

}  // namespace envdiff::eca
