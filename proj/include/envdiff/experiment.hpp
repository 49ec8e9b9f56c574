#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "envdiff/apl.hpp"
#include "envdiff/rational.hpp"
#include "envdiff/saeca.hpp"

namespace envdiff::experiment {

enum class StrategyKind { Fresh, RandomWalkPrefix, Chained, LevinSearch };

std::string_view to_string(StrategyKind s);
// Accepts fresh, random-walk, chained, levin (case-insensitive).
StrategyKind parse_strategy(std::string_view name);

enum class PolicyKind { Programmed, RandomWalk };
std::string_view to_string(PolicyKind k);
PolicyKind parse_policy_kind(std::string_view name);

inline constexpr const char* kPaperSeed = "010101010101010101010";

struct ExperimentConfig {
  saeca::EnvParams env{eca::rule_from_number(110), eca::Configuration::parse(kPaperSeed), 11};
  int steps = 300;
  int n_policies = 2000;
  double random_walk_frac = 0.05;
  int len_min = 1;
  int len_max = 20;
  StrategyKind strategy = StrategyKind::Fresh;
  int prefix_len = 300;  // random-walk steps before each policy (RandomWalkPrefix only)
  std::uint64_t rng_seed = 20130111;
  int threads = 1;

  // Throws std::invalid_argument on any inconsistent field.
  void validate() const;
  int random_walk_count() const;
  // Random walks sit at positions interval, 2*interval, ... (1-based).
  int random_walk_interval() const;
};

struct PolicyEntry {
  int policy_id = 0;  // 1-based position in the generated population
  PolicyKind kind = PolicyKind::Programmed;
  apl::Program raw;
  apl::Program simplified;
  int k = 0;  // complexity of the simplified program; 0 for random walks
};

using Population = std::vector<PolicyEntry>;

struct EvaluationRecord {
  int policy_id = 0;
  PolicyKind kind = PolicyKind::Programmed;
  std::string program;     // raw digit string, empty for random walks
  std::string simplified;  // simplified digit string, empty for random walks
  std::optional<int> k;    // absent for random walks
  int k_actions = 0;
  Rational reward;
  int order_index = 0;  // 1-based position in the evaluation sequence
  StrategyKind strategy = StrategyKind::Fresh;
  int rule = 0;
  std::string seed;
  int p0 = 1;
  int t = 0;
  std::uint64_t rng_seed = 0;
  std::string compressor_id;

  bool programmed() const { return kind == PolicyKind::Programmed; }
};

using Records = std::vector<EvaluationRecord>;

Population generate_population(const ExperimentConfig& config);

// Each strategy returns records sorted by order_index.
Records evaluate_fresh(const Population& population, const ExperimentConfig& config);
Records evaluate_random_walk_prefix(const Population& population, const ExperimentConfig& config);
Records evaluate_chained(const Population& population, const ExperimentConfig& config);
Records evaluate_levin(const Population& population, const ExperimentConfig& config);

// Dispatches on config.strategy.
Records evaluate(const Population& population, const ExperimentConfig& config);

// Evaluation order used by the sequential strategies: random walks keep
// their population slots, programmed policies fill the rest (shuffled for
// Chained, shortest-first for Levin). Returned as indices into population.
std::vector<std::size_t> chained_order(const Population& population, std::uint64_t rng_seed);
std::vector<std::size_t> levin_order(const Population& population);

// CSV column order shared by the writer and reader.
const std::vector<std::string>& record_columns();

void write_records_csv(std::ostream& out, const Records& records);
void write_records_jsonl(std::ostream& out, const Records& records);
// Throws std::runtime_error naming the missing or malformed column.
Records read_records_csv(std::istream& in);

}  // namespace envdiff::experiment
