#include "envdiff/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "envdiff/complexity.hpp"
#include "envdiff/parallel.hpp"
#include "json.hpp"

namespace envdiff::experiment {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string decimal(const Rational& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", r.to_double());
  return buf;
}

}  // namespace

std::string_view to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::Fresh: return "fresh";
    case StrategyKind::RandomWalkPrefix: return "random-walk";
    case StrategyKind::Chained: return "chained";
    case StrategyKind::LevinSearch: return "levin";
  }
  return "?";
}

StrategyKind parse_strategy(std::string_view name) {
  const std::string n = lower(name);
  if (n == "fresh") return StrategyKind::Fresh;
  if (n == "random-walk" || n == "randomwalk" || n == "random_walk") return StrategyKind::RandomWalkPrefix;
  if (n == "chained") return StrategyKind::Chained;
  if (n == "levin" || n == "levin-search") return StrategyKind::LevinSearch;
  throw std::invalid_argument("unknown strategy '" + std::string(name) +
                              "' (expected fresh, random-walk, chained or levin)");
}

std::string_view to_string(PolicyKind k) { return k == PolicyKind::Programmed ? "programmed" : "random-walk"; }

PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "programmed") return PolicyKind::Programmed;
  if (name == "random-walk") return PolicyKind::RandomWalk;
  throw std::invalid_argument("unknown policy kind '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  env.validate();
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (n_policies < 1) throw std::invalid_argument("n_policies must be >= 1");
  if (!(random_walk_frac >= 0.0 && random_walk_frac < 1.0)) {
    throw std::invalid_argument("random_walk_frac must be in [0, 1)");
  }
  const double count = n_policies * random_walk_frac;
  if (std::abs(count - std::round(count)) > 1e-9) {
    throw std::invalid_argument("n_policies * random_walk_frac must be an integer");
  }
  if (len_min < 1 || len_max < len_min) throw std::invalid_argument("need 1 <= len_min <= len_max");
  if (prefix_len < 0) throw std::invalid_argument("prefix_len must be >= 0");
}

int ExperimentConfig::random_walk_count() const {
  return static_cast<int>(std::lround(n_policies * random_walk_frac));
}

int ExperimentConfig::random_walk_interval() const {
  if (random_walk_count() == 0) return 0;
  return static_cast<int>(std::floor(1.0 / random_walk_frac + 1e-9));
}

Population generate_population(const ExperimentConfig& config) {
  config.validate();
  const int walks = config.random_walk_count();
  const int interval = config.random_walk_interval();
  Rng rng = stream_rng(config.rng_seed, "population");

  Population pop;
  pop.reserve(static_cast<std::size_t>(config.n_policies));
  for (int id = 1; id <= config.n_policies; ++id) {
    PolicyEntry e;
    e.policy_id = id;
    if (interval > 0 && id % interval == 0 && id / interval <= walks) {
      e.kind = PolicyKind::RandomWalk;
    } else {
      e.raw = apl::random_program(rng, config.len_min, config.len_max);
      e.simplified = apl::simplify(e.raw);
      e.k = complexity::k_of_program(e.simplified);
    }
    pop.push_back(std::move(e));
  }
  return pop;
}

namespace {

saeca::PolicyFn make_policy(const PolicyEntry& e, std::uint64_t rng_seed) {
  if (e.kind == PolicyKind::RandomWalk) {
    return apl::RandomWalkAgent(stream_rng(rng_seed, "random-walk", static_cast<std::uint64_t>(e.policy_id)));
  }
  return apl::ProgramAgent(e.simplified);
}

EvaluationRecord make_record(const PolicyEntry& e, const saeca::EpisodeTrace& trace, int order_index,
                             const ExperimentConfig& config) {
  EvaluationRecord r;
  r.policy_id = e.policy_id;
  r.kind = e.kind;
  if (e.kind == PolicyKind::Programmed) {
    r.program = apl::encode(e.raw);
    r.simplified = apl::encode(e.simplified);
    r.k = e.k;
  }
  const auto actions = trace.actions();
  r.k_actions = complexity::k_of_actions(actions);
  r.reward = trace.aggregated;
  r.order_index = order_index;
  r.strategy = config.strategy;
  r.rule = config.env.rule.rule_number;
  r.seed = config.env.seed.to_string();
  r.p0 = config.env.p0;
  r.t = config.steps;
  r.rng_seed = config.rng_seed;
  r.compressor_id = complexity::compressor_id();
  return r;
}

saeca::EnvState random_prefix(const ExperimentConfig& config, int policy_id) {
  saeca::EnvState state = saeca::EnvState::initial(config.env);
  Rng rng = stream_rng(config.rng_seed, "prefix", static_cast<std::uint64_t>(policy_id));
  for (int j = 0; j < config.prefix_len; ++j) {
    auto action = saeca::Action::from_code(static_cast<int>(rng.below(saeca::kActionCount)));
    state = saeca::env_step(state, config.env.rule, action).first;
  }
  return state;
}

// Independent per-policy episodes starting from start_of(entry).
template <typename StartFn>
Records evaluate_independent(const Population& population, const ExperimentConfig& config, StartFn start_of) {
  config.validate();
  Records records(population.size());
  parallel_for(population.size(), config.threads, [&](std::size_t i) {
    const auto& e = population[i];
    auto trace = saeca::run_episode(start_of(e), config.env.rule, make_policy(e, config.rng_seed), config.steps);
    records[i] = make_record(e, trace, static_cast<int>(i) + 1, config);
  });
  return records;
}

Records evaluate_sequence(const Population& population, const ExperimentConfig& config,
                          const std::vector<std::size_t>& order) {
  config.validate();
  Records records;
  records.reserve(order.size());
  saeca::EnvState state = saeca::EnvState::initial(config.env);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& e = population[order[pos]];
    auto trace = saeca::run_episode(state, config.env.rule, make_policy(e, config.rng_seed), config.steps);
    records.push_back(make_record(e, trace, static_cast<int>(pos) + 1, config));
    state = trace.final_state;
  }
  return records;
}

std::vector<std::size_t> fill_programmed_slots(const Population& population, std::vector<std::size_t> programmed) {
  std::vector<std::size_t> order(population.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < population.size(); ++i) {
    order[i] = population[i].kind == PolicyKind::RandomWalk ? i : programmed[next++];
  }
  return order;
}

std::vector<std::size_t> programmed_indices(const Population& population) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (population[i].kind == PolicyKind::Programmed) idx.push_back(i);
  }
  return idx;
}

}  // namespace

Records evaluate_fresh(const Population& population, const ExperimentConfig& config) {
  return evaluate_independent(population, config, [&](const PolicyEntry&) { return saeca::EnvState::initial(config.env); });
}

Records evaluate_random_walk_prefix(const Population& population, const ExperimentConfig& config) {
  return evaluate_independent(population, config,
                              [&](const PolicyEntry& e) { return random_prefix(config, e.policy_id); });
}

std::vector<std::size_t> chained_order(const Population& population, std::uint64_t rng_seed) {
  auto programmed = programmed_indices(population);
  Rng rng = stream_rng(rng_seed, "shuffle");
  rng.shuffle(programmed);
  return fill_programmed_slots(population, std::move(programmed));
}

std::vector<std::size_t> levin_order(const Population& population) {
  auto programmed = programmed_indices(population);
  std::vector<std::string> codes(population.size());
  for (auto i : programmed) codes[i] = apl::encode(population[i].simplified);
  std::stable_sort(programmed.begin(), programmed.end(), [&](std::size_t a, std::size_t b) {
    const auto la = population[a].simplified.size();
    const auto lb = population[b].simplified.size();
    if (la != lb) return la < lb;
    return codes[a] < codes[b];
  });
  return fill_programmed_slots(population, std::move(programmed));
}

Records evaluate_chained(const Population& population, const ExperimentConfig& config) {
  return evaluate_sequence(population, config, chained_order(population, config.rng_seed));
}

Records evaluate_levin(const Population& population, const ExperimentConfig& config) {
  return evaluate_sequence(population, config, levin_order(population));
}

Records evaluate(const Population& population, const ExperimentConfig& config) {
  switch (config.strategy) {
    case StrategyKind::Fresh: return evaluate_fresh(population, config);
    case StrategyKind::RandomWalkPrefix: return evaluate_random_walk_prefix(population, config);
    case StrategyKind::Chained: return evaluate_chained(population, config);
    case StrategyKind::LevinSearch: return evaluate_levin(population, config);
  }
  throw std::logic_error("unhandled strategy");
}

// ---------------------------------------------------------------------------
// Record files

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {
      "policy_id", "kind", "program", "simplified", "k", "k_actions", "R_num", "R_den", "R",
      "order_index", "strategy", "rule", "seed", "p0", "t", "rng_seed", "compressor_id"};
  return cols;
}

void write_records_csv(std::ostream& out, const Records& records) {
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    out << r.policy_id << ',' << to_string(r.kind) << ',' << r.program << ',' << r.simplified << ',';
    if (r.k) out << *r.k;
    out << ',' << r.k_actions << ',' << r.reward.num() << ',' << r.reward.den() << ',' << decimal(r.reward) << ','
        << r.order_index << ',' << to_string(r.strategy) << ',' << r.rule << ',' << r.seed << ',' << r.p0 << ','
        << r.t << ',' << r.rng_seed << ',' << r.compressor_id << '\n';
  }
}

void write_records_jsonl(std::ostream& out, const Records& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["policy_id"] = r.policy_id;
    j["kind"] = to_string(r.kind);
    j["program"] = r.program;
    j["simplified"] = r.simplified;
    j["k"] = r.k ? nlohmann::ordered_json(*r.k) : nlohmann::ordered_json(nullptr);
    j["k_actions"] = r.k_actions;
    j["R_num"] = r.reward.num();
    j["R_den"] = r.reward.den();
    j["R"] = decimal(r.reward);
    j["order_index"] = r.order_index;
    j["strategy"] = to_string(r.strategy);
    j["rule"] = r.rule;
    j["seed"] = r.seed;
    j["p0"] = r.p0;
    j["t"] = r.t;
    j["rng_seed"] = r.rng_seed;
    j["compressor_id"] = r.compressor_id;
    out << j.dump() << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_number(const std::string& text, const std::string& column, std::size_t line) {
  try {
    std::size_t used = 0;
    T value;
    if constexpr (std::is_same_v<T, std::uint64_t>) {
      value = std::stoull(text, &used);
    } else {
      value = static_cast<T>(std::stoll(text, &used));
    }
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw std::runtime_error("records: bad value '" + text + "' in column " + column + " at line " +
                             std::to_string(line));
  }
}

}  // namespace

Records read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("records: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  for (const auto& col : record_columns()) {
    if (!index.contains(col)) throw std::runtime_error("records: missing column " + col);
  }

  Records records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw std::runtime_error("records: line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                               " fields, expected " + std::to_string(header.size()));
    }
    auto get = [&](const char* col) -> const std::string& { return f[index.at(col)]; };
    EvaluationRecord r;
    r.policy_id = parse_number<int>(get("policy_id"), "policy_id", line_no);
    try {
      r.kind = parse_policy_kind(get("kind"));
      r.strategy = parse_strategy(get("strategy"));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(std::string("records: line ") + std::to_string(line_no) + ": " + e.what());
    }
    r.program = get("program");
    r.simplified = get("simplified");
    if (!get("k").empty()) r.k = parse_number<int>(get("k"), "k", line_no);
    if (r.programmed() && !r.k) throw std::runtime_error("records: programmed row without k at line " + std::to_string(line_no));
    r.k_actions = parse_number<int>(get("k_actions"), "k_actions", line_no);
    auto num = parse_number<std::int64_t>(get("R_num"), "R_num", line_no);
    auto den = parse_number<std::int64_t>(get("R_den"), "R_den", line_no);
    if (den <= 0) throw std::runtime_error("records: non-positive R_den at line " + std::to_string(line_no));
    r.reward = Rational(num, den);
    r.order_index = parse_number<int>(get("order_index"), "order_index", line_no);
    r.rule = parse_number<int>(get("rule"), "rule", line_no);
    r.seed = get("seed");
    r.p0 = parse_number<int>(get("p0"), "p0", line_no);
    r.t = parse_number<int>(get("t"), "t", line_no);
    r.rng_seed = parse_number<std::uint64_t>(get("rng_seed"), "rng_seed", line_no);
    r.compressor_id = get("compressor_id");
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace envdiff::experiment
