#include "envdiff/saeca.hpp"

#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace envdiff::saeca {

Action Action::from_code(int code) {
  if (code < 0 || code >= kActionCount) throw std::invalid_argument("action code out of range");
  return Action{static_cast<Move>(code / 4), static_cast<Upshot>(code % 4)};
}

std::string_view to_string(Move m) {
  switch (m) {
    case Move::stay: return "stay";
    case Move::right: return "right";
    case Move::left: return "left";
  }
  return "?";
}

std::string_view to_string(Upshot u) {
  switch (u) {
    case Upshot::keep: return "keep";
    case Upshot::swap: return "swap";
    case Upshot::set0: return "set0";
    case Upshot::set1: return "set1";
  }
  return "?";
}

void EnvParams::validate() const {
  if (seed.size() < 3) throw std::invalid_argument("seed needs at least 3 cells");
  if (p0 < 1 || static_cast<std::size_t>(p0) > seed.size()) {
    throw std::invalid_argument("p0 must be in 1.." + std::to_string(seed.size()));
  }
}

EnvState EnvState::initial(const EnvParams& params) {
  params.validate();
  return EnvState{params.seed, params.p0, 0};
}

Rational StepReward::to_rational() const {
  return Rational(static_cast<std::int64_t>(numerator), static_cast<std::int64_t>(denominator));
}

std::uint64_t reward_denominator(std::size_t n) {
  std::size_t exponent = n / 2 + 1;
  if (exponent > 62) throw std::invalid_argument("configuration too long for exact rewards");
  return std::uint64_t{1} << exponent;
}

Observation observe(const EnvState& s) {
  return Observation{s.config.cell(s.pos), s.config.cell(s.pos - 1), s.config.cell(s.pos + 1)};
}

StepReward reward(const EnvState& s) {
  const std::size_t n = s.config.size();
  const std::size_t half = n / 2;
  StepReward r;
  r.denominator = reward_denominator(n);
  // Term i contributes (x + y) / 2^(i+1) = (x + y) * 2^(half - i) / 2^(half + 1).
  for (std::size_t i = 1; i <= half; ++i) {
    long long off = static_cast<long long>(i);
    std::uint64_t ones = static_cast<std::uint64_t>(s.config.cell(s.pos + off)) +
                         static_cast<std::uint64_t>(s.config.cell(s.pos - off));
    r.numerator += ones << (half - i);
  }
  return r;
}

std::pair<EnvState, StepReward> env_step(const EnvState& state, const eca::RuleTable& rule,
                                         const Action& action) {
  EnvState next = state;
  const int n = static_cast<int>(next.config.size());

  switch (action.upshot) {
    case Upshot::keep: break;
    case Upshot::swap: next.config.set_cell(next.pos, !next.config.cell(next.pos)); break;
    case Upshot::set0: next.config.set_cell(next.pos, false); break;
    case Upshot::set1: next.config.set_cell(next.pos, true); break;
  }

  switch (action.move) {
    case Move::stay: break;
    case Move::right: next.pos = next.pos == n ? 1 : next.pos + 1; break;
    case Move::left: next.pos = next.pos == 1 ? n : next.pos - 1; break;
  }

  next.config = eca::step_configuration(next.config, rule);
  next.time += 1;
  StepReward r = reward(next);
  return {std::move(next), r};
}

std::vector<Action> EpisodeTrace::actions() const {
  std::vector<Action> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.action);
  return out;
}

EpisodeTrace run_episode(const EnvState& start, const eca::RuleTable& rule, const PolicyFn& policy,
                         int steps, EpisodeOptions options) {
  if (steps < 1) throw std::invalid_argument("run_episode: need at least one step");
  const std::uint64_t den = reward_denominator(start.config.size());
  if (den > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) / static_cast<std::uint64_t>(steps)) {
    throw std::invalid_argument("run_episode: step count too large for exact aggregation");
  }

  EpisodeTrace trace;
  trace.reward_den = den;
  trace.steps.reserve(static_cast<std::size_t>(steps));
  if (options.record_configs) {
    trace.configs.reserve(static_cast<std::size_t>(steps) + 1);
    trace.configs.push_back(start.config);
    trace.positions.push_back(start.pos);
  }

  EnvState state = start;
  std::uint64_t total = 0;
  for (int j = 0; j < steps; ++j) {
    Observation obs = observe(state);
    Action act = policy(obs);
    auto [next, r] = env_step(state, rule, act);
    state = std::move(next);
    total += r.numerator;
    trace.steps.push_back(StepRecord{obs, act, r.numerator});
    if (options.record_configs) {
      trace.configs.push_back(state.config);
      trace.positions.push_back(state.pos);
    }
  }
  trace.aggregated = Rational(static_cast<std::int64_t>(total),
                              static_cast<std::int64_t>(den) * steps);
  trace.final_state = std::move(state);
  return trace;
}

void write_trace_csv(std::ostream& out, const EpisodeTrace& trace) {
  out << "t,c,l,r,move,upshot,reward_numerator,reward_denominator\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    out << (i + 1) << ',' << s.observation.c << ',' << s.observation.l << ',' << s.observation.r << ','
        << static_cast<int>(s.action.move) << ',' << static_cast<int>(s.action.upshot) << ','
        << s.reward_numerator << ',' << trace.reward_den << '\n';
  }
}

void write_agent_diagram(std::ostream& pbm, std::ostream& positions, const EpisodeTrace& trace) {
  if (trace.configs.empty()) throw std::logic_error("trace was run without record_configs");
  eca::write_pbm(pbm, trace.configs);
  positions << "t,pos\n";
  for (std::size_t t = 0; t < trace.positions.size(); ++t) positions << t << ',' << trace.positions[t] << '\n';
}

}  // namespace envdiff::saeca
