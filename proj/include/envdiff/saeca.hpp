#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "envdiff/eca.hpp"
#include "envdiff/rational.hpp"

namespace envdiff::saeca {

enum class Move : std::uint8_t { stay = 0, right = 1, left = 2 };
enum class Upshot : std::uint8_t { keep = 0, swap = 1, set0 = 2, set1 = 3 };

inline constexpr int kMoveCount = 3;
inline constexpr int kUpshotCount = 4;
inline constexpr int kActionCount = kMoveCount * kUpshotCount;

struct Action {
  Move move = Move::stay;
  Upshot upshot = Upshot::keep;

  // 4*move + upshot, in 0..11.
  int code() const { return 4 * static_cast<int>(move) + static_cast<int>(upshot); }
  static Action from_code(int code);
  friend bool operator==(const Action&, const Action&) = default;
};

std::string_view to_string(Move m);
std::string_view to_string(Upshot u);

// The agent's cell c and its two neighbours.
struct Observation {
  bool c = false;
  bool l = false;
  bool r = false;
  friend bool operator==(const Observation&, const Observation&) = default;
};

struct EnvParams {
  eca::RuleTable rule;
  eca::Configuration seed;
  int p0 = 1;  // 1-based

  std::size_t n() const { return seed.size(); }
  void validate() const;
};

struct EnvState {
  eca::Configuration config;
  int pos = 1;  // 1-based, always in 1..n
  int time = 0;

  static EnvState initial(const EnvParams& params);
  friend bool operator==(const EnvState&, const EnvState&) = default;
};

// Per-step reward as a dyadic fraction numerator / 2^(floor(n/2)+1).
struct StepReward {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  Rational to_rational() const;
};

std::uint64_t reward_denominator(std::size_t n);

Observation observe(const EnvState& state);

// Proximity-weighted count of ones around the agent (its own cell excluded):
// sum over i = 1..floor(n/2) of (cell(pos+i) + cell(pos-i)) / 2^(i+1).
StepReward reward(const EnvState& state);

// Applies the action in event order: upshot on the agent's cell, then the
// move (circular), then one synchronous rule update of the whole array, then
// the reward at the new position.
std::pair<EnvState, StepReward> env_step(const EnvState& state, const eca::RuleTable& rule,
                                         const Action& action);

// A policy is any callable from the current observation to an action. Policies
// with memory keep it in the callable.
using PolicyFn = std::function<Action(const Observation&)>;

struct StepRecord {
  Observation observation;
  Action action;
  std::uint64_t reward_numerator = 0;
};

struct EpisodeTrace {
  std::vector<StepRecord> steps;
  std::uint64_t reward_den = 1;  // per-step denominator
  Rational aggregated;           // mean per-step reward
  EnvState final_state;
  // Filled only when requested: configuration and position after each step,
  // row 0 being the start state.
  std::vector<eca::Configuration> configs;
  std::vector<int> positions;

  // The action projection of the history.
  std::vector<Action> actions() const;
};

struct EpisodeOptions {
  bool record_configs = false;
};

EpisodeTrace run_episode(const EnvState& start, const eca::RuleTable& rule, const PolicyFn& policy,
                         int steps, EpisodeOptions options = {});

inline EpisodeTrace run_episode(const EnvParams& params, const PolicyFn& policy, int steps,
                                EpisodeOptions options = {}) {
  params.validate();
  return run_episode(EnvState::initial(params), params.rule, policy, steps, options);
}

// CSV: t,c,l,r,move,upshot,reward_numerator,reward_denominator (t is 1-based).
void write_trace_csv(std::ostream& out, const EpisodeTrace& trace);
// PBM of the recorded configurations plus a sidecar "t,pos" CSV.
void write_agent_diagram(std::ostream& pbm, std::ostream& positions, const EpisodeTrace& trace);

}  // namespace envdiff::saeca
