#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "envdiff/rng.hpp"
#include "envdiff/saeca.hpp"

namespace envdiff::apl {

enum class Instruction : std::uint8_t { back = 0, fwd = 1, Vaddm = 2, Vadd1 = 3, Uaddm = 4, Uadd1 = 5 };
inline constexpr int kInstructionCount = 6;

inline bool is_accumulator(Instruction i) { return static_cast<int>(i) >= 2; }

using Program = std::vector<Instruction>;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, char ch);
  std::size_t position() const { return position_; }  // 1-based

 private:
  std::size_t position_;
};

// Digit-string form: one character '0'..'5' per instruction.
std::string encode(const Program& program);
Program decode(std::string_view digits);

// Growing history of observation bits, appended c, l, r per step. The pointer
// is 1-based and always within 1..size() once the first observation is in.
class PolicyMemory {
 public:
  void append(const saeca::Observation& obs) {
    bits_.push_back(obs.c);
    bits_.push_back(obs.l);
    bits_.push_back(obs.r);
  }
  std::size_t size() const { return bits_.size(); }
  bool at(std::size_t b) const { return bits_[b - 1] != 0; }
  void clear() { bits_.clear(); }

 private:
  std::vector<std::uint8_t> bits_;
};

// Appends the observation to memory, runs the program over the two
// accumulators and returns <V, U> as <move, upshot>.
saeca::Action decide_action(const Program& program, PolicyMemory& memory, const saeca::Observation& obs);

// Stateful agent for exactly one episode (memory starts empty).
class ProgramAgent {
 public:
  explicit ProgramAgent(Program program) : program_(std::move(program)) {}
  saeca::Action operator()(const saeca::Observation& obs) { return decide_action(program_, memory_, obs); }

 private:
  Program program_;
  PolicyMemory memory_;
};

// Uniform over the twelve actions, ignoring observations.
class RandomWalkAgent {
 public:
  explicit RandomWalkAgent(Rng rng) : rng_(std::move(rng)) {}
  saeca::Action operator()(const saeca::Observation&) {
    return saeca::Action::from_code(static_cast<int>(rng_.below(saeca::kActionCount)));
  }

 private:
  Rng rng_;
};

// Length uniform in [len_min, len_max], each instruction uniform over six.
Program random_program(Rng& rng, int len_min = 1, int len_max = 20);

// Sound (not complete) shortening. Rewrites to a fixed point:
//  - drop everything after the last accumulator instruction;
//  - drop leading fwd (the pointer starts at the end of memory);
//  - reduce runs of Vadd1 mod 3 and runs of Uadd1 mod 4;
//  - cancel adjacent fwd/back pairs where no memory length can make either
//    of them saturate.
Program simplify(const Program& program);

// Probabilistic behavioural equivalence: both programs receive the same
// `trials` random observation streams of length `horizon` and must emit the
// same action at every step.
bool equivalent(const Program& a, const Program& b, int trials, int horizon, Rng& rng);

}  // namespace envdiff::apl
