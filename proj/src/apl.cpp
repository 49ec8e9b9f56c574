#include "envdiff/apl.hpp"

#include <algorithm>

namespace envdiff::apl {

ParseError::ParseError(std::size_t position, char ch)
    : std::runtime_error("program: invalid instruction '" + std::string(1, ch) + "' at position " +
                         std::to_string(position)),
      position_(position) {}

std::string encode(const Program& program) {
  std::string s;
  s.reserve(program.size());
  for (auto ins : program) s.push_back(static_cast<char>('0' + static_cast<int>(ins)));
  return s;
}

Program decode(std::string_view digits) {
  Program p;
  p.reserve(digits.size());
  for (std::size_t i = 0; i < digits.size(); ++i) {
    char ch = digits[i];
    if (ch < '0' || ch > '5') throw ParseError(i + 1, ch);
    p.push_back(static_cast<Instruction>(ch - '0'));
  }
  return p;
}

saeca::Action decide_action(const Program& program, PolicyMemory& memory, const saeca::Observation& obs) {
  memory.append(obs);
  const std::size_t size = memory.size();
  std::size_t b = size;
  int v = 0;
  int u = 0;
  for (auto ins : program) {
    switch (ins) {
      case Instruction::back: b = std::max<std::size_t>(b - 1, 1); break;
      case Instruction::fwd: b = std::min(b + 1, size); break;
      case Instruction::Vaddm: v = (v + memory.at(b)) % 3; break;
      case Instruction::Vadd1: v = (v + 1) % 3; break;
      case Instruction::Uaddm: u = (u + memory.at(b)) % 4; break;
      case Instruction::Uadd1: u = (u + 1) % 4; break;
    }
  }
  return saeca::Action{static_cast<saeca::Move>(v), static_cast<saeca::Upshot>(u)};
}

Program random_program(Rng& rng, int len_min, int len_max) {
  if (len_min < 1 || len_max < len_min) throw std::invalid_argument("random_program: need 1 <= len_min <= len_max");
  const auto len = static_cast<std::size_t>(rng.between(len_min, len_max));
  Program p(len);
  for (auto& ins : p) ins = static_cast<Instruction>(rng.below(kInstructionCount));
  return p;
}

namespace {

bool drop_trailing_moves(Program& p) {
  auto last = std::find_if(p.rbegin(), p.rend(), is_accumulator);
  std::size_t keep = static_cast<std::size_t>(p.rend() - last);
  if (keep == p.size()) return false;
  p.resize(keep);
  return true;
}

bool drop_leading_fwd(Program& p) {
  auto first = std::find_if(p.begin(), p.end(), [](Instruction i) { return i != Instruction::fwd; });
  if (first == p.begin()) return false;
  p.erase(p.begin(), first);
  return true;
}

bool reduce_increment_runs(Program& p) {
  Program out;
  out.reserve(p.size());
  bool changed = false;
  for (std::size_t i = 0; i < p.size();) {
    Instruction ins = p[i];
    std::size_t j = i;
    while (j < p.size() && p[j] == ins) ++j;
    std::size_t run = j - i;
    std::size_t kept = run;
    if (ins == Instruction::Vadd1) kept = run % 3;
    if (ins == Instruction::Uadd1) kept = run % 4;
    changed |= kept != run;
    out.insert(out.end(), kept, ins);
    i = j;
  }
  if (changed) p = std::move(out);
  return changed;
}

// True when the move pair at (i, i+1) leaves the pointer where it was for
// every memory length the interpreter can see. Lengths beyond size+2 cannot
// reach the lower bound within the program, so they behave like size+2.
bool move_pair_is_identity(const Program& p, std::size_t i) {
  const std::size_t max_len = p.size() + 2;
  for (std::size_t len = 3; len <= max_len; ++len) {
    std::size_t b = len;
    for (std::size_t j = 0; j < i; ++j) {
      if (p[j] == Instruction::back) b = std::max<std::size_t>(b - 1, 1);
      if (p[j] == Instruction::fwd) b = std::min(b + 1, len);
    }
    // fwd then back: fwd must not saturate at the end.
    if (p[i] == Instruction::fwd && b == len) return false;
    // back then fwd: back must not saturate at the start.
    if (p[i] == Instruction::back && b == 1) return false;
  }
  return true;
}

bool cancel_move_pairs(Program& p) {
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    bool pair = (p[i] == Instruction::fwd && p[i + 1] == Instruction::back) ||
                (p[i] == Instruction::back && p[i + 1] == Instruction::fwd);
    if (pair && move_pair_is_identity(p, i)) {
      p.erase(p.begin() + static_cast<std::ptrdiff_t>(i), p.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      return true;
    }
  }
  return false;
}

}  // namespace

Program simplify(const Program& program) {
  Program p = program;
  for (bool changed = true; changed;) {
    changed = false;
    changed |= drop_trailing_moves(p);
    changed |= drop_leading_fwd(p);
    changed |= reduce_increment_runs(p);
    changed |= cancel_move_pairs(p);
  }
  return p;
}

bool equivalent(const Program& a, const Program& b, int trials, int horizon, Rng& rng) {
  if (trials < 1 || horizon < 1) throw std::invalid_argument("equivalent: trials and horizon must be >= 1");
  for (int t = 0; t < trials; ++t) {
    PolicyMemory ma;
    PolicyMemory mb;
    for (int s = 0; s < horizon; ++s) {
      saeca::Observation obs{rng.bit(), rng.bit(), rng.bit()};
      if (decide_action(a, ma, obs) != decide_action(b, mb, obs)) return false;
    }
  }
  return true;
}

}  // namespace envdiff::apl
