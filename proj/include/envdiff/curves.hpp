#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "envdiff/experiment.hpp"
#include "envdiff/rational.hpp"
#include "envdiff/rng.hpp"

namespace envdiff::curves {

// Policies with integer weights. The sampling probability of i is
// weight[i] / total_weight(); for complexity-derived populations weight[i] is
// 2^(kmax - k_i), i.e. 2^-k_i up to the common normalisation.
struct WeightedPopulation {
  std::vector<Rational> rewards;
  std::vector<std::uint64_t> weights;
  std::vector<int> ks;  // complexities when the weights came from them, else empty

  std::size_t size() const { return rewards.size(); }
  std::uint64_t total_weight() const;
  Rational probability(std::size_t i) const;
};

// 2^-k / sum 2^-k' over the programmed records. Throws on an empty set.
WeightedPopulation weights(const experiment::Records& records);
WeightedPopulation weights_from_k(std::vector<Rational> rewards, std::vector<int> ks);

// Successive weighted draws without replacement, renormalising after each
// removal. Returns indices in draw order. Throws if n > |pop|.
std::vector<std::size_t> sample_wor(const WeightedPopulation& pop, std::size_t n, Rng& rng);

struct Anchors {
  Rational rmax;
  Rational rmean;  // unweighted mean over the population
  Rational rmin;
};

Anchors anchors_of(const WeightedPopulation& pop);

// (1-gamma)(Rmax - Rmean) + Rmean
Rational threshold_pos(const Rational& gamma, const Anchors& a);
// gamma(Rmean - Rmin) + Rmin
Rational threshold_neg(const Rational& gamma, const Anchors& a);

// How per-repetition first-success sizes are reduced to one N.
//  Median: min{N : fraction of repetitions already successful at N >= 1/2},
//          the plug-in estimate of the min-N definition.
//  Mean:   arithmetic mean of the per-repetition sizes.
enum class NEstimator { Median, Mean };
std::string_view to_string(NEstimator e);
NEstimator parse_n_estimator(std::string_view name);

struct NEstimate {
  double n_pos = 1;
  double n_neg = 1;
  // Per-repetition first-success sizes (falses + 1), in repetition order.
  std::vector<std::uint32_t> sizes_pos;
  std::vector<std::uint32_t> sizes_neg;
};

inline constexpr int kStableRun = 10;

// Grows one weighted sample per repetition and records, for each N, whether
// the running max (min) has reached threshold_pos (threshold_neg). A
// repetition stops once both Boolean sequences have kStableRun trues in a
// row. Repetition r draws from
// stream_rng(derive_seed(seed, "curve", stream_index), "rep", r).
NEstimate estimate_N(const WeightedPopulation& pop, const Rational& gamma, int reps, std::uint64_t seed,
                     std::uint64_t stream_index = 0, NEstimator estimator = NEstimator::Median);

// Exact q_pos(N), q_neg(N) for N = 1..|pop| (index 0 unused, equal to 0),
// by recursion over subsets. |pop| <= 12.
struct ExactQ {
  std::vector<double> q_pos;
  std::vector<double> q_neg;
  int n_pos = 0;  // min{N : q_pos(N) >= 1/2}, decided in exact arithmetic
  int n_neg = 0;
};

inline constexpr std::size_t kBruteForceLimit = 12;

ExactQ brute_force_q(const WeightedPopulation& pop, const Rational& gamma);
std::pair<int, int> brute_force_N(const WeightedPopulation& pop, const Rational& gamma);

struct CurveEstimate {
  std::vector<Rational> gammas;  // grid points i/(grid-1)
  std::vector<double> n_pos, n_neg;
  std::vector<double> d_pos, d_neg;  // log2 of the N estimates, before isotonic adjustment
  Anchors anchors;
  int reps = 0;
  std::uint64_t rng_seed = 0;
  NEstimator estimator = NEstimator::Median;
  // Raw estimates at gamma = 1 before the N = 1 anchor is applied.
  double raw_n_pos_at_one = 1;
  double raw_n_neg_at_one = 1;
};

// Full tolerance grid. At gamma = 1 the threshold is Rmean itself; N is
// pinned to 1 there (difficulty 0 is the reference level of the ability
// scale) and the measured value is kept in raw_n_*_at_one.
CurveEstimate estimate_curve(const WeightedPopulation& pop, int grid = 101, int reps = 400,
                             std::uint64_t seed = 0, int threads = 1, NEstimator estimator = NEstimator::Median);

// (D_pos, D_neg) at a grid point. Throws if gamma is not on the grid.
std::pair<double, double> difficulty(const CurveEstimate& est, double gamma);

// D made non-increasing in gamma: running maximum while gamma decreases.
std::vector<double> isotonic_nonincreasing(const std::vector<double>& d);

struct ResponsePoint {
  double theta = 0;
  Rational gamma;  // tolerance selected by the inversion
  Rational raw;    // response in reward units
  double normalized = 0;  // Rmax -> 1, Rmean -> 0, Rmin -> -1
  bool positive_branch = true;
};

struct ResponseCurve {
  std::vector<ResponsePoint> points;
  std::vector<double> d_pos_iso, d_neg_iso;
  int pos_isotonic_adjustments = 0;  // grid points raised by the isotonic step
  int neg_isotonic_adjustments = 0;
  int pos_flat_points = 0;  // grid points sharing D with a smaller gamma
  int neg_flat_points = 0;
};

// Inverts the tabulated difficulties: for theta >= 0 picks the smallest
// gamma whose isotonic D_pos is <= theta; for theta < 0 the same on D_neg
// with -theta. Theta runs over multiples of theta_step up to theta_max
// (default: one unit past the largest difficulty).
ResponseCurve response_curve(const CurveEstimate& est, double theta_step = 0.1, double theta_max = -1);

// curve.csv: gamma,N_pos,D_pos,N_neg,D_neg
void write_curve_csv(std::ostream& out, const CurveEstimate& est);
// response.csv: theta,R_raw,R_normalized,branch
void write_response_csv(std::ostream& out, const ResponseCurve& curve);

}  // namespace envdiff::curves
