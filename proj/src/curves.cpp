#include "envdiff/curves.hpp"

#include <algorithm>
#include <bit>
#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "envdiff/parallel.hpp"

namespace envdiff::curves {

namespace {

// Fenwick tree over integer weights supporting removal and weighted lookup.
class WeightTree {
 public:
  explicit WeightTree(const std::vector<std::uint64_t>& w) : tree_(w.size() + 1, 0), weights_(w) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] += w[i];
      total_ += w[i];
    }
    top_ = std::bit_floor(std::max<std::size_t>(w.size(), 1));
  }

  std::uint64_t total() const { return total_; }

  // Index whose cumulative weight interval contains u, u < total().
  std::size_t find(std::uint64_t u) const {
    std::size_t pos = 0;
    for (std::size_t step = top_; step > 0; step >>= 1) {
      std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= u) {
        pos = next;
        u -= tree_[next];
      }
    }
    return pos;  // zero-based index
  }

  void remove(std::size_t i) {
    std::uint64_t w = weights_[i];
    weights_[i] = 0;
    total_ -= w;
    for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] -= w;
  }

 private:
  std::vector<std::uint64_t> tree_;
  std::vector<std::uint64_t> weights_;
  std::uint64_t total_ = 0;
  std::size_t top_ = 1;
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::uint64_t WeightedPopulation::total_weight() const {
  std::uint64_t t = 0;
  for (auto w : weights) t += w;
  return t;
}

Rational WeightedPopulation::probability(std::size_t i) const {
  return Rational(static_cast<std::int64_t>(weights.at(i)), static_cast<std::int64_t>(total_weight()));
}

WeightedPopulation weights_from_k(std::vector<Rational> rewards, std::vector<int> ks) {
  if (rewards.empty()) throw std::invalid_argument("weights: empty population");
  if (rewards.size() != ks.size()) throw std::invalid_argument("weights: reward/k size mismatch");
  const auto [lo, hi] = std::minmax_element(ks.begin(), ks.end());
  if (*lo < 0) throw std::invalid_argument("weights: negative complexity");
  if (*hi - *lo > 40) throw std::invalid_argument("weights: complexity range too wide for exact weights");
  WeightedPopulation pop;
  pop.rewards = std::move(rewards);
  pop.weights.reserve(ks.size());
  for (int k : ks) pop.weights.push_back(std::uint64_t{1} << (*hi - k));
  pop.ks = std::move(ks);
  return pop;
}

WeightedPopulation weights(const experiment::Records& records) {
  std::vector<Rational> rewards;
  std::vector<int> ks;
  for (const auto& r : records) {
    if (!r.programmed()) continue;
    rewards.push_back(r.reward);
    ks.push_back(*r.k);
  }
  if (rewards.empty()) throw std::invalid_argument("weights: no programmed records");
  return weights_from_k(std::move(rewards), std::move(ks));
}

std::vector<std::size_t> sample_wor(const WeightedPopulation& pop, std::size_t n, Rng& rng) {
  if (n > pop.size()) throw std::invalid_argument("sample_wor: sample larger than population");
  WeightTree tree(pop.weights);
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (tree.total() == 0) throw std::invalid_argument("sample_wor: zero remaining weight");
    std::size_t j = tree.find(rng.below(tree.total()));
    out.push_back(j);
    tree.remove(j);
  }
  return out;
}

Anchors anchors_of(const WeightedPopulation& pop) {
  if (pop.size() == 0) throw std::invalid_argument("anchors: empty population");
  Anchors a{pop.rewards[0], Rational(0), pop.rewards[0]};
  Rational sum(0);
  for (const auto& r : pop.rewards) {
    a.rmax = std::max(a.rmax, r);
    a.rmin = std::min(a.rmin, r);
    sum += r;
  }
  a.rmean = sum / Rational(static_cast<std::int64_t>(pop.size()));
  return a;
}

Rational threshold_pos(const Rational& gamma, const Anchors& a) {
  return (Rational(1) - gamma) * (a.rmax - a.rmean) + a.rmean;
}

Rational threshold_neg(const Rational& gamma, const Anchors& a) { return gamma * (a.rmean - a.rmin) + a.rmin; }

std::string_view to_string(NEstimator e) { return e == NEstimator::Median ? "median" : "mean"; }

NEstimator parse_n_estimator(std::string_view name) {
  const auto n = lower(name);
  if (n == "median") return NEstimator::Median;
  if (n == "mean") return NEstimator::Mean;
  throw std::invalid_argument("unknown N estimator '" + std::string(name) + "' (expected median or mean)");
}

namespace {

double reduce_sizes(std::vector<std::uint32_t> sizes, NEstimator estimator) {
  if (estimator == NEstimator::Mean) {
    double sum = 0;
    for (auto s : sizes) sum += s;
    return sum / static_cast<double>(sizes.size());
  }
  // Smallest N with #{size <= N} >= reps/2.
  std::sort(sizes.begin(), sizes.end());
  std::size_t need = (sizes.size() + 1) / 2;
  return sizes[need - 1];
}

}  // namespace

NEstimate estimate_N(const WeightedPopulation& pop, const Rational& gamma, int reps, std::uint64_t seed,
                     std::uint64_t stream_index, NEstimator estimator) {
  if (reps < 1) throw std::invalid_argument("estimate_N: reps must be >= 1");
  if (pop.size() == 0) throw std::invalid_argument("estimate_N: empty population");
  if (gamma < Rational(0) || gamma > Rational(1)) throw std::invalid_argument("estimate_N: gamma outside [0, 1]");
  const Anchors a = anchors_of(pop);
  const Rational thr_pos = threshold_pos(gamma, a);
  const Rational thr_neg = threshold_neg(gamma, a);
  // Rewards that meet each threshold, precomputed so the inner loop avoids
  // rational comparisons.
  std::vector<std::uint8_t> meets_pos(pop.size()), meets_neg(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    meets_pos[i] = pop.rewards[i] >= thr_pos;
    meets_neg[i] = pop.rewards[i] <= thr_neg;
  }

  const std::uint64_t gamma_seed = derive_seed(seed, "curve", stream_index);
  NEstimate est;
  est.sizes_pos.reserve(static_cast<std::size_t>(reps));
  est.sizes_neg.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    Rng rng = stream_rng(gamma_seed, "rep", static_cast<std::uint64_t>(r));
    WeightTree tree(pop.weights);
    bool hit_pos = false, hit_neg = false;  // running max/min has met its threshold
    std::uint32_t falses_pos = 0, falses_neg = 0;
    int run_pos = 0, run_neg = 0;
    for (std::size_t n = 1; n <= pop.size(); ++n) {
      std::size_t j = tree.find(rng.below(tree.total()));
      tree.remove(j);
      hit_pos = hit_pos || meets_pos[j];
      hit_neg = hit_neg || meets_neg[j];
      if (hit_pos) ++run_pos; else ++falses_pos;
      if (hit_neg) ++run_neg; else ++falses_neg;
      // The rest of B is filled with trues once it has stabilised.
      if (run_pos >= kStableRun && run_neg >= kStableRun) break;
    }
    est.sizes_pos.push_back(falses_pos + 1);
    est.sizes_neg.push_back(falses_neg + 1);
  }
  est.n_pos = reduce_sizes(est.sizes_pos, estimator);
  est.n_neg = reduce_sizes(est.sizes_neg, estimator);
  return est;
}

ExactQ brute_force_q(const WeightedPopulation& pop, const Rational& gamma) {
  using boost::multiprecision::cpp_rational;
  const std::size_t n = pop.size();
  if (n == 0) throw std::invalid_argument("brute_force_q: empty population");
  if (n > kBruteForceLimit) {
    throw std::invalid_argument("brute_force_q: population of " + std::to_string(n) + " exceeds limit of " +
                                std::to_string(kBruteForceLimit));
  }
  const Anchors a = anchors_of(pop);
  const Rational thr_pos = threshold_pos(gamma, a);
  const Rational thr_neg = threshold_neg(gamma, a);

  const std::size_t subsets = std::size_t{1} << n;
  std::vector<std::uint64_t> subset_weight(subsets, 0);
  for (std::size_t s = 1; s < subsets; ++s) {
    std::size_t low = static_cast<std::size_t>(std::countr_zero(s));
    subset_weight[s] = subset_weight[s & (s - 1)] + pop.weights[low];
  }
  const std::uint64_t total = subset_weight[subsets - 1];

  // prob[S] = Pr(the first |S| draws are exactly the set S).
  std::vector<cpp_rational> prob(subsets);
  prob[0] = 1;
  for (std::size_t s = 0; s < subsets; ++s) {
    if (prob[s] == 0) continue;
    const std::uint64_t remaining = total - subset_weight[s];
    if (remaining == 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (s & (std::size_t{1} << j)) continue;
      prob[s | (std::size_t{1} << j)] += prob[s] * cpp_rational(pop.weights[j], remaining);
    }
  }

  std::vector<cpp_rational> q_pos(n + 1), q_neg(n + 1);
  for (std::size_t s = 1; s < subsets; ++s) {
    bool pos = false, neg = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(s & (std::size_t{1} << j))) continue;
      pos = pos || pop.rewards[j] >= thr_pos;
      neg = neg || pop.rewards[j] <= thr_neg;
    }
    const auto size = static_cast<std::size_t>(std::popcount(s));
    if (pos) q_pos[size] += prob[s];
    if (neg) q_neg[size] += prob[s];
  }

  ExactQ out;
  out.q_pos.assign(n + 1, 0.0);
  out.q_neg.assign(n + 1, 0.0);
  const cpp_rational half(1, 2);
  for (std::size_t m = 1; m <= n; ++m) {
    out.q_pos[m] = q_pos[m].convert_to<double>();
    out.q_neg[m] = q_neg[m].convert_to<double>();
    if (out.n_pos == 0 && q_pos[m] >= half) out.n_pos = static_cast<int>(m);
    if (out.n_neg == 0 && q_neg[m] >= half) out.n_neg = static_cast<int>(m);
  }
  return out;
}

std::pair<int, int> brute_force_N(const WeightedPopulation& pop, const Rational& gamma) {
  auto q = brute_force_q(pop, gamma);
  return {q.n_pos, q.n_neg};
}

CurveEstimate estimate_curve(const WeightedPopulation& pop, int grid, int reps, std::uint64_t seed, int threads,
                             NEstimator estimator) {
  if (grid < 2) throw std::invalid_argument("estimate_curve: grid needs at least 2 points");
  CurveEstimate est;
  est.anchors = anchors_of(pop);
  est.reps = reps;
  est.rng_seed = seed;
  est.estimator = estimator;
  const auto g = static_cast<std::size_t>(grid);
  est.gammas.reserve(g);
  for (std::size_t i = 0; i < g; ++i) {
    est.gammas.emplace_back(static_cast<std::int64_t>(i), static_cast<std::int64_t>(g - 1));
  }
  est.n_pos.assign(g, 1);
  est.n_neg.assign(g, 1);
  parallel_for(g, threads, [&](std::size_t i) {
    auto n = estimate_N(pop, est.gammas[i], reps, seed, i, estimator);
    est.n_pos[i] = n.n_pos;
    est.n_neg[i] = n.n_neg;
  });
  est.raw_n_pos_at_one = est.n_pos.back();
  est.raw_n_neg_at_one = est.n_neg.back();
  est.n_pos.back() = 1;
  est.n_neg.back() = 1;
  est.d_pos.resize(g);
  est.d_neg.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    est.d_pos[i] = std::log2(std::max(1.0, est.n_pos[i]));
    est.d_neg[i] = std::log2(std::max(1.0, est.n_neg[i]));
  }
  return est;
}

std::pair<double, double> difficulty(const CurveEstimate& est, double gamma) {
  for (std::size_t i = 0; i < est.gammas.size(); ++i) {
    if (std::abs(est.gammas[i].to_double() - gamma) < 1e-9) return {est.d_pos[i], est.d_neg[i]};
  }
  throw std::invalid_argument("difficulty: gamma " + std::to_string(gamma) + " is not on the grid");
}

std::vector<double> isotonic_nonincreasing(const std::vector<double>& d) {
  std::vector<double> out(d);
  for (std::size_t i = out.size(); i-- > 1;) out[i - 1] = std::max(out[i - 1], out[i]);
  return out;
}

namespace {

int count_raised(const std::vector<double>& before, const std::vector<double>& after) {
  int n = 0;
  for (std::size_t i = 0; i < before.size(); ++i) n += after[i] != before[i];
  return n;
}

int count_flat(const std::vector<double>& d) {
  int n = 0;
  for (std::size_t i = 1; i < d.size(); ++i) n += d[i] == d[i - 1];
  return n;
}

// Smallest grid index whose difficulty is <= level; the last index (gamma = 1,
// difficulty 0) always qualifies for level >= 0.
std::size_t invert(const std::vector<double>& d, double level) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] <= level + 1e-12) return i;
  }
  return d.size() - 1;
}

}  // namespace

ResponseCurve response_curve(const CurveEstimate& est, double theta_step, double theta_max) {
  if (est.gammas.empty()) throw std::invalid_argument("response_curve: empty estimate");
  if (!(theta_step > 0)) throw std::invalid_argument("response_curve: theta_step must be positive");
  ResponseCurve curve;
  curve.d_pos_iso = isotonic_nonincreasing(est.d_pos);
  curve.d_neg_iso = isotonic_nonincreasing(est.d_neg);
  curve.pos_isotonic_adjustments = count_raised(est.d_pos, curve.d_pos_iso);
  curve.neg_isotonic_adjustments = count_raised(est.d_neg, curve.d_neg_iso);
  curve.pos_flat_points = count_flat(curve.d_pos_iso);
  curve.neg_flat_points = count_flat(curve.d_neg_iso);

  if (theta_max < 0) theta_max = std::ceil(std::max(curve.d_pos_iso.front(), curve.d_neg_iso.front())) + 1.0;
  const auto steps = static_cast<long>(std::llround(theta_max / theta_step));
  const Anchors& a = est.anchors;
  const Rational one(1);
  const std::size_t last = est.gammas.size() - 1;

  for (long j = -steps; j <= steps; ++j) {
    ResponsePoint p;
    p.theta = static_cast<double>(j) * theta_step;
    if (j >= 0) {
      // Both branches meet at theta = 0, the population mean (gamma = 1).
      std::size_t idx = j == 0 ? last : invert(curve.d_pos_iso, p.theta);
      p.gamma = est.gammas[idx];
      p.raw = (one - p.gamma) * (a.rmax - a.rmean) + a.rmean;
      p.normalized = a.rmax > a.rmean ? (one - p.gamma).to_double() : 0.0;
      p.positive_branch = true;
    } else {
      std::size_t idx = invert(curve.d_neg_iso, -p.theta);
      p.gamma = est.gammas[idx];
      p.raw = p.gamma * (a.rmean - a.rmin) + a.rmin;
      p.normalized = a.rmean > a.rmin ? (p.gamma - one).to_double() : 0.0;
      p.positive_branch = false;
    }
    curve.points.push_back(p);
  }
  return curve;
}

void write_curve_csv(std::ostream& out, const CurveEstimate& est) {
  out << "gamma,N_pos,D_pos,N_neg,D_neg\n";
  char buf[160];
  for (std::size_t i = 0; i < est.gammas.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.6f,%.4f,%.6f\n", est.gammas[i].to_double(), est.n_pos[i],
                  est.d_pos[i], est.n_neg[i], est.d_neg[i]);
    out << buf;
  }
}

void write_response_csv(std::ostream& out, const ResponseCurve& curve) {
  out << "theta,R_raw,R_normalized,branch\n";
  char buf[160];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.4f,%.10f,%.6f,%s\n", p.theta, p.raw.to_double(), p.normalized,
                  p.positive_branch ? "pos" : "neg");
    out << buf;
  }
}

}  // namespace envdiff::curves
