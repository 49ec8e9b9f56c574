#include "envdiff/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace envdiff::analysis {

using experiment::Records;

SliceSet slice(const Records& records) {
  if (records.empty()) throw std::invalid_argument("slice: empty dataset");
  SliceSet set;
  for (const auto& r : records) {
    Slice& target = r.programmed() ? set.slices[*r.k] : set.rnd;
    target.rewards.push_back(r.reward);
    target.programs.push_back(r.simplified);
  }
  return set;
}

std::map<int, Slice> accumulate(const SliceSet& set) {
  std::map<int, Slice> out;
  if (set.slices.empty()) return out;
  const int kmin = set.slices.begin()->first;
  const int kmax = set.slices.rbegin()->first;
  Slice running;
  for (int k = kmin; k <= kmax; ++k) {
    if (auto it = set.slices.find(k); it != set.slices.end()) {
      running.rewards.insert(running.rewards.end(), it->second.rewards.begin(), it->second.rewards.end());
      running.programs.insert(running.programs.end(), it->second.programs.begin(), it->second.programs.end());
    }
    out[k] = running;
  }
  return out;
}

namespace {

Rational exact_mean(const std::vector<Rational>& v) {
  Rational sum(0);
  for (const auto& x : v) sum += x;
  return sum / Rational(static_cast<std::int64_t>(v.size()));
}

double quantile7(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[idx[m]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::size_t distinct_count(const std::vector<std::string>& programs) {
  return std::set<std::string>(programs.begin(), programs.end()).size();
}

}  // namespace

std::vector<Envelope> envelopes(const std::map<int, Slice>& accumulated) {
  std::vector<Envelope> out;
  for (const auto& [k, s] : accumulated) {
    if (s.rewards.empty()) continue;
    Envelope e;
    e.k = k;
    e.max = *std::max_element(s.rewards.begin(), s.rewards.end());
    e.min = *std::min_element(s.rewards.begin(), s.rewards.end());
    e.mean = exact_mean(s.rewards);
    out.push_back(e);
  }
  return out;
}

BoxStats box_stats(const std::vector<Rational>& values) {
  if (values.empty()) throw std::invalid_argument("box_stats: empty slice");
  std::vector<double> v;
  v.reserve(values.size());
  for (const auto& r : values) v.push_back(r.to_double());
  std::sort(v.begin(), v.end());
  BoxStats b;
  b.n = v.size();
  b.min = v.front();
  b.max = v.back();
  b.q1 = quantile7(v, 0.25);
  b.median = quantile7(v, 0.5);
  b.q3 = quantile7(v, 0.75);
  b.mean = exact_mean(values).to_double();
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_lo = *std::find_if(v.begin(), v.end(), [&](double x) { return x >= lo_fence; });
  b.whisker_hi = *std::find_if(v.rbegin(), v.rend(), [&](double x) { return x <= hi_fence; });
  return b;
}

std::vector<SliceSummaryRow> summarize_slices(const SliceSet& set) {
  std::vector<SliceSummaryRow> rows;
  for (const auto& [k, s] : set.slices) {
    rows.push_back({std::to_string(k), distinct_count(s.programs), box_stats(s.rewards)});
  }
  if (!set.rnd.rewards.empty()) rows.push_back({"rnd", set.rnd.rewards.size(), box_stats(set.rnd.rewards)});
  return rows;
}

std::vector<SliceSummaryRow> summarize_accumulated(const std::map<int, Slice>& accumulated) {
  std::vector<SliceSummaryRow> rows;
  for (const auto& [k, s] : accumulated) {
    if (s.rewards.empty()) continue;
    rows.push_back({std::to_string(k), distinct_count(s.programs), box_stats(s.rewards)});
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SliceSummaryRow>& rows) {
  out << "k,n,n_unique,min,q1,median,q3,max,mean,whisker_lo,whisker_hi\n";
  char buf[320];
  for (const auto& r : rows) {
    const auto& s = r.stats;
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.10f,%.10f,%.10f,%.10f,%.10f,%.10f,%.10f,%.10f\n", r.label.c_str(),
                  s.n, r.n_unique, s.min, s.q1, s.median, s.q3, s.max, s.mean, s.whisker_lo, s.whisker_hi);
    out << buf;
  }
}

std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
  if (xs.size() < 2) return std::nullopt;
  const auto rx = average_ranks(xs), ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Indicators indicators(const Records& records, double value_frac, double mass_frac) {
  Indicators ind;
  std::vector<Rational> rewards, rnd;
  std::vector<double> ks, rs;
  std::vector<std::string> programs;
  for (const auto& r : records) {
    if (r.programmed()) {
      rewards.push_back(r.reward);
      ks.push_back(*r.k);
      rs.push_back(r.reward.to_double());
      programs.push_back(r.simplified);
    } else {
      rnd.push_back(r.reward);
    }
  }
  if (rewards.empty()) throw std::invalid_argument("indicators: no programmed records");
  ind.n_programmed = rewards.size();
  ind.n_random_walk = rnd.size();
  ind.n_distinct = distinct_count(programs);
  ind.rmax = *std::max_element(rewards.begin(), rewards.end());
  ind.rmin = *std::min_element(rewards.begin(), rewards.end());
  ind.rmean = exact_mean(rewards);
  if (!rnd.empty()) ind.random_walk_mean = exact_mean(rnd);
  ind.kmin = static_cast<int>(*std::min_element(ks.begin(), ks.end()));
  ind.kmax = static_cast<int>(*std::max_element(ks.begin(), ks.end()));
  ind.hpolicy = ind.kmax;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (rewards[i] == ind.rmax) ind.hpolicy = std::min(ind.hpolicy, static_cast<int>(ks[i]));
  }
  ind.cor_all = spearman(ks, rs);

  const auto acc = accumulate(slice(records));
  std::vector<double> is, maxes;
  for (const auto& e : envelopes(acc)) {
    if (e.k < 1) continue;
    is.push_back(e.k);
    maxes.push_back(e.max.to_double());
  }
  ind.cor_slice = spearman(is, maxes);

  const double n = static_cast<double>(rs.size());
  const double mean = ind.rmean.to_double();
  double m2 = 0, m3 = 0, m4 = 0;
  for (double x : rs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  ind.moments.mean = mean;
  ind.moments.variance = m2;
  ind.moments.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
  ind.moments.kurtosis = m2 > 0 ? m4 / (m2 * m2) : 0.0;
  ind.quantile_value_frac = value_frac;
  ind.quantile_mass_frac = mass_frac;
  ind.quantile_k = quantile_difficulty(records, value_frac, mass_frac);
  return ind;
}

void write_indicators_json(std::ostream& out, const Indicators& ind) {
  nlohmann::ordered_json j;
  auto exact = [](const Rational& r) {
    return nlohmann::ordered_json{{"value", r.to_double()}, {"exact", r.to_string()}};
  };
  auto optional_double = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["Rmax"] = exact(ind.rmax);
  j["Rmin"] = exact(ind.rmin);
  j["Rmean"] = exact(ind.rmean);
  j["Hpolicy"] = ind.hpolicy;
  j["cor_all"] = optional_double(ind.cor_all);
  j["cor_slice"] = optional_double(ind.cor_slice);
  j["random_walk_mean"] = ind.random_walk_mean ? exact(*ind.random_walk_mean) : nlohmann::ordered_json(nullptr);
  j["n_programmed"] = ind.n_programmed;
  j["n_distinct"] = ind.n_distinct;
  j["n_random_walk"] = ind.n_random_walk;
  j["kmin"] = ind.kmin;
  j["kmax"] = ind.kmax;
  j["moments"] = {{"mean", ind.moments.mean},
                  {"variance", ind.moments.variance},
                  {"skewness", ind.moments.skewness},
                  {"kurtosis", ind.moments.kurtosis}};
  j["quantile_difficulty"] = {{"value_frac", ind.quantile_value_frac},
                              {"mass_frac", ind.quantile_mass_frac},
                              {"k", ind.quantile_k ? nlohmann::ordered_json(*ind.quantile_k) : nullptr}};
  out << j.dump(2) << "\n";
}

std::optional<int> quantile_difficulty(const Records& records, double value_frac, double mass_frac) {
  if (!(value_frac >= 0 && value_frac <= 1)) throw std::invalid_argument("quantile_difficulty: value_frac outside [0, 1]");
  if (!(mass_frac > 0 && mass_frac < 1)) throw std::invalid_argument("quantile_difficulty: mass_frac outside (0, 1)");
  const auto set = slice(records);
  const auto acc = accumulate(set);
  if (acc.empty()) return std::nullopt;
  const Rational rmax = envelopes(acc).back().max;
  const double threshold = value_frac * rmax.to_double();
  for (const auto& [k, s] : acc) {
    if (s.rewards.empty()) continue;
    std::size_t above = 0;
    for (const auto& r : s.rewards) above += r.to_double() >= threshold;
    if (static_cast<double>(above) >= mass_frac * static_cast<double>(s.rewards.size())) return k;
  }
  return std::nullopt;
}

Histogram histogram(const Records& records, int bin_count) {
  if (bin_count < 1) throw std::invalid_argument("histogram: bin_count must be >= 1");
  Histogram h;
  const auto bins = static_cast<std::size_t>(bin_count);
  h.programmed.assign(bins, 0);
  h.random_walk.assign(bins, 0);
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(static_cast<double>(i) / static_cast<double>(bins));
  for (const auto& r : records) {
    const double x = r.reward.to_double();
    if (x < 0 || x > 1) throw std::invalid_argument("histogram: reward outside [0, 1]");
    const auto bin = std::min(bins - 1, static_cast<std::size_t>(x * static_cast<double>(bins)));
    ++(r.programmed() ? h.programmed : h.random_walk)[bin];
  }
  return h;
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_lo,bin_hi,programmed,random_walk\n";
  char buf[128];
  for (std::size_t i = 0; i < h.programmed.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%zu,%zu\n", h.edges[i], h.edges[i + 1], h.programmed[i],
                  h.random_walk[i]);
    out << buf;
  }
}

std::map<int, UniqueCount> unique_counts_by_k(const Records& records) {
  std::map<int, std::set<std::string>> seen;
  std::map<int, UniqueCount> out;
  for (const auto& r : records) {
    if (!r.programmed()) continue;
    ++out[*r.k].generated;
    seen[*r.k].insert(r.simplified);
  }
  for (auto& [k, c] : out) c.distinct = seen[k].size();
  return out;
}

double logistic_irf(double theta, double a, double b, double c) {
  if (!(c >= 0 && c < 1)) throw std::invalid_argument("logistic_irf: c outside [0, 1)");
  return c + (1 - c) / (1 + std::exp(-a * (theta - b)));
}

double linear_irf(double theta, double z, double lambda) { return z + lambda * theta; }

}  // namespace envdiff::analysis
