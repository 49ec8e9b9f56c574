#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "envdiff/experiment.hpp"
#include "envdiff/rational.hpp"

namespace envdiff::analysis {

struct Slice {
  std::vector<Rational> rewards;
  std::vector<std::string> programs;  // simplified encodings, parallel to rewards
};

// Programmed records by complexity, plus the random-walk ("rnd") group.
struct SliceSet {
  std::map<int, Slice> slices;
  Slice rnd;
};

// Throws std::invalid_argument on an empty record set.
SliceSet slice(const experiment::Records& records);

// R[<=k] for every integer k from the smallest to the largest observed
// complexity (gaps repeat the previous union).
std::map<int, Slice> accumulate(const SliceSet& set);

struct Envelope {
  int k = 0;
  Rational max, min, mean;
};

std::vector<Envelope> envelopes(const std::map<int, Slice>& accumulated);

struct BoxStats {
  std::size_t n = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
  double whisker_lo = 0, whisker_hi = 0;  // most extreme points within 1.5 IQR of the box
};

// Quartiles by linear interpolation between order statistics.
BoxStats box_stats(const std::vector<Rational>& values);

struct SliceSummaryRow {
  std::string label;  // k value, or "rnd"
  std::size_t n_unique = 0;
  BoxStats stats;
};

// One row per exact slice followed by the rnd row when present.
std::vector<SliceSummaryRow> summarize_slices(const SliceSet& set);
std::vector<SliceSummaryRow> summarize_accumulated(const std::map<int, Slice>& accumulated);
// k,n,n_unique,min,q1,median,q3,max,mean,whisker_lo,whisker_hi
void write_summary_csv(std::ostream& out, const std::vector<SliceSummaryRow>& rows);

struct Moments {
  double mean = 0, variance = 0, skewness = 0, kurtosis = 0;
};

struct Indicators {
  Rational rmax, rmin, rmean;
  int hpolicy = 0;
  std::optional<double> cor_all;
  std::optional<double> cor_slice;
  std::optional<Rational> random_walk_mean;
  std::size_t n_programmed = 0;
  std::size_t n_distinct = 0;
  std::size_t n_random_walk = 0;
  int kmin = 0, kmax = 0;
  Moments moments;
  // quantile_difficulty at the fractions below
  double quantile_value_frac = 0.95;
  double quantile_mass_frac = 0.01;
  std::optional<int> quantile_k;
};

// Requires at least one programmed record.
Indicators indicators(const experiment::Records& records, double value_frac = 0.95, double mass_frac = 0.01);
void write_indicators_json(std::ostream& out, const Indicators& ind);

// Smallest k such that at least mass_frac of R[<=k] is >= value_frac * Rmax.
std::optional<int> quantile_difficulty(const experiment::Records& records, double value_frac, double mass_frac);

// Pearson correlation of average ranks; nullopt when either ranking is constant.
std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys);

struct Histogram {
  std::vector<double> edges;  // bin_count + 1 edges over [0, 1]
  std::vector<std::size_t> programmed;
  std::vector<std::size_t> random_walk;
};

Histogram histogram(const experiment::Records& records, int bin_count = 20);
// bin_lo,bin_hi,programmed,random_walk
void write_histogram_csv(std::ostream& out, const Histogram& h);

struct UniqueCount {
  std::size_t generated = 0;
  std::size_t distinct = 0;
};

std::map<int, UniqueCount> unique_counts_by_k(const experiment::Records& records);

double logistic_irf(double theta, double a, double b, double c);
double linear_irf(double theta, double z, double lambda);

}  // namespace envdiff::analysis
