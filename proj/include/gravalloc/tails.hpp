#pragma once

#include "gravalloc/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gravalloc {

enum class TailStatistic {
  ForceAtOrigin,        // |F(0|A)|
  MaxForceOverBall,     // max over probes in B(0, ball_radius) of |F(x|A)|
  PotentialAtOrigin,    // |U(0|A)|, d >= 5
  PotentialDifference,  // |U(0|A) - U(y|A)|, y = diff_distance e1
};

std::string to_string(TailStatistic s);
TailStatistic tail_statistic_from_string(const std::string& s);

// A = annulus(q, p) around the origin
struct TailSpec {
  TailStatistic stat = TailStatistic::ForceAtOrigin;
  int d = 3;
  double q = 2.0;
  double p = 10.0;
  double ball_radius = 0.5;
  double diff_distance = 1.0;

  void validate() const;
  // exponent e in exp(-c q^e t^2)
  int q_exponent() const;
};

struct TailConfig {
  std::size_t replicas = 100000;
  std::uint64_t seed = 1;
  std::size_t min_exceed = 10;  // fewer exceedances: censored
  double z = 1.96;              // Wilson interval
  int threads = 0;
};

struct TailRow {
  double t = 0.0;
  std::size_t exceed = 0;
  std::size_t n = 0;
  double p = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool censored = false;
  double bound = -1.0;  // fitted C exp(-c q^e t^2), < 0 until fitted
};

struct TailTable {
  TailSpec spec;
  TailConfig cfg;
  std::vector<TailRow> rows;
  double mean_count = 0.0;  // mean number of stars in A
};

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z);

// P(stat >= t) for every threshold
TailTable mc_tail(const TailSpec& spec, const std::vector<double>& thresholds, const TailConfig& cfg);

// least squares of log p against t^2 over uncensored rows with t > 0 and p <= p_max
struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};
TailFit fit_tail(const TailTable& table, double p_max = 0.5);

// constants of C exp(-c q^e t^2) from a calibration run: c from the fitted slope,
// C the smallest value keeping every upper Wilson limit below the curve
struct TailBound {
  double c = 0.0;
  double C = 0.0;
  int e = 0;
  double q = 0.0;

  double operator()(double t) const;
};
TailBound calibrate_tail_bound(const TailTable& calibration, double p_max = 0.5);

// fills the bound column; true when no uncensored row is significantly above it
// (its lower Wilson limit stays below the bound)
bool apply_tail_bound(TailTable& table, const TailBound& bound);

}  // namespace gravalloc
