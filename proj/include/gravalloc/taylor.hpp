#pragma once

#include "gravalloc/moments.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gravalloc {

// Taylor model of g around y: g(y + h) ~ sum_{|a| <= k} coef[a] h^a.
struct TaylorModel {
  Vec y;
  int k = 0;
  int d = 0;
  std::vector<MultiIndex> index;  // graded lex including 0
  std::vector<Vec> coef;
  double C20 = 0.0;
};

// Default constant per dimension, from a dense calibration run (see fit_c20).
double default_c20(int d);

TaylorModel taylor_model(const Vec& y, int k, double C20 = 0.0);
Vec taylor_eval(const TaylorModel& m, const Vec& z);
// C20 k^d |y|^{1-d} (2d |z-y|/|y|)^{k+1}; RangeError outside |z - y| <= |y|/C20.
double taylor_remainder_bound(const TaylorModel& m, const Vec& z);
// C20 |y|^{1-d} (2d/|y|)^{|a|}
double taylor_coefficient_bound(const TaylorModel& m, int order);

struct C20Fit {
  double value = 0.0;     // with margin
  double raw = 0.0;       // largest observed ratio
  double coef_ratio = 0.0;
  double rem_ratio = 0.0;
};

// Largest ratio of |a_a| and of the remainder to their C20-free bounds over
// random y with |y| in [2,10], k <= kmax, |z-y| <= |y|/20; times margin, floored at 2.
C20Fit fit_c20(int d, int kmax, std::size_t samples, std::uint64_t seed, double margin = 1.1);

struct ForceEventResult {
  bool preconditions = false;
  bool r_condition = false;
  bool t_condition = false;
  bool omega = false;
  bool event = false;  // E observed on the probe set
  double rho = 0.0;
  double omega_lhs = 0.0;
  double omega_threshold = 0.0;
  double max_deviation = 0.0;
  std::string status;  // "pass", "omega-fails", "inconclusive", "violated"
};

struct ForceEventInput {
  PointList Y;
  // Law of each Y_j, as a quadrature rule with weights summing to 1.
  PointList law_nodes;
  std::vector<double> law_weights;
  Vec y;
  double r = 0.0;
  double t = 0.0;
  int k = 1;
  double C20 = 0.0;  // 0: default_c20
  int directions = 200;
  std::uint64_t seed = 1;
};

// Evaluates the moment event Omega and, on spheres of radius r, 1.5r, 2r, 4r
// around y, the force-deviation event E.
ForceEventResult check_force_approx_event(const ForceEventInput& in);

}  // namespace gravalloc
