#pragma once

#include "gravalloc/types.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <functional>
#include <vector>

namespace gravalloc {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod on [a,b], split at the interior breakpoints.
template <class F>
QuadResult integrate_1d(F&& f, double a, double b, std::vector<double> breaks = {}, double rel_tol = 1e-10,
                        unsigned max_depth = 20) {
  QuadResult out;
  if (b <= a) return out;
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double lo = a;
  for (double c : breaks) {
    if (c <= lo) continue;
    if (c > b) c = b;
    double err = 0.0;
    double l1 = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, c, max_depth, rel_tol, &err, &l1);
    out.value += v;
    out.error += err;
    lo = c;
    if (lo >= b) break;
  }
  return out;
}

// Nested adaptive integration over an axis-aligned box [lo,hi] in `dims`
// coordinates; `split` gives a breakpoint per coordinate (ignored when outside).
QuadResult integrate_box(const std::function<double(const Vec&)>& f, const Vec& lo, const Vec& hi, const Vec& split,
                         double rel_tol = 1e-10);

// Gauss-Legendre nodes and weights on [-1,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace gravalloc
