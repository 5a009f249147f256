#include "gravalloc/quadrature.hpp"

#include <Eigen/Eigenvalues>

namespace gravalloc {

namespace {

QuadResult integrate_level(const std::function<double(const Vec&)>& f, Vec& x, int level, const Vec& lo, const Vec& hi,
                           const Vec& split, double rel_tol) {
  const int dims = static_cast<int>(lo.size());
  std::vector<double> breaks;
  if (split[level] > lo[level] && split[level] < hi[level]) breaks.push_back(split[level]);
  double inner_err = 0.0;
  auto g = [&](double t) {
    x[level] = t;
    if (level + 1 == dims) return f(x);
    QuadResult r = integrate_level(f, x, level + 1, lo, hi, split, rel_tol);
    inner_err = std::max(inner_err, r.error);
    return r.value;
  };
  // The inner error is accumulated as a worst case times the outer length.
  QuadResult out = integrate_1d(g, lo[level], hi[level], breaks, rel_tol, 15);
  out.error += inner_err * (hi[level] - lo[level]);
  return out;
}

}  // namespace

QuadResult integrate_box(const std::function<double(const Vec&)>& f, const Vec& lo, const Vec& hi, const Vec& split,
                         double rel_tol) {
  if (lo.size() == 0) return {f(lo), 0.0};
  Vec x = lo;
  return integrate_level(f, x, 0, lo, hi, split, rel_tol);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  // Golub-Welsch
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()[i];
    double v = es.eigenvectors()(0, i);
    weights[i] = 2.0 * v * v;
  }
}

}  // namespace gravalloc
