#include "gravalloc/regions.hpp"

#include "gravalloc/kernel.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <numbers>

namespace gravalloc {

double cos_power_integral(int m, double theta) {
  if (m == 0) return theta;
  if (m == 1) return std::sin(theta);
  double c = std::cos(theta);
  double s = std::sin(theta);
  return std::pow(c, m - 1) * s / m + (m - 1.0) / m * cos_power_integral(m - 2, theta);
}

namespace {

// Integral over [0, eps] of sin^m.
double sin_power_integral(int m, double eps) {
  if (eps > 0.5) return cos_power_integral(m, 0.5 * std::numbers::pi) - cos_power_integral(m, 0.5 * std::numbers::pi - eps);
  static thread_local std::vector<double> nodes, weights;
  if (nodes.empty()) gauss_legendre(24, nodes, weights);
  double sum = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    double t = 0.5 * eps * (nodes[k] + 1.0);
    sum += weights[k] * std::pow(std::sin(t), m);
  }
  return 0.5 * eps * sum;
}

}  // namespace

double axial_integral(int p, double a, double b, double rho) {
  if (b < a) return -axial_integral(p, b, a, rho);
  if (a == b) return 0.0;
  if (b <= 0.0) return axial_integral(p, -b, -a, rho);
  if (rho <= 0.0) {
    if (a <= 0.0) throw SingularityError("axial integral through the singularity");
    if (p == 1) return std::log(b / a);
    return (std::pow(a, 1.0 - p) - std::pow(b, 1.0 - p)) / (p - 1.0);
  }
  if (p == 1) {
    if (a >= 0.0) return std::log((b + std::hypot(b, rho)) / (a + std::hypot(a, rho)));
    return std::asinh(b / rho) + std::asinh(-a / rho);
  }
  const int m = p - 2;
  double scale = std::pow(rho, 1.0 - p);
  if (a < 0.0) return scale * (cos_power_integral(m, std::atan(b / rho)) + cos_power_integral(m, std::atan(-a / rho)));
  double ea = a == 0.0 ? 0.5 * std::numbers::pi : std::atan(rho / a);
  double eb = std::atan(rho / b);
  return scale * (sin_power_integral(m, ea) - sin_power_integral(m, eb));
}

namespace {

// Angular measure of {u in S^{m-1} : |y + rho u| <= W} with |y| = s (m = transverse dimension).
double cap_measure(int m, double s, double W, double rho) {
  if (s == 0.0) return rho <= W ? sphere_area(m - 1) : 0.0;
  double c = (W * W - s * s - rho * rho) / (2.0 * s * rho);
  if (c >= 1.0) return sphere_area(m - 1);
  if (c <= -1.0) return 0.0;
  if (m == 2) return 2.0 * (std::asin(c) + 0.5 * std::numbers::pi);
  double a = 0.5 * (m - 1);
  double partial = std::pow(2.0, m - 2) * boost::math::beta(a, a) * boost::math::ibeta(a, a, 0.5 * (1.0 + c));
  return sphere_area(m - 2) * partial;
}

// Integral over the same cap of u . e, e the direction of y.
double cap_first_moment(int m, double s, double W, double rho) {
  if (s == 0.0) return 0.0;
  double c = (W * W - s * s - rho * rho) / (2.0 * s * rho);
  if (c >= 1.0 || c <= -1.0) return 0.0;
  return -sphere_area(m - 2) * std::pow(1.0 - c * c, 0.5 * (m - 1)) / (m - 1.0);
}

// Integral over the disc |w| <= W in R^m of f(|w - y|) dw, |y| = s.
template <class F>
QuadResult disc_radial(int m, double s, double W, F&& f, std::vector<double> breaks, double rel_tol) {
  auto h = [&](double rho) {
    if (rho <= 0.0) return 0.0;
    double om = cap_measure(m, s, W, rho);
    if (om == 0.0) return 0.0;
    return f(rho) * std::pow(rho, m - 1) * om;
  };
  breaks.push_back(std::abs(W - s));
  return integrate_1d(h, 0.0, s + W, breaks, rel_tol);
}

VecIntegral cylinder_force(const Region& A, const Vec& x, double rel_tol) {
  const int d = A.d;
  const int m = d - 1;
  Vec y = x - A.center;
  double s = y.tail(m).norm();
  double a = -A.L - y[0];
  double b = A.L - y[0];
  const double sd = d - 2.0;
  std::vector<double> breaks;
  for (double c : {std::abs(a), std::abs(b)}) {
    if (c > 0.0 && c < s + A.W) breaks.push_back(c);
  }
  auto f1 = [&](double rho) {
    return (std::pow(a * a + rho * rho, -0.5 * sd) - std::pow(b * b + rho * rho, -0.5 * sd)) / sd;
  };
  QuadResult c1 = disc_radial(m, s, A.W, f1, breaks, rel_tol);
  VecIntegral out;
  out.value = Vec::Zero(d);
  out.value[0] = c1.value;
  out.error = c1.error;
  if (s > 0.0) {
    auto hn = [&](double rho) {
      if (rho <= 0.0) return 0.0;
      double mom = cap_first_moment(m, s, A.W, rho);
      if (mom == 0.0) return 0.0;
      return axial_integral(d, a, b, rho) * std::pow(rho, m) * mom;
    };
    std::vector<double> br = breaks;
    br.push_back(std::abs(A.W - s));
    QuadResult cn = integrate_1d(hn, std::max(0.0, std::abs(A.W - s)), s + A.W, br, rel_tol);
    out.value.tail(m) = (cn.value / s) * y.tail(m);
    out.error += cn.error;
  }
  return out;
}

QuadResult cylinder_potential(const Region& A, const Vec& x, double rel_tol) {
  const int d = A.d;
  const int m = d - 1;
  Vec y = x - A.center;
  double s = y.tail(m).norm();
  double a = -A.L - y[0];
  double b = A.L - y[0];
  auto f = [&](double rho) { return axial_integral(d - 2, a, b, rho); };
  return disc_radial(m, s, A.W, f, {}, rel_tol);
}

VecIntegral ball_force(const Vec& c, double r, const Vec& x) {
  const int d = static_cast<int>(x.size());
  Vec v = c - x;
  double dist = v.norm();
  VecIntegral out;
  if (dist <= r) {
    out.value = kappa(d) * v;
  } else {
    out.value = kappa(d) * std::pow(r, d) * v / std::pow(dist, d);
  }
  return out;
}

double ball_potential(const Vec& c, double r, const Vec& x) {
  const int d = static_cast<int>(x.size());
  double dist = (c - x).norm();
  if (dist <= r) return 0.5 * kappa(d) * (d * r * r - (d - 2.0) * dist * dist);
  return kappa(d) * std::pow(r, d) * std::pow(dist, 2.0 - d);
}

// Midpoint rule on nested grids for composite regions.
template <class F>
VecIntegral grid_fallback(const Region& A, const Vec& x, F&& integrand, int comps, double rel_tol) {
  auto [lo, hi] = A.bounds();
  const int d = A.d;
  auto eval = [&](int n) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(comps);
    Vec h = (hi - lo) / n;
    double cell = h.prod();
    long total = 1;
    for (int i = 0; i < d; ++i) total *= n;
    Vec z(d);
    for (long idx = 0; idx < total; ++idx) {
      long rem = idx;
      for (int i = 0; i < d; ++i) {
        z[i] = lo[i] + (static_cast<double>(rem % n) + 0.5) * h[i];
        rem /= n;
      }
      if (!A.contains(z) || (z - x).squaredNorm() == 0.0) continue;
      acc += integrand(z);
    }
    return Eigen::VectorXd(acc * cell);
  };
  long budget = 1L << 22;
  Eigen::VectorXd prev = eval(8);
  double err = std::numeric_limits<double>::infinity();
  for (int n = 16;; n *= 2) {
    long cost = 1;
    for (int i = 0; i < d; ++i) cost *= n;
    if (cost > budget) break;
    Eigen::VectorXd cur = eval(n);
    err = (cur - prev).norm();
    prev = cur;
    if (err <= rel_tol * std::max(1.0, cur.norm())) break;
  }
  VecIntegral out;
  out.value = Vec(prev.size());
  for (int i = 0; i < prev.size(); ++i) out.value[i] = prev[i];
  out.error = err;
  return out;
}

}  // namespace

QuadResult box_force_component(const Vec& lo, const Vec& hi, const Vec& x, int i, double rel_tol) {
  const int d = static_cast<int>(x.size());
  const double sd = d - 2.0;
  double a = lo[i] - x[i];
  double b = hi[i] - x[i];
  Vec plo(d - 1), phi(d - 1), split(d - 1);
  for (int j = 0, k = 0; j < d; ++j) {
    if (j == i) continue;
    plo[k] = lo[j];
    phi[k] = hi[j];
    split[k] = x[j];
    ++k;
  }
  auto f = [&](const Vec& w) {
    double rho2 = 0.0;
    for (int j = 0, k = 0; j < d; ++j) {
      if (j == i) continue;
      double t = w[k++] - x[j];
      rho2 += t * t;
    }
    return (std::pow(a * a + rho2, -0.5 * sd) - std::pow(b * b + rho2, -0.5 * sd)) / sd;
  };
  return integrate_box(f, plo, phi, split, rel_tol);
}

VecIntegral background_force(const Region& A, const Vec& x, double rel_tol) {
  const int d = A.d;
  if (x.size() != d) throw ParameterError("dimension mismatch");
  switch (A.kind) {
    case RegionKind::Ball:
      return ball_force(A.center, A.r, x);
    case RegionKind::Annulus: {
      VecIntegral outer = ball_force(A.center, A.p, x);
      outer.value -= ball_force(A.center, A.r, x).value;
      return outer;
    }
    case RegionKind::Box: {
      auto [lo, hi] = A.bounds();
      VecIntegral out;
      out.value = Vec::Zero(d);
      for (int i = 0; i < d; ++i) {
        QuadResult c = box_force_component(lo, hi, x, i, rel_tol);
        out.value[i] = c.value;
        out.error += c.error;
      }
      return out;
    }
    case RegionKind::Cylinder:
      return cylinder_force(A, x, rel_tol);
    case RegionKind::Complement:
      throw UnsupportedError("background integral over an unbounded region");
    case RegionKind::Intersection:
      if (A.parts.size() == 1) return background_force(A.parts[0], x, rel_tol);
      return grid_fallback(
          A, x,
          [&](const Vec& z) {
            Vec v = z - x;
            Eigen::VectorXd out(d);
            double inv = inv_pow_d(v.squaredNorm(), d);
            for (int i = 0; i < d; ++i) out[i] = v[i] * inv;
            return out;
          },
          d, rel_tol);
  }
  throw UnsupportedError("unknown region");
}

QuadResult background_potential(const Region& A, const Vec& x, double rel_tol) {
  const int d = A.d;
  switch (A.kind) {
    case RegionKind::Ball:
      return {ball_potential(A.center, A.r, x), 0.0};
    case RegionKind::Annulus:
      return {ball_potential(A.center, A.p, x) - ball_potential(A.center, A.r, x), 0.0};
    case RegionKind::Box: {
      auto [lo, hi] = A.bounds();
      double a = lo[0] - x[0];
      double b = hi[0] - x[0];
      auto f = [&](const Vec& w) {
        double rho = (w - x.tail(d - 1)).norm();
        return axial_integral(d - 2, a, b, rho);
      };
      return integrate_box(f, lo.tail(d - 1), hi.tail(d - 1), x.tail(d - 1), rel_tol);
    }
    case RegionKind::Cylinder:
      return cylinder_potential(A, x, rel_tol);
    case RegionKind::Complement:
      throw UnsupportedError("background integral over an unbounded region");
    case RegionKind::Intersection: {
      if (A.parts.size() == 1) return background_potential(A.parts[0], x, rel_tol);
      VecIntegral r = grid_fallback(
          A, x,
          [&](const Vec& z) {
            Eigen::VectorXd out(1);
            out[0] = std::pow((z - x).squaredNorm(), 0.5 * (2.0 - d));
            return out;
          },
          1, rel_tol);
      return {r.value[0], r.error};
    }
  }
  throw UnsupportedError("unknown region");
}

}  // namespace gravalloc
