#include "gravalloc/patches.hpp"

#include "gravalloc/quadrature.hpp"

#include <Eigen/Cholesky>
#include <boost/math/special_functions/binomial.hpp>

#include <map>
#include <numbers>

namespace gravalloc {

double NuMeasure::linear_mass(double a, double b) const {
  // beta (c0 x + c1 x^2 / 2) with c0 = 3/2, c1 = 1/(2L)
  auto F = [&](double x) { return 1.5 * x + x * x / (4.0 * L); };
  return beta * (F(b) - F(a));
}

double NuMeasure::sphere_area() const { return gravalloc::sphere_area(d - 2) * std::pow(W, d - 2); }

NuMeasure nu_measure(int d, double L, double W, double beta) {
  if (d < 3 || d > kMaxDim) throw ParameterError("dimension out of range");
  if (!(L > 0.0 && W > 0.0 && beta > 0.0)) throw ParameterError("L, W and beta must be positive");
  NuMeasure nu;
  nu.d = d;
  nu.L = L;
  nu.W = W;
  nu.beta = beta;
  return nu;
}

namespace {

// integral over [0, t] of sin^e
double sin_power_integral(int e, double t) {
  if (e == 0) return t;
  if (e == 1) return 1.0 - std::cos(t);
  return -std::pow(std::sin(t), e - 1) * std::cos(t) / e + (e - 1.0) / e * sin_power_integral(e - 2, t);
}

// x1 with F(x) = mass of [lo, x] equal to a fraction u of [lo, hi]
double inverse_linear(const NuMeasure& nu, double lo, double hi, double u) {
  double target = u * nu.linear_mass(lo, hi);
  // 1.5 (x - lo) + (x^2 - lo^2)/(4L) = target / beta
  double a = 1.0 / (4.0 * nu.L), b = 1.5, c = -(1.5 * lo + lo * lo / (4.0 * nu.L)) - target / nu.beta;
  double disc = b * b - 4.0 * a * c;
  double q = -0.5 * (b + std::sqrt(std::max(disc, 0.0)));
  double x = c / q;  // the stable root
  return std::clamp(x, lo, hi);
}

double inverse_sin_power(int e, double lo, double hi, double u) {
  if (e == 0) return lo + u * (hi - lo);
  double I0 = sin_power_integral(e, lo);
  double target = I0 + u * (sin_power_integral(e, hi) - I0);
  double a = lo, b = hi;
  double x = lo + u * (hi - lo);
  for (int it = 0; it < 100; ++it) {
    double f = sin_power_integral(e, x) - target;
    if (f > 0.0) b = x;
    else a = x;
    double fp = std::pow(std::sin(x), e);
    double xn = fp > 0.0 ? x - f / fp : 0.5 * (a + b);
    if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
    if (std::abs(xn - x) <= 1e-16 * (1.0 + std::abs(x)) || b - a < 1e-16) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

// cross-section coordinates: angles (theta_1..theta_{m-1}, phi) to x_2..x_d
void embed_angles(int m, const double* ang, double W, double* out) {
  double s = W;
  for (int j = 0; j < m - 1; ++j) {
    out[j] = s * std::cos(ang[j]);
    s *= std::sin(ang[j]);
  }
  out[m - 1] = s * std::cos(ang[m - 1]);
  out[m] = s * std::sin(ang[m - 1]);
}

// exponent of sin in the density of angle j (last one is phi)
int angle_exponent(int m, int j) { return j == m - 1 ? 0 : m - 1 - j; }

void allocate_counts(const std::vector<double>& share, int n, std::vector<int>& out) {
  const int z = static_cast<int>(share.size());
  out.assign(z, 1);
  int left = n - z;
  std::vector<double> want(z);
  double tot = 0.0;
  for (double s : share) tot += s;
  for (int i = 0; i < z; ++i) want[i] = share[i] / tot * n - 1.0;
  while (left > 0) {
    int best = 0;
    for (int i = 1; i < z; ++i) {
      if (want[i] - (out[i] - 1) > want[best] - (out[best] - 1)) best = i;
    }
    ++out[best];
    --left;
  }
}

}  // namespace

std::vector<std::vector<std::pair<double, double>>> sphere_cells(int m, int n) {
  if (m < 1 || n < 1) throw ParameterError("sphere partition needs m >= 1 and n >= 1");
  std::vector<std::vector<std::pair<double, double>>> out;
  const double two_pi = 2.0 * std::numbers::pi;
  if (m == 1) {
    for (int i = 0; i < n; ++i) out.push_back({{two_pi * i / n, two_pi * (i + 1) / n}});
    return out;
  }
  const double pi = std::numbers::pi;
  const int e = m - 1;
  auto whole = [&](double lo, double hi) {
    std::vector<std::pair<double, double>> c{{lo, hi}};
    for (int j = 1; j < m; ++j) c.push_back({0.0, j == m - 1 ? two_pi : pi});
    return c;
  };
  if (n == 1) {
    out.push_back(whole(0.0, pi));
    return out;
  }
  // one-cell polar caps, collars in between
  const double cap = inverse_sin_power(e, 0.0, pi, 1.0 / n);
  if (n == 2) {
    out.push_back(whole(0.0, 0.5 * pi));
    out.push_back(whole(0.5 * pi, pi));
    return out;
  }
  double cell = std::pow(gravalloc::sphere_area(m) / n, 1.0 / m);
  int nz = std::clamp(static_cast<int>(std::lround((pi - 2.0 * cap) / cell)), 1, n - 2);
  std::vector<double> share(nz);
  for (int z = 0; z < nz; ++z) {
    double a = cap + (pi - 2.0 * cap) * z / nz, b = cap + (pi - 2.0 * cap) * (z + 1) / nz;
    share[z] = sin_power_integral(e, b) - sin_power_integral(e, a);
  }
  std::vector<int> counts;
  allocate_counts(share, n - 2, counts);
  out.push_back(whole(0.0, cap));
  double lo = cap;
  int acc = 0;
  for (int z = 0; z < nz; ++z) {
    acc += counts[z];
    double u = static_cast<double>(acc) / (n - 2);
    double hi = (z == nz - 1) ? pi - cap : inverse_sin_power(e, cap, pi - cap, u);
    for (auto& sub : sphere_cells(m - 1, counts[z])) {
      std::vector<std::pair<double, double>> c{{lo, hi}};
      c.insert(c.end(), sub.begin(), sub.end());
      out.push_back(std::move(c));
    }
    lo = hi;
  }
  out.push_back(whole(pi - cap, pi));
  return out;
}

Vec Patch::map(const double* u) const {
  const int d = nu.d, m = d - 2;
  Vec w(d);
  w[0] = inverse_linear(nu, x1_lo, x1_hi, u[0]);
  double ang[kMaxDim];
  for (int j = 0; j < m; ++j) ang[j] = inverse_sin_power(angle_exponent(m, j), angles[j].first, angles[j].second, u[1 + j]);
  embed_angles(m, ang, nu.W, w.data() + 1);
  return w;
}

Vec Patch::center() const {
  double u[kMaxDim];
  std::fill(u, u + kMaxDim, 0.5);
  return map(u);
}

double Patch::measure() const {
  const int m = nu.d - 2;
  double s = nu.linear_mass(x1_lo, x1_hi) * std::pow(nu.W, m);
  for (int j = 0; j < m; ++j) {
    int e = angle_exponent(m, j);
    s *= sin_power_integral(e, angles[j].second) - sin_power_integral(e, angles[j].first);
  }
  return s;
}

double Patch::diameter(int res) const {
  const int d = nu.d;
  const int k = d - 1;
  PointList pts;
  std::vector<int> id(k, 0);
  double u[kMaxDim];
  while (true) {
    for (int i = 0; i < k; ++i) u[i] = static_cast<double>(id[i]) / (res - 1);
    pts.push_back(map(u));
    int i = 0;
    while (i < k && ++id[i] >= res) {
      id[i] = 0;
      ++i;
    }
    if (i == k) break;
  }
  double best = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) best = std::max(best, (pts[a] - pts[b]).norm());
  return best;
}

void Patch::quadrature(int order, PointList& nodes, std::vector<double>& weights) const {
  const int d = nu.d, m = d - 2;
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);
  // per coordinate nodes and weights (density included)
  std::vector<std::vector<double>> cx(d - 1), cw(d - 1);
  for (int q = 0; q < order; ++q) {
    double h = 0.5 * (x1_hi - x1_lo);
    double x = x1_lo + h * (gx[q] + 1.0);
    cx[0].push_back(x);
    cw[0].push_back(h * gw[q] * nu.density(x));
  }
  for (int j = 0; j < m; ++j) {
    int e = angle_exponent(m, j);
    double lo = angles[j].first, hi = angles[j].second;
    for (int q = 0; q < order; ++q) {
      double h = 0.5 * (hi - lo);
      double t = lo + h * (gx[q] + 1.0);
      cx[1 + j].push_back(t);
      cw[1 + j].push_back(h * gw[q] * std::pow(std::sin(t), e));
    }
  }
  nodes.clear();
  weights.clear();
  std::vector<int> id(d - 1, 0);
  double tot = 0.0;
  while (true) {
    Vec w(d);
    double wt = 1.0;
    w[0] = cx[0][id[0]];
    wt *= cw[0][id[0]];
    double ang[kMaxDim];
    for (int j = 0; j < m; ++j) {
      ang[j] = cx[1 + j][id[1 + j]];
      wt *= cw[1 + j][id[1 + j]];
    }
    embed_angles(m, ang, nu.W, w.data() + 1);
    nodes.push_back(w);
    weights.push_back(wt);
    tot += wt;
    int i = 0;
    while (i < d - 1 && ++id[i] >= static_cast<int>(cx[i].size())) {
      id[i] = 0;
      ++i;
    }
    if (i == d - 1) break;
  }
  for (double& w : weights) w /= tot;
}

PatchDecomposition partition_cylinder(int d, double L, double W, double tau, double beta) {
  NuMeasure nu = nu_measure(d, L, W, beta);
  if (!(tau > 0.0 && tau < W)) throw ParameterError("need 0 < tau < W");
  const int m = d - 2;
  PatchDecomposition pd;
  pd.nu = nu;
  pd.tau = tau;
  pd.cells_per_band = std::max(1, static_cast<int>(std::lround(nu.sphere_area() / std::pow(tau, m))));
  const double M = nu.total();
  pd.bands = static_cast<int>(std::lround(M / (pd.cells_per_band * std::pow(tau, d - 1))));
  if (pd.bands < 1) throw ParameterError("tau too large: fewer than one patch per band");
  auto cells = sphere_cells(m, pd.cells_per_band);
  double lo = -L;
  for (int b = 0; b < pd.bands; ++b) {
    double hi = (b == pd.bands - 1) ? L : inverse_linear(nu, -L, L, static_cast<double>(b + 1) / pd.bands);
    for (const auto& c : cells) {
      Patch p;
      p.nu = nu;
      p.x1_lo = lo;
      p.x1_hi = hi;
      p.angles = c;
      p.mass = M / (static_cast<double>(pd.bands) * pd.cells_per_band);
      pd.patches.push_back(std::move(p));
    }
    lo = hi;
  }
  // diameters repeat across a band up to the x1 width; measure every patch of the
  // widest (lowest-density) band and one column along x1
  for (std::size_t i = 0; i < pd.patches.size(); ++i) {
    bool first_band = i < static_cast<std::size_t>(pd.cells_per_band);
    bool first_cell = i % pd.cells_per_band == 0;
    if (!first_band && !first_cell) continue;
    pd.max_diameter = std::max(pd.max_diameter, pd.patches[i].diameter());
  }
  pd.C_hat = pd.max_diameter / tau;
  pd.tau_eff = std::pow(M / pd.patches.size(), 1.0 / (d - 1));
  return pd;
}

int default_n1(int d, int k) { return 2 * k + (d >= 5 ? 3 : 2); }

namespace {

struct MomentSet {
  std::vector<MultiIndex> idx;
  std::map<MultiIndex, int> pos;
};

// sum_j w_j ((x_j - c)/s)^a for every a, via per-coordinate power tables
struct MomentAccumulator {
  const MomentSet& ms;
  Vec c;
  double s;
  int d, k;
  Eigen::VectorXd sum;
  std::vector<double> pw;

  MomentAccumulator(const MomentSet& m, const Vec& centre, double scale, int kk)
      : ms(m), c(centre), s(scale), d(static_cast<int>(centre.size())), k(kk),
        sum(Eigen::VectorXd::Zero(m.idx.size())), pw(static_cast<std::size_t>(d) * (kk + 1)) {}

  void add(const Vec& x, double w) {
    for (int i = 0; i < d; ++i) {
      double v = (x[i] - c[i]) / s, p = 1.0;
      for (int e = 0; e <= k; ++e) {
        pw[i * (k + 1) + e] = p;
        p *= v;
      }
    }
    for (std::size_t j = 0; j < ms.idx.size(); ++j) {
      double t = w;
      for (int i = 0; i < d; ++i) t *= pw[i * (k + 1) + ms.idx[j][i]];
      sum[j] += t;
    }
  }
};

// Tensor Gauss-Legendre moments; the order per coordinate follows the
// trigonometric degree of the integrand times the interval length, plus extra.
Eigen::VectorXd patch_moments(const Patch& p, const MomentSet& ms, const Vec& c, double s, int k, int extra) {
  const int d = p.dim(), m = d - 2;
  std::vector<std::vector<double>> cx(d - 1), cw(d - 1);
  std::vector<double> gx, gw;
  for (int j = 0; j < d - 1; ++j) {
    double lo = j == 0 ? p.x1_lo : p.angles[j - 1].first;
    double hi = j == 0 ? p.x1_hi : p.angles[j - 1].second;
    double h = 0.5 * (hi - lo);
    int order = k + extra;
    if (j > 0) order += static_cast<int>(std::ceil((k + angle_exponent(m, j - 1)) * h));
    gauss_legendre(order, gx, gw);
    for (int q = 0; q < order; ++q) {
      double t = lo + h * (gx[q] + 1.0);
      cx[j].push_back(t);
      cw[j].push_back(h * gw[q] * (j == 0 ? p.nu.density(t) : std::pow(std::sin(t), angle_exponent(m, j - 1))));
    }
  }
  MomentAccumulator acc(ms, c, s, k);
  std::vector<int> id(d - 1, 0);
  double native[kMaxDim];
  Vec w(d);
  double tot = 0.0;
  while (true) {
    double wt = 1.0;
    for (int j = 0; j < d - 1; ++j) {
      native[j] = cx[j][id[j]];
      wt *= cw[j][id[j]];
    }
    w[0] = native[0];
    embed_angles(m, native + 1, p.nu.W, w.data() + 1);
    acc.add(w, wt);
    tot += wt;
    int i = 0;
    while (i < d - 1 && ++id[i] >= static_cast<int>(cx[i].size())) {
      id[i] = 0;
      ++i;
    }
    if (i == d - 1) break;
  }
  return acc.sum / tot;
}

// One native coordinate on [lo, hi] with density sin^e (e >= 0) or the linear
// x1 density. The functions to integrate exactly: polynomials of degree k in x1,
// trigonometric polynomials of degree k in an angle. When the later angles span
// a whole sphere only even sine powers survive, so polynomials in cos suffice.
struct Coordinate {
  double lo, hi;
  bool linear;  // x1
  int e;        // sin exponent for angles
  const NuMeasure* nu;
  bool polar = false;

  double density(double t) const { return linear ? nu->density(t) : std::pow(std::sin(t), e); }
};

// Orthonormal basis (w.r.t. the normalized density) of the non-constant part
// of the function space, as coefficient rows over the raw functions.
struct Basis1D {
  Coordinate c;
  int k;
  double mid, half;
  Eigen::MatrixXd R;  // rows: orthonormal functions as combinations of raw ones (raw 0 = constant)

  int raw_count() const { return c.linear || c.polar ? k + 1 : 2 * k + 1; }
  void raw(double t, double* f, double* df) const {
    if (c.linear || c.polar) {
      double u, du;
      if (c.linear) {
        u = (t - mid) / half;
        du = 1.0 / half;
      } else {
        double cm = 0.5 * (std::cos(c.lo) + std::cos(c.hi)), ch = 0.5 * std::abs(std::cos(c.lo) - std::cos(c.hi));
        u = (std::cos(t) - cm) / ch;
        du = -std::sin(t) / ch;
      }
      double p = 1.0;
      for (int j = 0; j <= k; ++j) {
        f[j] = p;
        if (df) df[j] = j == 0 ? 0.0 : j * std::pow(u, j - 1) * du;
        p *= u;
      }
      return;
    }
    f[0] = 1.0;
    if (df) df[0] = 0.0;
    for (int j = 1; j <= k; ++j) {
      double a = j * (t - mid);
      f[2 * j - 1] = std::cos(a);
      f[2 * j] = std::sin(a);
      if (df) {
        df[2 * j - 1] = -j * std::sin(a);
        df[2 * j] = j * std::cos(a);
      }
    }
  }
};

Basis1D make_basis(const Coordinate& c, int k) {
  Basis1D b{c, k, 0.5 * (c.lo + c.hi), 0.5 * (c.hi - c.lo), {}};
  const int m = b.raw_count();
  std::vector<double> gx, gw;
  gauss_legendre(std::max(40, 4 * m + 8), gx, gw);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  double mass = 0.0;
  std::vector<double> f(m);
  for (std::size_t q = 0; q < gx.size(); ++q) {
    double t = b.mid + b.half * gx[q];
    double w = gw[q] * c.density(t);
    b.raw(t, f.data(), nullptr);
    mass += w;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) G(i, j) += w * f[i] * f[j];
  }
  G /= mass;
  // Cholesky of the Gram matrix: G = L L^T, orthonormal functions L^{-1} f
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  Eigen::MatrixXd Linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(m, m));
  b.R = Linv.bottomRows(m - 1);
  return b;
}

// n1 equal-weight nodes whose averages of the orthonormal functions vanish.
std::vector<double> fit_nodes(const Basis1D& b, int n1, double& achieved) {
  const Coordinate& c = b.c;
  const int m = b.raw_count();
  const int P = m - 1;
  // seed: equal-mass midpoints
  std::vector<double> t(n1);
  for (int i = 0; i < n1; ++i) {
    double u = (i + 0.5) / n1;
    t[i] = c.linear ? inverse_linear(*c.nu, c.lo, c.hi, u) : inverse_sin_power(c.e, c.lo, c.hi, u);
  }
  std::vector<double> f(m), df(m);
  auto eval = [&](const std::vector<double>& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    r = Eigen::VectorXd::Zero(P);
    if (J) J->setZero(P, n1);
    Eigen::VectorXd fr(m), dfr(m);
    for (int i = 0; i < n1; ++i) {
      b.raw(x[i], f.data(), df.data());
      for (int j = 0; j < m; ++j) {
        fr[j] = f[j];
        dfr[j] = df[j];
      }
      r += b.R * fr / n1;
      if (J) J->col(i) = b.R * dfr / n1;
    }
  };
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  eval(t, r, &J);
  double mu = 1e-6;
  for (int it = 0; it < 200 && r.norm() > 1e-15; ++it) {
    bool improved = false;
    for (int tries = 0; tries < 20; ++tries) {
      Eigen::VectorXd step;
      if (n1 >= P) {
        Eigen::MatrixXd A = J * J.transpose();
        A.diagonal().array() += mu * (1e-12 + A.diagonal().array());
        step = -J.transpose() * A.ldlt().solve(r);
      } else {
        Eigen::MatrixXd A = J.transpose() * J;
        A.diagonal().array() += mu * (1e-12 + A.diagonal().array());
        step = -A.ldlt().solve(J.transpose() * r);
      }
      std::vector<double> tn(n1);
      for (int i = 0; i < n1; ++i) tn[i] = std::clamp(t[i] + step[i], c.lo, c.hi);
      Eigen::VectorXd rn;
      eval(tn, rn, nullptr);
      if (rn.norm() < r.norm()) {
        t = tn;
        mu = std::max(mu * 0.1, 1e-16);
        improved = true;
        break;
      }
      mu *= 10.0;
    }
    if (!improved) break;
    eval(t, r, &J);
  }
  achieved = r.norm();
  return t;
}

// cross-section coordinates: angles (theta_1..theta_{m-1}, phi) to x_2..x_d
void embed_native(const NuMeasure& nu, const double* native, Vec& w) {
  const int m = nu.d - 2;
  w[0] = native[0];
  embed_angles(m, native + 1, nu.W, w.data() + 1);
}

}  // namespace

CubatureRule fit_patch_points(const Patch& patch, int n, int k, double delta, int patch_id) {
  const int d = patch.dim();
  const int dim = d - 1;
  const int m = d - 2;
  if (k < 1) throw ParameterError("moment degree must be at least 1");
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  int n1 = static_cast<int>(std::lround(std::pow(n, 1.0 / dim)));
  if (n1 < 1 || std::lround(std::pow(n1, dim)) != n) throw ParameterError("n must be a perfect (d-1)-th power");
  MomentSet ms;
  ms.idx = multi_indices(d, k);
  for (std::size_t j = 0; j < ms.idx.size(); ++j) ms.pos[ms.idx[j]] = static_cast<int>(j);
  const int P = static_cast<int>(ms.idx.size());

  // equal-weight 1D rules per native coordinate; their tensor product is exact
  // for every (w - y)^a up to the 1D residuals
  std::vector<std::vector<double>> nodes(dim);
  int iterations = 0;
  for (int j = 0; j < dim; ++j) {
    Coordinate c;
    c.nu = &patch.nu;
    if (j == 0) {
      c = {patch.x1_lo, patch.x1_hi, true, 0, &patch.nu};
    } else {
      c = {patch.angles[j - 1].first, patch.angles[j - 1].second, false, angle_exponent(m, j - 1), &patch.nu};
      bool full = j - 1 < m - 1;
      for (int q = j; q < m && full; ++q) {
        const auto& a = patch.angles[q];
        double span = q == m - 1 ? 2.0 * std::numbers::pi : std::numbers::pi;
        full = a.second - a.first >= span * (1.0 - 1e-12);
      }
      c.polar = full;
    }
    double achieved = 0.0;
    nodes[j] = fit_nodes(make_basis(c, k), n1, achieved);
    ++iterations;
  }

  const Vec c = patch.center();
  const double s = std::max(patch.diameter(5), 1e-12);
  Eigen::VectorXd target = patch_moments(patch, ms, c, s, k, 6);
  Eigen::VectorXd target2 = patch_moments(patch, ms, c, s, k, 12);
  Eigen::VectorXd qerr = (target - target2).cwiseAbs();
  target = target2;

  CubatureRule rule;
  rule.patch = patch_id;
  rule.k = k;
  rule.delta = delta;
  rule.iterations = iterations;
  MomentAccumulator acc(ms, c, s, k);
  std::vector<int> id(dim, 0);
  double native[kMaxDim];
  Vec w(d);
  while (true) {
    for (int j = 0; j < dim; ++j) native[j] = nodes[j][id[j]];
    embed_native(patch.nu, native, w);
    rule.points.push_back(w);
    acc.add(w, 1.0 / n);
    int i = 0;
    while (i < dim && ++id[i] >= n1) {
      id[i] = 0;
      ++i;
    }
    if (i == dim) break;
  }
  Eigen::VectorXd r = acc.sum - target;
  // unscaled centred errors, with the target quadrature uncertainty
  rule.centred_error.resize(P);
  for (int b = 0; b < P; ++b) {
    int o = degree(ms.idx[b], d);
    rule.centred_error[b] = std::pow(s, o) * (std::abs(r[b]) + qerr[b] + 1e-16 * std::abs(target[b]));
  }
  // translate to every y on the host cylinder: (w-y)^a = sum_b C(a,b) (w-c)^b (c-y)^{a-b}
  Vec D(d);
  D[0] = std::max(std::abs(c[0] - patch.nu.L), std::abs(c[0] + patch.nu.L));
  for (int i = 1; i < d; ++i) D[i] = std::abs(c[i]) + patch.nu.W;
  double worst = 0.0;
  for (int a = 0; a < P; ++a) {
    const MultiIndex& al = ms.idx[a];
    double bound = 0.0;
    for (int b = 0; b < P; ++b) {
      const MultiIndex& be = ms.idx[b];
      bool le = true;
      for (int i = 0; i < d; ++i) le = le && be[i] <= al[i];
      if (!le) continue;
      double t = rule.centred_error[b];
      for (int i = 0; i < d; ++i) {
        t *= boost::math::binomial_coefficient<double>(al[i], be[i]) * std::pow(D[i], al[i] - be[i]);
      }
      bound += t;
    }
    worst = std::max(worst, bound);
  }
  rule.certified = worst;
  if (worst > delta) throw CertificationError("patch cubature did not reach the moment tolerance", worst, patch_id);
  return rule;
}

}  // namespace gravalloc
