#include "gravalloc/periodic.hpp"

#include "gravalloc/kernel.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <map>
#include <mutex>
#include <numbers>

namespace gravalloc {

namespace {

// Enumerate integer vectors with sup-norm <= m.
template <class F>
void for_each_lattice(int d, int m, F&& f) {
  std::vector<int> n(d, -m);
  while (true) {
    f(n);
    int i = 0;
    while (i < d && ++n[i] > m) {
      n[i] = -m;
      ++i;
    }
    if (i == d) break;
  }
}

}  // namespace

PeriodicKernel::PeriodicKernel(int d, double side, bool tabulate)
    : d_(d), side_(side), volume_(std::pow(side, d)), alpha_(2.5 / side), kappa_(kappa(d)) {
  if (d < 3 || d > kMaxDim) throw ParameterError("periodic kernel dimension out of range");
  if (!(side > 0.0)) throw ParameterError("torus side must be positive");
  const double cut = 2.6 * side;
  for_each_lattice(d, 3, [&](const std::vector<int>& n) {
    bool zero = true;
    Vec t(d);
    for (int i = 0; i < d; ++i) {
      t[i] = n[i] * side;
      zero = zero && n[i] == 0;
    }
    if (zero) return;
    if (t.norm() - 0.5 * std::sqrt(double(d)) * side > cut) return;
    images_.push_back(t);
  });
  const int mmax = 5;
  for_each_lattice(d, mmax, [&](const std::vector<int>& m) {
    int m2 = 0;
    for (int v : m) m2 += v * v;
    if (m2 == 0 || m2 > 28) return;
    // half space: first nonzero entry positive
    for (int v : m) {
      if (v < 0) return;
      if (v > 0) break;
    }
    Vec k(d);
    for (int i = 0; i < d; ++i) k[i] = 2.0 * std::numbers::pi * m[i] / side;
    double k2 = k.squaredNorm();
    kvecs_.push_back(k);
    kcoef_.push_back(2.0 * d * kappa_ / volume_ * std::exp(-k2 / (4.0 * alpha_ * alpha_)) / k2);
  });
  if (tabulate && d <= 4) build_table();
}

std::shared_ptr<const PeriodicKernel> PeriodicKernel::get(int d, double side) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::shared_ptr<const PeriodicKernel>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(d, side);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto k = std::make_shared<const PeriodicKernel>(d, side);
  cache[key] = k;
  return k;
}

namespace {

// h'(rho) = Q rho^{1-d} + 2 a^s/(s Gamma(s/2)) rho^{-1} exp(-a^2 rho^2), s = d - 2
struct RealSpace {
  int d;
  double alpha;
  double s;
  double a;
  double pref;

  RealSpace(int d_, double alpha_) : d(d_), alpha(alpha_), s(d_ - 2.0), a(0.5 * (d_ - 2.0)) {
    pref = 2.0 * std::pow(alpha, s) / (s * std::tgamma(a));
  }

  double Q(double u) const {
    if (d == 3) return std::erfc(u);
    if (d == 4) return std::exp(-u * u);
    return boost::math::gamma_q(a, u * u);
  }
  double P(double u) const {
    if (d == 3) return std::erf(u);
    if (d == 4) return -std::expm1(-u * u);
    return boost::math::gamma_p(a, u * u);
  }
  double dh(double rho) const {
    return Q(alpha * rho) * std::pow(rho, 1.0 - d) + pref / rho * std::exp(-alpha * alpha * rho * rho);
  }
  // dh(rho) - rho^{1-d}, regular as rho -> 0 after multiplying by rho
  double dh_minus_g(double rho) const {
    return -P(alpha * rho) * std::pow(rho, 1.0 - d) + pref / rho * std::exp(-alpha * alpha * rho * rho);
  }
  double h(double rho) const { return -Q(alpha * rho) * std::pow(rho, -s) / s; }
};

}  // namespace

Vec PeriodicKernel::near_term(const Vec& r) const {
  RealSpace rs(d_, alpha_);
  double rho = r.norm();
  if (rho < 1e-6 * side_) {
    // small-rho limit of dh_minus_g(rho)/rho: -alpha^d / Gamma(d/2 + 1)
    double c = -std::pow(alpha_, d_) / std::tgamma(0.5 * d_ + 1.0);
    return c * r;
  }
  return rs.dh_minus_g(rho) / rho * r;
}

Vec PeriodicKernel::residual_direct(const Vec& r) const {
  RealSpace rs(d_, alpha_);
  Vec out = near_term(r);
  for (const Vec& t : images_) {
    Vec v = r + t;
    double rho = v.norm();
    out += rs.dh(rho) / rho * v;
  }
  for (std::size_t j = 0; j < kvecs_.size(); ++j) {
    out += kcoef_[j] * std::sin(kvecs_[j].dot(r)) * kvecs_[j];
  }
  out += (kappa_ / volume_) * r;
  return out;
}

Vec PeriodicKernel::force_direct(const Vec& r) const {
  return g_kernel<double>(r) - (kappa_ / volume_) * r + residual_direct(r);
}

double PeriodicKernel::potential_direct(const Vec& r) const {
  RealSpace rs(d_, alpha_);
  double rho = r.norm();
  if (rho == 0.0) throw SingularityError("periodic potential at a star");
  double out = rs.h(rho);
  for (const Vec& t : images_) out += rs.h((r + t).norm());
  for (std::size_t j = 0; j < kvecs_.size(); ++j) out -= kcoef_[j] * std::cos(kvecs_[j].dot(r));
  return out;
}

void PeriodicKernel::build_table() {
  n_table_ = d_ == 3 ? 96 : 24;
  h_table_ = side_ / n_table_;
  inv_h_ = 1.0 / h_table_;
  const int np = n_table_ + 1;
  strides_.assign(d_, 1);
  for (int i = 1; i < d_; ++i) strides_[i] = strides_[i - 1] * np;
  long total = strides_[d_ - 1] * np;
  table_.assign(total * d_, 0.0);
  const int half = n_table_ / 2;
  // octant r >= 0, then mirror
  std::vector<int> idx(d_, half);
  while (true) {
    Vec r(d_);
    for (int i = 0; i < d_; ++i) r[i] = (idx[i] - half) * h_table_;
    Vec c = residual_direct(r);
    // all sign patterns
    for (int mask = 0; mask < (1 << d_); ++mask) {
      long off = 0;
      bool dup = false;
      for (int i = 0; i < d_; ++i) {
        int ii = idx[i];
        if (mask & (1 << i)) {
          if (ii == half) dup = true;
          ii = n_table_ - ii;
        }
        off += ii * strides_[i];
      }
      if (dup) continue;
      for (int comp = 0; comp < d_; ++comp) {
        double sign = (mask & (1 << comp)) ? -1.0 : 1.0;
        table_[off * d_ + comp] = sign * c[comp];
      }
    }
    int i = 0;
    while (i < d_ && ++idx[i] > n_table_) {
      idx[i] = half;
      ++i;
    }
    if (i == d_) break;
  }
  // Lipschitz bound from node differences
  double lip = 0.0;
  std::vector<int> id(d_, 0);
  for (long node = 0; node < total; ++node) {
    long rem = node;
    bool edge = false;
    for (int i = 0; i < d_; ++i) {
      id[i] = static_cast<int>(rem % np);
      rem /= np;
      if (id[i] == n_table_) edge = true;
    }
    if (edge) continue;
    double fro = 0.0;
    for (int j = 0; j < d_; ++j) {
      long nb = node + strides_[j];
      for (int comp = 0; comp < d_; ++comp) {
        double der = (table_[nb * d_ + comp] - table_[node * d_ + comp]) / h_table_;
        fro += der * der;
      }
    }
    lip = std::max(lip, std::sqrt(fro));
  }
  lip_ = 1.25 * lip;
}

void PeriodicKernel::residual(const double* r, double* out) const {
  const int d = d_;
  if (d == 3) {
    residual3(r, out);
    return;
  }
  int base[kMaxDim];
  double t[kMaxDim];
  for (int i = 0; i < d; ++i) {
    double u = (r[i] + 0.5 * side_) / h_table_;
    int k = static_cast<int>(u);
    if (k < 0) k = 0;
    if (k > n_table_ - 1) k = n_table_ - 1;
    base[i] = k;
    t[i] = u - k;
  }
  for (int c = 0; c < d; ++c) out[c] = 0.0;
  for (int mask = 0; mask < (1 << d); ++mask) {
    double w = 1.0;
    long off = 0;
    for (int i = 0; i < d; ++i) {
      int bit = (mask >> i) & 1;
      w *= bit ? t[i] : 1.0 - t[i];
      off += (base[i] + bit) * strides_[i];
    }
    const double* p = &table_[off * d];
    for (int c = 0; c < d; ++c) out[c] += w * p[c];
  }
}

Vec PeriodicKernel::residual(const Vec& r) const {
  if (table_.empty()) return residual_direct(r);
  Vec out(d_);
  residual(r.data(), out.data());
  return out;
}

Vec PeriodicKernel::force(const Vec& r) const {
  return g_kernel<double>(r) - (kappa_ / volume_) * r + residual(r);
}

}  // namespace gravalloc
