#include "gravalloc/taylor.hpp"

#include "gravalloc/kernel.hpp"
#include "gravalloc/rng.hpp"

#include <map>
#include <random>

namespace gravalloc {

namespace {

struct IndexTable {
  std::vector<MultiIndex> idx;
  std::map<MultiIndex, int> pos;
  std::vector<int> deg;
};

IndexTable make_table(int d, int k) {
  IndexTable t;
  t.idx = multi_indices(d, k, true);
  for (std::size_t j = 0; j < t.idx.size(); ++j) {
    t.pos[t.idx[j]] = static_cast<int>(j);
    t.deg.push_back(degree(t.idx[j], d));
  }
  return t;
}

}  // namespace

double default_c20(int d) {
  // fit_c20(d, 6, 4000, seed 20) rounded up; see the unit tests for the calibration
  switch (d) {
    case 3:
      return 2.2;
    case 4:
      return 2.2;
    case 5:
      return 2.2;
    default:
      return 2.2;
  }
}

TaylorModel taylor_model(const Vec& y, int k, double C20) {
  const int d = static_cast<int>(y.size());
  if (k < 0) throw ParameterError("Taylor degree must be nonnegative");
  if (y.norm() == 0.0) throw SingularityError("Taylor center at the singularity");
  IndexTable t = make_table(d, k);
  const std::size_t N = t.idx.size();
  // q = s^p with s(h) = |y|^2 + 2 y.h + |h|^2, p = -d/2, by homogeneous degree
  const double p = -0.5 * d;
  const double s0 = y.squaredNorm();
  std::vector<double> q(N, 0.0);
  q[0] = std::pow(s0, p);
  std::vector<double> a1(N), a2(N);
  for (int m = 1; m <= k; ++m) {
    std::fill(a1.begin(), a1.end(), 0.0);
    std::fill(a2.begin(), a2.end(), 0.0);
    for (std::size_t j = 0; j < N; ++j) {
      if (t.deg[j] == m - 1 && q[j] != 0.0) {
        for (int i = 0; i < d; ++i) {
          MultiIndex b = t.idx[j];
          ++b[i];
          a1[t.pos.at(b)] += 2.0 * y[i] * q[j];
        }
      }
      if (m >= 2 && t.deg[j] == m - 2 && q[j] != 0.0) {
        for (int i = 0; i < d; ++i) {
          MultiIndex b = t.idx[j];
          b[i] += 2;
          a2[t.pos.at(b)] += q[j];
        }
      }
    }
    for (std::size_t j = 0; j < N; ++j) {
      if (t.deg[j] != m) continue;
      q[j] = ((p - m + 1.0) * a1[j] + (2.0 * p - m + 2.0) * a2[j]) / (m * s0);
    }
  }
  TaylorModel mod;
  mod.y = y;
  mod.k = k;
  mod.d = d;
  mod.index = t.idx;
  mod.C20 = C20 > 0.0 ? C20 : default_c20(d);
  mod.coef.resize(N);
  for (std::size_t j = 0; j < N; ++j) {
    Vec c = y * q[j];
    for (int i = 0; i < d; ++i) {
      if (t.idx[j][i] == 0) continue;
      MultiIndex b = t.idx[j];
      --b[i];
      c[i] += q[t.pos.at(b)];
    }
    mod.coef[j] = c;
  }
  return mod;
}

Vec taylor_eval(const TaylorModel& m, const Vec& z) {
  Vec h = z - m.y;
  Vec out = Vec::Zero(m.d);
  for (std::size_t j = 0; j < m.index.size(); ++j) out += m.coef[j] * monomial(h, m.index[j]);
  return out;
}

double taylor_remainder_bound(const TaylorModel& m, const Vec& z) {
  const double ry = m.y.norm();
  const double dz = (z - m.y).norm();
  if (dz > ry / m.C20) throw RangeError("point outside the certified Taylor radius");
  if (m.k == 0 && dz == 0.0) return 0.0;
  return m.C20 * std::pow(std::max(m.k, 1), m.d) * std::pow(ry, 1.0 - m.d) *
         std::pow(2.0 * m.d * dz / ry, m.k + 1);
}

double taylor_coefficient_bound(const TaylorModel& m, int order) {
  const double ry = m.y.norm();
  return m.C20 * std::pow(ry, 1.0 - m.d) * std::pow(2.0 * m.d / ry, order);
}

namespace {

Vec random_direction(Stream& rng, int d) {
  std::normal_distribution<double> nd;
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = nd(rng);
  return v.normalized();
}

}  // namespace

C20Fit fit_c20(int d, int kmax, std::size_t samples, std::uint64_t seed, double margin) {
  C20Fit fit;
  Stream rng(seed, static_cast<std::uint64_t>(d), "c20-fit");
  for (std::size_t s = 0; s < samples; ++s) {
    Vec y = rng.uniform(2.0, 10.0) * random_direction(rng, d);
    TaylorModel m = taylor_model(y, kmax, 1.0);
    const double ry = y.norm();
    for (std::size_t j = 0; j < m.index.size(); ++j) {
      int o = degree(m.index[j], d);
      double b = std::pow(ry, 1.0 - d) * std::pow(2.0 * d / ry, o);
      fit.coef_ratio = std::max(fit.coef_ratio, m.coef[j].norm() / b);
    }
    Vec z = y + ry / 20.0 * std::pow(rng.uniform(), 1.0 / d) * random_direction(rng, d);
    Vec gz = g_kernel<double>(z);
    for (int k = 1; k <= kmax; ++k) {
      TaylorModel mk = taylor_model(y, k, 1.0);
      double dz = (z - y).norm();
      double b = std::pow(k, d) * std::pow(ry, 1.0 - d) * std::pow(2.0 * d * dz / ry, k + 1);
      double err = (gz - taylor_eval(mk, z)).norm();
      double slack = 64.0 * std::numeric_limits<double>::epsilon() * gz.norm();
      if (err > slack) fit.rem_ratio = std::max(fit.rem_ratio, (err - slack) / b);
    }
  }
  fit.raw = std::max(fit.coef_ratio, fit.rem_ratio);
  fit.value = std::max(2.0, fit.raw) * margin;
  return fit;
}

ForceEventResult check_force_approx_event(const ForceEventInput& in) {
  const int d = static_cast<int>(in.y.size());
  const int k = in.k;
  if (k < 1) throw ParameterError("moment degree must be at least 1");
  if (in.law_nodes.size() != in.law_weights.size() || in.law_nodes.empty())
    throw ParameterError("law quadrature malformed");
  const double C20 = in.C20 > 0.0 ? in.C20 : default_c20(d);
  const double n = static_cast<double>(in.Y.size());
  const long P = polydim(k, d);
  ForceEventResult res;
  for (const auto& w : in.Y) res.rho = std::max(res.rho, (w - in.y).norm());
  for (const auto& w : in.law_nodes) res.rho = std::max(res.rho, (w - in.y).norm());
  res.r_condition = in.r > C20 * res.rho;
  res.t_condition =
      in.t > 3.0 * C20 * n * std::pow(k, d) / std::pow(in.r, d - 1) * std::pow(2.0 * d * res.rho / in.r, k + 1);
  res.preconditions = res.r_condition && res.t_condition;

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(P), mean = Eigen::VectorXd::Zero(P);
  for (const auto& w : in.Y) sum += moment_map(w - in.y, k).entries;
  for (std::size_t j = 0; j < in.law_nodes.size(); ++j)
    mean += in.law_weights[j] * moment_map(in.law_nodes[j] - in.y, k).entries;
  res.omega_lhs = (sum - n * mean).norm();
  const double c30 = 0.99 / (3.0 * C20);
  res.omega_threshold = c30 * in.t * std::pow(in.r, d - 1) / std::sqrt(static_cast<double>(P)) *
                        std::pow(in.r / (2.0 * d + in.r), k);
  res.omega = res.omega_lhs <= res.omega_threshold;

  Stream rng(in.seed, 0, "force-event");
  for (double f : {1.0, 1.5, 2.0, 4.0}) {
    for (int s = 0; s < in.directions; ++s) {
      Vec x = in.y + f * in.r * random_direction(rng, d);
      Vec dev = Vec::Zero(d);
      for (const auto& w : in.Y) dev += g_kernel<double>(Vec(w - x));
      for (std::size_t j = 0; j < in.law_nodes.size(); ++j)
        dev -= n * in.law_weights[j] * g_kernel<double>(Vec(in.law_nodes[j] - x));
      res.max_deviation = std::max(res.max_deviation, dev.norm());
    }
  }
  res.event = res.max_deviation <= in.t;
  if (!res.preconditions) res.status = "inconclusive";
  else if (!res.omega) res.status = "omega-fails";
  else if (res.event) res.status = "pass";
  else res.status = "violated";
  return res;
}

}  // namespace gravalloc
