#include "gravalloc/moments.hpp"

#include "gravalloc/rng.hpp"

#include <Eigen/Cholesky>
#include <boost/math/special_functions/binomial.hpp>

#include <algorithm>

namespace gravalloc {

long polydim(int k, int d) {
  if (k < 0 || d < 1) throw ParameterError("polydim needs k >= 0 and d >= 1");
  return std::lround(boost::math::binomial_coefficient<double>(k + d, d)) - 1;
}

namespace {

void fill_degree(int d, int pos, int left, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (pos == d - 1) {
    cur[pos] = left;
    out.push_back(cur);
    return;
  }
  for (int e = left; e >= 0; --e) {
    cur[pos] = e;
    fill_degree(d, pos + 1, left - e, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace

std::vector<MultiIndex> multi_indices(int d, int k, bool include_zero) {
  if (d < 1 || d > kMaxDim) throw ParameterError("dimension out of range");
  std::vector<MultiIndex> out;
  MultiIndex cur{};
  for (int m = include_zero ? 0 : 1; m <= k; ++m) fill_degree(d, 0, m, cur, out);
  return out;
}

int degree(const MultiIndex& a, int d) {
  int s = 0;
  for (int i = 0; i < d; ++i) s += a[i];
  return s;
}

double monomial(const Vec& x, const MultiIndex& a) {
  double p = 1.0;
  for (int i = 0; i < x.size(); ++i) {
    for (int e = 0; e < a[i]; ++e) p *= x[i];
  }
  return p;
}

MomentVector moment_map(const Vec& x, int k) {
  if (k < 1) throw ParameterError("moment degree must be at least 1");
  const int d = static_cast<int>(x.size());
  MomentVector m;
  m.k = k;
  m.d = d;
  auto idx = multi_indices(d, k);
  m.entries.resize(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) m.entries[j] = monomial(x, idx[j]);
  return m;
}

int m0(int d, int k, double delta) {
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  const double rhs = std::log(delta / (2.0 * d * std::pow(2.0, k)));
  for (int m = 1;; ++m) {
    // compare logs: (m+1) log(k e/(m+1))
    if ((m + 1) * std::log(k * std::exp(1.0) / (m + 1)) <= rhs) return m;
  }
}

DensityEstimate empirical_density_check(int n, int k, int d, std::size_t replicas, std::uint64_t seed, int bootstrap,
                                        double level) {
  if (n < 10) throw ParameterError("n too small");
  const long P = polydim(k, d);
  if (P > 6) throw UnsupportedError("moment dimension too large for kernel density estimation");
  auto idx = multi_indices(d, k);
  // exact mean of x^a for x uniform on [-1,1]^d: prod 1/(a_i+1) for even a_i, else 0
  Eigen::VectorXd mean(P);
  for (long j = 0; j < P; ++j) {
    double m = 1.0;
    for (int i = 0; i < d; ++i) m *= (idx[j][i] % 2 == 0) ? 1.0 / (idx[j][i] + 1.0) : 0.0;
    mean[j] = m;
  }
  Eigen::MatrixXd S(P, replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    Stream rng(seed, r, "density");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(P);
    Vec x(d);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < d; ++c) x[c] = rng.uniform(-1.0, 1.0);
      for (long j = 0; j < P; ++j) sum[j] += monomial(x, idx[j]);
    }
    S.col(r) = (sum - n * mean) / std::sqrt(static_cast<double>(n));
  }
  // whiten with the sample covariance, Gaussian product kernel, Scott bandwidth
  Eigen::VectorXd mu = S.rowwise().mean();
  Eigen::MatrixXd C = S.colwise() - mu;
  Eigen::MatrixXd cov = C * C.transpose() / (replicas - 1.0);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw QualityError("singular moment covariance");
  Eigen::MatrixXd Z = llt.matrixL().solve(S);  // whitened samples, evaluation point 0 maps to 0
  double logdet = 0.0;
  for (long j = 0; j < P; ++j) logdet += std::log(llt.matrixL()(j, j));
  const double h = std::pow(static_cast<double>(replicas), -1.0 / (P + 4.0));
  const double norm = std::exp(-logdet) / (std::pow(2.0 * std::numbers::pi, 0.5 * P) * std::pow(h, P));
  std::vector<double> kv(replicas);
  for (std::size_t r = 0; r < replicas; ++r) kv[r] = norm * std::exp(-0.5 * Z.col(r).squaredNorm() / (h * h));
  DensityEstimate out;
  out.dim = P;
  out.replicas = replicas;
  out.bandwidth = h;
  double est = 0.0;
  for (double v : kv) est += v;
  out.estimate = est / replicas;
  std::vector<double> boot;
  Stream brng(seed, replicas, "density-bootstrap");
  for (int b = 0; b < bootstrap; ++b) {
    double s = 0.0;
    for (std::size_t r = 0; r < replicas; ++r) {
      std::size_t j = static_cast<std::size_t>(brng.uniform() * replicas);
      s += kv[std::min(j, replicas - 1)];
    }
    boot.push_back(s / replicas);
  }
  std::sort(boot.begin(), boot.end());
  std::size_t q = static_cast<std::size_t>(std::floor((1.0 - level) * bootstrap));
  out.lower_bound = boot.empty() ? out.estimate : boot[std::min(q, boot.size() - 1)];
  return out;
}

}  // namespace gravalloc
