#include "gravalloc/tails.hpp"

#include "gravalloc/kernel.hpp"
#include "gravalloc/parallel.hpp"
#include "gravalloc/pointfield.hpp"
#include "gravalloc/regions.hpp"
#include "gravalloc/rng.hpp"

#include <algorithm>
#include <random>

namespace gravalloc {

std::string to_string(TailStatistic s) {
  switch (s) {
    case TailStatistic::ForceAtOrigin: return "force";
    case TailStatistic::MaxForceOverBall: return "maxforce";
    case TailStatistic::PotentialAtOrigin: return "potential";
    case TailStatistic::PotentialDifference: return "potdiff";
  }
  return "?";
}

TailStatistic tail_statistic_from_string(const std::string& s) {
  if (s == "force") return TailStatistic::ForceAtOrigin;
  if (s == "maxforce") return TailStatistic::MaxForceOverBall;
  if (s == "potential") return TailStatistic::PotentialAtOrigin;
  if (s == "potdiff") return TailStatistic::PotentialDifference;
  throw ParameterError("unknown tail statistic '" + s + "'");
}

void TailSpec::validate() const {
  if (d < 3 || d > kMaxDim) throw ParameterError("dimension out of range");
  if (!(q > 0.0 && p > q)) throw ParameterError("need 0 < q < p");
  if (stat == TailStatistic::PotentialAtOrigin && d < 5) throw ParameterError("the potential needs d >= 5");
  if (stat == TailStatistic::MaxForceOverBall && !(ball_radius > 0.0 && ball_radius < q))
    throw ParameterError("probe ball must lie inside the inner radius");
  if (stat == TailStatistic::PotentialDifference && !(diff_distance > 0.0 && diff_distance < q))
    throw ParameterError("second point must lie inside the inner radius");
}

int TailSpec::q_exponent() const {
  return (stat == TailStatistic::PotentialAtOrigin || stat == TailStatistic::PotentialDifference) ? d - 4 : d - 2;
}

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double ph = k / nn;
  const double z2 = z * z;
  const double den = 1.0 + z2 / nn;
  const double mid = (ph + z2 / (2.0 * nn)) / den;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / den;
  return {std::max(0.0, mid - half), std::min(1.0, mid + half)};
}

namespace {

double potential_kernel(double r2, int d) { return std::pow(r2, 1.0 - 0.5 * d); }

}  // namespace

TailTable mc_tail(const TailSpec& spec, const std::vector<double>& thresholds, const TailConfig& cfg) {
  spec.validate();
  if (cfg.replicas < 1) throw ParameterError("need at least one replica");
  const int d = spec.d;
  const Vec origin = Vec::Zero(d);
  const Region A = Region::annulus(origin, spec.q, spec.p);
  const double vol = kappa(d) * (std::pow(spec.p, d) - std::pow(spec.q, d));

  // probes and their background terms
  PointList probes{origin};
  if (spec.stat == TailStatistic::MaxForceOverBall) {
    for (int i = 0; i < d; ++i) {
      probes.push_back(spec.ball_radius * unit_vector(d, i));
      probes.push_back(-spec.ball_radius * unit_vector(d, i));
    }
    for (int m = 0; m < (1 << d); ++m) {
      Vec x(d);
      for (int i = 0; i < d; ++i) x[i] = (m >> i & 1) ? 1.0 : -1.0;
      probes.push_back(x * spec.ball_radius / std::sqrt(static_cast<double>(d)));
    }
  }
  if (spec.stat == TailStatistic::PotentialDifference) probes.push_back(spec.diff_distance * unit_vector(d, 0));
  std::vector<Vec> bg_force;
  std::vector<double> bg_pot;
  for (const auto& x : probes) {
    bg_force.push_back(background_force(A, x).value);
    bg_pot.push_back(background_potential(A, x).value);
  }

  std::vector<double> stat(cfg.replicas);
  std::vector<double> counts(cfg.replicas);
  parallel_for(
      cfg.replicas, default_threads(cfg.threads),
      [&](std::size_t r) {
        Stream rng(cfg.seed, r, "mc-tail");
        std::poisson_distribution<long> pois(vol);
        std::normal_distribution<double> nd;
        const long N = pois(rng);
        counts[r] = static_cast<double>(N);
        std::vector<Vec> F(probes.size(), Vec::Zero(d));
        std::vector<double> U(probes.size(), 0.0);
        Vec z(d);
        const double qd = std::pow(spec.q, d), pd = std::pow(spec.p, d);
        for (long i = 0; i < N; ++i) {
          for (int c = 0; c < d; ++c) z[c] = nd(rng);
          double rad = std::pow(qd + rng.uniform() * (pd - qd), 1.0 / d);
          z *= rad / z.norm();
          for (std::size_t j = 0; j < probes.size(); ++j) {
            Vec v = z - probes[j];
            double r2 = v.squaredNorm();
            F[j] += inv_pow_d(r2, d) * v;
            U[j] += potential_kernel(r2, d);
          }
        }
        double s = 0.0;
        switch (spec.stat) {
          case TailStatistic::ForceAtOrigin:
            s = (F[0] - bg_force[0]).norm();
            break;
          case TailStatistic::MaxForceOverBall:
            for (std::size_t j = 0; j < probes.size(); ++j) s = std::max(s, (F[j] - bg_force[j]).norm());
            break;
          case TailStatistic::PotentialAtOrigin:
            s = std::abs(-U[0] + bg_pot[0]) / (d - 2.0);
            break;
          case TailStatistic::PotentialDifference:
            s = std::abs(-(U[0] - U[1]) + (bg_pot[0] - bg_pot[1])) / (d - 2.0);
            break;
        }
        stat[r] = s;
      },
      256);

  TailTable out;
  out.spec = spec;
  out.cfg = cfg;
  double csum = 0.0;
  for (double c : counts) csum += c;
  out.mean_count = csum / cfg.replicas;
  std::sort(stat.begin(), stat.end());
  for (double t : thresholds) {
    TailRow row;
    row.t = t;
    row.n = cfg.replicas;
    row.exceed = static_cast<std::size_t>(stat.end() - std::lower_bound(stat.begin(), stat.end(), t));
    row.p = static_cast<double>(row.exceed) / row.n;
    std::tie(row.lo, row.hi) = wilson_interval(row.exceed, row.n, cfg.z);
    row.censored = row.exceed < cfg.min_exceed;
    out.rows.push_back(row);
  }
  return out;
}

TailFit fit_tail(const TailTable& table, double p_max) {
  std::vector<double> xs, ys;
  for (const auto& r : table.rows) {
    if (r.censored || r.t <= 0.0 || r.p > p_max || r.exceed == 0) continue;
    xs.push_back(r.t * r.t);
    ys.push_back(std::log(r.p));
  }
  TailFit f;
  f.points = xs.size();
  if (xs.size() < 3) return f;
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

double TailBound::operator()(double t) const { return C * std::exp(-c * std::pow(q, e) * t * t); }

TailBound calibrate_tail_bound(const TailTable& calibration, double p_max) {
  TailFit f = fit_tail(calibration, p_max);
  if (f.points < 3 || !(f.slope < 0.0)) throw QualityError("calibration run has no usable decay");
  TailBound b;
  b.e = calibration.spec.q_exponent();
  b.q = calibration.spec.q;
  b.c = -f.slope / std::pow(b.q, b.e);
  b.C = 0.0;
  for (const auto& r : calibration.rows) {
    if (r.censored) continue;
    b.C = std::max(b.C, r.hi * std::exp(b.c * std::pow(b.q, b.e) * r.t * r.t));
  }
  return b;
}

bool apply_tail_bound(TailTable& table, const TailBound& bound) {
  bool ok = true;
  for (auto& r : table.rows) {
    r.bound = bound(r.t);
    if (!r.censored && r.lo > r.bound) ok = false;
  }
  return ok;
}

}  // namespace gravalloc
