#include "gravalloc/flow.hpp"

#include "gravalloc/integrator.hpp"
#include "gravalloc/rng.hpp"

#include <Eigen/LU>

#include <random>

namespace gravalloc {

void FlowPolicy::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ParameterError("integrator tolerances must be positive");
  if (!(max_step > 0.0)) throw ParameterError("max step must be positive");
  if (!(clamp > 0.0 && clamp < 1.0)) throw ParameterError("step clamp must lie in (0,1)");
  if (!(r_cap > 0.0)) throw ParameterError("capture radius must be positive");
  if (!(max_time > 0.0)) throw ParameterError("max time must be positive");
}

Trajectory integrate_flow(const Vec& x0, const ForceField& field, const FlowPolicy& policy) {
  policy.validate();
  const int d = field.dim();
  if (x0.size() != d) throw ParameterError("start point has the wrong dimension");
  const double sign = policy.backward ? -1.0 : 1.0;

  Trajectory tr;
  Nearest last;
  auto rhs = [&](const State& s, State& ds) {
    last = field.force(s.data(), ds.data());
    ds.head(d) *= sign;
    ds[d] = ds.head(d).norm();
    ++tr.evaluations;
  };
  Dopri5 stepper(rhs);

  State y(d + 1), k1(d + 1), ynew(d + 1), k1new(d + 1), err(d + 1);
  y.head(d) = x0;
  field.wrap(y.data());
  y[d] = 0.0;
  rhs(y, k1);
  Nearest near = last;
  if (!policy.backward && near.distance < policy.r_cap) throw PreconditionError("start point within the capture radius");

  const bool pot = policy.record_potential && field.has_potential();
  const double u0 = pot ? field.potential(y.head(d)) : 0.0;
  auto record = [&](double t) {
    if (!policy.record) return;
    Sample s;
    s.t = t;
    s.x = y.head(d);
    s.u = pot ? field.potential(s.x) - u0 : 0.0;
    s.L = y[d];
    tr.samples.push_back(std::move(s));
  };
  auto finish = [&](double t, Terminal term) {
    tr.terminal = term;
    tr.time = t;
    tr.length = y[d];
    tr.end = y.head(d);
    if (term == Terminal::Captured) tr.star = near.index;
    return tr;
  };

  double t = 0.0;
  record(t);
  double h = policy.max_step;
  while (true) {
    if (tr.steps >= policy.max_steps) {
      finish(t, Terminal::Timeout);
      throw IntegrationError("step limit reached", tr);
    }
    double speed = k1.head(d).norm();
    double hmax = policy.max_step;
    if (speed > 0.0 && std::isfinite(near.distance)) hmax = std::min(hmax, policy.clamp * near.distance / speed);
    h = std::min({h, hmax, policy.max_time - t});
    if (h < 1e-15 * std::max(1.0, t)) {
      finish(t, Terminal::Timeout);
      throw IntegrationError("step size underflow", tr);
    }
    stepper.step(y, k1, h, ynew, k1new, err);
    double e = error_norm(err, y, ynew, policy.atol, policy.rtol, d);
    if (!std::isfinite(e)) {
      h *= 0.2;
      continue;
    }
    if (e <= 1.0) {
      bool last_step = (t + h >= policy.max_time);
      t = last_step ? policy.max_time : t + h;
      y = ynew;
      k1 = k1new;
      near = last;
      field.wrap(y.data());
      ++tr.steps;
      record(t);
      if (!policy.backward) {
        if (near.distance < policy.r_cap) return finish(t, Terminal::Captured);
        if (policy.capture_ball && near.distance < field.capture_radius(near.index))
          return finish(t, Terminal::Captured);
      }
      if (!field.inside(y.head(d))) return finish(t, Terminal::LeftDomain);
      if (last_step) return finish(t, Terminal::Timeout);
      h *= std::clamp(0.9 * std::pow(std::max(e, 1e-10), -0.2), 0.2, 5.0);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
    }
  }
}

TimePotentialReport check_time_potential(const Trajectory& traj, double eps_tol) {
  TimePotentialReport rep;
  rep.eps_tol = eps_tol;
  if (traj.samples.size() < 2) return rep;
  const Sample& s0 = traj.samples.front();
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const Sample& s = traj.samples[k];
    double t = s.t - s0.t;
    double L = s.L - s0.L;
    double du = s0.u - s.u;
    double ratio;
    if (L == 0.0) ratio = 0.0;
    else if (du <= 0.0 || t <= 0.0) ratio = std::numeric_limits<double>::infinity();
    else ratio = L * L / (t * du);
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    ++rep.prefixes;
  }
  rep.holds = rep.worst_ratio <= 1.0 + eps_tol;
  return rep;
}

double max_potential_increase(const Trajectory& traj) {
  double m = 0.0;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) m = std::max(m, traj.samples[k].u - traj.samples[k - 1].u);
  return m;
}

namespace {

Vec uniform_in_ball(Stream& rng, const Vec& c, double r) {
  const int d = static_cast<int>(c.size());
  std::normal_distribution<double> nd;
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = nd(rng);
  v.normalize();
  return c + r * std::pow(rng.uniform(), 1.0 / d) * v;
}

}  // namespace

LiouvilleResult liouville_ratio(const Region& ball, const ForceField& field, double t, Direction direction,
                                std::size_t samples, std::uint64_t seed, FlowPolicy policy, double h) {
  if (ball.kind != RegionKind::Ball) throw ParameterError("Liouville ratio needs a ball");
  if (!(t >= 0.0)) throw ParameterError("time must be nonnegative");
  auto div = field.divergence();
  if (!div) throw UnsupportedError("field has no constant divergence");
  LiouvilleResult res;
  res.samples = samples;
  res.target = std::exp((direction == Direction::Forward ? 1.0 : -1.0) * *div * t);
  if (t == 0.0) return res;
  const int d = field.dim();
  policy.max_time = t;
  policy.record = false;
  policy.capture_ball = false;
  policy.backward = direction == Direction::Backward;
  Stream rng(seed, 0, "liouville");
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Vec x = uniform_in_ball(rng, ball.center, ball.r);
    Mat J(d, d);
    for (int i = 0; i < d; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      Trajectory a = integrate_flow(xp, field, policy);
      Trajectory b = integrate_flow(xm, field, policy);
      if (a.terminal != Terminal::Timeout || b.terminal != Terminal::Timeout)
        throw PreconditionError("a transported point reached a star before time t");
      J.col(i) = field.displacement(b.end, a.end) / (2.0 * h);
    }
    double det = J.determinant();
    sum += det;
    sum2 += det * det;
  }
  double n = static_cast<double>(samples);
  res.ratio = sum / n;
  res.std_error = samples > 1 ? std::sqrt(std::max(0.0, sum2 / n - res.ratio * res.ratio) / (n - 1.0)) : 0.0;
  return res;
}

std::vector<FlowTimePoint> flow_time_law(const PeriodicField& field, const std::vector<double>& times,
                                         std::size_t samples, std::uint64_t seed, FlowPolicy policy) {
  if (times.empty()) return {};
  const int d = field.dim();
  policy.max_time = *std::max_element(times.begin(), times.end());
  policy.record = false;
  policy.capture_ball = false;
  policy.backward = false;
  Stream rng(seed, 0, "flow-time");
  std::vector<std::size_t> survive(times.size(), 0);
  std::size_t used = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = field.lower()[i] + field.side() * rng.uniform();
    if (field.nearest(x).distance < policy.r_cap) continue;
    ++used;
    Trajectory tr = integrate_flow(x, field, policy);
    double tc = tr.terminal == Terminal::Captured ? tr.time : std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (tc >= times[k]) ++survive[k];
    }
  }
  const double rate = *field.divergence();
  std::vector<FlowTimePoint> out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    FlowTimePoint p;
    p.t = times[k];
    p.fraction = static_cast<double>(survive[k]) / used;
    p.target = std::exp(-rate * times[k]);
    p.std_error = std::sqrt(p.target * (1.0 - p.target) / used);
    p.z = (p.fraction - p.target) / p.std_error;
    out.push_back(p);
  }
  return out;
}

}  // namespace gravalloc
