#pragma once

#include "gravalloc/fields.hpp"

#include <cstdint>
#include <vector>

namespace gravalloc {

enum class Terminal { Captured, Timeout, LeftDomain };

struct Sample {
  double t = 0.0;
  Vec x;
  double u = 0.0;  // potential relative to the start point
  double L = 0.0;  // arclength so far
};

struct Trajectory {
  std::vector<Sample> samples;
  Terminal terminal = Terminal::Timeout;
  int star = -1;
  double time = 0.0;
  double length = 0.0;
  Vec end;
  std::size_t steps = 0;
  std::size_t evaluations = 0;
};

struct FlowPolicy {
  double rtol = 1e-6;
  double atol = 1e-6;
  double max_step = 0.1;
  double clamp = 0.1;  // displacement per step <= clamp * distance to nearest star
  double r_cap = 1e-3;
  double max_time = 1e3;
  std::size_t max_steps = 1000000;
  bool record = true;
  bool record_potential = false;
  // Stop as soon as the point enters a certified capture ball.
  bool capture_ball = false;
  bool backward = false;  // integrate x' = -F

  void validate() const;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, Trajectory partial) : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

Trajectory integrate_flow(const Vec& x0, const ForceField& field, const FlowPolicy& policy);

struct TimePotentialReport {
  double worst_ratio = 0.0;  // max over prefixes of L^2 / (t dU)
  std::size_t prefixes = 0;
  bool holds = true;
  double eps_tol = 0.0;
};

// Needs samples recorded with potentials.
TimePotentialReport check_time_potential(const Trajectory& traj, double eps_tol = 1e-2);

// Largest increase of the potential between consecutive samples.
double max_potential_increase(const Trajectory& traj);

enum class Direction { Forward, Backward };

struct LiouvilleResult {
  double ratio = 1.0;
  double std_error = 0.0;
  double target = 1.0;
  std::size_t samples = 0;
};

// Vol(A_t)/Vol(A) for a ball A transported for time t, by Monte Carlo over
// A of the finite-difference Jacobian determinant of the time-t map.
LiouvilleResult liouville_ratio(const Region& ball, const ForceField& field, double t, Direction direction,
                                std::size_t samples, std::uint64_t seed, FlowPolicy policy = {}, double h = 1e-4);

struct FlowTimePoint {
  double t = 0.0;
  double fraction = 0.0;
  double std_error = 0.0;
  double target = 0.0;
  double z = 0.0;
};

// Fraction of the torus whose capture time is >= t, against exp(-div t).
std::vector<FlowTimePoint> flow_time_law(const PeriodicField& field, const std::vector<double>& times,
                                         std::size_t samples, std::uint64_t seed, FlowPolicy policy = {});

}  // namespace gravalloc
