#pragma once

#include "gravalloc/pointfield.hpp"
#include "gravalloc/quadrature.hpp"

namespace gravalloc {

struct VecIntegral {
  Vec value;
  double error = 0.0;
};

// Integral over A of g(z - x) dz.
VecIntegral background_force(const Region& A, const Vec& x, double rel_tol = 1e-10);

// Integral over A of |z - x|^{2-d} dz.
QuadResult background_potential(const Region& A, const Vec& x, double rel_tol = 1e-10);

// Component i of the integral of g(z - x) over the box [lo, hi].
QuadResult box_force_component(const Vec& lo, const Vec& hi, const Vec& x, int i, double rel_tol = 1e-10);

// Integral over [a,b] of (u^2 + rho^2)^{-p/2} du, p >= 1, rho > 0.
double axial_integral(int p, double a, double b, double rho);

// Integral over [0, theta] of cos^m, m >= 0.
double cos_power_integral(int m, double theta);

}  // namespace gravalloc
