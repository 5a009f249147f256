#pragma once

#include <boost/rational.hpp>

#include <iosfwd>
#include <vector>

namespace gravalloc {

using Rational = boost::rational<long long>;

enum class RateKind { F, G, H };

// tail exponents of the tentacle volume; exact in rational arithmetic
Rational rate_f(int d, Rational gamma);
Rational rate_g(int d);
Rational rate_h(int d, Rational delta);

double rate_eval(int d, double x, RateKind which);

// gamma values where f_d changes slope
std::vector<Rational> rate_kinks(int d);

// d in [d_lo, d_hi], gamma = 0, step, ..., gamma_max (step = 1/steps_per_unit)
void write_rates_csv(std::ostream& out, int d_lo, int d_hi, int steps_per_unit = 100, int gamma_max = 3);

}  // namespace gravalloc
