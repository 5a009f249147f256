#include "gravalloc/rates.hpp"

#include "gravalloc/types.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace gravalloc {

namespace {

void check_dim(int d) {
  if (d < 3) throw ParameterError("rate functions need d >= 3");
}

Rational to_rational(double x) {
  // grid values only; 1e-9 resolution is plenty
  const long long den = 1000000000LL;
  return Rational(std::llround(x * den), den);
}

double to_double(Rational r) { return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator()); }

}  // namespace

Rational rate_f(int d, Rational gamma) {
  check_dim(d);
  if (gamma < 0) throw ParameterError("gamma must be nonnegative");
  if (d == 3) return gamma <= 1 ? Rational(3) - 2 * gamma : Rational(1);
  if (d == 4) {
    if (gamma <= Rational(4, 3)) return Rational(2) - gamma / 2;
    if (gamma <= Rational(3, 2)) return Rational(4) - 2 * gamma;
    return Rational(1);
  }
  if (gamma <= 2) return Rational(1) + (Rational(2) - gamma) / (d - 2);
  return Rational(1);
}

Rational rate_g(int d) {
  check_dim(d);
  if (d == 3) return Rational(1);
  return Rational(1) + Rational(1, d - 1);
}

Rational rate_h(int d, Rational delta) {
  check_dim(d);
  if (delta <= 0) throw ParameterError("delta must be positive");
  return Rational(1) + delta / (d - 2);
}

double rate_eval(int d, double x, RateKind which) {
  switch (which) {
    case RateKind::F:
      if (x < 0.0) throw ParameterError("gamma must be nonnegative");
      return to_double(rate_f(d, to_rational(x)));
    case RateKind::G:
      return to_double(rate_g(d));
    case RateKind::H:
      if (!(x > 0.0)) throw ParameterError("delta must be positive");
      return to_double(rate_h(d, to_rational(x)));
  }
  return 0.0;
}

std::vector<Rational> rate_kinks(int d) {
  check_dim(d);
  if (d == 3) return {Rational(1)};
  if (d == 4) return {Rational(4, 3), Rational(3, 2)};
  return {Rational(2)};
}

void write_rates_csv(std::ostream& out, int d_lo, int d_hi, int steps_per_unit, int gamma_max) {
  if (d_lo < 3 || d_hi < d_lo || steps_per_unit < 1 || gamma_max < 0) throw ParameterError("bad rates grid");
  out << "d,gamma,f,g,h_2mg\n";
  char buf[160];
  for (int d = d_lo; d <= d_hi; ++d) {
    for (int i = 0; i <= gamma_max * steps_per_unit; ++i) {
      Rational g(i, steps_per_unit);
      Rational two_minus = Rational(2) - g;
      double h = two_minus > 0 ? to_double(rate_h(d, two_minus)) : std::nan("");
      std::snprintf(buf, sizeof buf, "%d,%.10g,%.17g,%.17g,%.17g\n", d, to_double(g), to_double(rate_f(d, g)),
                    to_double(rate_g(d)), h);
      out << buf;
    }
  }
}

}  // namespace gravalloc
