#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace gravalloc {

// Dimensions above this are never simulated; fixed capacity keeps small
// vectors off the heap in the inner loops.
inline constexpr int kMaxDim = 8;

template <typename Scalar>
using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
template <typename Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

using Vec = VecT<double>;
using Mat = MatT<double>;
using PointList = std::vector<Vec>;

inline Vec unit_vector(int d, int i) {
  Vec e = Vec::Zero(d);
  e[i] = 1.0;
  return e;
}

// Volume of the unit ball in R^d.
inline double kappa(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// Surface area of the unit sphere S^{m} embedded in R^{m+1}.
inline double sphere_area(int m) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

// Cylindrical radial component: projection of v on the transverse direction of x.
template <typename Derived1, typename Derived2>
double cylindrical_radial(const Eigen::MatrixBase<Derived1>& v, const Eigen::MatrixBase<Derived2>& x) {
  double s2 = x.tail(x.size() - 1).squaredNorm();
  if (s2 == 0.0) return 0.0;
  return v.tail(v.size() - 1).dot(x.tail(x.size() - 1)) / std::sqrt(s2);
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ToleranceError : public Error {
 public:
  ToleranceError(const std::string& what, double achieved) : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_increment)
      : Error(what), last_increment_(last_increment) {}
  double last_increment() const { return last_increment_; }

 private:
  double last_increment_;
};

class QualityError : public Error {
 public:
  using Error::Error;
};

class DegenerateCellError : public Error {
 public:
  using Error::Error;
};

class CertificationError : public Error {
 public:
  CertificationError(const std::string& what, double achieved, int patch = -1)
      : Error(what), achieved_(achieved), patch_(patch) {}
  double achieved() const { return achieved_; }
  int patch() const { return patch_; }

 private:
  double achieved_;
  int patch_;
};

}  // namespace gravalloc
