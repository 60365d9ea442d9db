#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gfanm {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Errc {
  invalid_pole,
  invalid_size,
  invalid_band,
  design_infeasible,
  invalid_signal,
  shape_mismatch,
  invalid_input,
  extraction_deficit,
  ill_posed,
  estimation_infeasible,
};

const char* to_string(Errc code);

/// Base exception for every recoverable failure in the library.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Wraps an angle into [0, 2*pi).
inline double wrap_angle(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

/// Wraps an angle difference into (-pi, pi].
inline double wrap_difference(double delta) {
  double w = std::remainder(delta, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

}  // namespace gfanm
