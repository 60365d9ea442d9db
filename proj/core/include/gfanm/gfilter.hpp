#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gfanm/types.hpp"

namespace gfanm {

/// Single-input state-space filter bank x(t+1) = A x(t) + b y(t).
///
/// Instances always satisfy rho(A) < 1 and (A, b) reachable. Filters
/// produced by make_allpass_cascade() also satisfy A A* + b b* = I and
/// remember their repeated pole.
class GFilter {
 public:
  /// Validates a hand-built pair. Throws Error(shape_mismatch) on bad
  /// dimensions, Error(invalid_pole) if rho(A) >= 1 and
  /// Error(invalid_input) if the pair is not reachable.
  static GFilter from_pair(CMatrix a, CVector b);

  int size() const noexcept { return static_cast<int>(b_.size()); }
  const CMatrix& A() const noexcept { return a_; }
  const CVector& b() const noexcept { return b_; }
  const std::optional<Complex>& pole() const noexcept { return pole_; }
  bool lower_triangular() const noexcept { return lower_triangular_; }

 private:
  friend GFilter make_allpass_cascade(Complex pole, int n);
  GFilter(CMatrix a, CVector b, std::optional<Complex> pole, bool lower);

  CMatrix a_;
  CVector b_;
  std::optional<Complex> pole_;
  bool lower_triangular_ = false;
};

/// Cascade of n identical first-order all-pass sections with pole p.
/// The realization is lower triangular and co-isometric.
GFilter make_allpass_cascade(Complex pole, int n);

/// Band-selective cascade: pole phase at the band midpoint, pole radius
/// chosen so the squared gain at the band edges is half the peak.
GFilter design_band_filter(double theta_lo, double theta_hi, int n);

/// G(e^{i theta}) = (e^{i theta} I - A)^{-1} b.
CVector transfer(const GFilter& filter, double theta);

/// ||G(e^{i theta})||^2.
double gain(const GFilter& filter, double theta);

/// Minimal k >= 0 with ||A^k||_2 < eps.
int settle_length(const GFilter& filter, double eps);

/// Controllability Gramian P solving P = A P A* + b b*.
CMatrix controllability_gramian(const GFilter& filter);

struct FilterOutput {
  CVector x;  // x(L), the single retained state
  int settle_length = 0;
  int discarded = 0;
  bool transient_warning = false;
};

inline constexpr double kDefaultSettleEps = 1e-3;

/// Final state x(L) of the recursion started from x(0) = 0.
CVector run_filter(const GFilter& filter, std::span<const Complex> y);

/// Runs the recursion from x(0) = 0 over the whole record and keeps x(L).
FilterOutput filter_signal(const GFilter& filter, std::span<const Complex> y,
                           double eps = kDefaultSettleEps);

}  // namespace gfanm
