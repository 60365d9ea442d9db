#pragma once

#include <span>
#include <vector>

#include "gfanm/gfilter.hpp"

namespace gfanm {

/// Eigenvalue-gap rule for the number of spectral lines: the first k with
/// lambda_{k+1} < abs_floor or lambda_k / lambda_{k+1} > ratio_gap.
struct RankRule {
  double abs_floor = 1e-3;
  double ratio_gap = 1e3;
};

/// eigs must be sorted descending; negative entries count as zero.
/// Returns 0 when every eigenvalue is below the floor.
int numerical_rank(std::span<const double> eigs, const RankRule& rule = {});

struct CurvePoint {
  double theta = 0.0;
  double value = 0.0;
};

/// ||N* G(e^{i theta})||^2 / ||G(e^{i theta})||^2 for a noise basis N with
/// orthonormal columns. Zero when N has no columns.
double dbar_at(const GFilter& filter, const CMatrix& noise_basis, double theta);

/// dbar_at() on the uniform grid theta_j = 2*pi*j / grid_size.
std::vector<CurvePoint> dbar_curve(const GFilter& filter, const CMatrix& noise_basis,
                                   int grid_size);

struct LineEstimate {
  std::vector<double> freqs;   // strictly increasing, in [0, 2*pi)
  std::vector<double> powers;  // same length as freqs
  int rank = 0;
  std::vector<CurvePoint> dbar;  // empty unless requested
  RVector eigenvalues;           // descending
  bool rank_clamped = false;     // numerical rank was n and got reduced to n-1
};

struct CfOptions {
  RankRule rule{};
  int grid_size = 8192;
  double refine_tol = 1e-10;
  bool keep_curve = true;
};

/// Thrown when d-bar has fewer local minima than the numerical rank.
class ExtractionDeficit : public Error {
 public:
  ExtractionDeficit(LineEstimate partial, int requested);

  const LineEstimate& partial() const noexcept { return partial_; }
  int requested() const noexcept { return requested_; }

 private:
  LineEstimate partial_;
  int requested_;
};

/// Carathéodory-Fejér-type decomposition Sigma = sum_k rho_k G(theta_k) G(theta_k)*.
/// Frequencies are the deepest local minima of d-bar, refined by golden
/// section; powers come from nonnegative least squares in the trace inner
/// product.
LineEstimate cf_decompose(const GFilter& filter, const CMatrix& sigma,
                          const CfOptions& options = {});

/// Nonnegative least-squares weights of the atom outer products at freqs.
std::vector<double> fit_powers(const GFilter& filter, const CMatrix& sigma,
                               std::span<const double> freqs);

}  // namespace gfanm
