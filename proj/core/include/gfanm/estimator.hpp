#pragma once

#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "gfanm/cfd.hpp"
#include "gfanm/conic.hpp"

namespace gfanm {

/// lambda = select_lambda(sigma, n) with a known noise level.
struct OracleSigma {
  double sigma = 0.0;
};
struct ExplicitLambda {
  double lambda = 0.0;
};
/// sigma^2 from the out-of-band DFT bins of the raw record.
struct EstimateSigma {
  double band_lo = 0.0;
  double band_hi = 0.0;
};
using LambdaMode = std::variant<OracleSigma, ExplicitLambda, EstimateSigma>;

inline constexpr double kLambdaFloor = 1e-8;

/// (sigma / 2) * sqrt(n ln n); kLambdaFloor when sigma == 0.
double select_lambda(double sigma, int n);

/// Mean of |Y(w_j)|^2 / L over the DFT bins w_j = 2 pi j / L outside
/// [band_lo, band_hi].
double estimate_noise_variance(std::span<const Complex> y, double band_lo, double band_hi);

struct EstimatorConfig {
  GFilter filter;
  RankRule rank_rule{};
  LambdaMode lambda_mode = OracleSigma{1.0};
  SolverSettings solver{};
  double settle_eps = kDefaultSettleEps;
  int grid_size = 8192;
  bool keep_curve = true;
  bool check_transient = true;
};

struct Estimate {
  LineEstimate lines;
  AnmSolution solution;
  double lambda = 0.0;
  int r_hat = 0;  // numerical rank, after the r < n clamp
  bool noiseless = false;  // oracle sigma was exactly zero
  bool transient_warning = false;
  bool extraction_deficit = false;
  bool low_confidence = false;
};

/// Filter -> lambda -> regularized SDP -> C-F decomposition. The structured
/// subspace is built once per estimator and shared by every call.
class Estimator {
 public:
  explicit Estimator(EstimatorConfig config);
  Estimator(EstimatorConfig config, std::shared_ptr<const StructuredSubspace> subspace);

  Estimate estimate(std::span<const Complex> y) const;
  Estimate estimate(std::span<const Complex> y, const LambdaMode& mode) const;

  const EstimatorConfig& config() const noexcept { return config_; }
  const std::shared_ptr<const StructuredSubspace>& subspace() const noexcept { return subspace_; }

 private:
  EstimatorConfig config_;
  std::shared_ptr<const StructuredSubspace> subspace_;
  int settle_ = 0;
};

Estimate estimate_frequencies(std::span<const Complex> y, const EstimatorConfig& config);

/// Classical atomic-norm estimator: delay bank of size L over the raw
/// record, whose structured subspace is Hermitian Toeplitz.
Estimator make_standard_anm(int length, const LambdaMode& mode, const SolverSettings& solver,
                            const RankRule& rule = {});

Estimate standard_anm(std::span<const Complex> y, const LambdaMode& mode,
                      const SolverSettings& solver, const RankRule& rule = {});

/// Least-squares amplitudes of y against the cisoids e^{i theta_k t}.
CVector recover_amplitudes(std::span<const Complex> y, std::span<const double> freqs);

}  // namespace gfanm
