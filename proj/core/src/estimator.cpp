#include "gfanm/estimator.hpp"

#include <cmath>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace gfanm {

double select_lambda(double sigma, int n) {
  if (n < 2) throw Error(Errc::invalid_input, "select_lambda needs n >= 2");
  if (!(sigma >= 0.0)) throw Error(Errc::invalid_input, "sigma must be nonnegative");
  if (sigma == 0.0) return kLambdaFloor;
  return 0.5 * sigma * std::sqrt(n * std::log(static_cast<double>(n)));
}

double estimate_noise_variance(std::span<const Complex> y, double band_lo, double band_hi) {
  const std::size_t len = y.size();
  if (len < 8) throw Error(Errc::invalid_signal, "noise estimation needs at least 8 samples");
  if (!(band_lo >= 0.0 && band_lo < band_hi && band_hi < kTwoPi)) {
    throw Error(Errc::invalid_band, "band must satisfy 0 <= lo < hi < 2*pi");
  }
  std::vector<Complex> in(y.begin(), y.end());
  std::vector<Complex> out;
  Eigen::FFT<double> fft;
  fft.fwd(out, in);

  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < len; ++j) {
    const double w = kTwoPi * static_cast<double>(j) / static_cast<double>(len);
    if (w >= band_lo && w <= band_hi) continue;
    acc += std::norm(out[j]);
    ++count;
  }
  if (count == 0) throw Error(Errc::estimation_infeasible, "band covers every DFT bin");
  return acc / static_cast<double>(count) / static_cast<double>(len);
}

Estimator::Estimator(EstimatorConfig config)
    : Estimator(config, std::make_shared<const StructuredSubspace>(subspace_basis(config.filter))) {}

Estimator::Estimator(EstimatorConfig config, std::shared_ptr<const StructuredSubspace> subspace)
    : config_(std::move(config)), subspace_(std::move(subspace)) {
  if (!subspace_ || subspace_->n() != config_.filter.size() ||
      (subspace_->filter().A() - config_.filter.A()).cwiseAbs().maxCoeff() > 1e-12 ||
      (subspace_->filter().b() - config_.filter.b()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(Errc::shape_mismatch, "subspace does not belong to the configured filter");
  }
  validate(config_.solver);
  if (config_.check_transient) settle_ = settle_length(config_.filter, config_.settle_eps);
}

Estimate Estimator::estimate(std::span<const Complex> y) const {
  return estimate(y, config_.lambda_mode);
}

Estimate Estimator::estimate(std::span<const Complex> y, const LambdaMode& mode) const {
  if (y.empty()) throw Error(Errc::invalid_signal, "input signal is empty");
  const int n = config_.filter.size();

  Estimate est;
  est.transient_warning = config_.check_transient && settle_ > static_cast<int>(y.size()) - 1;

  AnmProblem problem;
  problem.subspace = subspace_;
  problem.x = run_filter(config_.filter, y);
  problem.settings = config_.solver;

  if (const auto* oracle = std::get_if<OracleSigma>(&mode)) {
    est.lambda = select_lambda(oracle->sigma, n);
    est.noiseless = oracle->sigma == 0.0;
  } else if (const auto* fixed = std::get_if<ExplicitLambda>(&mode)) {
    if (!(fixed->lambda > 0.0)) throw Error(Errc::invalid_input, "lambda must be positive");
    est.lambda = fixed->lambda;
  } else {
    const auto& band = std::get<EstimateSigma>(mode);
    const double var = estimate_noise_variance(y, band.band_lo, band.band_hi);
    est.lambda = select_lambda(std::sqrt(var), n);
  }
  // with zero noise the regularized problem degenerates to its lambda -> 0
  // limit, which is the noiseless program with s = x
  if (est.noiseless) {
    problem.regularization = Noiseless{};
  } else {
    problem.regularization = est.lambda;
  }
  est.solution = solve(problem);

  CfOptions opts;
  opts.rule = config_.rank_rule;
  opts.grid_size = config_.grid_size;
  opts.keep_curve = config_.keep_curve;
  try {
    est.lines = cf_decompose(config_.filter, est.solution.sigma, opts);
    est.r_hat = est.lines.rank;
  } catch (const ExtractionDeficit& deficit) {
    est.lines = deficit.partial();
    est.r_hat = deficit.requested();
    est.extraction_deficit = true;
  }
  est.low_confidence = !est.solution.converged || est.extraction_deficit ||
                       est.lines.rank_clamped || est.transient_warning;
  return est;
}

Estimate estimate_frequencies(std::span<const Complex> y, const EstimatorConfig& config) {
  return Estimator(config).estimate(y);
}

Estimator make_standard_anm(int length, const LambdaMode& mode, const SolverSettings& solver,
                            const RankRule& rule) {
  if (length < 2) throw Error(Errc::invalid_signal, "standard ANM needs at least 2 samples");
  auto sub = std::make_shared<const StructuredSubspace>(StructuredSubspace::toeplitz(length));
  EstimatorConfig config{sub->filter()};
  config.rank_rule = rule;
  config.lambda_mode = mode;
  config.solver = solver;
  // x(L) of the nilpotent delay bank is the reversed record; nothing to settle
  config.check_transient = false;
  return Estimator(std::move(config), std::move(sub));
}

Estimate standard_anm(std::span<const Complex> y, const LambdaMode& mode,
                      const SolverSettings& solver, const RankRule& rule) {
  return make_standard_anm(static_cast<int>(y.size()), mode, solver, rule).estimate(y);
}

CVector recover_amplitudes(std::span<const Complex> y, std::span<const double> freqs) {
  const auto len = static_cast<Eigen::Index>(y.size());
  const auto k = static_cast<Eigen::Index>(freqs.size());
  if (k == 0) return CVector(0);
  if (k >= len) throw Error(Errc::invalid_input, "need fewer frequencies than samples");
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      if (std::abs(wrap_difference(freqs[i] - freqs[j])) < 1e-9) {
        throw Error(Errc::ill_posed, "duplicate frequencies make the design rank deficient");
      }
    }
  }
  CMatrix design(len, k);
  for (Eigen::Index t = 0; t < len; ++t) {
    for (Eigen::Index j = 0; j < k; ++j) {
      design(t, j) = std::polar(1.0, freqs[j] * static_cast<double>(t));
    }
  }
  const Eigen::Map<const CVector> rhs(y.data(), len);
  Eigen::ColPivHouseholderQR<CMatrix> qr(design);
  if (qr.rank() < k) throw Error(Errc::ill_posed, "cisoid design matrix is rank deficient");
  return qr.solve(rhs);
}

}  // namespace gfanm
