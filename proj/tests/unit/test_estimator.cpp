#include <gtest/gtest.h>

#include <random>

#include "gfanm/bench.hpp"
#include "gfanm/estimator.hpp"
#include "oracles.hpp"

using namespace gfanm;

namespace {

EstimatorConfig band_config(double sigma) {
  EstimatorConfig cfg{.filter = make_allpass_cascade(std::polar(0.58, 2.0), 20)};
  cfg.lambda_mode = OracleSigma{sigma};
  return cfg;
}

const Estimator& band_estimator() {
  static const Estimator est(band_config(1.0));
  return est;
}

std::vector<Complex> cisoids(const std::vector<double>& freqs, const std::vector<Complex>& amps,
                             int len) {
  std::vector<Complex> y(static_cast<std::size_t>(len), 0.0);
  for (int t = 0; t < len; ++t) {
    for (std::size_t k = 0; k < freqs.size(); ++k) y[t] += amps[k] * std::polar(1.0, freqs[k] * t);
  }
  return y;
}

}  // namespace

TEST(SelectLambda, Values) {
  EXPECT_NEAR(select_lambda(1.0, 20), 0.5 * std::sqrt(20.0 * std::log(20.0)), 1e-15);
  EXPECT_NEAR(select_lambda(1.0, 20), 3.8702, 1e-3);
  EXPECT_EQ(select_lambda(0.0, 20), kLambdaFloor);
  EXPECT_NEAR(select_lambda(0.25, 50), 0.25 * select_lambda(1.0, 50), 1e-15);
  EXPECT_THROW(select_lambda(1.0, 1), Error);
  EXPECT_THROW(select_lambda(-1.0, 20), Error);
}

TEST(NoiseVariance, UnbiasedOnWhiteNoise) {
  int inside = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(1000 + s);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    std::vector<Complex> y(4096);
    for (Complex& v : y) v = Complex(nd(rng), nd(rng));
    const double v = estimate_noise_variance(y, 1.75, 2.25);
    inside += (v >= 0.9 && v <= 1.1);
  }
  EXPECT_GE(inside, 198);
}

TEST(NoiseVariance, IgnoresInBandCisoid) {
  const auto y = cisoids({kTwoPi * 326.0 / 1024.0}, {Complex(5.0)}, 1024);
  EXPECT_LT(estimate_noise_variance(y, 1.75, 2.25), 1e-12);
  const std::vector<Complex> zero(64, 0.0);
  EXPECT_EQ(estimate_noise_variance(zero, 1.75, 2.25), 0.0);
}

TEST(NoiseVariance, ErrorPaths) {
  const std::vector<Complex> shortrec(7, 1.0);
  const std::vector<Complex> rec(16, 1.0);
  try {
    estimate_noise_variance(shortrec, 1.0, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_signal);
  }
  try {
    estimate_noise_variance(rec, 2.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_band);
  }
  try {
    estimate_noise_variance(rec, 0.0, kTwoPi - 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::estimation_infeasible);
  }
}

TEST(Estimator, ThreeLinesAtNineDb) {
  const double sigma = sigma_from_snr(9.0);
  std::mt19937_64 rng(5);
  const GeneratedSignal sig = gen_signal(3, 98, 2.0, sigma, rng);
  const Estimate est = band_estimator().estimate(sig.y, OracleSigma{sigma});
  EXPECT_TRUE(est.solution.converged);
  ASSERT_EQ(est.r_hat, 3);
  EXPECT_LT(match_error(est.lines.freqs, sig.freqs), kTwoPi / 98.0);
  EXPECT_NEAR(est.lambda, select_lambda(sigma, 20), 1e-15);
  EXPECT_FALSE(est.transient_warning);
  EXPECT_FALSE(est.low_confidence);
}

TEST(Estimator, ZeroSignal) {
  const std::vector<Complex> y(98, 0.0);
  const Estimate est = band_estimator().estimate(y);
  EXPECT_EQ(est.r_hat, 0);
  EXPECT_TRUE(est.lines.freqs.empty());
}

TEST(Estimator, NoiselessSingleLine) {
  const auto y = cisoids({2.03}, {std::polar(1.0, 0.7)}, 98);
  const Estimate tiny = band_estimator().estimate(y, OracleSigma{1e-4});
  ASSERT_EQ(tiny.r_hat, 1);
  EXPECT_NEAR(tiny.lines.freqs[0], 2.03, 1e-3);
  const Estimate exact = band_estimator().estimate(y, OracleSigma{0.0});
  EXPECT_TRUE(exact.noiseless);
  ASSERT_EQ(exact.r_hat, 1);
  EXPECT_NEAR(exact.lines.freqs[0], 2.03, 1e-3);
}

TEST(Estimator, ThreeNoiselessLinesWithTinyNoiseLevel) {
  const double step = 2.0 * kTwoPi / 98.0;
  const std::vector<double> truth = {2.0 - step, 2.0, 2.0 + step};
  const auto y = cisoids(truth, {1.0, std::polar(1.0, 1.0), std::polar(1.0, -2.0)}, 98);
  const Estimate est = band_estimator().estimate(y, OracleSigma{1e-4});
  ASSERT_EQ(est.r_hat, 3);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(est.lines.freqs[k], truth[k], 1e-3);
}

TEST(Estimator, ExplicitLambdaMatchesOracleSigma) {
  const double sigma = sigma_from_snr(6.0);
  std::mt19937_64 rng(9);
  const GeneratedSignal sig = gen_signal(3, 98, 2.0, sigma, rng);
  const Estimate a = band_estimator().estimate(sig.y, OracleSigma{sigma});
  const Estimate b = band_estimator().estimate(sig.y, ExplicitLambda{select_lambda(sigma, 20)});
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.solution.objective, b.solution.objective);
  EXPECT_EQ(a.lines.freqs, b.lines.freqs);
  EXPECT_THROW(band_estimator().estimate(sig.y, ExplicitLambda{0.0}), Error);
}

TEST(Estimator, EstimatedSigmaIsClose) {
  const double sigma = sigma_from_snr(3.0);
  std::mt19937_64 rng(13);
  const GeneratedSignal sig = gen_signal(3, 98, 2.0, sigma, rng);
  const Estimate est = band_estimator().estimate(sig.y, EstimateSigma{1.75, 2.25});
  const double ratio = est.lambda / select_lambda(sigma, 20);
  EXPECT_GT(ratio, 0.6);
  EXPECT_LT(ratio, 1.4);
}

TEST(Estimator, Deterministic) {
  std::mt19937_64 rng(21);
  const GeneratedSignal sig = gen_signal(3, 98, 1.9, sigma_from_snr(3.0), rng);
  const Estimate a = band_estimator().estimate(sig.y, OracleSigma{sigma_from_snr(3.0)});
  const Estimate b = band_estimator().estimate(sig.y, OracleSigma{sigma_from_snr(3.0)});
  EXPECT_EQ(a.lines.freqs, b.lines.freqs);
  EXPECT_EQ(a.solution.iterations, b.solution.iterations);
}

TEST(Estimator, TransientWarningOnShortRecord) {
  const auto y = cisoids({2.0}, {1.0}, 40);
  const Estimate est = band_estimator().estimate(y, OracleSigma{0.1});
  EXPECT_TRUE(est.transient_warning);
  EXPECT_TRUE(est.low_confidence);
  EXPECT_THROW(band_estimator().estimate(std::vector<Complex>{}), Error);
}

TEST(Estimator, RejectsForeignSubspace) {
  auto other = std::make_shared<const StructuredSubspace>(StructuredSubspace::toeplitz(20));
  EXPECT_THROW(Estimator(band_config(1.0), other), Error);
}

TEST(StandardAnm, SingleCisoid) {
  const auto y = cisoids({1.234}, {std::polar(2.0, 0.4)}, 32);
  const Estimate est = standard_anm(y, OracleSigma{1e-6}, SolverSettings{});
  ASSERT_EQ(est.r_hat, 1);
  EXPECT_NEAR(est.lines.freqs[0], 1.234, 1e-4);
}

TEST(StandardAnm, ConstantSequenceIsZeroFrequency) {
  const std::vector<Complex> y(16, Complex(0.5, -0.5));
  const Estimate est = standard_anm(y, OracleSigma{0.0}, SolverSettings{});
  ASSERT_EQ(est.r_hat, 1);
  EXPECT_LT(std::abs(wrap_difference(est.lines.freqs[0])), 1e-4);
}

TEST(StandardAnm, AgreesWithRootFinding) {
  std::mt19937_64 rng(77);
  const int len = 12;
  for (int trial = 0; trial < 5; ++trial) {
    const int m = 1 + trial % 3;
    const auto freqs = oracle::separated_freqs(m, 0.0, kTwoPi - 1.2, 1.2, rng);
    std::vector<Complex> amps;
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    for (int k = 0; k < m; ++k) amps.push_back(std::polar(1.0 + 0.5 * k, ph(rng)));
    const auto y = cisoids(freqs, amps, len);
    const Estimate est = standard_anm(y, OracleSigma{0.0}, SolverSettings{});
    ASSERT_EQ(est.r_hat, m) << "trial " << trial;
    const auto roots = oracle::toeplitz_root_angles(est.solution.sigma, m);
    for (double theta : est.lines.freqs) {
      double nearest = 10.0;
      for (double r : roots) nearest = std::min(nearest, std::abs(wrap_difference(theta - r)));
      EXPECT_LT(nearest, 1e-5) << "trial " << trial;
    }
    for (int k = 0; k < m; ++k) EXPECT_NEAR(est.lines.freqs[k], freqs[k], 1e-3);
  }
}

TEST(RecoverAmplitudes, ExactAndNoisy) {
  const std::vector<double> f = {1.0, 2.5};
  const std::vector<Complex> a = {std::polar(2.0, std::numbers::pi / 4), Complex(-0.5, 0.3)};
  const CVector exact = recover_amplitudes(cisoids(f, a, 50), f);
  EXPECT_LT(std::abs(exact(0) - a[0]), 1e-12);
  EXPECT_LT(std::abs(exact(1) - a[1]), 1e-12);

  int good = 0;
  for (int s = 0; s < 100; ++s) {
    std::mt19937_64 rng(s);
    const GeneratedSignal sig = gen_signal(3, 98, 2.0, sigma_from_snr(6.0), rng);
    const CVector est = recover_amplitudes(sig.y, sig.freqs);
    double err = 0.0;
    for (int k = 0; k < 3; ++k) err += std::norm(est(k) - sig.amplitudes[k]);
    good += std::sqrt(err) < 0.5;
  }
  EXPECT_GE(good, 95);
}

TEST(RecoverAmplitudes, IllPosedInputs) {
  const auto y = cisoids({1.0}, {1.0}, 10);
  try {
    recover_amplitudes(y, std::vector<double>{1.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ill_posed);
  }
  std::vector<double> many(10, 0.0);
  for (int k = 0; k < 10; ++k) many[k] = 0.5 * k;
  EXPECT_THROW(recover_amplitudes(y, many), Error);
}
