#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gfanm/estimator.hpp"

namespace gfanm {

enum class Method { gfilter_anm, standard_anm };

std::string_view to_string(Method method);
/// Accepts "gfilter-anm" and "standard-anm".
Method parse_method(std::string_view name);

struct ExperimentConfig {
  int m = 3;
  int L = 98;
  std::vector<double> theta0_grid = {1.5, 1.6, 1.7, 1.8, 1.9, 2.0, 2.1, 2.2, 2.3, 2.4, 2.5};
  std::vector<double> snr_db_grid = {-3.0, 0.0, 3.0, 6.0, 9.0};
  int trials = 50;
  std::uint64_t seed = 20240501;
  int filter_n = 20;
  Complex pole = std::polar(0.58, 2.0);
  std::vector<Method> methods = {Method::gfilter_anm, Method::standard_anm};
  bool estimate_sigma = false;  // oracle sigma otherwise
  double band_lo = 1.75;
  double band_hi = 2.25;
  SolverSettings solver{};
  RankRule rank_rule{};
  int threads = 0;  // 0: hardware concurrency
};

void validate(const ExperimentConfig& config);

/// sigma^2 = 10^(-snr/10); +inf dB gives sigma = 0.
double sigma_from_snr(double snr_db);

struct GeneratedSignal {
  std::vector<Complex> y;
  std::vector<double> freqs;  // ascending, wrapped to [0, 2*pi)
  std::vector<Complex> amplitudes;
};

/// y(t) = sum_k a_k e^{i theta_k t} + w(t), t = 0..L-1, with circular
/// Gaussian w of total variance sigma^2.
GeneratedSignal synthesize_signal(std::span<const double> freqs,
                                  std::span<const Complex> amplitudes, int L, double sigma,
                                  std::mt19937_64& rng);

/// m unit-modulus cisoids with uniform random phases, spaced 2 * (2 pi / L)
/// apart and centred on theta0.
GeneratedSignal gen_signal(int m, int L, double theta0, double sigma, std::mt19937_64& rng);

/// Euclidean norm of the coordinate-wise circular differences.
double match_error(std::span<const double> est_freqs, std::span<const double> true_freqs);

/// Order-independent per-trial seed.
std::uint64_t trial_seed(std::uint64_t seed, double theta0, double snr_db, int trial_index);

struct TrialRecord {
  double theta0 = 0.0;
  double snr_db = 0.0;
  int trial = 0;
  Method method = Method::gfilter_anm;
  int r_hat = 0;
  bool success = false;
  std::optional<double> freq_error;  // present iff success
  bool converged = false;
  int iterations = 0;
  double wall_time_ms = 0.0;
};

/// Estimators shared by every trial of an experiment.
class TrialContext {
 public:
  explicit TrialContext(const ExperimentConfig& config);

  const ExperimentConfig& config() const noexcept { return config_; }
  const Estimator& estimator(Method method) const;

 private:
  ExperimentConfig config_;
  std::optional<Estimator> gfilter_;
  std::optional<Estimator> standard_;
};

/// One signal, every configured method.
std::vector<TrialRecord> run_trial(const TrialContext& ctx, double theta0, double snr_db,
                                   int trial_index);

struct Quartiles {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Linear-interpolation quartiles; nullopt for an empty sample.
std::optional<Quartiles> quartiles(std::vector<double> values);

struct SummaryRow {
  double theta0 = 0.0;
  double snr_db = 0.0;
  Method method = Method::gfilter_anm;
  int trials = 0;
  int successes = 0;
  int unconverged = 0;
  double success_probability = 0.0;
  std::optional<Quartiles> error;
};

struct ResultTable {
  std::vector<TrialRecord> trials;  // ordered by (theta0, snr, trial, method)
  std::vector<SummaryRow> summary;  // ordered by (theta0, snr, method)
};

ResultTable run_experiment(const ExperimentConfig& config);

/// Gain curve of the experiment filter and the d-bar curve of one trial.
struct Illustration {
  std::vector<CurvePoint> gain;
  std::vector<CurvePoint> dbar;
  double theta0 = 0.0;
  double snr_db = 0.0;
};

Illustration illustrate(const ExperimentConfig& config, double theta0, double snr_db,
                        int grid_size = 4096);

void write_trials_csv(std::ostream& os, const ResultTable& table, bool include_timing);
void write_summary_csv(std::ostream& os, const ResultTable& table);

struct EmitOptions {
  bool csv = true;
  bool svg = true;
  bool include_timing = false;
};

/// Writes trials.csv and summary.csv, plus SVG figures when requested.
/// Returns the written paths.
std::vector<std::filesystem::path> emit_results(const ResultTable& table,
                                                const ExperimentConfig& config,
                                                const std::optional<Illustration>& illustration,
                                                const std::filesystem::path& out_dir,
                                                const EmitOptions& options = {});

}  // namespace gfanm
