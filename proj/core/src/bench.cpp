#include "gfanm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "gfanm/io.hpp"
#include "gfanm/svg.hpp"

namespace gfanm {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::gfilter_anm: return "gfilter-anm";
    case Method::standard_anm: return "standard-anm";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "gfilter-anm") return Method::gfilter_anm;
  if (name == "standard-anm") return Method::standard_anm;
  throw Error(Errc::invalid_input, "unknown method '" + std::string(name) + "'");
}

void validate(const ExperimentConfig& c) {
  if (c.trials < 1) throw Error(Errc::invalid_input, "trials must be >= 1");
  if (c.m < 1) throw Error(Errc::invalid_input, "m must be >= 1");
  if (c.L < 2) throw Error(Errc::invalid_input, "L must be >= 2");
  if (c.m >= c.filter_n) throw Error(Errc::invalid_input, "m must be smaller than the filter size");
  if (c.m >= c.L) throw Error(Errc::invalid_input, "m must be smaller than L");
  validate(c.solver);
}

double sigma_from_snr(double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
  return std::sqrt(std::pow(10.0, -snr_db / 10.0));
}

GeneratedSignal synthesize_signal(std::span<const double> freqs,
                                  std::span<const Complex> amplitudes, int L, double sigma,
                                  std::mt19937_64& rng) {
  if (freqs.size() != amplitudes.size()) {
    throw Error(Errc::shape_mismatch, "one amplitude per frequency required");
  }
  if (L < 1) throw Error(Errc::invalid_signal, "signal length must be positive");
  if (!(sigma >= 0.0)) throw Error(Errc::invalid_input, "sigma must be nonnegative");
  GeneratedSignal sig;
  sig.y.assign(L, Complex(0.0, 0.0));
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    for (int t = 0; t < L; ++t) sig.y[t] += amplitudes[k] * std::polar(1.0, freqs[k] * t);
  }
  if (sigma > 0.0) {
    std::normal_distribution<double> normal(0.0, sigma / std::sqrt(2.0));
    for (int t = 0; t < L; ++t) {
      const double re = normal(rng);
      const double im = normal(rng);
      sig.y[t] += Complex(re, im);
    }
  }
  std::vector<std::size_t> order(freqs.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::vector<double> wrapped(freqs.size());
  for (std::size_t k = 0; k < freqs.size(); ++k) wrapped[k] = wrap_angle(freqs[k]);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return wrapped[a] < wrapped[b]; });
  for (std::size_t k : order) {
    sig.freqs.push_back(wrapped[k]);
    sig.amplitudes.push_back(amplitudes[k]);
  }
  return sig;
}

GeneratedSignal gen_signal(int m, int L, double theta0, double sigma, std::mt19937_64& rng) {
  if (m < 0) throw Error(Errc::invalid_input, "m must be nonnegative");
  if (L < 1) throw Error(Errc::invalid_signal, "signal length must be positive");
  const double spacing = 2.0 * kTwoPi / L;
  std::vector<double> freqs(m);
  std::vector<Complex> amps(m);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  for (int k = 0; k < m; ++k) {
    freqs[k] = theta0 + spacing * (k - 0.5 * (m - 1));
    amps[k] = std::polar(1.0, phase(rng));
  }
  return synthesize_signal(freqs, amps, L, sigma, rng);
}

double match_error(std::span<const double> est, std::span<const double> truth) {
  if (est.size() != truth.size()) {
    throw Error(Errc::invalid_input, "match_error needs equal-length frequency lists");
  }
  std::vector<double> a(est.begin(), est.end());
  std::vector<double> b(truth.begin(), truth.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = wrap_difference(a[k] - b[k]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t seed, double theta0, double snr_db, int trial_index) {
  std::uint64_t h = splitmix64(std::bit_cast<std::uint64_t>(theta0));
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(snr_db));
  h = splitmix64(h ^ static_cast<std::uint64_t>(trial_index));
  return splitmix64(seed ^ h);
}

TrialContext::TrialContext(const ExperimentConfig& config) : config_(config) {
  validate(config_);
  for (Method method : config_.methods) {
    if (method == Method::gfilter_anm && !gfilter_) {
      EstimatorConfig ec{make_allpass_cascade(config_.pole, config_.filter_n)};
      ec.rank_rule = config_.rank_rule;
      ec.solver = config_.solver;
      ec.keep_curve = false;
      gfilter_.emplace(std::move(ec));
    } else if (method == Method::standard_anm && !standard_) {
      standard_.emplace(
          make_standard_anm(config_.L, OracleSigma{1.0}, config_.solver, config_.rank_rule));
    }
  }
}

const Estimator& TrialContext::estimator(Method method) const {
  const auto& slot = method == Method::gfilter_anm ? gfilter_ : standard_;
  if (!slot) throw Error(Errc::invalid_input, "method not configured in this experiment");
  return *slot;
}

std::vector<TrialRecord> run_trial(const TrialContext& ctx, double theta0, double snr_db,
                                   int trial_index) {
  const ExperimentConfig& cfg = ctx.config();
  const double sigma = sigma_from_snr(snr_db);
  std::mt19937_64 rng(trial_seed(cfg.seed, theta0, snr_db, trial_index));
  const GeneratedSignal sig = gen_signal(cfg.m, cfg.L, theta0, sigma, rng);

  LambdaMode mode = OracleSigma{sigma};
  if (cfg.estimate_sigma) mode = EstimateSigma{cfg.band_lo, cfg.band_hi};

  std::vector<TrialRecord> out;
  for (Method method : cfg.methods) {
    TrialRecord rec;
    rec.theta0 = theta0;
    rec.snr_db = snr_db;
    rec.trial = trial_index;
    rec.method = method;
    const auto start = std::chrono::steady_clock::now();
    const Estimate est = ctx.estimator(method).estimate(sig.y, mode);
    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    rec.r_hat = est.r_hat;
    rec.converged = est.solution.converged;
    rec.iterations = est.solution.iterations;
    rec.success = est.r_hat == cfg.m && rec.converged && !est.extraction_deficit;
    if (rec.success) rec.freq_error = match_error(est.lines.freqs, sig.freqs);
    out.push_back(rec);
  }
  return out;
}

std::optional<Quartiles> quartiles(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return Quartiles{v.front(), at(0.25), at(0.5), at(0.75), v.back()};
}

ResultTable run_experiment(const ExperimentConfig& config) {
  ResultTable table;
  if (config.methods.empty()) return table;
  const TrialContext ctx(config);

  struct Task {
    double theta0;
    double snr;
    int trial;
  };
  std::vector<Task> tasks;
  for (double theta0 : config.theta0_grid) {
    for (double snr : config.snr_db_grid) {
      for (int t = 0; t < config.trials; ++t) tasks.push_back({theta0, snr, t});
    }
  }

  std::vector<std::vector<TrialRecord>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        results[i] = run_trial(ctx, tasks[i].theta0, tasks[i].snr, tasks[i].trial);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks.size();
      }
    }
  };
  unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, tasks.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& r : results) {
    for (auto& rec : r) table.trials.push_back(rec);
  }

  // tasks are laid out theta0-major, then snr, then trial
  std::size_t idx = 0;
  for (double theta0 : config.theta0_grid) {
    for (double snr : config.snr_db_grid) {
      std::map<Method, SummaryRow> rows;
      std::map<Method, std::vector<double>> errors;
      for (int t = 0; t < config.trials; ++t, ++idx) {
        for (const TrialRecord& rec : results[idx]) {
          SummaryRow& row = rows[rec.method];
          row.theta0 = theta0;
          row.snr_db = snr;
          row.method = rec.method;
          ++row.trials;
          if (rec.success) {
            ++row.successes;
            errors[rec.method].push_back(*rec.freq_error);
          }
          if (!rec.converged) ++row.unconverged;
        }
      }
      for (Method method : config.methods) {
        auto it = rows.find(method);
        if (it == rows.end()) continue;
        SummaryRow row = it->second;
        row.success_probability = static_cast<double>(row.successes) / row.trials;
        row.error = quartiles(errors[method]);
        table.summary.push_back(row);
        rows.erase(it);
      }
    }
  }
  return table;
}

Illustration illustrate(const ExperimentConfig& config, double theta0, double snr_db,
                        int grid_size) {
  validate(config);
  Illustration ill;
  ill.theta0 = theta0;
  ill.snr_db = snr_db;
  const GFilter filter = make_allpass_cascade(config.pole, config.filter_n);
  for (int j = 0; j < grid_size; ++j) {
    const double theta = kTwoPi * j / grid_size;
    ill.gain.push_back({theta, gain(filter, theta)});
  }
  EstimatorConfig ec{filter};
  ec.rank_rule = config.rank_rule;
  ec.solver = config.solver;
  ec.grid_size = grid_size;
  const Estimator est(std::move(ec));
  const double sigma = sigma_from_snr(snr_db);
  std::mt19937_64 rng(trial_seed(config.seed, theta0, snr_db, 0));
  const GeneratedSignal sig = gen_signal(config.m, config.L, theta0, sigma, rng);
  ill.dbar = est.estimate(sig.y, OracleSigma{sigma}).lines.dbar;
  return ill;
}

void write_trials_csv(std::ostream& os, const ResultTable& table, bool include_timing) {
  os << "theta0,snr_db,method,trial,r_hat,success,freq_error,converged,iterations,wall_time_ms\n";
  for (const TrialRecord& r : table.trials) {
    os << format_number(r.theta0) << ',' << format_number(r.snr_db) << ',' << to_string(r.method)
       << ',' << r.trial << ',' << r.r_hat << ',' << (r.success ? 1 : 0) << ','
       << (r.freq_error ? format_number(*r.freq_error) : std::string()) << ','
       << (r.converged ? 1 : 0) << ',' << r.iterations << ','
       << (include_timing ? format_number(r.wall_time_ms) : std::string()) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const ResultTable& table) {
  os << "theta0,snr_db,method,trials,successes,unconverged,success_probability,"
        "err_min,err_q1,err_median,err_q3,err_max\n";
  for (const SummaryRow& r : table.summary) {
    os << format_number(r.theta0) << ',' << format_number(r.snr_db) << ',' << to_string(r.method)
       << ',' << r.trials << ',' << r.successes << ',' << r.unconverged << ','
       << format_number(r.success_probability);
    if (r.error) {
      for (double v : {r.error->min, r.error->q1, r.error->median, r.error->q3, r.error->max}) {
        os << ',' << format_number(v);
      }
    } else {
      os << ",,,,,";
    }
    os << '\n';
  }
}

namespace {

std::filesystem::path write_chart(const svg::Chart& chart, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::invalid_input, "cannot write " + path.string());
  chart.write(os);
  return path;
}

std::string snr_tag(double snr) {
  if (std::isinf(snr)) return "inf";
  return format_number(snr);
}

}  // namespace

std::vector<std::filesystem::path> emit_results(const ResultTable& table,
                                                const ExperimentConfig& config,
                                                const std::optional<Illustration>& illustration,
                                                const std::filesystem::path& out_dir,
                                                const EmitOptions& options) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  if (options.csv) {
    const auto trials_path = out_dir / "trials.csv";
    std::ofstream trials(trials_path);
    write_trials_csv(trials, table, options.include_timing);
    written.push_back(trials_path);
    const auto summary_path = out_dir / "summary.csv";
    std::ofstream summary(summary_path);
    write_summary_csv(summary, table);
    written.push_back(summary_path);
  }
  if (!options.svg) return written;

  if (illustration) {
    svg::Chart gain_chart("Squared filter gain", "theta (rad)", "||G||^2");
    svg::Series g{"gain", {}};
    for (const CurvePoint& p : illustration->gain) g.points.push_back({p.theta, p.value});
    gain_chart.add_series(std::move(g));
    written.push_back(write_chart(gain_chart, out_dir / "gain.svg"));

    svg::Chart dbar_chart("Normalized d-bar, theta0=" + format_number(illustration->theta0) +
                              ", SNR=" + snr_tag(illustration->snr_db) + " dB",
                          "theta (rad)", "dbar");
    svg::Series d{"dbar", {}};
    for (const CurvePoint& p : illustration->dbar) d.points.push_back({p.theta, p.value});
    dbar_chart.add_series(std::move(d));
    dbar_chart.set_y_range(0.0, 1.0);
    written.push_back(write_chart(dbar_chart, out_dir / "dbar.svg"));
  }

  for (Method method : config.methods) {
    svg::Chart prob("Success probability, " + std::string(to_string(method)), "theta0 (rad)",
                    "P(r_hat = m)");
    prob.set_y_range(0.0, 1.0);
    for (double snr : config.snr_db_grid) {
      svg::Series s{"SNR " + snr_tag(snr) + " dB", {}};
      for (const SummaryRow& r : table.summary) {
        if (r.method == method && r.snr_db == snr) s.points.push_back({r.theta0, r.success_probability});
      }
      prob.add_series(std::move(s));
    }
    written.push_back(write_chart(prob, out_dir / ("success_" + std::string(to_string(method)) + ".svg")));

    for (double snr : config.snr_db_grid) {
      svg::Chart box("Frequency error, " + std::string(to_string(method)) + ", SNR " +
                         snr_tag(snr) + " dB",
                     "theta0 (rad)", "||theta_hat - theta||");
      box.set_log_y(true);
      for (const SummaryRow& r : table.summary) {
        if (r.method == method && r.snr_db == snr && r.error) {
          box.add_box({r.theta0, r.error->min, r.error->q1, r.error->median, r.error->q3,
                       r.error->max});
        }
      }
      written.push_back(write_chart(
          box, out_dir / ("errors_" + std::string(to_string(method)) + "_snr" + snr_tag(snr) + ".svg")));
    }
  }
  return written;
}

}  // namespace gfanm
