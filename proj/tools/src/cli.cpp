#include "gfanm/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include <CLI11.hpp>

#include "gfanm/bench.hpp"
#include "gfanm/io.hpp"

namespace gfanm::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double parse_real(const std::string& text) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (text == "inf" || text == "+inf" || text == "Inf") return inf;
  if (text == "-inf" || text == "-Inf") return -inf;
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw UsageError("not a number: '" + text + "'");
  return v;
}

fs::path output_dir(const std::string& flag) {
  fs::path dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv("GFANM_OUT_DIR");
    dir = (env != nullptr && *env != '\0') ? fs::path(env) : fs::path(".");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw UsageError("cannot write " + path.string());
  return os;
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

struct SolverFlags {
  double penalty = 0.0;
  int max_iter = 0;
  double eps_abs = 0.0;
  double eps_rel = 0.0;
  CLI::Option* o_penalty = nullptr;
  CLI::Option* o_max_iter = nullptr;
  CLI::Option* o_eps_abs = nullptr;
  CLI::Option* o_eps_rel = nullptr;

  void add(CLI::App* cmd) {
    o_penalty = cmd->add_option("--penalty", penalty, "Initial ADMM penalty");
    o_max_iter = cmd->add_option("--max-iter", max_iter, "ADMM iteration cap");
    o_eps_abs = cmd->add_option("--eps-abs", eps_abs, "Absolute stopping tolerance");
    o_eps_rel = cmd->add_option("--eps-rel", eps_rel, "Relative stopping tolerance");
  }

  SolverSettings apply(SolverSettings s) const {
    if (o_penalty->count() > 0) s.penalty = penalty;
    if (o_max_iter->count() > 0) s.max_iter = max_iter;
    if (o_eps_abs->count() > 0) s.eps_abs = eps_abs;
    if (o_eps_rel->count() > 0) s.eps_rel = eps_rel;
    validate(s);
    return s;
  }
};

struct RankFlags {
  RankRule rule{};

  void add(CLI::App* cmd) {
    cmd->add_option("--rank-floor", rule.abs_floor, "Absolute eigenvalue floor of the rank rule")
        ->capture_default_str();
    cmd->add_option("--rank-gap", rule.ratio_gap, "Eigenvalue ratio gap of the rank rule")
        ->capture_default_str();
  }

  RankRule get() const {
    if (!(rule.abs_floor > 0.0) || !(rule.ratio_gap > 0.0)) {
      throw UsageError("--rank-floor and --rank-gap must be positive");
    }
    return rule;
  }
};

// design-filter ------------------------------------------------------------

struct DesignArgs {
  double pole_mag = 0.0;
  double pole_phase = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  int size = 0;
  int grid = 4096;
  std::string out_dir;
  CLI::Option* o_pole = nullptr;
  CLI::Option* o_band = nullptr;
};

void design_filter(const DesignArgs& a, std::ostream& out) {
  if (a.o_pole->count() == 0 && a.o_band->count() == 0) {
    throw UsageError("design-filter needs --pole-mag/--pole-phase or --band-lo/--band-hi");
  }
  const GFilter filter = a.o_pole->count() > 0
                             ? make_allpass_cascade(std::polar(a.pole_mag, a.pole_phase), a.size)
                             : design_band_filter(a.band_lo, a.band_hi, a.size);

  const fs::path dir = output_dir(a.out_dir);
  write_json_file(dir / "filter.json", to_json(filter));

  std::vector<CurvePoint> curve(static_cast<std::size_t>(a.grid));
  CurvePoint peak{};
  for (int j = 0; j < a.grid; ++j) {
    const double theta = kTwoPi * j / a.grid;
    curve[static_cast<std::size_t>(j)] = {theta, gain(filter, theta)};
    if (curve[static_cast<std::size_t>(j)].value > peak.value) peak = curve[static_cast<std::size_t>(j)];
  }
  auto os = open_output(dir / "gain.csv");
  write_curve_csv(os, curve, "gain");

  const int n = filter.size();
  const CMatrix defect = filter.A() * filter.A().adjoint() + filter.b() * filter.b().adjoint() -
                         CMatrix::Identity(n, n);
  Json report{{"filter", to_json(filter)},
              {"coisometry_error", max_abs(defect)},
              {"spectral_radius", std::abs(*filter.pole())},
              {"peak_theta", peak.theta},
              {"peak_gain", peak.value},
              {"files", {(dir / "filter.json").string(), (dir / "gain.csv").string()}}};
  out << report.dump(2) << '\n';
}

// filter -------------------------------------------------------------------

struct FilterArgs {
  std::string input;
  std::string filter;
  double eps = kDefaultSettleEps;
  std::string out_dir;
};

void filter_cmd(const FilterArgs& a, std::ostream& out, std::ostream& err) {
  const GFilter filter = filter_from_json(read_json_file(a.filter));
  const std::vector<Complex> y = read_signal_csv(fs::path(a.input));
  const FilterOutput res = filter_signal(filter, y, a.eps);
  if (res.transient_warning) {
    err << "warning: settle length " << res.settle_length << " exceeds L-1 = " << y.size() - 1
        << '\n';
  }
  Json j{{"x", to_json(res.x)},
         {"settle_length", res.settle_length},
         {"discarded", res.discarded},
         {"transient_warning", res.transient_warning}};
  const fs::path dir = output_dir(a.out_dir);
  write_json_file(dir / "state.json", j);
  out << j.dump(2) << '\n';
}

// simulate -----------------------------------------------------------------

struct SimulateArgs {
  int m = 3;
  int length = 98;
  double theta0 = 2.0;
  std::string snr = "9";
  std::uint64_t seed = 1;
  std::string out_dir;
};

void simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.m < 1 || a.length < 1) throw UsageError("--m and --length must be positive");
  const double sigma = sigma_from_snr(parse_real(a.snr));
  std::mt19937_64 rng(a.seed);
  const GeneratedSignal sig = gen_signal(a.m, a.length, a.theta0, sigma, rng);

  const fs::path dir = output_dir(a.out_dir);
  {
    auto os = open_output(dir / "signal.csv");
    write_signal_csv(os, sig.y);
  }
  Json amps = Json::array();
  for (const Complex& c : sig.amplitudes) amps.push_back(to_json(c));
  Json truth{{"freqs", sig.freqs}, {"amplitudes", amps}, {"sigma", sigma}, {"seed", a.seed}};
  write_json_file(dir / "truth.json", truth);
  out << truth.dump(2) << '\n';
}

// estimate -----------------------------------------------------------------

struct EstimateArgs {
  std::string input;
  std::string filter;
  std::string method = "gfilter-anm";
  std::string sigma;
  double lambda = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  int grid = 8192;
  bool strict = false;
  bool amplitudes = false;
  std::string out_dir;
  SolverFlags solver;
  RankFlags rank;
  CLI::Option* o_sigma = nullptr;
  CLI::Option* o_lambda = nullptr;
  CLI::Option* o_estimate = nullptr;
  CLI::Option* o_band_lo = nullptr;
  CLI::Option* o_band_hi = nullptr;
};

LambdaMode lambda_mode(const EstimateArgs& a) {
  const auto given = a.o_sigma->count() + a.o_lambda->count() + a.o_estimate->count();
  if (given != 1) throw UsageError("exactly one of --sigma, --lambda, --estimate-sigma is required");
  if (a.o_sigma->count() > 0) {
    const double sigma = parse_real(a.sigma);
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw UsageError("--sigma must be finite and >= 0");
    return OracleSigma{sigma};
  }
  if (a.o_lambda->count() > 0) {
    if (!(a.lambda > 0.0)) throw UsageError("--lambda must be positive");
    return ExplicitLambda{a.lambda};
  }
  if (a.o_band_lo->count() == 0 || a.o_band_hi->count() == 0) {
    throw UsageError("--estimate-sigma needs --band-lo and --band-hi");
  }
  return EstimateSigma{a.band_lo, a.band_hi};
}

void estimate_cmd(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  const Method method = [&] {
    try {
      return parse_method(a.method);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }();
  const LambdaMode mode = lambda_mode(a);
  const SolverSettings solver = a.solver.apply({});
  const RankRule rule = a.rank.get();
  const std::vector<Complex> y = read_signal_csv(fs::path(a.input));
  if (y.empty()) throw Error(Errc::invalid_signal, "signal file has no samples");

  Estimate est;
  if (method == Method::gfilter_anm) {
    if (a.filter.empty()) throw UsageError("--filter is required for gfilter-anm");
    EstimatorConfig cfg{filter_from_json(read_json_file(a.filter))};
    cfg.rank_rule = rule;
    cfg.lambda_mode = mode;
    cfg.solver = solver;
    cfg.grid_size = a.grid;
    est = estimate_frequencies(y, cfg);
  } else {
    est = standard_anm(y, mode, solver, rule);
  }
  if (est.transient_warning) err << "warning: filter transient has not decayed over the record\n";
  if (est.extraction_deficit) err << "warning: fewer d-bar minima than the numerical rank\n";
  err << summary_line(est.solution) << '\n';

  Json j = to_json(est);
  if (a.amplitudes && !est.lines.freqs.empty()) {
    j["amplitudes"] = to_json(recover_amplitudes(y, est.lines.freqs));
  }
  const fs::path dir = output_dir(a.out_dir);
  write_json_file(dir / "estimate.json", j);
  {
    auto os = open_output(dir / "dbar.csv");
    write_curve_csv(os, est.lines.dbar, "dbar");
  }
  out << j.dump(2) << '\n';
  if (a.strict && !est.solution.converged) throw NumericalFailure("solver did not converge");
}

// decompose ----------------------------------------------------------------

struct DecomposeArgs {
  std::string sigma_matrix;
  std::string filter;
  int grid = 8192;
  std::string out_dir;
  RankFlags rank;
};

void decompose_cmd(const DecomposeArgs& a, std::ostream& out) {
  const GFilter filter = filter_from_json(read_json_file(a.filter));
  const CMatrix sigma = matrix_from_json(read_json_file(a.sigma_matrix));
  if (sigma.rows() != filter.size() || sigma.cols() != filter.size()) {
    throw Error(Errc::shape_mismatch, "Sigma must be " + std::to_string(filter.size()) + " x " +
                                          std::to_string(filter.size()));
  }
  CfOptions opts;
  opts.rule = a.rank.get();
  opts.grid_size = a.grid;

  const fs::path dir = output_dir(a.out_dir);
  auto emit = [&](const LineEstimate& lines, bool deficit) {
    Json j = to_json(lines);
    j["extraction_deficit"] = deficit;
    j["constraint_residual"] = max_abs(constraint_residual(filter, sigma));
    write_json_file(dir / "estimate.json", j);
    auto os = open_output(dir / "dbar.csv");
    write_curve_csv(os, lines.dbar, "dbar");
    out << j.dump(2) << '\n';
  };
  try {
    emit(cf_decompose(filter, sigma, opts), false);
  } catch (const ExtractionDeficit& e) {
    emit(e.partial(), true);
    throw NumericalFailure(e.what());
  }
}

// benchmark ----------------------------------------------------------------

struct BenchmarkArgs {
  std::string config;
  int trials = 0;
  bool full = false;
  std::vector<std::string> methods;
  std::vector<std::string> snr;
  std::vector<double> theta0;
  std::uint64_t seed = 0;
  int threads = 0;
  bool timing = false;
  bool no_svg = false;
  bool estimate_sigma = false;
  bool strict = false;
  std::string out_dir;
  SolverFlags solver;
  CLI::Option* o_trials = nullptr;
  CLI::Option* o_full = nullptr;
  CLI::Option* o_methods = nullptr;
  CLI::Option* o_snr = nullptr;
  CLI::Option* o_theta0 = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_threads = nullptr;
  CLI::Option* o_estimate = nullptr;
};

constexpr int kDefaultCliTrials = 20;

ExperimentConfig benchmark_config(const BenchmarkArgs& a) {
  ExperimentConfig c;
  c.trials = kDefaultCliTrials;
  if (!a.config.empty()) c = experiment_config_from_json(read_json_file(a.config), c);
  if (a.o_full->count() > 0) c.trials = 50;
  if (a.o_trials->count() > 0) c.trials = a.trials;
  if (a.o_methods->count() > 0) {
    c.methods.clear();
    for (const std::string& m : a.methods) {
      try {
        c.methods.push_back(parse_method(m));
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }
  }
  if (a.o_snr->count() > 0) {
    c.snr_db_grid.clear();
    for (const std::string& s : a.snr) c.snr_db_grid.push_back(parse_real(s));
  }
  if (a.o_theta0->count() > 0) c.theta0_grid = a.theta0;
  if (a.o_seed->count() > 0) c.seed = a.seed;
  if (a.o_threads->count() > 0) c.threads = a.threads;
  if (a.o_estimate->count() > 0) c.estimate_sigma = a.estimate_sigma;
  c.solver = a.solver.apply(c.solver);
  validate(c);
  return c;
}

void benchmark_cmd(const BenchmarkArgs& a, std::ostream& out) {
  const ExperimentConfig config = benchmark_config(a);
  const ResultTable table = run_experiment(config);

  std::optional<Illustration> illus;
  if (!a.no_svg && !config.theta0_grid.empty() && !config.snr_db_grid.empty()) {
    const double theta0 = config.theta0_grid[config.theta0_grid.size() / 2];
    illus = illustrate(config, theta0, config.snr_db_grid.back());
  }
  const fs::path dir = output_dir(a.out_dir);
  EmitOptions opts;
  opts.svg = !a.no_svg;
  opts.include_timing = a.timing;
  const auto files = emit_results(table, config, illus, dir, opts);
  write_json_file(dir / "config.json", to_json(config));

  int unconverged = 0;
  out << "theta0,snr_db,method,trials,success_probability,unconverged,median_error\n";
  for (const SummaryRow& r : table.summary) {
    unconverged += r.unconverged;
    out << format_number(r.theta0) << ',' << format_number(r.snr_db) << ',' << to_string(r.method)
        << ',' << r.trials << ',' << format_number(r.success_probability) << ',' << r.unconverged
        << ',' << (r.error ? format_number(r.error->median) : std::string()) << '\n';
  }
  for (const fs::path& f : files) out << "wrote " << f.string() << '\n';
  if (a.strict && unconverged > 0) {
    throw NumericalFailure(std::to_string(unconverged) + " solves did not converge");
  }
}

int exit_code_for(const Error& e) {
  return e.code() == Errc::extraction_deficit ? kExitNumerical : kExitUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Line spectral estimation by atomic norm minimization over filter banks", "gfanm"};
  app.require_subcommand(1);
  std::function<void()> action;

  DesignArgs design;
  auto* c_design = app.add_subcommand("design-filter", "Build an all-pass cascade filter bank");
  design.o_pole = c_design->add_option("--pole-mag", design.pole_mag, "Pole modulus in [0, 1)");
  auto* o_phase = c_design->add_option("--pole-phase", design.pole_phase, "Pole phase (radians)");
  design.o_band = c_design->add_option("--band-lo", design.band_lo, "Lower band edge (radians)");
  auto* o_band_hi = c_design->add_option("--band-hi", design.band_hi, "Upper band edge (radians)");
  design.o_pole->needs(o_phase);
  o_phase->needs(design.o_pole);
  design.o_band->needs(o_band_hi);
  o_band_hi->needs(design.o_band);
  design.o_pole->excludes(design.o_band);
  c_design->add_option("--size", design.size, "Number of sections n")
      ->required()
      ->check(CLI::PositiveNumber);
  c_design->add_option("--grid", design.grid, "Gain curve grid size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_design->add_option("--out-dir", design.out_dir, "Output directory");
  c_design->callback([&] { action = [&] { design_filter(design, out); }; });

  FilterArgs filt;
  auto* c_filter = app.add_subcommand("filter", "Run a signal through a filter bank");
  c_filter->add_option("--input", filt.input, "Signal CSV (re,im)")->required();
  c_filter->add_option("--filter", filt.filter, "Filter JSON")->required();
  c_filter->add_option("--eps", filt.eps, "Transient threshold")->capture_default_str();
  c_filter->add_option("--out-dir", filt.out_dir, "Output directory");
  c_filter->callback([&] { action = [&] { filter_cmd(filt, out, err); }; });

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Generate a cisoid record with Gaussian noise");
  c_sim->add_option("--m", sim.m, "Number of cisoids")->capture_default_str();
  c_sim->add_option("--length", sim.length, "Record length L")->capture_default_str();
  c_sim->add_option("--theta0", sim.theta0, "Centre frequency")->capture_default_str();
  c_sim->add_option("--snr", sim.snr, "SNR in dB, or inf")->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  c_sim->add_option("--out-dir", sim.out_dir, "Output directory");
  c_sim->callback([&] { action = [&] { simulate(sim, out); }; });

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Estimate line frequencies from a record");
  c_est->add_option("--input", est.input, "Signal CSV (re,im)")->required();
  c_est->add_option("--filter", est.filter, "Filter JSON (gfilter-anm)");
  c_est->add_option("--method", est.method, "gfilter-anm or standard-anm")->capture_default_str();
  est.o_sigma = c_est->add_option("--sigma", est.sigma, "Known noise standard deviation");
  est.o_lambda = c_est->add_option("--lambda", est.lambda, "Explicit regularization weight");
  est.o_estimate = c_est->add_flag("--estimate-sigma", "Estimate sigma from out-of-band DFT bins");
  est.o_band_lo = c_est->add_option("--band-lo", est.band_lo, "Signal band lower edge");
  est.o_band_hi = c_est->add_option("--band-hi", est.band_hi, "Signal band upper edge");
  c_est->add_option("--grid", est.grid, "d-bar grid size")->capture_default_str();
  c_est->add_flag("--strict", est.strict, "Exit 1 if the solver does not converge");
  c_est->add_flag("--amplitudes", est.amplitudes, "Also report least-squares amplitudes");
  c_est->add_option("--out-dir", est.out_dir, "Output directory");
  est.solver.add(c_est);
  est.rank.add(c_est);
  c_est->callback([&] { action = [&] { estimate_cmd(est, out, err); }; });

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "Decompose a structured covariance into lines");
  c_dec->add_option("--sigma-matrix", dec.sigma_matrix, "Sigma JSON (rows of {re, im})")
      ->required();
  c_dec->add_option("--filter", dec.filter, "Filter JSON")->required();
  c_dec->add_option("--grid", dec.grid, "d-bar grid size")->capture_default_str();
  c_dec->add_option("--out-dir", dec.out_dir, "Output directory");
  dec.rank.add(c_dec);
  c_dec->callback([&] { action = [&] { decompose_cmd(dec, out); }; });

  BenchmarkArgs bench;
  auto* c_bench = app.add_subcommand("benchmark", "Monte Carlo comparison of the estimators");
  c_bench->add_option("--config", bench.config, "Experiment JSON; flags override it");
  bench.o_trials = c_bench->add_option("--trials", bench.trials, "Trials per grid point (default 20)");
  bench.o_full = c_bench->add_flag("--full", bench.full, "Use 50 trials per grid point");
  bench.o_trials->excludes(bench.o_full);
  bench.o_methods = c_bench->add_option("--methods", bench.methods, "gfilter-anm, standard-anm");
  bench.o_snr = c_bench->add_option("--snr", bench.snr, "SNR grid in dB (inf allowed)");
  bench.o_theta0 = c_bench->add_option("--theta0", bench.theta0, "Centre-frequency grid");
  bench.o_seed = c_bench->add_option("--seed", bench.seed, "Master seed");
  bench.o_threads = c_bench->add_option("--threads", bench.threads, "Worker threads, 0 for all cores");
  c_bench->add_flag("--timing", bench.timing, "Fill wall_time_ms in trials.csv");
  c_bench->add_flag("--no-svg", bench.no_svg, "Skip SVG figures");
  bench.o_estimate = c_bench->add_flag("--estimate-sigma", bench.estimate_sigma,
                                       "Estimate sigma instead of using the oracle value");
  c_bench->add_flag("--strict", bench.strict, "Exit 1 if any solve did not converge");
  c_bench->add_option("--out-dir", bench.out_dir, "Output directory");
  bench.solver.add(c_bench);
  c_bench->callback([&] { action = [&] { benchmark_cmd(bench, out); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace gfanm::cli
