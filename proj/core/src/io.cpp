#include "gfanm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gfanm {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::invalid_input, what); }

double number_from_json(const Json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  bad(std::string(what) + " must be a number");
}

Json number_to_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

Json to_json(Complex c) { return Json{{"re", c.real()}, {"im", c.imag()}}; }

Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_object() || !j.contains("re")) bad("complex value must be {re, im}");
  const double re = number_from_json(j.at("re"), "re");
  const double im = j.contains("im") ? number_from_json(j.at("im"), "im") : 0.0;
  return {re, im};
}

Json to_json(const CVector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(to_json(v(i)));
  return arr;
}

CVector vector_from_json(const Json& j) {
  if (!j.is_array()) bad("vector must be an array of {re, im}");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

Json to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j) {
  if (!j.is_array()) bad("matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return CMatrix(0, 0);
  if (!j[0].is_array()) bad("matrix rows must be arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad("matrix is ragged");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)]);
  }
  return m;
}

Json to_json(const GFilter& filter) {
  if (filter.pole()) return Json{{"n", filter.size()}, {"pole", to_json(*filter.pole())}};
  return Json{{"A", to_json(filter.A())}, {"b", to_json(filter.b())}};
}

GFilter filter_from_json(const Json& j) {
  if (!j.is_object()) bad("filter must be a JSON object");
  if (j.contains("pole")) {
    if (!j.contains("n") || !j.at("n").is_number_integer()) bad("designed filter needs integer n");
    return make_allpass_cascade(complex_from_json(j.at("pole")), j.at("n").get<int>());
  }
  if (j.contains("A") && j.contains("b")) {
    return GFilter::from_pair(matrix_from_json(j.at("A")), vector_from_json(j.at("b")));
  }
  bad("filter JSON needs {n, pole} or {A, b}");
}

Json to_json(const SolverSettings& s) {
  return Json{{"penalty", s.penalty},
              {"max_iter", s.max_iter},
              {"eps_abs", s.eps_abs},
              {"eps_rel", s.eps_rel},
              {"over_relaxation", s.over_relaxation},
              {"adapt_interval", s.adapt_interval},
              {"adapt_ratio", s.adapt_ratio},
              {"adapt_factor", s.adapt_factor},
              {"objective_window", s.objective_window}};
}

SolverSettings solver_settings_from_json(const Json& j, SolverSettings s) {
  if (!j.is_object()) bad("solver settings must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "penalty") s.penalty = value.get<double>();
      else if (key == "max_iter") s.max_iter = value.get<int>();
      else if (key == "eps_abs") s.eps_abs = value.get<double>();
      else if (key == "eps_rel") s.eps_rel = value.get<double>();
      else if (key == "over_relaxation") s.over_relaxation = value.get<double>();
      else if (key == "adapt_interval") s.adapt_interval = value.get<int>();
      else if (key == "adapt_ratio") s.adapt_ratio = value.get<double>();
      else if (key == "adapt_factor") s.adapt_factor = value.get<double>();
      else if (key == "objective_window") s.objective_window = value.get<int>();
      else bad("unknown solver setting '" + key + "'");
    }
  } catch (const Json::exception& e) {
    bad(std::string("solver settings: ") + e.what());
  }
  validate(s);
  return s;
}

Json to_json(const LineEstimate& est) {
  Json j{{"freqs", est.freqs}, {"powers", est.powers}, {"rank", est.rank},
         {"rank_clamped", est.rank_clamped}};
  j["eigenvalues"] = std::vector<double>(est.eigenvalues.data(),
                                         est.eigenvalues.data() + est.eigenvalues.size());
  return j;
}

Json to_json(const Estimate& est) {
  Json j{{"freqs", est.lines.freqs},
         {"powers", est.lines.powers},
         {"rank", est.lines.rank},
         {"r_hat", est.r_hat},
         {"lambda", est.lambda},
         {"converged", est.solution.converged},
         {"iterations", est.solution.iterations},
         {"objective", est.solution.objective},
         {"noiseless", est.noiseless},
         {"low_confidence", est.low_confidence},
         {"extraction_deficit", est.extraction_deficit},
         {"transient_warning", est.transient_warning},
         {"rank_clamped", est.lines.rank_clamped},
         {"primal_residual", est.solution.primal_residual},
         {"dual_residual", est.solution.dual_residual}};
  return j;
}

Json to_json(const StructuredSubspace& sub) {
  Json basis = Json::array();
  for (int i = 0; i < sub.dim(); ++i) basis.push_back(to_json(sub.element(i)));
  return Json{{"filter", to_json(sub.filter())}, {"dim", sub.dim()}, {"basis", basis}};
}

Json to_json(const ExperimentConfig& c) {
  Json methods = Json::array();
  for (Method m : c.methods) methods.push_back(std::string(to_string(m)));
  Json snr = Json::array();
  for (double s : c.snr_db_grid) snr.push_back(number_to_json(s));
  return Json{{"m", c.m},
              {"L", c.L},
              {"theta0_grid", c.theta0_grid},
              {"snr_db_grid", snr},
              {"trials", c.trials},
              {"seed", c.seed},
              {"filter", {{"n", c.filter_n}, {"pole", to_json(c.pole)}}},
              {"methods", methods},
              {"estimate_sigma", c.estimate_sigma},
              {"band", {c.band_lo, c.band_hi}},
              {"solver", to_json(c.solver)},
              {"rank_rule", {{"abs_floor", c.rank_rule.abs_floor}, {"ratio_gap", c.rank_rule.ratio_gap}}},
              {"threads", c.threads}};
}

ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig c) {
  if (!j.is_object()) bad("experiment config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "m") c.m = value.get<int>();
      else if (key == "L") c.L = value.get<int>();
      else if (key == "theta0_grid") c.theta0_grid = value.get<std::vector<double>>();
      else if (key == "snr_db_grid") {
        c.snr_db_grid.clear();
        for (const Json& s : value) c.snr_db_grid.push_back(number_from_json(s, "snr_db_grid entry"));
      } else if (key == "trials") c.trials = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "filter") {
        if (value.contains("n")) c.filter_n = value.at("n").get<int>();
        if (value.contains("pole")) c.pole = complex_from_json(value.at("pole"));
      } else if (key == "methods") {
        c.methods.clear();
        for (const Json& m : value) c.methods.push_back(parse_method(m.get<std::string>()));
      } else if (key == "estimate_sigma") c.estimate_sigma = value.get<bool>();
      else if (key == "band") {
        const auto band = value.get<std::vector<double>>();
        if (band.size() != 2) bad("band must be [lo, hi]");
        c.band_lo = band[0];
        c.band_hi = band[1];
      } else if (key == "solver") c.solver = solver_settings_from_json(value, c.solver);
      else if (key == "rank_rule") {
        if (value.contains("abs_floor")) c.rank_rule.abs_floor = value.at("abs_floor").get<double>();
        if (value.contains("ratio_gap")) c.rank_rule.ratio_gap = value.at("ratio_gap").get<double>();
      } else if (key == "threads") c.threads = value.get<int>();
      else bad("unknown experiment setting '" + key + "'");
    }
  } catch (const Json::exception& e) {
    bad(std::string("experiment config: ") + e.what());
  }
  validate(c);
  return c;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) bad("cannot open " + path.string());
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    bad("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) bad("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

std::vector<Complex> read_signal_csv(std::istream& is) {
  std::vector<Complex> y;
  std::string line;
  bool first = true;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    for (char& ch : line) {
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    }
    std::istringstream fields(line);
    double re = 0.0;
    double im = 0.0;
    if (!(fields >> re)) {
      if (first) {
        first = false;
        continue;
      }
      bad("signal CSV line " + std::to_string(lineno) + " is not numeric");
    }
    if (!(fields >> im)) bad("signal CSV line " + std::to_string(lineno) + " needs two columns");
    first = false;
    y.emplace_back(re, im);
  }
  return y;
}

std::vector<Complex> read_signal_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) bad("cannot open " + path.string());
  return read_signal_csv(is);
}

void write_signal_csv(std::ostream& os, std::span<const Complex> y) {
  os << "re,im\n";
  for (const Complex& c : y) os << format_number(c.real()) << ',' << format_number(c.imag()) << '\n';
}

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve,
                     const std::string& value_name) {
  os << "theta," << value_name << '\n';
  for (const CurvePoint& p : curve) os << format_number(p.theta) << ',' << format_number(p.value) << '\n';
}

}  // namespace gfanm
