#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "gfanm/io.hpp"

using namespace gfanm;

TEST(Io, FormatNumber) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_number(third)), third);
}

TEST(Io, ComplexAndMatrixRoundTrip) {
  const Complex c(1.25, -3.5);
  EXPECT_EQ(complex_from_json(to_json(c)), c);
  EXPECT_EQ(complex_from_json(Json(2.0)), Complex(2.0, 0.0));
  EXPECT_THROW(complex_from_json(Json("x")), Error);

  CMatrix m(2, 3);
  m << Complex(1, 2), 3.0, Complex(0, -1), 4.5, Complex(7, 7), 0.0;
  EXPECT_EQ(matrix_from_json(to_json(m)), m);
  CVector v(3);
  v << 1.0, Complex(0.1, 0.2), -2.0;
  EXPECT_EQ(vector_from_json(to_json(v)), v);

  Json ragged = Json::array({Json::array({1.0, 2.0}), Json::array({3.0})});
  try {
    matrix_from_json(ragged);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_input);
  }
}

TEST(Io, FilterRoundTrip) {
  const GFilter designed = make_allpass_cascade(std::polar(0.58, 2.0), 6);
  const Json j = to_json(designed);
  EXPECT_TRUE(j.contains("pole"));
  const GFilter back = filter_from_json(j);
  EXPECT_LT((back.A() - designed.A()).cwiseAbs().maxCoeff(), 1e-15);

  CMatrix a = CMatrix::Zero(2, 2);
  a(1, 0) = 1.0;
  CVector b(2);
  b << 1.0, 0.0;
  const GFilter pair = GFilter::from_pair(a, b);
  const Json jp = to_json(pair);
  EXPECT_TRUE(jp.contains("A"));
  EXPECT_EQ(filter_from_json(jp).A(), a);
  EXPECT_THROW(filter_from_json(Json::object()), Error);
}

TEST(Io, SolverSettingsOverride) {
  SolverSettings base;
  base.max_iter = 7;
  const SolverSettings s = solver_settings_from_json(Json{{"penalty", 3.0}}, base);
  EXPECT_EQ(s.penalty, 3.0);
  EXPECT_EQ(s.max_iter, 7);
  EXPECT_THROW(solver_settings_from_json(Json{{"rho", 1.0}}), Error);
  const SolverSettings round = solver_settings_from_json(to_json(base));
  EXPECT_EQ(round.max_iter, 7);
  EXPECT_EQ(round.eps_rel, base.eps_rel);
}

TEST(Io, ExperimentConfigRoundTrip) {
  ExperimentConfig c;
  c.snr_db_grid = {0.0, std::numeric_limits<double>::infinity()};
  c.methods = {Method::standard_anm};
  c.trials = 4;
  c.seed = 99;
  const Json j = to_json(c);
  EXPECT_EQ(j.at("snr_db_grid")[1], "inf");
  const ExperimentConfig back = experiment_config_from_json(j);
  EXPECT_EQ(back.snr_db_grid, c.snr_db_grid);
  EXPECT_EQ(back.methods, c.methods);
  EXPECT_EQ(back.trials, 4);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.pole, c.pole);
  EXPECT_EQ(to_json(back), j);
}

TEST(Io, ExperimentConfigErrors) {
  EXPECT_THROW(experiment_config_from_json(Json{{"trails", 3}}), Error);
  EXPECT_THROW(experiment_config_from_json(Json{{"trials", 0}}), Error);
  EXPECT_THROW(experiment_config_from_json(Json{{"band", {1.0}}}), Error);
  EXPECT_THROW(experiment_config_from_json(Json{{"methods", {"music"}}}), Error);
  EXPECT_THROW(experiment_config_from_json(Json{{"m", "three"}}), Error);
  EXPECT_THROW(experiment_config_from_json(Json::array()), Error);
  const ExperimentConfig partial = experiment_config_from_json(Json{{"L", 64}});
  EXPECT_EQ(partial.L, 64);
  EXPECT_EQ(partial.m, 3);
}

TEST(Io, JsonFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "gfanm_io_test";
  std::filesystem::create_directories(dir);
  write_json_file(dir / "a.json", Json{{"x", 1}});
  EXPECT_EQ(read_json_file(dir / "a.json").at("x"), 1);
  {
    std::ofstream os(dir / "bad.json");
    os << "{ not json";
  }
  EXPECT_THROW(read_json_file(dir / "bad.json"), Error);
  EXPECT_THROW(read_json_file(dir / "missing.json"), Error);
  std::filesystem::remove_all(dir);
}

TEST(Io, SignalCsv) {
  std::istringstream with_header("re,im\n1,2\n-0.5;0.25\n\n3\t4\r\n");
  const auto y = read_signal_csv(with_header);
  ASSERT_EQ(y.size(), 3u);
  EXPECT_EQ(y[0], Complex(1, 2));
  EXPECT_EQ(y[1], Complex(-0.5, 0.25));
  EXPECT_EQ(y[2], Complex(3, 4));

  std::istringstream bare("1 0\n0 1\n");
  EXPECT_EQ(read_signal_csv(bare).size(), 2u);
  std::istringstream bad_row("1,2\nfoo,bar\n");
  EXPECT_THROW(read_signal_csv(bad_row), Error);
  std::istringstream one_col("1\n");
  EXPECT_THROW(read_signal_csv(one_col), Error);

  std::ostringstream os;
  const std::vector<Complex> z = {Complex(0.1, -2.0), Complex(1.0 / 3.0, 0.0)};
  write_signal_csv(os, z);
  std::istringstream back(os.str());
  EXPECT_EQ(read_signal_csv(back), z);
}

TEST(Io, CurveCsv) {
  std::ostringstream os;
  write_curve_csv(os, {{0.0, 1.0}, {0.5, 0.25}}, "dbar");
  EXPECT_EQ(os.str(), "theta,dbar\n0,1\n0.5,0.25\n");
}
