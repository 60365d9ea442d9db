#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gfanm/bench.hpp"
#include "gfanm/estimator.hpp"

namespace gfanm {

using Json = nlohmann::json;

/// Shortest decimal text that round-trips the double; "inf"/"-inf"/"nan"
/// for non-finite values.
std::string format_number(double v);

Json to_json(Complex c);
Complex complex_from_json(const Json& j);
Json to_json(const CVector& v);
CVector vector_from_json(const Json& j);
Json to_json(const CMatrix& m);
/// Nested row arrays of {re, im}; throws Error(invalid_input) when ragged.
CMatrix matrix_from_json(const Json& j);

/// {n, pole: {re, im}} for designed filters, {A, b} otherwise.
Json to_json(const GFilter& filter);
GFilter filter_from_json(const Json& j);

Json to_json(const SolverSettings& s);
/// Fields present in j override those of base.
SolverSettings solver_settings_from_json(const Json& j, SolverSettings base = {});

Json to_json(const LineEstimate& est);
/// {freqs, powers, rank, lambda, converged, iterations, objective, ...}.
Json to_json(const Estimate& est);

Json to_json(const StructuredSubspace& sub);

Json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig base = {});

/// Throws Error(invalid_input) on a missing file or malformed JSON.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Two columns re,im per row; a non-numeric first line is a header.
std::vector<Complex> read_signal_csv(std::istream& is);
std::vector<Complex> read_signal_csv(const std::filesystem::path& path);
void write_signal_csv(std::ostream& os, std::span<const Complex> y);

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve,
                     const std::string& value_name);

}  // namespace gfanm
