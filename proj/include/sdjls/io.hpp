#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "sdjls/analysis.hpp"
#include "sdjls/model.hpp"
#include "sdjls/simulate.hpp"
#include "sdjls/synthesis.hpp"

namespace sdjls::io {

using Json = nlohmann::json;

/// Row-major nested arrays <-> matrices. A flat array is read as a column.
Matrix matrix_from_json(const Json& j, const std::string& field);
Json matrix_to_json(const Matrix& m);

/// Model file: state_dim, input_dim, modes[{A, B?}], partition{Q?, thresholds},
/// rates[K], x0, mode0 (1-based). Throws ParseError on malformed documents;
/// semantic checks are left to validate_model.
ModelDescription model_from_json(const Json& j);
Json model_to_json(const ModelDescription& d);

/// Throws IoError if the file cannot be read, ParseError if it is not JSON.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
ModelDescription load_model(const std::filesystem::path& path);

/// {verdict, epsilon, P, residual_eigs: {"kappa,i": [...]}, min_P_eig, ...}
Json certificate_to_json(const StabilityCertificate& cert, Verdict verdict);

/// {K, X, Y, closed_loop, verified}
Json gains_to_json(const ControllerGains& gains);
/// Reads the K list of a gains file.
std::vector<Matrix> gains_K_from_json(const Json& j);

/// Header t,x1..xn,mode,region; one row per grid sample and per event, in
/// time order. Modes and regions are written 1-based.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int state_dim);
/// Header t,kind,from,to with kind in {jump, cross}.
void write_events_csv(std::ostream& os, const Trajectory& traj);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Finite doubles as numbers, non-finite as null.
Json number_or_null(double v);

}  // namespace sdjls::io
