#include "sdjls/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace sdjls::io {

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ParseError(field + ": expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ParseError(field + ": expected an integer");
  return j.get<int>();
}

Vector vector_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError(field + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], field);
  return v;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_or_null(v(i)));
  return out;
}

}  // namespace

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError(field + ": expected a nested array");
  if (j.empty()) return Matrix(0, 0);
  if (!j[0].is_array()) return vector_from_json(j, field);
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ParseError(field + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = number(j[r][c], field);
  }
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number_or_null(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

ModelDescription model_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("model: expected a JSON object");
  ModelDescription d;
  d.state_dim = integer(require(j, "state_dim"), "state_dim");
  d.input_dim = j.contains("input_dim") ? integer(j.at("input_dim"), "input_dim") : 0;

  const Json& modes = require(j, "modes");
  if (!modes.is_array()) throw ParseError("modes: expected an array");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string base = "modes[" + std::to_string(i + 1) + "]";
    ModeDynamics md;
    md.A = matrix_from_json(require(modes[i], "A"), base + ".A");
    if (modes[i].contains("B") && !modes[i].at("B").is_null()) {
      md.B = matrix_from_json(modes[i].at("B"), base + ".B");
    }
    d.modes.push_back(std::move(md));
  }

  if (j.contains("partition")) {
    const Json& part = j.at("partition");
    if (!part.is_object()) throw ParseError("partition: expected an object");
    if (part.contains("Q") && !part.at("Q").is_null()) d.partition.Q = matrix_from_json(part.at("Q"), "partition.Q");
    if (part.contains("thresholds")) {
      const Json& th = part.at("thresholds");
      if (!th.is_array()) throw ParseError("partition.thresholds: expected an array");
      for (const auto& t : th) d.partition.thresholds.push_back(number(t, "partition.thresholds"));
    }
  }

  const Json& rates = require(j, "rates");
  if (!rates.is_array()) throw ParseError("rates: expected an array of matrices");
  for (std::size_t k = 0; k < rates.size(); ++k) {
    d.rates.push_back(matrix_from_json(rates[k], "rates[" + std::to_string(k + 1) + "]"));
  }
  d.x0 = vector_from_json(require(j, "x0"), "x0");
  d.mode0 = j.contains("mode0") ? integer(j.at("mode0"), "mode0") : 1;
  return d;
}

Json model_to_json(const ModelDescription& d) {
  Json j;
  j["state_dim"] = d.state_dim;
  j["input_dim"] = d.input_dim;
  j["modes"] = Json::array();
  for (const auto& m : d.modes) {
    Json mode;
    mode["A"] = matrix_to_json(m.A);
    if (m.B) mode["B"] = matrix_to_json(*m.B);
    j["modes"].push_back(std::move(mode));
  }
  Json part;
  if (d.partition.Q.size() != 0) part["Q"] = matrix_to_json(d.partition.Q);
  part["thresholds"] = d.partition.thresholds;
  j["partition"] = std::move(part);
  j["rates"] = Json::array();
  for (const auto& r : d.rates) j["rates"].push_back(matrix_to_json(r));
  j["x0"] = vector_to_json(d.x0);
  j["mode0"] = d.mode0;
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

ModelDescription load_model(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  try {
    return model_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Json certificate_to_json(const StabilityCertificate& cert, Verdict verdict) {
  Json j;
  j["verdict"] = to_string(verdict);
  j["epsilon"] = cert.epsilon;
  j["P"] = Json::array();
  for (const auto& p : cert.P) j["P"].push_back(matrix_to_json(p));
  Json eigs = Json::object();
  for (std::size_t k = 0; k < cert.residual_eigs.size(); ++k)
    for (std::size_t i = 0; i < cert.residual_eigs[k].size(); ++i)
      eigs[std::to_string(k + 1) + "," + std::to_string(i + 1)] = vector_to_json(cert.residual_eigs[k][i]);
  j["residual_eigs"] = std::move(eigs);
  j["min_P_eig"] = number_or_null(cert.min_P_eig);
  j["max_residual_eig"] = number_or_null(cert.max_residual_eig);
  j["pass"] = cert.pass;
  return j;
}

Json gains_to_json(const ControllerGains& gains) {
  Json j;
  for (const char* key : {"K", "X", "Y"}) j[key] = Json::array();
  for (const auto& k : gains.K) j["K"].push_back(matrix_to_json(k));
  for (const auto& x : gains.X) j["X"].push_back(matrix_to_json(x));
  for (const auto& y : gains.Y) j["Y"].push_back(matrix_to_json(y));
  j["closed_loop"] = gains.closed_loop
                         ? certificate_to_json(*gains.closed_loop,
                                               gains.verified ? Verdict::Feasible : Verdict::Undetermined)
                         : Json(nullptr);
  j["verified"] = gains.verified;
  return j;
}

std::vector<Matrix> gains_K_from_json(const Json& j) {
  const Json& K = require(j, "K");
  if (!K.is_array()) throw ParseError("K: expected an array of matrices");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < K.size(); ++i) {
    Matrix k = matrix_from_json(K[i], "K[" + std::to_string(i + 1) + "]");
    // A flat array is a single-input gain row.
    if (K[i].is_array() && !K[i].empty() && !K[i][0].is_array()) k.transposeInPlace();
    out.push_back(std::move(k));
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int state_dim) {
  os << "t";
  for (int i = 1; i <= state_dim; ++i) os << ",x" << i;
  os << ",mode,region\n";
  const auto row = [&](double t, const Vector& x, int mode, int region) {
    os << format_double(t);
    for (Eigen::Index i = 0; i < x.size(); ++i) os << ',' << format_double(x(i));
    os << ',' << mode + 1 << ',' << region + 1 << '\n';
  };
  for (std::size_t s = 0; s < traj.segments.size(); ++s) {
    const auto& seg = traj.segments[s];
    for (const auto& sample : seg.samples) row(sample.t, sample.x, seg.mode, seg.region);
    if (s < traj.events.size() && s + 1 < traj.segments.size()) {
      const auto& next = traj.segments[s + 1];
      row(traj.events[s].time, traj.events[s].x, next.mode, next.region);
    }
  }
}

void write_events_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,kind,from,to\n";
  for (const auto& e : traj.events) {
    os << format_double(e.time) << ',' << to_string(e.kind) << ',' << e.from + 1 << ',' << e.to + 1 << '\n';
  }
}

}  // namespace sdjls::io
