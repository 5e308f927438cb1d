#pragma once

#include <vector>

#include "sdjls/model.hpp"

namespace fixtures {

using sdjls::Matrix;
using sdjls::Vector;

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Two modes, two regions split by |x|^2 = 3.
inline sdjls::ModelDescription example1_description() {
  sdjls::ModelDescription d;
  d.state_dim = 2;
  d.modes = {{mat({{-1, 5}, {-0.5, 0.9}}), std::nullopt}, {mat({{-4, 2}, {-2, 0.1}}), std::nullopt}};
  d.partition.thresholds = {3.0};
  d.rates = {mat({{-2, 2}, {2, -2}}), mat({{-4, 4}, {4, -4}})};
  d.x0 = vec({-1, 1});
  d.mode0 = 1;
  return d;
}

inline sdjls::ModelDescription example2_description() {
  sdjls::ModelDescription d = example1_description();
  d.input_dim = 1;
  d.modes = {{mat({{-1, 2}, {-2, 1}}), mat({{1}, {3}})}, {mat({{1, 2}, {2, 1}}), mat({{-5}, {6}})}};
  return d;
}

inline sdjls::SdjlsModel example1() { return sdjls::validate_model(example1_description()); }
inline sdjls::SdjlsModel example2() { return sdjls::validate_model(example2_description()); }

inline std::vector<Matrix> example1_printed_P() {
  return {mat({{0.3787, -0.4069}, {-0.4069, 2.2977}}), mat({{0.3891, -0.6203}, {-0.6203, 1.9226}})};
}

inline std::vector<Matrix> example2_printed_X() {
  return {mat({{0.343, -0.365}, {-0.365, 0.3973}}), mat({{0.3998, -0.4203}, {-0.4203, 0.4462}})};
}
inline std::vector<Matrix> example2_printed_Y() { return {mat({{0.2597, -0.5748}}), mat({{-0.0385, 0.0032}})}; }
inline std::vector<Matrix> example2_printed_K() {
  return {mat({{-35.4961, -34.0615}}), mat({{-8.9022, -8.3779}})};
}

/// Single-mode, single-region scalar or matrix model.
inline sdjls::SdjlsModel single_mode(const Matrix& A, const Vector& x0, std::vector<double> thresholds = {}) {
  sdjls::ModelDescription d;
  d.state_dim = static_cast<int>(A.rows());
  d.modes = {{A, std::nullopt}};
  d.partition.thresholds = std::move(thresholds);
  d.rates.assign(d.partition.thresholds.size() + 1, Matrix::Zero(1, 1));
  d.x0 = x0;
  return sdjls::validate_model(d);
}

}  // namespace fixtures
