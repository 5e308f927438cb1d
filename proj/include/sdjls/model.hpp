#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdjls/errors.hpp"

namespace sdjls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dynamics of one mode: x' = A x + B u.
struct ModeDynamics {
  Matrix A;
  std::optional<Matrix> B;
};

/// Nested quadratic shells. Region k (0-based) is
/// { x : r_{k-1} <= x'Qx < r_k } with r_{-1} = 0 and r_{K-1} = +inf, so each
/// region is closed at its lower threshold and open at its upper one.
struct RegionPartition {
  Matrix Q;                        // empty means identity
  std::vector<double> thresholds;  // K-1 strictly increasing positive values

  int num_regions() const { return static_cast<int>(thresholds.size()) + 1; }

  double quadratic(const Vector& x) const;

  /// 0-based region index of x. Total on R^n.
  int region_of(const Vector& x) const;

  /// Lower boundary of region k (0 for the innermost region).
  double lower(int k) const;
  /// Upper boundary of region k (+inf for the outermost region).
  double upper(int k) const;
};

/// Unvalidated model as read from disk or assembled by hand. Indices that
/// cross the file boundary (mode0) are 1-based like the JSON format.
struct ModelDescription {
  int state_dim = 0;
  int input_dim = 0;
  std::vector<ModeDynamics> modes;
  RegionPartition partition;
  std::vector<Matrix> rates;  // one N x N generator per region
  Vector x0;
  int mode0 = 1;
};

enum class ViolationKind {
  DimensionMismatch,
  GeneratorRowSum,
  NegativeOffDiagonal,
  ThresholdOrder,
  QNotPositiveDefinite,
  ModeOutOfRange,
  NonFinite,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string field;
  std::string message;
  int row = -1;
  int col = -1;
  double value = 0.0;
};

class ModelError : public Error {
 public:
  explicit ModelError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Every invariant the description breaks; empty iff valid.
std::vector<Violation> find_violations(const ModelDescription& desc);

/// A validated, immutable SDJLS. Mode and region indices are 0-based.
class SdjlsModel {
 public:
  const ModelDescription& description() const { return desc_; }

  int state_dim() const { return desc_.state_dim; }
  int input_dim() const { return desc_.input_dim; }
  int num_modes() const { return static_cast<int>(desc_.modes.size()); }
  int num_regions() const { return desc_.partition.num_regions(); }

  const Matrix& A(int mode) const { return desc_.modes[mode].A; }
  /// Precondition: input_dim() > 0.
  const Matrix& B(int mode) const { return *desc_.modes[mode].B; }
  const Matrix& generator(int region) const { return desc_.rates[region]; }
  const RegionPartition& partition() const { return desc_.partition; }
  const Matrix& Q() const { return desc_.partition.Q; }

  const Vector& x0() const { return desc_.x0; }
  int initial_mode() const { return desc_.mode0 - 1; }

  int region_of(const Vector& x) const { return desc_.partition.region_of(x); }

  /// Same partition, rates and initial condition with new autonomous dynamics.
  SdjlsModel with_dynamics(const std::vector<Matrix>& A) const;

  friend SdjlsModel validate_model(ModelDescription desc);
  friend bool operator==(const SdjlsModel&, const SdjlsModel&);

 private:
  explicit SdjlsModel(ModelDescription desc) : desc_(std::move(desc)) {}
  ModelDescription desc_;
};

/// Checks every invariant and returns the validated model. An omitted Q is
/// materialized as the identity. Throws ModelError listing all violations.
SdjlsModel validate_model(ModelDescription desc);

bool operator==(const SdjlsModel& a, const SdjlsModel& b);

/// Row-sum tolerance for generators: 1e-9 * max(1, max |lambda_ij|).
double generator_tolerance(const Matrix& generator);

}  // namespace sdjls
