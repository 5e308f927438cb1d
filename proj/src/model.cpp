#include "sdjls/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sdjls {

namespace {

std::string dims(Eigen::Index r, Eigen::Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

void check_shape(std::vector<Violation>& out, const std::string& field, const Matrix& m,
                 Eigen::Index rows, Eigen::Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    out.push_back({ViolationKind::DimensionMismatch, field,
                   field + ": expected " + dims(rows, cols) + ", got " + dims(m.rows(), m.cols())});
  } else if (!all_finite(m)) {
    out.push_back({ViolationKind::NonFinite, field, field + ": non-finite entry"});
  }
}

std::string join_violations(const std::vector<Violation>& v) {
  std::ostringstream os;
  os << "invalid model (" << v.size() << " violation" << (v.size() == 1 ? "" : "s") << ")";
  for (const auto& x : v) os << "\n  " << to_string(x.kind) << ": " << x.message;
  return os.str();
}

}  // namespace

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::DimensionMismatch: return "DimensionMismatch";
    case ViolationKind::GeneratorRowSum: return "GeneratorRowSum";
    case ViolationKind::NegativeOffDiagonal: return "NegativeOffDiagonal";
    case ViolationKind::ThresholdOrder: return "ThresholdOrder";
    case ViolationKind::QNotPositiveDefinite: return "QNotPositiveDefinite";
    case ViolationKind::ModeOutOfRange: return "ModeOutOfRange";
    case ViolationKind::NonFinite: return "NonFinite";
  }
  return "Unknown";
}

ModelError::ModelError(std::vector<Violation> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

double RegionPartition::quadratic(const Vector& x) const {
  if (Q.size() == 0) return x.squaredNorm();
  return x.dot(Q * x);
}

int RegionPartition::region_of(const Vector& x) const {
  const double q = quadratic(x);
  int k = 0;
  // Closed below: q == r_k already belongs to region k+1.
  while (k < static_cast<int>(thresholds.size()) && q >= thresholds[k]) ++k;
  return k;
}

double RegionPartition::lower(int k) const { return k == 0 ? 0.0 : thresholds[k - 1]; }

double RegionPartition::upper(int k) const {
  return k < static_cast<int>(thresholds.size()) ? thresholds[k]
                                                 : std::numeric_limits<double>::infinity();
}

double generator_tolerance(const Matrix& generator) {
  const double scale = generator.size() == 0 ? 0.0 : generator.cwiseAbs().maxCoeff();
  return 1e-9 * std::max(1.0, scale);
}

std::vector<Violation> find_violations(const ModelDescription& d) {
  std::vector<Violation> out;
  const int n = d.state_dim;
  const int m = d.input_dim;
  const int N = static_cast<int>(d.modes.size());

  if (n <= 0) {
    out.push_back({ViolationKind::DimensionMismatch, "state_dim", "state_dim must be positive"});
    return out;
  }
  if (m < 0) {
    out.push_back({ViolationKind::DimensionMismatch, "input_dim", "input_dim must be non-negative"});
  }
  if (N == 0) {
    out.push_back({ViolationKind::DimensionMismatch, "modes", "at least one mode is required"});
  }

  for (int i = 0; i < N; ++i) {
    const std::string base = "modes[" + std::to_string(i + 1) + "]";
    check_shape(out, base + ".A", d.modes[i].A, n, n);
    if (m > 0) {
      if (!d.modes[i].B) {
        out.push_back({ViolationKind::DimensionMismatch, base + ".B",
                       base + ".B: missing (input_dim = " + std::to_string(m) + ")"});
      } else {
        check_shape(out, base + ".B", *d.modes[i].B, n, m);
      }
    } else if (d.modes[i].B && d.modes[i].B->size() != 0) {
      out.push_back({ViolationKind::DimensionMismatch, base + ".B",
                     base + ".B: present but input_dim = 0"});
    }
  }

  const auto& part = d.partition;
  if (part.Q.size() != 0) {
    check_shape(out, "partition.Q", part.Q, n, n);
    if (part.Q.rows() == n && part.Q.cols() == n && part.Q.allFinite()) {
      const double asym = (part.Q - part.Q.transpose()).cwiseAbs().maxCoeff();
      const double scale = std::max(1.0, part.Q.cwiseAbs().maxCoeff());
      Eigen::LLT<Matrix> llt(part.Q);
      if (asym > 1e-12 * scale || llt.info() != Eigen::Success) {
        out.push_back({ViolationKind::QNotPositiveDefinite, "partition.Q",
                       "partition.Q must be symmetric positive definite"});
      }
    }
  }
  for (std::size_t k = 0; k < part.thresholds.size(); ++k) {
    const double r = part.thresholds[k];
    const bool bad = !std::isfinite(r) || r <= 0.0 || (k > 0 && r <= part.thresholds[k - 1]);
    if (bad) {
      out.push_back({ViolationKind::ThresholdOrder, "partition.thresholds",
                     "thresholds must be positive and strictly increasing (index " +
                         std::to_string(k + 1) + ")",
                     static_cast<int>(k + 1), -1, r});
    }
  }

  const int K = part.num_regions();
  if (static_cast<int>(d.rates.size()) != K) {
    out.push_back({ViolationKind::DimensionMismatch, "rates",
                   "rates: expected " + std::to_string(K) + " generators (one per region), got " +
                       std::to_string(d.rates.size())});
  }
  for (std::size_t k = 0; k < d.rates.size(); ++k) {
    const std::string base = "rates[" + std::to_string(k + 1) + "]";
    const Matrix& L = d.rates[k];
    const auto before = out.size();
    check_shape(out, base, L, N, N);
    if (out.size() != before) continue;
    const double tol = generator_tolerance(L);
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        if (i != j && L(i, j) < 0.0) {
          out.push_back({ViolationKind::NegativeOffDiagonal, base,
                         base + ": negative off-diagonal rate at (" + std::to_string(i + 1) + "," +
                             std::to_string(j + 1) + ")",
                         i + 1, j + 1, L(i, j)});
        }
      }
      const double residual = L.row(i).sum();
      if (std::abs(residual) > tol) {
        std::ostringstream os;
        os << base << ": row " << i + 1 << " sums to " << residual << " (must be 0)";
        out.push_back({ViolationKind::GeneratorRowSum, base, os.str(), i + 1, -1, residual});
      }
    }
  }

  if (d.x0.size() != n) {
    out.push_back({ViolationKind::DimensionMismatch, "x0",
                   "x0: expected length " + std::to_string(n) + ", got " +
                       std::to_string(d.x0.size())});
  } else if (!d.x0.allFinite()) {
    out.push_back({ViolationKind::NonFinite, "x0", "x0: non-finite entry"});
  }
  if (d.mode0 < 1 || d.mode0 > N) {
    out.push_back({ViolationKind::ModeOutOfRange, "mode0",
                   "mode0 must be in 1.." + std::to_string(N) + ", got " + std::to_string(d.mode0),
                   -1, -1, static_cast<double>(d.mode0)});
  }
  return out;
}

SdjlsModel validate_model(ModelDescription desc) {
  auto violations = find_violations(desc);
  if (!violations.empty()) throw ModelError(std::move(violations));
  if (desc.partition.Q.size() == 0) desc.partition.Q = Matrix::Identity(desc.state_dim, desc.state_dim);
  if (desc.input_dim == 0) {
    for (auto& mode : desc.modes) mode.B.reset();
  }
  return SdjlsModel(std::move(desc));
}

SdjlsModel SdjlsModel::with_dynamics(const std::vector<Matrix>& A) const {
  ModelDescription d = desc_;
  if (static_cast<int>(A.size()) != num_modes()) {
    throw DimensionMismatchError("with_dynamics: expected " + std::to_string(num_modes()) +
                                 " matrices, got " + std::to_string(A.size()));
  }
  d.input_dim = 0;
  for (int i = 0; i < num_modes(); ++i) {
    d.modes[i].A = A[i];
    d.modes[i].B.reset();
  }
  return validate_model(std::move(d));
}

namespace {
bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}
}  // namespace

bool operator==(const SdjlsModel& a, const SdjlsModel& b) {
  const auto& x = a.desc_;
  const auto& y = b.desc_;
  if (x.state_dim != y.state_dim || x.input_dim != y.input_dim || x.mode0 != y.mode0 ||
      x.modes.size() != y.modes.size() || x.rates.size() != y.rates.size() ||
      x.partition.thresholds != y.partition.thresholds || !same(x.partition.Q, y.partition.Q) ||
      !same(x.x0, y.x0)) {
    return false;
  }
  for (std::size_t i = 0; i < x.modes.size(); ++i) {
    if (!same(x.modes[i].A, y.modes[i].A)) return false;
    if (x.modes[i].B.has_value() != y.modes[i].B.has_value()) return false;
    if (x.modes[i].B && !same(*x.modes[i].B, *y.modes[i].B)) return false;
  }
  for (std::size_t k = 0; k < x.rates.size(); ++k) {
    if (!same(x.rates[k], y.rates[k])) return false;
  }
  return true;
}

}  // namespace sdjls
