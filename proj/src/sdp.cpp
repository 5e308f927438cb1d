#include "sdjls/sdp.hpp"


#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sdjls/kernels.hpp"
#include "sdjls/numlin.hpp"

namespace sdjls {

namespace {

// History length for Anderson extrapolation of the projection map.
constexpr int kAndersonMemory = 5;

constexpr double kSqrt2 = 1.41421356237309504880;

// Symmetric variables are parameterized by svec (Frobenius-isometric), full
// ones by their row-major entries.
Matrix unpack(const VariableBlock& b, const double* p) {
  Matrix m(b.rows, b.cols);
  if (b.kind == BlockKind::Symmetric) {
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < b.rows; ++i) {
      m(i, i) = p[k++];
      for (Eigen::Index j = i + 1; j < b.rows; ++j) m(i, j) = m(j, i) = p[k++] / kSqrt2;
    }
  } else {
    for (Eigen::Index i = 0; i < b.rows; ++i)
      for (Eigen::Index j = 0; j < b.cols; ++j) m(i, j) = p[i * b.cols + j];
  }
  return m;
}

void pack(const VariableBlock& b, const Matrix& m, double* p) {
  if (b.kind == BlockKind::Symmetric) {
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < b.rows; ++i) {
      p[k++] = m(i, i);
      for (Eigen::Index j = i + 1; j < b.rows; ++j) p[k++] = 0.5 * (m(i, j) + m(j, i)) * kSqrt2;
    }
  } else {
    for (Eigen::Index i = 0; i < b.rows; ++i)
      for (Eigen::Index j = 0; j < b.cols; ++j) p[i * b.cols + j] = m(i, j);
  }
}

Matrix apply_term(const LinearTerm& t, const Matrix& value) {
  const Matrix half = t.F.transpose() * value * t.G;
  return t.scale * (half + half.transpose());
}

// Flattened affine map s = c + L z over all constraints.
struct LiftedSystem {
  std::vector<Eigen::Index> var_offset;
  std::vector<Eigen::Index> con_offset;
  Eigen::Index nz = 0;
  Eigen::Index ns = 0;
  Vector c;
  Matrix L;  // ns x nz
};

LiftedSystem lift(const SdpProblem& problem) {
  LiftedSystem sys;
  const auto& vars = problem.variables();
  const auto& cons = problem.constraints();
  for (const auto& v : vars) {
    sys.var_offset.push_back(sys.nz);
    sys.nz += v.num_params();
  }
  for (const auto& c : cons) {
    sys.con_offset.push_back(sys.ns);
    sys.ns += SymMatrix::packed_size(c.dim);
  }
  sys.c.resize(sys.ns);
  for (std::size_t k = 0; k < cons.size(); ++k) {
    const Matrix sym = 0.5 * (cons[k].constant + cons[k].constant.transpose());
    SymMatrix::from_dense(sym).svec_into(
        {sys.c.data() + sys.con_offset[k], static_cast<std::size_t>(SymMatrix::packed_size(cons[k].dim))});
  }

  sys.L = Matrix::Zero(sys.ns, sys.nz);
  std::vector<double> unit;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const auto& block = vars[v];
    unit.assign(block.num_params(), 0.0);
    for (Eigen::Index p = 0; p < block.num_params(); ++p) {
      std::fill(unit.begin(), unit.end(), 0.0);
      unit[p] = 1.0;
      const Matrix basis = unpack(block, unit.data());
      for (std::size_t k = 0; k < cons.size(); ++k) {
        Matrix contrib = Matrix::Zero(cons[k].dim, cons[k].dim);
        bool touched = false;
        for (const auto& t : cons[k].terms) {
          if (t.variable != static_cast<int>(v)) continue;
          contrib += apply_term(t, basis);
          touched = true;
        }
        if (!touched) continue;
        const Vector col = SymMatrix::from_dense(contrib).svec();
        sys.L.block(sys.con_offset[k], sys.var_offset[v] + p, col.size(), 1) = col;
      }
    }
  }
  return sys;
}

std::vector<double> row_major(const Matrix& m) {
  std::vector<double> out(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
  return out;
}

Assignment to_assignment(const SdpProblem& problem, const LiftedSystem& sys, const Vector& z) {
  Assignment a;
  for (std::size_t v = 0; v < problem.variables().size(); ++v) {
    a.push_back(unpack(problem.variables()[v], z.data() + sys.var_offset[v]));
  }
  return a;
}

}  // namespace

namespace term {

LinearTerm congruence(int variable, const Matrix& F, double scale) {
  return {variable, F, F, 0.5 * scale};
}

LinearTerm left_right(int variable, const Matrix& M, double scale) {
  return {variable, Matrix::Identity(M.rows(), M.rows()), M, scale};
}

LinearTerm scaled(int variable, Eigen::Index dim, double lambda) {
  return {variable, Matrix::Identity(dim, dim), Matrix::Identity(dim, dim), 0.5 * lambda};
}

Matrix embed(Eigen::Index offset, Eigen::Index size, Eigen::Index d) {
  Matrix E = Matrix::Zero(size, d);
  E.block(0, offset, size, size).setIdentity();
  return E;
}

}  // namespace term

const char* to_string(Verdict v) {
  return v == Verdict::Feasible ? "Feasible" : "Undetermined";
}

int SdpProblem::add_variable(std::string name, BlockKind kind, Eigen::Index rows, Eigen::Index cols) {
  if (rows <= 0 || cols <= 0 || (kind == BlockKind::Symmetric && rows != cols)) {
    throw InvalidProblemError("variable " + name + ": invalid shape");
  }
  variables_.push_back({std::move(name), kind, rows, cols});
  return static_cast<int>(variables_.size()) - 1;
}

void SdpProblem::add_constraint(AffineLmiConstraint c) { constraints_.push_back(std::move(c)); }

void SdpProblem::validate() const {
  if (variables_.empty()) throw InvalidProblemError("problem has no variables");
  for (const auto& c : constraints_) {
    if (c.dim <= 0 || c.constant.rows() != c.dim || c.constant.cols() != c.dim) {
      throw InvalidProblemError("constraint " + c.name + ": constant has wrong shape");
    }
    if (!c.constant.allFinite()) throw NonFiniteError("constraint " + c.name + ": non-finite constant");
    for (const auto& t : c.terms) {
      if (t.variable < 0 || t.variable >= static_cast<int>(variables_.size())) {
        throw InvalidProblemError("constraint " + c.name + ": undeclared variable");
      }
      const auto& v = variables_[t.variable];
      if (t.F.rows() != v.rows || t.F.cols() != c.dim || t.G.rows() != v.cols || t.G.cols() != c.dim) {
        throw InvalidProblemError("constraint " + c.name + ": operator shape mismatch for " + v.name);
      }
      if (!t.F.allFinite() || !t.G.allFinite() || !std::isfinite(t.scale)) {
        throw NonFiniteError("constraint " + c.name + ": non-finite operator");
      }
    }
  }
}

Matrix assemble(const SdpProblem& problem, std::size_t c, const Assignment& values) {
  const auto& con = problem.constraints().at(c);
  Matrix m = con.constant;
  for (const auto& t : con.terms) m += apply_term(t, values.at(t.variable));
  return 0.5 * (m + m.transpose());
}

CheckReport check_assignment(const SdpProblem& problem, const Assignment& values, double tol_check) {
  const auto& vars = problem.variables();
  if (values.size() < vars.size()) throw MissingBlockError("assignment is missing variable blocks");
  for (std::size_t v = 0; v < vars.size(); ++v) {
    if (values[v].rows() != vars[v].rows || values[v].cols() != vars[v].cols) {
      throw MissingBlockError("assignment block " + vars[v].name + " has the wrong shape");
    }
  }
  CheckReport report;
  report.worst = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < problem.constraints().size(); ++c) {
    const double e = min_eigenvalue(assemble(problem, c, values));
    report.constraints.push_back({problem.constraints()[c].name, e});
    report.worst = std::min(report.worst, e);
  }
  if (problem.constraints().empty()) report.worst = 0.0;
  report.pass = report.worst >= -tol_check;
  return report;
}

FeasibilityOutcome solve_feasibility(const SdpProblem& problem, const SolveOptions& opts) {
  if (opts.max_iters < 1) throw InvalidProblemError("max_iters must be >= 1");
  if (!(opts.tol_check > 0.0)) throw InvalidProblemError("tol_check must be positive");
  problem.validate();

  const auto& vars = problem.variables();
  const auto& cons = problem.constraints();
  const LiftedSystem sys = lift(problem);

  // Projection onto {s = c + L z}: argmin |z - z0|^2 + |c + L z - s0|^2.
  const Matrix H = Matrix::Identity(sys.nz, sys.nz) + sys.L.transpose() * sys.L;
  const Eigen::LLT<Matrix> chol(H);
  if (chol.info() != Eigen::Success) throw NonFiniteError("solve_feasibility: singular projector");
  const Matrix P1 = chol.solve(Matrix::Identity(sys.nz, sys.nz));
  const Matrix P2 = chol.solve(sys.L.transpose());
  const auto L_rm = row_major(sys.L);
  const auto P1_rm = row_major(P1);
  const auto P2_rm = row_major(P2);

  Vector z = Vector::Zero(sys.nz);
  if (!opts.initial.empty()) {
    if (opts.initial.size() != vars.size()) throw MissingBlockError("initial assignment is incomplete");
    for (std::size_t v = 0; v < vars.size(); ++v) {
      if (opts.initial[v].rows() != vars[v].rows || opts.initial[v].cols() != vars[v].cols) {
        throw MissingBlockError("initial block " + vars[v].name + " has the wrong shape");
      }
      pack(vars[v], opts.initial[v], z.data() + sys.var_offset[v]);
    }
  } else {
    for (std::size_t v = 0; v < vars.size(); ++v) {
      if (vars[v].kind == BlockKind::Symmetric) {
        pack(vars[v], Matrix::Identity(vars[v].rows, vars[v].rows), z.data() + sys.var_offset[v]);
      }
    }
  }

  // Slack eigenvalues are clipped slightly above zero so that a problem with
  // any interior is reached in finitely many steps.
  const double floor = 10.0 * opts.tol_check;
  const int stall_window = std::max(100, opts.max_iters / 10);

  Vector s(sys.ns), s_plus(sys.ns), rhs(sys.ns), tmp(sys.nz), g(sys.nz), f(sys.nz);
  constexpr int memory = kAndersonMemory;
  Matrix dG(sys.nz, memory), dF(sys.nz, memory);
  Vector g_prev(sys.nz), f_prev(sys.nz);
  int hist_n = 0, hist_head = 0;
  bool has_prev = false;
  double best_f = 0.0;
  FeasibilityOutcome out;
  double best = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  std::mt19937_64 rng(opts.seed);

  for (int it = 1; it <= opts.max_iters; ++it) {
    kernels::gemv(L_rm, sys.ns, sys.nz, {z.data(), static_cast<std::size_t>(sys.nz)},
                  {s.data(), static_cast<std::size_t>(sys.ns)});
    s += sys.c;

    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cons.size(); ++k) {
      const auto d = cons[k].dim;
      const auto len = static_cast<std::size_t>(SymMatrix::packed_size(d));
      const SymMatrix S = SymMatrix::from_svec(d, {s.data() + sys.con_offset[k], len});
      const SymEigen e = eig_sym(S);
      worst = std::min(worst, e.values(0));
      const Vector clipped = e.values.cwiseMax(floor);
      SymMatrix::from_dense(e.vectors * clipped.asDiagonal() * e.vectors.transpose())
          .svec_into({s_plus.data() + sys.con_offset[k], len});
    }
    if (cons.empty()) worst = 0.0;
    out.iterations = it;
    out.infeasibility = std::max(0.0, -worst);

    if (worst >= -opts.tol_check) {
      Assignment candidate = to_assignment(problem, sys, z);
      const CheckReport verified = check_assignment(problem, candidate, opts.tol_check);
      if (verified.pass) {
        out.verdict = Verdict::Feasible;
        out.assignment = std::move(candidate);
        out.residuals = verified.constraints;
        out.infeasibility = std::max(0.0, -verified.worst);
        return out;
      }
    }

    if (out.infeasibility < best * (1.0 - 1e-3)) {
      best = out.infeasibility;
      best_iter = it;
    } else if (!out.restarted && it - best_iter >= stall_window) {
      // Stalled: perturb the iterate once, deterministically from the seed.
      std::normal_distribution<double> noise(0.0, 1.0);
      const double scale = 0.1 * (1.0 + z.cwiseAbs().maxCoeff());
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += scale * noise(rng);
      out.restarted = true;
      best_iter = it;
      hist_n = 0;
      has_prev = false;
      continue;
    }

    // g = P1 z + P2 (s_plus - c) is one plain alternating-projection step.
    rhs = s_plus - sys.c;
    kernels::gemv(P1_rm, sys.nz, sys.nz, {z.data(), static_cast<std::size_t>(sys.nz)},
                  {tmp.data(), static_cast<std::size_t>(sys.nz)});
    kernels::gemv(P2_rm, sys.nz, sys.ns, {rhs.data(), static_cast<std::size_t>(sys.ns)},
                  {g.data(), static_cast<std::size_t>(sys.nz)});
    kernels::axpy(1.0, {tmp.data(), static_cast<std::size_t>(sys.nz)},
                  {g.data(), static_cast<std::size_t>(sys.nz)});
    // Anderson extrapolation of the fixed-point map z -> g, with a reset
    // whenever the residual grows well past the best one seen.
    f = g - z;
    const double fn = f.norm();
    if (hist_n > 0 && fn > 1e2 * best_f) {
      hist_n = 0;
      best_f = fn;
      z = g;
      continue;
    }
    best_f = hist_n == 0 ? fn : std::min(best_f, fn);
    if (has_prev) {
      const int slot = hist_head;
      dG.col(slot) = g - g_prev;
      dF.col(slot) = f - f_prev;
      hist_head = (hist_head + 1) % memory;
      hist_n = std::min(hist_n + 1, memory);
    }
    g_prev = g;
    f_prev = f;
    has_prev = true;
    if (hist_n == 0) {
      z = g;
      continue;
    }
    const auto F = dF.leftCols(hist_n);
    Matrix normal = F.transpose() * F;
    normal.diagonal().array() += 1e-10 * (normal.trace() + 1e-300);
    const Vector gamma = normal.ldlt().solve(F.transpose() * f);
    z = g - dG.leftCols(hist_n) * gamma;
    if (!z.allFinite()) {
      hist_n = 0;
      z = g;
    }
  }

  out.verdict = Verdict::Undetermined;
  out.assignment = to_assignment(problem, sys, z);
  const CheckReport last = check_assignment(problem, out.assignment, opts.tol_check);
  out.residuals = last.constraints;
  out.infeasibility = std::max(0.0, -last.worst);
  return out;
}

}  // namespace sdjls
