#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdjls/errors.hpp"

namespace sdjls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class BlockKind { Symmetric, Full };

struct VariableBlock {
  std::string name;
  BlockKind kind = BlockKind::Symmetric;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index num_params() const {
    return kind == BlockKind::Symmetric ? rows * (rows + 1) / 2 : rows * cols;
  }
};

/// One linear piece of a constraint: scale * (F' V G + G' V' F), where V is
/// the variable block (rows x cols), F is rows x d and G is cols x d. All the
/// operator forms the LMIs need are special cases:
///   congruence F'PF      -> F = G = F, scale 1/2
///   M'P + PM             -> F = I, G = M
///   lambda * P           -> F = G = I, scale lambda/2
///   block placement      -> F, G carry the embedding.
struct LinearTerm {
  int variable = 0;
  Matrix F;
  Matrix G;
  double scale = 1.0;
};

/// constant + sum(terms) must be PSD.
struct AffineLmiConstraint {
  std::string name;
  Eigen::Index dim = 0;
  Matrix constant;
  std::vector<LinearTerm> terms;
};

/// Helpers producing LinearTerm for the common operator forms.
namespace term {
LinearTerm congruence(int variable, const Matrix& F, double scale = 1.0);
/// scale * (M'P + PM) for symmetric P.
LinearTerm left_right(int variable, const Matrix& M, double scale = 1.0);
LinearTerm scaled(int variable, Eigen::Index dim, double lambda);
/// Block selector: rows [offset, offset + size) of a d x d matrix, as a
/// size x d matrix E with E' V E placing V at that diagonal block.
Matrix embed(Eigen::Index offset, Eigen::Index size, Eigen::Index d);
}  // namespace term

class SdpProblem {
 public:
  int add_variable(std::string name, BlockKind kind, Eigen::Index rows, Eigen::Index cols);
  int add_symmetric(std::string name, Eigen::Index dim) {
    return add_variable(std::move(name), BlockKind::Symmetric, dim, dim);
  }
  int add_full(std::string name, Eigen::Index rows, Eigen::Index cols) {
    return add_variable(std::move(name), BlockKind::Full, rows, cols);
  }
  void add_constraint(AffineLmiConstraint c);

  const std::vector<VariableBlock>& variables() const { return variables_; }
  const std::vector<AffineLmiConstraint>& constraints() const { return constraints_; }

  /// Strictness margin already folded into the constant terms.
  double margin = 0.0;

  /// Throws InvalidProblemError on dangling references or bad shapes.
  void validate() const;

 private:
  std::vector<VariableBlock> variables_;
  std::vector<AffineLmiConstraint> constraints_;
};

/// Values for every variable block, indexed like SdpProblem::variables().
using Assignment = std::vector<Matrix>;

/// constant + linear part of constraint c evaluated at the assignment.
Matrix assemble(const SdpProblem& problem, std::size_t c, const Assignment& values);

struct ConstraintResidual {
  std::string name;
  double min_eigenvalue = 0.0;
};

struct CheckReport {
  std::vector<ConstraintResidual> constraints;
  double worst = 0.0;  // min over constraints of min_eigenvalue
  bool pass = false;   // worst >= -tol
};

/// Throws MissingBlockError if the assignment does not cover every block.
CheckReport check_assignment(const SdpProblem& problem, const Assignment& values,
                             double tol_check = 1e-7);

struct SolveOptions {
  int max_iters = 20000;
  double tol_check = 1e-7;
  std::uint64_t seed = 0;
  /// Optional starting point; identity blocks / zero full blocks otherwise.
  Assignment initial;
};

enum class Verdict { Feasible, Undetermined };

const char* to_string(Verdict v);

struct FeasibilityOutcome {
  Verdict verdict = Verdict::Undetermined;
  Assignment assignment;  // populated on Feasible; last iterate otherwise
  int iterations = 0;
  double infeasibility = 0.0;  // max over constraints of -min_eig, clipped at 0
  std::vector<ConstraintResidual> residuals;
  bool restarted = false;
};

/// Lifted alternating projections between the affine set
/// {(z, s) : s = c + L z} and the product of PSD cones, with Anderson
/// extrapolation of the iterate. Never reports
/// infeasibility; Feasible verdicts are re-verified with check_assignment.
FeasibilityOutcome solve_feasibility(const SdpProblem& problem, const SolveOptions& opts = {});

}  // namespace sdjls
