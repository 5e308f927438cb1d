#include "sdjls/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdjls/numlin.hpp"

namespace sdjls {

SdpProblem build_synthesis_lmis(const SdjlsModel& model, double epsilon) {
  if (model.input_dim() == 0) throw NoInputError("synthesis needs a model with inputs (input_dim = 0)");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidProblemError("margin must be positive");
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int N = model.num_modes();
  const int d = n * N;

  SdpProblem problem;
  problem.margin = epsilon;
  for (int i = 0; i < N; ++i) problem.add_symmetric("X" + std::to_string(i + 1), n);
  for (int i = 0; i < N; ++i) problem.add_full("Y" + std::to_string(i + 1), m, n);
  const auto X = [](int i) { return i; };
  const auto Y = [N](int i) { return N + i; };

  for (int i = 0; i < N; ++i) {
    problem.add_constraint(
        {"X" + std::to_string(i + 1), n, -epsilon * Matrix::Identity(n, n), {term::scaled(X(i), n, 1.0)}});
  }

  // Block 0 holds J_i; blocks 1.. hold the other modes in increasing order.
  const Matrix E0 = term::embed(0, n, d);
  for (int k = 0; k < model.num_regions(); ++k) {
    const Matrix& rates = model.generator(k);
    for (int i = 0; i < N; ++i) {
      AffineLmiConstraint c{"M" + std::to_string(k + 1) + "," + std::to_string(i + 1), d,
                            -epsilon * Matrix::Identity(d, d), {}};
      const Matrix& A = model.A(i);
      const Matrix& B = model.B(i);
      // -(X A' + A X)
      c.terms.push_back({X(i), E0, A.transpose() * E0, -1.0});
      // -(B Y + Y'B')
      c.terms.push_back({Y(i), B.transpose() * E0, E0, -1.0});
      // -lambda_ii X
      if (rates(i, i) != 0.0) c.terms.push_back({X(i), E0, E0, -0.5 * rates(i, i)});
      int block = 1;
      for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        const Matrix Ej = term::embed(block * n, n, d);
        const double lambda = rates(i, j);
        if (lambda < 0.0) throw InvalidProblemError("negative rate under square root");
        if (lambda != 0.0) c.terms.push_back({X(i), E0, std::sqrt(lambda) * Ej, -1.0});
        // -(-X_j) on the diagonal block
        c.terms.push_back({X(j), Ej, Ej, 0.5});
        ++block;
      }
      problem.add_constraint(std::move(c));
    }
  }
  return problem;
}

std::vector<Matrix> gains_from(const std::vector<Matrix>& X, const std::vector<Matrix>& Y) {
  if (X.size() != Y.size()) throw DimensionMismatchError("gains_from: X and Y differ in length");
  std::vector<Matrix> K;
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (X[i].rows() != X[i].cols() || Y[i].cols() != X[i].rows()) {
      throw DimensionMismatchError("gains_from: inconsistent shapes for mode " + std::to_string(i + 1));
    }
    const Matrix sym = 0.5 * (X[i] + X[i].transpose());
    const SymEigen e = eig_sym(sym);
    const double scale = e.values.cwiseAbs().maxCoeff();
    if (!(e.values(0) >= 1e-12 * scale) || scale == 0.0) {
      throw SingularXError("X" + std::to_string(i + 1) + " is not numerically positive definite");
    }
    // K X = Y  <=>  X K' = Y'
    const Eigen::LDLT<Matrix> ldlt(sym);
    K.push_back(ldlt.solve(Y[i].transpose()).transpose());
  }
  return K;
}

std::vector<Matrix> closed_loop_dynamics(const SdjlsModel& model, const std::vector<Matrix>& K) {
  if (static_cast<int>(K.size()) != model.num_modes()) {
    throw DimensionMismatchError("closed_loop_dynamics: one gain per mode required");
  }
  std::vector<Matrix> out;
  for (int i = 0; i < model.num_modes(); ++i) {
    if (model.input_dim() == 0) {
      out.push_back(model.A(i));
      continue;
    }
    if (K[i].rows() != model.input_dim() || K[i].cols() != model.state_dim()) {
      throw DimensionMismatchError("gain K" + std::to_string(i + 1) + " must be m x n");
    }
    out.push_back(model.A(i) + model.B(i) * K[i]);
  }
  return out;
}

SynthesisResult synthesize(const SdjlsModel& model, const SynthesisOptions& opts) {
  SynthesisResult result;
  result.epsilon = opts.epsilon.value_or(default_margin(model));
  const SdpProblem problem = build_synthesis_lmis(model, result.epsilon);
  const FeasibilityOutcome outcome = solve_feasibility(problem, opts.solver);
  result.iterations = outcome.iterations;
  result.infeasibility = outcome.infeasibility;
  if (outcome.verdict != Verdict::Feasible) return result;

  const int N = model.num_modes();
  ControllerGains gains;
  gains.X.assign(outcome.assignment.begin(), outcome.assignment.begin() + N);
  gains.Y.assign(outcome.assignment.begin() + N, outcome.assignment.end());
  gains.K = gains_from(gains.X, gains.Y);
  result.verdict = Verdict::Feasible;

  const SdjlsModel closed = model.with_dynamics(closed_loop_dynamics(model, gains.K));
  CertifyOptions certify = opts.certify;
  if (certify.solver.initial.empty()) {
    // P_i = X_i^{-1} certifies the closed loop; rescale it to clear the margin.
    std::vector<Matrix> P;
    for (const auto& x : gains.X) P.push_back(x.ldlt().solve(Matrix::Identity(x.rows(), x.cols())));
    const StabilityCertificate guess = check_certificate(closed, P, 0.0);
    if (guess.pass) {
      const double eps = certify.epsilon.value_or(default_margin(closed));
      const double depth = std::min(guess.min_P_eig, -guess.max_residual_eig);
      const double c = std::max(1.0, 2.0 * eps / depth);
      for (auto& p : P) p *= c;
      certify.solver.initial = std::move(P);
    }
  }
  const CertifyResult cl = certify_stability(closed, certify);
  gains.verified = cl.verdict == Verdict::Feasible;
  gains.closed_loop = cl.certificate;
  result.gains = std::move(gains);
  return result;
}

}  // namespace sdjls
