#include "sdjls/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sdjls/numlin.hpp"

namespace sdjls {

Matrix coupled_residual(const SdjlsModel& model, const std::vector<Matrix>& P, int kappa, int mode) {
  const Matrix& A = model.A(mode);
  const Matrix& rates = model.generator(kappa);
  Matrix r = A.transpose() * P[mode] + P[mode] * A;
  for (int j = 0; j < model.num_modes(); ++j) {
    if (rates(mode, j) != 0.0) r += rates(mode, j) * P[j];
  }
  return 0.5 * (r + r.transpose());
}

double default_margin(const SdjlsModel& model) {
  double norm = 0.0;
  for (int i = 0; i < model.num_modes(); ++i) {
    Eigen::JacobiSVD<Matrix> svd(model.A(i));
    norm = std::max(norm, svd.singularValues()(0));
  }
  return 1e-6 * (1.0 + norm);
}

SdpProblem build_analysis_lmis(const SdjlsModel& model, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidProblemError("margin must be positive");
  const int n = model.state_dim();
  const int N = model.num_modes();
  const Matrix I = Matrix::Identity(n, n);

  SdpProblem problem;
  problem.margin = epsilon;
  for (int i = 0; i < N; ++i) problem.add_symmetric("P" + std::to_string(i + 1), n);

  for (int i = 0; i < N; ++i) {
    problem.add_constraint({"P" + std::to_string(i + 1), n, -epsilon * I, {term::scaled(i, n, 1.0)}});
  }
  for (int k = 0; k < model.num_regions(); ++k) {
    const Matrix& rates = model.generator(k);
    for (int i = 0; i < N; ++i) {
      AffineLmiConstraint c{"W" + std::to_string(k + 1) + "," + std::to_string(i + 1), n,
                            -epsilon * I, {}};
      c.terms.push_back(term::left_right(i, model.A(i), -1.0));
      for (int j = 0; j < N; ++j) {
        if (rates(i, j) != 0.0) c.terms.push_back(term::scaled(j, n, -rates(i, j)));
      }
      problem.add_constraint(std::move(c));
    }
  }
  return problem;
}

StabilityCertificate check_certificate(const SdjlsModel& model, const std::vector<Matrix>& P,
                                       double epsilon) {
  const int n = model.state_dim();
  const int N = model.num_modes();
  if (static_cast<int>(P.size()) != N) {
    throw DimensionMismatchError("check_certificate: expected " + std::to_string(N) +
                                 " matrices, got " + std::to_string(P.size()));
  }
  for (const auto& p : P) {
    if (p.rows() != n || p.cols() != n) throw DimensionMismatchError("check_certificate: P must be n x n");
  }

  StabilityCertificate cert;
  cert.P = P;
  cert.epsilon = epsilon;
  cert.min_P_eig = std::numeric_limits<double>::infinity();
  cert.max_residual_eig = -std::numeric_limits<double>::infinity();
  double p_scale = 0.0;
  for (const auto& p : P) {
    const Matrix sym = 0.5 * (p + p.transpose());
    const SymEigen e = eig_sym(sym);
    cert.P_min_eigs.push_back(e.values(0));
    cert.min_P_eig = std::min(cert.min_P_eig, e.values(0));
    p_scale = std::max(p_scale, e.values.cwiseAbs().maxCoeff());
  }

  double r_scale = 0.0;
  cert.residual_eigs.assign(model.num_regions(), {});
  for (int k = 0; k < model.num_regions(); ++k) {
    for (int i = 0; i < N; ++i) {
      const SymEigen e = eig_sym(coupled_residual(model, P, k, i));
      cert.residual_eigs[k].push_back(e.values);
      cert.max_residual_eig = std::max(cert.max_residual_eig, e.values(n - 1));
      r_scale = std::max(r_scale, e.values.cwiseAbs().maxCoeff());
    }
  }
  cert.pass = cert.min_P_eig - epsilon > 1e-9 * p_scale &&
              cert.max_residual_eig + epsilon < -1e-9 * r_scale;
  return cert;
}

CertifyResult certify_stability(const SdjlsModel& model, const CertifyOptions& opts) {
  CertifyResult result;
  result.epsilon = opts.epsilon.value_or(default_margin(model));
  const SdpProblem problem = build_analysis_lmis(model, result.epsilon);
  const FeasibilityOutcome outcome = solve_feasibility(problem, opts.solver);
  result.iterations = outcome.iterations;
  result.infeasibility = outcome.infeasibility;
  if (outcome.verdict == Verdict::Feasible) {
    StabilityCertificate cert = check_certificate(model, outcome.assignment, 0.0);
    cert.epsilon = result.epsilon;
    result.verdict = cert.pass ? Verdict::Feasible : Verdict::Undetermined;
    result.certificate = std::move(cert);
  }
  return result;
}

}  // namespace sdjls
