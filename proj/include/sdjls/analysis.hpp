#pragma once

#include <optional>
#include <vector>

#include "sdjls/model.hpp"
#include "sdjls/sdp.hpp"

namespace sdjls {

/// Lyapunov matrices for the coupled stability LMIs together with the
/// spectra the audit is based on. residual_eigs[k][i] holds the eigenvalues
/// (ascending) of A_i'P_i + P_iA_i + sum_j lambda^k_ij P_j; W_{ki} is its
/// negation.
struct StabilityCertificate {
  std::vector<Matrix> P;
  double epsilon = 0.0;  // margin the P were solved or audited with
  std::vector<std::vector<Vector>> residual_eigs;
  std::vector<double> P_min_eigs;
  double min_P_eig = 0.0;
  double max_residual_eig = 0.0;
  bool pass = false;
};

/// A_i'P_i + P_iA_i + sum_j lambda^kappa_ij P_j
Matrix coupled_residual(const SdjlsModel& model, const std::vector<Matrix>& P, int kappa, int mode);

/// Default strictness margin: 1e-6 * (1 + max_i |A_i|_2).
double default_margin(const SdjlsModel& model);

/// Variables P_1..P_N; constraints P_i - eps I >= 0 (named "P<i>") followed by
/// -(residual(kappa, i)) - eps I >= 0 (named "W<kappa>,<i>"), kappa-major.
SdpProblem build_analysis_lmis(const SdjlsModel& model, double epsilon);

/// Audit of externally supplied P. Passes iff every P_i - eps I is positive
/// definite and every residual + eps I is negative definite. Eigenvalues
/// within 1e-9 * scale of the threshold count as failing, so an exactly
/// singular P never passes.
StabilityCertificate check_certificate(const SdjlsModel& model, const std::vector<Matrix>& P,
                                       double epsilon = 0.0);

struct CertifyOptions {
  std::optional<double> epsilon;  // default_margin(model) when empty
  SolveOptions solver;
};

struct CertifyResult {
  Verdict verdict = Verdict::Undetermined;
  std::optional<StabilityCertificate> certificate;
  double epsilon = 0.0;  // margin the P were solved or audited with
  int iterations = 0;
  double infeasibility = 0.0;
};

/// Solves the analysis LMIs. Input matrices B are ignored.
CertifyResult certify_stability(const SdjlsModel& model, const CertifyOptions& opts = {});

}  // namespace sdjls
