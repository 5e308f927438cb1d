#pragma once

#include <optional>
#include <vector>

#include "sdjls/analysis.hpp"
#include "sdjls/model.hpp"
#include "sdjls/sdp.hpp"

namespace sdjls {

/// Mode-dependent state feedback u = K_r x with the LMI variables it came
/// from (K_i X_i = Y_i) and the closed-loop stability certificate.
struct ControllerGains {
  std::vector<Matrix> K;
  std::vector<Matrix> X;
  std::vector<Matrix> Y;
  std::optional<StabilityCertificate> closed_loop;
  bool verified = false;
};

/// Variables X_1..X_N (symmetric n x n, ids 0..N-1) and Y_1..Y_N (m x n,
/// ids N..2N-1). Constraints X_i - eps I >= 0, then for each (kappa, i) the
/// negated block matrix
///   [ J_i   M_ki ]
///   [ M_ki' -X_i~]  minus eps I >= 0,  of size n*N,
/// with J_i = X_iA_i' + A_iX_i + Y_i'B_i' + B_iY_i + lambda^kappa_ii X_i,
/// M_ki = [sqrt(lambda^kappa_ij) X_i]_{j != i}, X_i~ = diag(X_j)_{j != i}.
SdpProblem build_synthesis_lmis(const SdjlsModel& model, double epsilon);

/// K_i solving K_i X_i = Y_i by a linear solve against X_i.
/// Throws SingularXError if lambda_min(X_i) < 1e-12 * |X_i|.
std::vector<Matrix> gains_from(const std::vector<Matrix>& X, const std::vector<Matrix>& Y);

/// A_i + B_i K_i
std::vector<Matrix> closed_loop_dynamics(const SdjlsModel& model, const std::vector<Matrix>& K);

struct SynthesisOptions {
  std::optional<double> epsilon;  // default_margin(model) when empty
  SolveOptions solver;
  /// Options for the closed-loop certification. When `initial` is empty the
  /// certification is warm-started from P_i = X_i^{-1}.
  CertifyOptions certify;
};

struct SynthesisResult {
  Verdict verdict = Verdict::Undetermined;
  std::optional<ControllerGains> gains;  // set on Feasible; gains->verified may be false
  double epsilon = 0.0;
  int iterations = 0;
  double infeasibility = 0.0;
};

/// Throws NoInputError if the model has no inputs.
SynthesisResult synthesize(const SdjlsModel& model, const SynthesisOptions& opts = {});

}  // namespace sdjls
