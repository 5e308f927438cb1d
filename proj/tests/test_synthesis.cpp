#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sdjls/numlin.hpp"
#include "sdjls/synthesis.hpp"

using namespace sdjls;
using fixtures::mat;
using fixtures::vec;

namespace {

SdjlsModel scalar_with_input(double a, double b) {
  ModelDescription d;
  d.state_dim = 1;
  d.input_dim = 1;
  d.modes = {{mat({{a}}), mat({{b}})}};
  d.rates = {mat({{0}})};
  d.x0 = vec({1});
  return validate_model(d);
}

}  // namespace

TEST(Synthesis, Example2ProblemShape) {
  const SdjlsModel m = fixtures::example2();
  const SdpProblem p = build_synthesis_lmis(m, 1e-6);
  ASSERT_EQ(p.variables().size(), 4u);
  EXPECT_EQ(p.variables()[2].kind, BlockKind::Full);
  EXPECT_EQ(p.variables()[2].rows, 1);
  EXPECT_EQ(p.variables()[2].cols, 2);
  ASSERT_EQ(p.constraints().size(), 6u);
  for (std::size_t c = 2; c < 6; ++c) EXPECT_EQ(p.constraints()[c].dim, 4);
}

TEST(Synthesis, BlockMatchesDirectAssembly) {
  const SdjlsModel m = fixtures::example2();
  const double eps = 1e-4;
  const SdpProblem p = build_synthesis_lmis(m, eps);
  const auto X = fixtures::example2_printed_X();
  const auto Y = fixtures::example2_printed_Y();
  const std::vector<Matrix> values{X[0], X[1], Y[0], Y[1]};
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) {
      const int j = 1 - i;
      const Matrix& L = m.generator(k);
      const Matrix J = X[i] * m.A(i).transpose() + m.A(i) * X[i] + Y[i].transpose() * m.B(i).transpose() +
                       m.B(i) * Y[i] + L(i, i) * X[i];
      Matrix block(4, 4);
      block << J, std::sqrt(L(i, j)) * X[i], std::sqrt(L(i, j)) * X[i], -X[j];
      const Matrix expected = -block - eps * Matrix::Identity(4, 4);
      const Matrix got = oracle::evaluate(p.constraints()[2 + 2 * k + i], values);
      EXPECT_LE((got - expected).norm(), 1e-12) << k << "," << i;
    }
  }
}

TEST(Synthesis, SingleModeBlockIsJ) {
  const SdjlsModel m = scalar_with_input(1.0, 1.0);
  const SdpProblem p = build_synthesis_lmis(m, 1e-3);
  ASSERT_EQ(p.constraints().size(), 2u);
  EXPECT_EQ(p.constraints()[1].dim, 1);
  // -(2 a x + 2 b y) - eps
  EXPECT_NEAR(oracle::evaluate(p.constraints()[1], {mat({{2}}), mat({{-3}})})(0, 0), -(4.0 - 6.0) - 1e-3, 1e-14);
}

TEST(Synthesis, ZeroRateGivesZeroCoupling) {
  auto d = fixtures::example2_description();
  d.rates = {mat({{0, 0}, {4, -4}}), mat({{0, 0}, {4, -4}})};
  const SdjlsModel m = validate_model(d);
  const SdpProblem p = build_synthesis_lmis(m, 1e-6);
  const std::vector<Matrix> values{Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Zero(1, 2),
                                   Matrix::Zero(1, 2)};
  const Matrix S = oracle::evaluate(p.constraints()[2], values);
  EXPECT_TRUE(S.topRightCorner(2, 2).isZero(0.0));
}

TEST(Synthesis, NoInputIsRejected) {
  EXPECT_THROW(build_synthesis_lmis(fixtures::example1(), 1e-6), NoInputError);
  EXPECT_THROW(synthesize(fixtures::example1()), NoInputError);
}

TEST(GainsFrom, Examples) {
  const Matrix Y = mat({{1.5, -2}});
  EXPECT_TRUE(gains_from({Matrix::Identity(2, 2)}, {Y})[0].isApprox(Y));
  EXPECT_NEAR(gains_from({mat({{2}})}, {mat({{3}})})[0](0, 0), 1.5, 1e-15);
  EXPECT_THROW(gains_from({mat({{1, 1}, {1, 1}})}, {Y}), SingularXError);
  EXPECT_THROW(gains_from({Matrix::Identity(2, 2)}, {}), DimensionMismatchError);
}

TEST(GainsFrom, PrintedExample2Values) {
  const auto X = fixtures::example2_printed_X();
  const auto Y = fixtures::example2_printed_Y();
  const auto K = gains_from(X, Y);
  // Closed-form 2x2 inverse as the reference.
  for (int i = 0; i < 2; ++i) {
    const double det = X[i](0, 0) * X[i](1, 1) - X[i](0, 1) * X[i](1, 0);
    const Matrix inv = mat({{X[i](1, 1), -X[i](0, 1)}, {-X[i](1, 0), X[i](0, 0)}}) / det;
    EXPECT_LE((K[i] - Y[i] * inv).norm(), 1e-10 * K[i].norm());
  }
  const auto ref = fixtures::example2_printed_K();
  for (int c = 0; c < 2; ++c) EXPECT_LE(std::abs(K[0](0, c) / ref[0](0, c) - 1.0), 0.02) << c;
}

TEST(GainsFrom, DefiningIdentity) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    Matrix R(3, 3), Y(2, 3);
    for (int i = 0; i < 9; ++i) R(i / 3, i % 3) = nd(gen);
    for (int i = 0; i < 6; ++i) Y(i / 3, i % 3) = nd(gen);
    const Matrix X = R * R.transpose() + 0.01 * Matrix::Identity(3, 3);
    const Matrix K = gains_from({X}, {Y})[0];
    EXPECT_LE((K * X - Y).norm(), 1e-8 * Y.norm());
  }
}

TEST(Synthesis, ScalarWithoutAuthorityIsUndetermined) {
  SynthesisOptions opts;
  opts.solver.max_iters = 3000;
  EXPECT_EQ(synthesize(scalar_with_input(1.0, 0.0), opts).verdict, Verdict::Undetermined);
}

TEST(Synthesis, ScalarStabilizable) {
  const SynthesisResult r = synthesize(scalar_with_input(1.0, 1.0));
  ASSERT_EQ(r.verdict, Verdict::Feasible);
  ASSERT_TRUE(r.gains.has_value());
  const double K = r.gains->K[0](0, 0);
  EXPECT_LT(1.0 + K, 0.0);
  EXPECT_TRUE(r.gains->verified);
}

TEST(Synthesis, Example2VerifiedAndSchurConsistent) {
  const SdjlsModel m = fixtures::example2();
  const SynthesisResult r = synthesize(m);
  ASSERT_EQ(r.verdict, Verdict::Feasible);
  const ControllerGains& g = *r.gains;
  EXPECT_TRUE(g.verified);
  ASSERT_TRUE(g.closed_loop.has_value());
  EXPECT_TRUE(check_certificate(m.with_dynamics(closed_loop_dynamics(m, g.K)), g.closed_loop->P).pass);
  for (int i = 0; i < 2; ++i) {
    EXPECT_GT(min_eigenvalue(g.X[i]), 0.0);
    EXPECT_LE((g.K[i] * g.X[i] - g.Y[i]).norm(), 1e-8 * g.Y[i].norm());
  }
  // Block < -eps I implies J_i + sum_{j != i} lambda_ij X_i X_j^{-1} X_i < 0.
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) {
      const int j = 1 - i;
      const Matrix& L = m.generator(k);
      const Matrix J = g.X[i] * m.A(i).transpose() + m.A(i) * g.X[i] + g.Y[i].transpose() * m.B(i).transpose() +
                       m.B(i) * g.Y[i] + L(i, i) * g.X[i];
      const Matrix S = J + L(i, j) * g.X[i] * g.X[j].llt().solve(g.X[i]);
      EXPECT_LT(max_eigenvalue(S), 0.0) << k << "," << i;
    }
  }
}

TEST(Synthesis, RandomStabilizableRoundTrip) {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ur(0.5, 3.0);
  int verified = 0;
  for (int rep = 0; rep < 6; ++rep) {
    auto d = fixtures::example2_description();
    for (auto& mode : d.modes) {
      for (int k = 0; k < 4; ++k) mode.A(k / 2, k % 2) = nd(gen);
      for (int k = 0; k < 2; ++k) (*mode.B)(k, 0) = nd(gen);
    }
    for (auto& L : d.rates) {
      const double a = ur(gen), b = ur(gen);
      L = mat({{-a, a}, {b, -b}});
    }
    const SdjlsModel m = validate_model(d);
    const SynthesisResult r = synthesize(m);
    if (r.verdict != Verdict::Feasible || !r.gains->verified) continue;
    ++verified;
    const SdjlsModel closed = m.with_dynamics(closed_loop_dynamics(m, r.gains->K));
    EXPECT_TRUE(check_certificate(closed, r.gains->closed_loop->P).pass);
  }
  EXPECT_GE(verified, 3);
}
