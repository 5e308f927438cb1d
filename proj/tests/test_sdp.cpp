#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sdjls/analysis.hpp"
#include "sdjls/sdp.hpp"

using namespace sdjls;
using fixtures::mat;

namespace {

// p - eps >= 0 and -2 a p - eps >= 0 for the scalar system x' = a x.
SdpProblem scalar_analysis(double a, double eps) {
  SdpProblem p;
  const int v = p.add_symmetric("p", 1);
  p.add_constraint({"p", 1, mat({{-eps}}), {term::scaled(v, 1, 1.0)}});
  p.add_constraint({"lyap", 1, mat({{-eps}}), {term::scaled(v, 1, -2.0 * a)}});
  p.margin = eps;
  return p;
}

}  // namespace

TEST(TermHelpers, OperatorForms) {
  const Matrix P = mat({{2, 1}, {1, 3}});
  const Matrix M = mat({{0, 1}, {-2, -3}});
  const Matrix F = mat({{1, 0, 2}, {0, 1, -1}});
  auto eval = [&](const LinearTerm& t, Eigen::Index d) {
    AffineLmiConstraint c{"c", d, Matrix::Zero(d, d), {t}};
    return oracle::evaluate(c, {P});
  };
  EXPECT_TRUE(eval(term::congruence(0, F, 1.0), 3).isApprox(F.transpose() * P * F));
  EXPECT_TRUE(eval(term::left_right(0, M, 1.0), 2).isApprox(M.transpose() * P + P * M));
  EXPECT_TRUE(eval(term::scaled(0, 2, -4.0), 2).isApprox(-4.0 * P));
  const Matrix E = term::embed(1, 2, 4);
  Matrix placed = Matrix::Zero(4, 4);
  placed.block(1, 1, 2, 2) = P;
  EXPECT_TRUE((E.transpose() * P * E).isApprox(placed));
}

TEST(SolveFeasibility, UnstableScalarIsUndetermined) {
  SolveOptions opts;
  opts.max_iters = 2000;
  const auto out = solve_feasibility(scalar_analysis(1.0, 1e-3), opts);
  EXPECT_EQ(out.verdict, Verdict::Undetermined);
  EXPECT_GT(out.infeasibility, 0.0);
  EXPECT_EQ(out.iterations, 2000);
}

TEST(SolveFeasibility, StableScalarIsFeasible) {
  const SdpProblem p = scalar_analysis(-1.0, 1e-3);
  const auto out = solve_feasibility(p);
  ASSERT_EQ(out.verdict, Verdict::Feasible);
  EXPECT_TRUE(check_assignment(p, out.assignment).pass);
  EXPECT_GE(out.assignment[0](0, 0), 1e-3 - 1e-7);
  EXPECT_EQ(out.infeasibility, 0.0);
}

TEST(SolveFeasibility, Example1AnalysisIsFeasible) {
  const SdjlsModel m = fixtures::example1();
  const SdpProblem p = build_analysis_lmis(m, default_margin(m));
  const auto out = solve_feasibility(p);
  ASSERT_EQ(out.verdict, Verdict::Feasible);
  const auto report = check_assignment(p, out.assignment);
  EXPECT_TRUE(report.pass);
  EXPECT_EQ(report.constraints.size(), 6u);
}

TEST(SolveFeasibility, Deterministic) {
  const SdjlsModel m = fixtures::example1();
  const SdpProblem p = build_analysis_lmis(m, default_margin(m));
  const auto a = solve_feasibility(p);
  const auto b = solve_feasibility(p);
  EXPECT_EQ(a.iterations, b.iterations);
  for (std::size_t i = 0; i < a.assignment.size(); ++i) EXPECT_EQ(a.assignment[i], b.assignment[i]);
}

TEST(SolveFeasibility, SmallerMarginStaysFeasible) {
  const SdjlsModel m = fixtures::example1();
  for (double eps : {1e-3, 1e-5, 1e-7}) {
    EXPECT_EQ(solve_feasibility(build_analysis_lmis(m, eps)).verdict, Verdict::Feasible) << eps;
  }
}

TEST(SolveFeasibility, FullBlockVariable) {
  // Find y (1x2) with [[1, y], [y', I]] >= 0.1 I, i.e. |y| < ~0.9.
  SdpProblem p;
  const int y = p.add_full("y", 1, 2);
  Matrix c = Matrix::Identity(3, 3) * 0.9;
  p.add_constraint({"schur", 3, c, {{y, term::embed(0, 1, 3), term::embed(1, 2, 3), 1.0}}});
  SolveOptions opts;
  opts.initial = {mat({{3, 4}})};
  const auto out = solve_feasibility(p, opts);
  ASSERT_EQ(out.verdict, Verdict::Feasible);
  EXPECT_LT(out.assignment[0].norm(), 0.9 + 1e-6);
}

TEST(CheckAssignment, ZeroAssignmentFailsByMargin) {
  const SdpProblem p = scalar_analysis(-1.0, 1e-3);
  const auto report = check_assignment(p, {mat({{0}})});
  EXPECT_FALSE(report.pass);
  EXPECT_NEAR(report.worst, -1e-3, 1e-15);
  EXPECT_EQ(report.constraints[0].name, "p");
}

TEST(CheckAssignment, MissingBlock) {
  const SdpProblem p = scalar_analysis(-1.0, 1e-3);
  EXPECT_THROW(check_assignment(p, {}), MissingBlockError);
  EXPECT_THROW(check_assignment(p, {Matrix(2, 2)}), MissingBlockError);
}

TEST(SdpProblem, ValidateRejectsDanglingReferences) {
  SdpProblem p;
  p.add_symmetric("P", 2);
  p.add_constraint({"bad", 2, Matrix::Zero(2, 2), {term::scaled(3, 2, 1.0)}});
  EXPECT_THROW(p.validate(), InvalidProblemError);
  EXPECT_THROW(solve_feasibility(p), InvalidProblemError);
  SdpProblem q;
  q.add_symmetric("P", 2);
  q.add_constraint({"shape", 3, Matrix::Zero(3, 3), {term::scaled(0, 2, 1.0)}});
  EXPECT_THROW(q.validate(), InvalidProblemError);
}

TEST(SolveFeasibility, NonFiniteData) {
  SdpProblem q;
  q.add_symmetric("p", 1);
  q.add_constraint({"p", 1, mat({{NAN}}), {term::scaled(0, 1, 1.0)}});
  EXPECT_THROW(solve_feasibility(q), Error);
}

TEST(SolveFeasibility, GridOracleSmallSample) {
  std::mt19937_64 gen(101);
  std::normal_distribution<double> nd(0.0, 1.0);
  int feasible = 0;
  for (int inst = 0; inst < 6; ++inst) {
    SdpProblem p;
    p.add_symmetric("P", 2);
    for (int c = 0; c < 2; ++c) {
      Matrix M(2, 2), C(2, 2);
      for (int i = 0; i < 4; ++i) M(i / 2, i % 2) = nd(gen);
      for (int i = 0; i < 4; ++i) C(i / 2, i % 2) = 2.0 * nd(gen);
      C = 0.5 * (C + C.transpose());
      p.add_constraint({"c" + std::to_string(c), 2, C, {term::left_right(0, M, 1.0)}});
    }
    const auto grid = oracle::grid_search_2x2(p, -10, 10, 0.25);
    const auto out = solve_feasibility(p);
    if (out.verdict == Verdict::Feasible) EXPECT_TRUE(check_assignment(p, out.assignment).pass);
    if (grid.feasible) {
      ++feasible;
      EXPECT_EQ(out.verdict, Verdict::Feasible) << "instance " << inst;
    }
  }
  EXPECT_GT(feasible, 0);
}
