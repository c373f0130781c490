#include <gtest/gtest.h>

#include <array>
#include <limits>
#include <random>

#include "test_support.hpp"
#include "tdtsp/lp/simplex.hpp"

using namespace tdtsp::lp;

TEST(SolveLp, SingleLowerBound) {
  // min x  s.t.  x - s = 3, s >= 0
  LinearProgram lp;
  auto x = lp.add_column(1.0, -kInf, kInf, "x");
  auto s = lp.add_column(0.0, 0.0, kInf, "s");
  lp.add_row({{x, 1.0}, {s, -1.0}}, 3.0);
  auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.x[x], 3.0, 1e-12);
  EXPECT_NEAR(r.objective, 3.0, 1e-12);
}

TEST(SolveLp, BoundOnlyProblem) {
  LinearProgram lp;
  lp.add_column(1.0, 3.0, kInf, "x");
  auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_DOUBLE_EQ(r.x[0], 3.0);
}

TEST(SolveLp, DetectsInfeasible) {
  LinearProgram lp;
  auto x = lp.add_column(1.0, 0.0, 1.0);
  lp.add_row({{x, 1.0}}, 2.0);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Infeasible);
}

TEST(SolveLp, DetectsUnbounded) {
  LinearProgram lp;
  auto x = lp.add_column(-1.0, 0.0, kInf);
  auto y = lp.add_column(0.0, 0.0, kInf);
  lp.add_row({{x, 1.0}, {y, -1.0}}, 1.0);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Unbounded);
}

TEST(SolveLp, RedundantEqualityRows) {
  LinearProgram lp;
  auto x = lp.add_column(1.0, 0.0, kInf);
  auto y = lp.add_column(2.0, 0.0, kInf);
  lp.add_row({{x, 1.0}, {y, 1.0}}, 4.0);
  lp.add_row({{x, 2.0}, {y, 2.0}}, 8.0);
  auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, 4.0, 1e-10);
}

TEST(SolveLp, BealeCyclingExampleTerminates) {
  // Classic degenerate LP that cycles under a naive largest-coefficient rule.
  LinearProgram lp;
  std::array<std::size_t, 4> x{};
  const std::array<double, 4> c{-0.75, 150.0, -0.02, 6.0};
  for (int j = 0; j < 4; ++j) x[j] = lp.add_column(c[j], 0.0, kInf);
  std::array<std::size_t, 3> s{};
  for (int i = 0; i < 3; ++i) s[i] = lp.add_column(0.0, 0.0, kInf);
  lp.add_row({{x[0], 0.25}, {x[1], -60.0}, {x[2], -0.04}, {x[3], 9.0}, {s[0], 1.0}}, 0.0);
  lp.add_row({{x[0], 0.5}, {x[1], -90.0}, {x[2], -0.02}, {x[3], 3.0}, {s[1], 1.0}}, 0.0);
  lp.add_row({{x[2], 1.0}, {s[2], 1.0}}, 1.0);
  SimplexOptions opt;
  opt.bland_after = 1;
  auto r = solve_lp(lp, opt);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, -0.05, 1e-10);
  EXPECT_NEAR(solve_lp(lp).objective, -0.05, 1e-10);
}

TEST(SolveLp, RejectsMalformedProgram) {
  LinearProgram lp;
  lp.add_column(1.0, 2.0, 1.0);
  EXPECT_THROW(solve_lp(lp), tdtsp::ParameterError);
}


TEST(SolveLp, MatchesVertexEnumerationOnRandomSmallLps) {
  std::mt19937_64 rng(314159);
  std::uniform_real_distribution<double> Ua(-1.0, 2.0), Ub(1.0, 5.0), Uc(-3.0, 3.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::array<std::array<double, 3>, 3> A{};
    std::array<double, 3> b{}, c{};
    for (auto& row : A)
      for (auto& v : row) v = Ua(rng);
    for (auto& v : b) v = Ub(rng);
    for (auto& v : c) v = Uc(rng);

    LinearProgram lp;
    for (int j = 0; j < 3; ++j) lp.add_column(c[j], 0.0, 10.0);
    for (int i = 0; i < 3; ++i) {
      auto s = lp.add_column(0.0, 0.0, kInf);
      lp.add_row({{0, A[i][0]}, {1, A[i][1]}, {2, A[i][2]}, {s, 1.0}}, b[i]);
    }
    auto r = solve_lp(lp);
    ASSERT_EQ(r.status, LpStatus::Optimal) << rep;
    EXPECT_NEAR(r.objective, tdtsp::testkit::enumerate_vertices(A, b, c), 1e-6) << rep;
  }
}
