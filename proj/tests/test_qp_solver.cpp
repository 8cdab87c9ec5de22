#include <doctest.h>

#include <cmath>
#include <limits>

#include "qp_oracle.hpp"
#include "rcwbc/errors.hpp"
#include "rcwbc/qp_solver.hpp"
#include "test_util.hpp"

using namespace rcwbc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QpProblem scalar_problem() {
  QpProblem p;
  p.H = MatrixX::Constant(1, 1, 2.0);
  p.g = VectorX::Zero(1);
  p.A_in = MatrixX::Ones(1, 1);
  p.lb_in = VectorX::Constant(1, 1.0);
  p.ub_in = VectorX::Constant(1, kInf);
  return p;
}

bool feasible(const QpProblem& p, const VectorX& x, double tol) {
  if (p.A_eq.rows() > 0 && (p.A_eq * x - p.b_eq).cwiseAbs().maxCoeff() > tol) return false;
  if (p.A_in.rows() > 0) {
    const VectorX ax = p.A_in * x;
    if (((p.lb_in - ax).array() > tol).any() || ((ax - p.ub_in).array() > tol).any()) return false;
  }
  if (p.lb.size() > 0 && (((p.lb - x).array() > tol).any() || ((x - p.ub).array() > tol).any())) return false;
  return true;
}

}  // namespace

TEST_SUITE("qp_solver") {
  TEST_CASE("scalar lower bound") {
    const QpProblem p = scalar_problem();
    const QpSolution s = solve_qp(p);
    REQUIRE(s.status == QpStatus::kOptimal);
    CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.z_in(0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(kkt_residual(p, VectorX::Ones(1), VectorX(), VectorX::Constant(1, 2.0), VectorX()) < 1e-12);

    QpProblem b;
    b.H = p.H;
    b.g = p.g;
    b.lb = VectorX::Ones(1);
    b.ub = VectorX::Constant(1, kInf);
    const QpSolution sb = solve_qp(b);
    CHECK(sb.x(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sb.z_box(0) == doctest::Approx(2.0).epsilon(1e-14));
  }

  TEST_CASE("equality-only problem matches the KKT system") {
    testutil::Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = rng.integer(2, 12);
      const int me = rng.integer(1, n - 1);
      const QpProblem p = testutil::random_qp(rng, n, 0, me);
      MatrixX kkt = MatrixX::Zero(n + me, n + me);
      kkt << p.H, -p.A_eq.transpose(), p.A_eq, MatrixX::Zero(me, me);
      VectorX rhs(n + me);
      rhs << -p.g, p.b_eq;
      const VectorX sol = kkt.fullPivLu().solve(rhs);
      const QpSolution s = solve_qp(p);
      REQUIRE(s.status == QpStatus::kOptimal);
      CHECK((s.x - sol.head(n)).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((s.y_eq - sol.tail(me)).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("contradictory bounds are infeasible") {
    QpProblem p = scalar_problem();
    p.A_in = MatrixX::Ones(2, 1);
    p.lb_in = VectorX(2);
    p.ub_in = VectorX(2);
    p.lb_in << 1.0, -kInf;
    p.ub_in << kInf, 0.0;
    const QpSolution s = solve_qp(p);
    CHECK(s.status == QpStatus::kInfeasible);
    REQUIRE(s.violated_constraint.has_value());
    CHECK(s.infeasibility == doctest::Approx(1.0));
    CHECK(s.certificate_residual < 1e-12);
  }

  TEST_CASE("inconsistent equalities are infeasible") {
    QpProblem p;
    p.H = MatrixX::Identity(2, 2);
    p.g = VectorX::Zero(2);
    p.A_eq = MatrixX::Ones(2, 2);
    p.b_eq = VectorX(2);
    p.b_eq << 1.0, 2.0;
    CHECK(solve_qp(p).status == QpStatus::kInfeasible);
    p.b_eq << 1.0, 1.0;
    const QpSolution s = solve_qp(p);
    REQUIRE(s.status == QpStatus::kOptimal);
    CHECK((s.x - VectorX::Constant(2, 0.5)).norm() < 1e-14);
  }

  TEST_CASE("kkt residual detects perturbations and suboptimality") {
    testutil::Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
      const QpProblem p = testutil::random_qp(rng, 6, 4, 1);
      const QpSolution s = solve_qp(p);
      REQUIRE(s.status == QpStatus::kOptimal);
      CHECK(s.kkt_residual < 1e-8);
      VectorX dx = rng.vector(6, -1, 1);
      dx *= 1e-3 / dx.cwiseAbs().maxCoeff();
      CHECK(kkt_residual(p, s.x + dx, s.y_eq, s.z_in, s.z_box) >= 1e-4);
    }
    // Feasible but not optimal: x = 2 for min x^2, x >= 1, with zero duals.
    const QpProblem p = scalar_problem();
    const double r = kkt_residual(p, VectorX::Constant(1, 2.0), VectorX(), VectorX::Zero(1), VectorX());
    CHECK(r == doctest::Approx(4.0));  // stationarity 2*2 = 4; no violation, no complementarity error
    CHECK_THROWS_AS(kkt_residual(p, VectorX::Zero(2), VectorX(), VectorX::Zero(1), VectorX()), DimensionMismatch);
  }

  TEST_CASE("matches brute-force enumeration on random problems") {
    testutil::Rng rng(43);
    double worst_x = 0.0, worst_kkt = 0.0;
    int constrained = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const int n = rng.integer(1, 20);
      const int m_in = rng.integer(0, 10);
      const int m_eq = rng.integer(0, std::min(3, n - 1));
      const QpProblem p = testutil::random_qp(rng, n, m_in, m_eq);
      const QpSolution s = solve_qp(p);
      REQUIRE(s.status == QpStatus::kOptimal);
      bool found = false;
      const VectorX oracle = testutil::brute_force_qp(p, &found);
      REQUIRE(found);
      worst_x = std::max(worst_x, (s.x - oracle).cwiseAbs().maxCoeff());
      worst_kkt = std::max(worst_kkt, s.kkt_residual);
      constrained += s.active_set.empty() ? 0 : 1;
    }
    CHECK(constrained > 100);
    CHECK(worst_x < 1e-6);
    CHECK(worst_kkt < 1e-8);
  }

  TEST_CASE("box constraints match brute force") {
    testutil::Rng rng(44);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = rng.integer(1, 4);
      const QpProblem p = testutil::random_qp(rng, n, rng.integer(0, 2), 0, nullptr, true);
      const QpSolution s = solve_qp(p);
      REQUIRE(s.status == QpStatus::kOptimal);
      CHECK((s.x - testutil::brute_force_qp(p)).cwiseAbs().maxCoeff() < 1e-6);
      CHECK(s.kkt_residual < 1e-8);
    }
  }

  TEST_CASE("optimum beats random feasible points") {
    testutil::Rng rng(45);
    for (int trial = 0; trial < 20; ++trial) {
      VectorX x0;
      const QpProblem p = testutil::random_qp(rng, 8, 6, 2, &x0);
      const QpSolution s = solve_qp(p);
      REQUIRE(s.status == QpStatus::kOptimal);
      const MatrixX null_eq = Eigen::FullPivLU<MatrixX>(p.A_eq).kernel();
      int tested = 0;
      for (int k = 0; k < 2000 && tested < 100; ++k) {
        const VectorX x = x0 + null_eq * rng.vector(int(null_eq.cols()), -0.5, 0.5);
        if (!feasible(p, x, 1e-12)) continue;
        ++tested;
        CHECK(s.objective <= 0.5 * x.dot(p.H * x) + p.g.dot(x) + 1e-12);
      }
      CHECK(tested > 10);
    }
  }

  TEST_CASE("warm-started re-solve converges immediately") {
    testutil::Rng rng(46);
    for (int trial = 0; trial < 50; ++trial) {
      const QpProblem p = testutil::random_qp(rng, 10, 8, 2, nullptr, true);
      const QpSolution cold = solve_qp(p);
      REQUIRE(cold.status == QpStatus::kOptimal);
      const QpSolution warm = solve_qp(p, {}, &cold.active_set);
      REQUIRE(warm.status == QpStatus::kOptimal);
      CHECK(warm.iterations <= 2);
      CHECK((warm.x - cold.x).cwiseAbs().maxCoeff() < 1e-10);
    }
    QpSolver solver;
    const QpProblem p = testutil::random_qp(rng, 10, 8, 2, nullptr, true);
    solver.solve(p);
    CHECK(solver.solve(p).iterations <= 2);
  }

  TEST_CASE("deterministic") {
    testutil::Rng rng(47);
    const QpProblem p = testutil::random_qp(rng, 12, 8, 2, nullptr, true);
    const QpSolution a = solve_qp(p);
    const QpSolution b = solve_qp(p);
    CHECK(a.x == b.x);
    CHECK(a.z_in == b.z_in);
    CHECK(a.iterations == b.iterations);
  }

  TEST_CASE("semidefinite Hessian") {
    // min 1/2 x0^2 + x1  s.t.  x1 >= 1.
    QpProblem p;
    p.H = MatrixX::Zero(2, 2);
    p.H(0, 0) = 1.0;
    p.g = VectorX(2);
    p.g << 0.5, 1.0;
    p.A_in = MatrixX(1, 2);
    p.A_in << 0.0, 1.0;
    p.lb_in = VectorX::Ones(1);
    p.ub_in = VectorX::Constant(1, kInf);
    const QpSolution s = solve_qp(p);
    REQUIRE(s.status == QpStatus::kOptimal);
    CHECK(s.x(0) == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(s.x(1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(s.z_in(0) == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("indefinite Hessian and bad dimensions are rejected") {
    QpProblem p;
    p.H = MatrixX::Identity(2, 2);
    p.H(1, 1) = -1.0;
    p.g = VectorX::Zero(2);
    CHECK_THROWS_AS(solve_qp(p), IllConditioned);
    p.H = MatrixX::Identity(3, 3);
    CHECK_THROWS_AS(solve_qp(p), DimensionMismatch);
  }
}
