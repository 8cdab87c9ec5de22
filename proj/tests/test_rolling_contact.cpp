#include <doctest.h>

#include <cmath>

#include "rcwbc/dynamics.hpp"
#include "rcwbc/errors.hpp"
#include "rcwbc/rolling_contact.hpp"
#include "test_util.hpp"

using namespace rcwbc;

namespace {

RobotModel no_pairs() {
  ModelSpec s = testutil::biped().spec();
  s.rolling_pairs.clear();
  return RobotModel{s};
}

MatrixX feet_jacobian(const RobotModel& m, const RobotState& s) {
  const Kinematics kin = compute_kinematics(m, s);
  MatrixX jc(12, m.nv());
  jc << frame_jacobian(m, kin, "l_sole"), frame_jacobian(m, kin, "r_sole");
  return jc;
}

}  // namespace

TEST_SUITE("rolling_contact") {
  TEST_CASE("internal Jacobian of the bundled biped") {
    const RobotModel& m = testutil::biped();
    const InternalConstraintSet ics = build_internal_jacobian(m);
    REQUIRE(ics.J_int.rows() == 2);
    REQUIRE(ics.J_int.cols() == 20);
    MatrixX want = MatrixX::Zero(2, 20);
    want(0, 9) = 1.0;
    want(0, 10) = -1.0;
    want(1, 16) = 1.0;
    want(1, 17) = -1.0;
    CHECK(ics.J_int == want);
    CHECK(ics.J_int.leftCols<6>().isZero(0.0));
    CHECK((ics.J_int.array() != 0.0).count() == 4);
  }

  TEST_CASE("no pairs gives an empty Jacobian and identity projector") {
    const RobotModel m = no_pairs();
    const InternalConstraintSet ics = build_internal_jacobian(m);
    CHECK(ics.J_int.rows() == 0);
    CHECK(ics.J_int.cols() == m.nv());
    const ProjectedDynamics pd = nullspace_projector(ics, mass_matrix(m, neutral_state(m)));
    CHECK(pd.N_int.isIdentity(0.0));
    CHECK(constraint_residual(m, neutral_state(m)).size() == 0);
    CHECK(solve_internal_forces(m, neutral_state(m), VectorX::Zero(m.num_actuated()), VectorX(), VectorX::Zero(m.nv()),
                                MatrixX(0, m.nv()))
              .size() == 0);
  }

  TEST_CASE("constraint residual") {
    const RobotModel& m = testutil::biped();
    RobotState s = neutral_state(m);
    CHECK(constraint_residual(m, s).isZero(0.0));
    s.q(10) = M_PI / 4;
    s.q(11) = M_PI / 4;
    CHECK(constraint_residual(m, s)(0) == 0.0);
    CHECK(s.q(10) + s.q(11) == doctest::Approx(M_PI / 2).epsilon(1e-15));
    s.q(10) = 0.30;
    s.q(11) = 0.10;
    CHECK(constraint_residual(m, s)(0) == doctest::Approx(0.20).epsilon(1e-14));
  }

  TEST_CASE("unequal radii scale the distal coordinate") {
    ModelSpec spec = testutil::biped().spec();
    spec.rolling_pairs[0].r_distal = 0.045;
    const RobotModel m{spec};
    const InternalConstraintSet ics = build_internal_jacobian(m);
    CHECK(ics.J_int(0, 10) == doctest::Approx(-1.5).epsilon(1e-15));
    testutil::Rng rng(31);
    for (int i = 0; i < 20; ++i) {
      const RobotState s = testutil::random_state(m, rng, false);
      RobotState t = s;
      t.q = integrate_configuration(m, s.q, s.v, 1e-3);
      // The residual is linear in q, so its rate is exactly J_int v.
      const VectorX rate = (constraint_residual(m, t) - constraint_residual(m, s)) / 1e-3;
      CHECK((rate - ics.J_int * s.v).norm() < 1e-10);
    }
  }

  TEST_CASE("internal Jacobian is state independent") {
    const RobotModel& m = testutil::biped();
    const MatrixX j0 = build_internal_jacobian(m).J_int;
    testutil::Rng rng(32);
    for (int i = 0; i < 20; ++i) {
      const RobotState s = testutil::random_state(m, rng, false);
      RobotState t = s;
      t.q = integrate_configuration(m, s.q, s.v, 1e-2);
      CHECK((constraint_residual(m, t) - constraint_residual(m, s) - 1e-2 * j0 * s.v).norm() < 1e-14);
    }
  }

  TEST_CASE("dynamically consistent inverse with identity weight is the Moore-Penrose inverse") {
    testutil::Rng rng(33);
    const MatrixX j = rng.matrix(3, 7, -1, 1);
    const MatrixX jbar = dyn_consistent_pseudoinverse(j, MatrixX::Identity(7, 7));
    const MatrixX mp = j.transpose() * (j * j.transpose()).inverse();
    CHECK((jbar - mp).norm() < 1e-12);
    CHECK((j * jbar - MatrixX::Identity(3, 3)).norm() < 1e-9);
  }

  TEST_CASE("full row rank right inverse") {
    const RobotModel& m = testutil::biped();
    testutil::Rng rng(34);
    const MatrixX a = mass_matrix(m, testutil::random_state(m, rng));
    const MatrixX j = rng.matrix(5, m.nv(), -1, 1);
    CHECK((j * dyn_consistent_pseudoinverse(j, a) - MatrixX::Identity(5, 5)).norm() < 1e-9);
  }

  TEST_CASE("duplicated row yields the orthogonal projector onto the range") {
    const RobotModel& m = testutil::biped();
    testutil::Rng rng(35);
    const MatrixX a = mass_matrix(m, testutil::random_state(m, rng));
    MatrixX j = rng.matrix(3, m.nv(), -1, 1);
    j.row(2) = j.row(0);
    const MatrixX p = j * dyn_consistent_pseudoinverse(j, a);
    Eigen::JacobiSVD<MatrixX> svd(j, Eigen::ComputeFullU);
    const MatrixX u = svd.matrixU().leftCols(2);
    CHECK((p - u * u.transpose()).norm() < 1e-9);
    CHECK((p - MatrixX::Identity(3, 3)).norm() > 0.5);
  }

  TEST_CASE("indefinite weight is rejected") {
    MatrixX a = MatrixX::Identity(4, 4);
    a(2, 2) = -1.0;
    CHECK_THROWS_AS(dyn_consistent_pseudoinverse(MatrixX::Ones(1, 4), a), NonPositiveDefinite);
  }

  TEST_CASE("projector properties over random states") {
    const RobotModel& m = testutil::biped();
    const InternalConstraintSet ics = build_internal_jacobian(m);
    testutil::Rng rng(36);
    for (int i = 0; i < 100; ++i) {
      const RobotState s = testutil::random_state(m, rng);
      const ProjectedDynamics pd = nullspace_projector(ics, mass_matrix(m, s));
      CHECK((ics.J_int * pd.N_int).norm() < 1e-9);
      CHECK((pd.N_int * pd.N_int - pd.N_int).norm() < 1e-9);
      // s.v satisfies the constraint, so the projector leaves it alone.
      CHECK((ics.J_int * s.v).norm() < 1e-15);
      CHECK((pd.N_int * s.v - s.v).norm() < 1e-9);
    }
  }

  TEST_CASE("projected dynamics reproduce the unprojected equation") {
    const RobotModel& m = testutil::biped();
    const InternalConstraintSet ics = build_internal_jacobian(m);
    const MatrixX sa = m.actuation_selection();
    testutil::Rng rng(37);
    for (int i = 0; i < 50; ++i) {
      const RobotState s = testutil::random_state(m, rng);
      const DynamicsCache c = compute_dynamics(m, s);
      const MatrixX jc = feet_jacobian(m, s);
      const ProjectedDynamics pd = project_dynamics(m, ics, c.A, c.bg, jc);
      const VectorX tau = rng.vector(m.num_actuated(), -50, 50);
      const VectorX f = rng.vector(12, -100, 100);
      const VectorX qdd = c.A.llt().solve(pd.actuation_map * tau + pd.contact_map * f - pd.projected_bias);
      CHECK((ics.J_int * qdd).norm() < 1e-8);
      const VectorX f_int = solve_internal_forces(m, s, tau, f, qdd, jc);
      const VectorX residual =
          c.A * qdd + c.bg - sa.transpose() * tau - jc.transpose() * f - ics.J_int.transpose() * f_int;
      CHECK(residual.cwiseAbs().maxCoeff() < 1e-8);
      CHECK((ics.J_int.transpose() * f_int).head<6>().isZero(0.0));
    }
  }

  TEST_CASE("actuation validity holds on the bundled biped") {
    const RobotModel& m = testutil::biped();
    std::mt19937_64 rng(38);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const RobotState s = random_consistent_state(m, rng);
      CHECK(constraint_residual(m, s).isZero(0.0));
      const ActuationValidity v = check_actuation_validity(m, s);
      CHECK(v.valid);
      worst = std::max(worst, v.defect);
    }
    CHECK(worst < 1e-9);
    const RobotModel plain = no_pairs();
    CHECK(check_actuation_validity(plain, neutral_state(plain)).valid);
  }

  TEST_CASE("constraint touching the floating base breaks validity") {
    const RobotModel& m = testutil::biped();
    testutil::Rng rng(39);
    const MatrixX a = mass_matrix(m, testutil::random_state(m, rng));
    MatrixX j = build_internal_jacobian(m).J_int;
    j(0, 2) = 1.0;
    const ActuationValidity v = check_actuation_validity(j, a, m.actuation_selection());
    CHECK(!v.valid);
    CHECK(v.defect > 1e-3);
  }
}
