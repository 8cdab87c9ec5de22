#include <doctest.h>

#include <cmath>

#include "rcwbc/actuation.hpp"
#include "test_util.hpp"

using namespace rcwbc;

namespace {

TransmissionSpec hip(double r_fix, double r_rot) {
  TransmissionSpec t;
  t.kind = TransmissionKind::kHipSheave;
  t.r_fix = r_fix;
  t.r_rot = r_rot;
  return t;
}

TransmissionSpec knee(std::vector<double> stages) {
  TransmissionSpec t;
  t.kind = TransmissionKind::kKneeRolling;
  t.gear_stages = std::move(stages);
  return t;
}

RollingContactPair pair(double rp, double rd) {
  RollingContactPair p;
  p.r_proximal = rp;
  p.r_distal = rd;
  return p;
}

}  // namespace

TEST_SUITE("actuation") {
  TEST_CASE("hip sheave") {
    CHECK(hip_joint_to_motor(7.0, hip(0.05, 0.05)) == 7.0);
    CHECK(hip_joint_to_motor(10.0, hip(0.06, 0.03)) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(hip_joint_to_motor(0.0, hip(0.09, 0.03)) == 0.0);
    // Power oracle: joint power equals motor power under the kinematic ratio.
    const TransmissionSpec t = hip(0.06, 0.03);
    const double w = 1.7;
    CHECK(std::abs(hip_joint_to_motor(10.0, t) * hip_joint_to_motor_speed(w, t) - 10.0 * w) < 1e-12);
  }

  TEST_CASE("knee carries half the distal torque at the contact point") {
    CHECK(knee_distal_to_icr(10.0, pair(0.03, 0.03)) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(knee_joint_to_motor(10.0, pair(0.03, 0.03), knee({10.0, 5.0})) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(knee_joint_to_motor(0.0, pair(0.03, 0.03), knee({6.0, 2.5})) == 0.0);
  }

  TEST_CASE("knee power is conserved") {
    // Knee angle advances twice as fast as the distal joint for equal radii.
    const RollingContactPair p = pair(0.03, 0.03);
    const TransmissionSpec t = knee({6.0, 2.5});
    const double w_distal = 0.8;
    CHECK(knee_icr_speed(w_distal, p) == doctest::Approx(2.0 * w_distal).epsilon(1e-15));
    const double tau = 12.0;
    CHECK(std::abs(knee_joint_to_motor(tau, p, t) * knee_distal_to_motor_speed(w_distal, p, t) - tau * w_distal) < 1e-12);
    CHECK(std::abs(knee_distal_to_icr(tau, p) * knee_icr_speed(w_distal, p) - tau * w_distal) < 1e-12);
  }

  TEST_CASE("round trips over the torque range") {
    testutil::Rng rng(51);
    const TransmissionSpec h = hip(0.09, 0.03);
    const TransmissionSpec k = knee({6.0, 2.5});
    const RollingContactPair p = pair(0.03, 0.03);
    const RollingContactPair q = pair(0.025, 0.04);
    for (int i = 0; i < 1000; ++i) {
      const double tau = rng.uniform(-500.0, 500.0);
      CHECK(std::abs(motor_to_joint(hip_joint_to_motor(tau, h), h) - tau) < 1e-12);
      CHECK(std::abs(motor_to_joint(knee_joint_to_motor(tau, p, k), k, &p) - tau) < 1e-12);
      CHECK(std::abs(motor_to_joint(knee_joint_to_motor(tau, q, k), k, &q) - tau) < 1e-12);
    }
    CHECK(motor_to_joint(0.0, h) == 0.0);
  }

  TEST_CASE("motor torques for the bundled biped") {
    const RobotModel& m = testutil::biped();
    VectorX tau = VectorX::Zero(m.num_actuated());
    const auto& act = m.actuated_v_indices();
    for (int i = 0; i < m.num_actuated(); ++i) {
      if (act[i] == m.joint_v_index("l_hip_pitch")) tau(i) = 30.0;
      if (act[i] == m.joint_v_index("l_knee_distal")) tau(i) = 30.0;
    }
    const auto motors = motor_torques(m, tau);
    REQUIRE(motors.size() == 4);
    CHECK(motors[0].joint == "l_hip_pitch");
    CHECK(motors[0].torque == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(motors[1].joint == "l_knee_distal");
    CHECK(motors[1].torque == doctest::Approx(1.0).epsilon(1e-15));
  }
}
