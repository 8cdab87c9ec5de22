#include <doctest.h>

#include "rcwbc/spatial.hpp"
#include "test_util.hpp"

using namespace rcwbc;

TEST_SUITE("spatial") {
  TEST_CASE("rpy round trip away from gimbal lock") {
    testutil::Rng rng(1);
    for (int i = 0; i < 200; ++i) {
      const Vector3 rpy(rng.uniform(-3.0, 3.0), rng.uniform(-1.5, 1.5), rng.uniform(-3.0, 3.0));
      CHECK((rpy_from_rotation(rotation_from_rpy(rpy)) - rpy).norm() < 1e-12);
    }
  }

  TEST_CASE("exp and log are inverse for angles below pi") {
    testutil::Rng rng(2);
    for (int i = 0; i < 200; ++i) {
      Vector3 w = rng.vector(3, -1.0, 1.0);
      w *= rng.uniform(0.0, 3.0) / w.norm();
      CHECK((log_so3(exp_so3(w)) - w).norm() < 1e-10);
    }
    CHECK(log_so3(Matrix3::Identity()).norm() == 0.0);
  }

  TEST_CASE("motion transforms agree with point velocity kinematics") {
    testutil::Rng rng(3);
    const Transform x{Eigen::Quaterniond(rng.quaternion()).toRotationMatrix(), rng.vector(3, -1, 1)};
    const Vector6 m = rng.vector(6, -1, 1);
    // Parent-frame velocity of the child origin is v + w x p.
    const Vector6 child = motion_to_child(x, m);
    CHECK((x.rotation * child.head<3>() - m.head<3>()).norm() < 1e-14);
    CHECK((x.rotation * child.tail<3>() - (m.tail<3>() + m.head<3>().cross(x.translation))).norm() < 1e-14);
    CHECK((motion_to_parent(x, child) - m).norm() < 1e-14);
    CHECK((motion_transform_to_child(x) * m - child).norm() < 1e-14);
  }

  TEST_CASE("force transform is the dual of the motion transform") {
    testutil::Rng rng(4);
    const Transform x{Eigen::Quaterniond(rng.quaternion()).toRotationMatrix(), rng.vector(3, -1, 1)};
    const Vector6 f = rng.vector(6, -1, 1);
    const Vector6 m = rng.vector(6, -1, 1);
    // Power is frame independent.
    CHECK(std::abs(force_to_parent(x, f).dot(m) - f.dot(motion_to_child(x, m))) < 1e-14);
  }

  TEST_CASE("spatial inertia of a point mass") {
    const Vector3 c(0.1, -0.2, 0.3);
    const Matrix6 i = spatial_inertia(2.0, c, Matrix3::Zero());
    const Vector6 v = (Vector6() << 0.3, -0.1, 0.2, 1.0, 0.5, -0.4).finished();
    const Vector3 pv = v.tail<3>() + v.head<3>().cross(c);
    CHECK(std::abs(0.5 * v.dot(i * v) - 0.5 * 2.0 * pv.squaredNorm()) < 1e-14);
  }
}
