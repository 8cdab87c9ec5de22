#include <doctest.h>

#include <fstream>
#include <regex>

#include "rcwbc/dynamics.hpp"
#include "rcwbc/errors.hpp"
#include "rcwbc/model.hpp"
#include "test_util.hpp"

using namespace rcwbc;

namespace {

std::string bundled_text() {
  std::ifstream in(testutil::data_path("models/biped_rcj.yaml"));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_diagnostics(const ModelSpec& s) { return validate_model(s).size(); }

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("bundled biped layout") {
    const RobotModel& m = testutil::biped();
    // Counted by hand from the file: six-coordinate base, seven joints per leg.
    CHECK(m.nv() == 20);
    CHECK(m.nq() == 21);
    CHECK(m.spec().rolling_pairs.size() == 2);
    CHECK(m.total_mass() == doctest::Approx(39.0).epsilon(1e-14));
    CHECK(m.joint_v_index("l_hip_yaw") == 6);
    CHECK(m.joint_v_index("l_knee_proximal") == 9);
    CHECK(m.joint_v_index("l_knee_distal") == 10);
    CHECK(m.joint_v_index("r_knee_proximal") == 16);
    CHECK(m.joint_v_index("r_knee_distal") == 17);
    for (const auto& [prox, dist] : m.rolling_pair_indices()) CHECK(dist == prox + 1);
    // Proximal knee joints are passive.
    CHECK(m.num_actuated() == 12);
    CHECK(m.find_frame("l_sole").has_value());
    CHECK(m.root_link() == "pelvis");
  }

  TEST_CASE("bundled biped validates cleanly") { CHECK(validate_model(testutil::biped().spec()).empty()); }

  TEST_CASE("neutral state") {
    const RobotModel& m = testutil::biped();
    const RobotState s = neutral_state(m);
    CHECK(s.q(3) == 1.0);
    CHECK(s.q.segment<3>(4).isZero(0.0));
    CHECK(s.q.tail(m.nv() - 6).isZero(0.0));
    CHECK(s.v.isZero(0.0));
  }

  TEST_CASE("negative inertia eigenvalue names the link") {
    ModelSpec s = testutil::biped().spec();
    s.links[3].inertia(1, 1) = -0.1;
    const auto d = validate_model(s);
    REQUIRE(d.size() == 1);
    CHECK(d[0].message.find("l_thigh") != std::string::npos);
    CHECK_THROWS_AS(RobotModel{s}, ValidationError);
  }

  TEST_CASE("triangle inequality on principal moments") {
    ModelSpec s = testutil::biped().spec();
    s.links[0].inertia = testutil::diag_inertia(0.1, 0.1, 0.3);
    CHECK(count_diagnostics(s) == 1);
  }

  TEST_CASE("rolling pair on non-adjacent joints") {
    ModelSpec s = testutil::biped().spec();
    s.rolling_pairs[0].distal_joint = "l_ankle_pitch";
    CHECK(count_diagnostics(s) == 1);
    CHECK_THROWS_AS(RobotModel{s}, ValidationError);
  }

  TEST_CASE("zero proximal radius gives one diagnostic") {
    ModelSpec s = testutil::biped().spec();
    s.rolling_pairs[1].r_proximal = 0.0;
    CHECK(count_diagnostics(s) == 1);
  }

  TEST_CASE("two floating bases give one diagnostic") {
    ModelSpec s = testutil::biped().spec();
    s.joints[1].kind = JointKind::kFloatingBase;
    s.joints[1].parent_link.clear();
    CHECK(count_diagnostics(s) == 1);
  }

  TEST_CASE("inverted joint limits") {
    ModelSpec s = testutil::biped().spec();
    std::swap(s.joints[2].position_limits.lower, s.joints[2].position_limits.upper);
    CHECK(count_diagnostics(s) == 1);
  }

  TEST_CASE("non-unit axis") {
    ModelSpec s = testutil::biped().spec();
    s.joints[2].axis = Vector3(1.0, 0.1, 0.0);
    CHECK(count_diagnostics(s) == 1);
  }

  TEST_CASE("orphan link and cycle raise TopologyError") {
    ModelSpec s = testutil::biped().spec();
    s.links[5].parent_joint = "nowhere";
    CHECK_THROWS_AS(RobotModel{s}, TopologyError);

    ModelSpec c = testutil::biped().spec();
    // l_hip_yaw now hangs off l_thigh, which descends from l_hip_yaw.
    for (JointSpec& j : c.joints)
      if (j.name == "l_hip_yaw") j.parent_link = "l_thigh";
    CHECK_THROWS_AS(RobotModel{c}, TopologyError);
  }

  TEST_CASE("parse errors carry a line number") {
    std::string text = bundled_text();
    text = std::regex_replace(text, std::regex("mass: 0\\.5\n"), "mass: heavy\n", std::regex_constants::format_first_only);
    try {
      load_model_from_string(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 11);
    }
    CHECK_THROWS_AS(load_model_from_string("links: [\n"), ParseError);
    CHECK_THROWS_AS(load_model_from_string("links: []\njoints: []\nbogus: 1\n"), ParseError);
    CHECK_THROWS_AS(load_model(testutil::data_path("models/does_not_exist.yaml")), ParseError);
  }

  TEST_CASE("serialize and reload is exact") {
    const ModelSpec a = testutil::biped_collocated().spec();
    const ModelSpec b = parse_model_spec(serialize_model(a));
    REQUIRE(a.links.size() == b.links.size());
    for (std::size_t i = 0; i < a.links.size(); ++i) {
      CHECK(a.links[i].name == b.links[i].name);
      CHECK(a.links[i].mass == b.links[i].mass);
      CHECK(a.links[i].com == b.links[i].com);
      CHECK(a.links[i].inertia == b.links[i].inertia);
    }
    REQUIRE(a.joints.size() == b.joints.size());
    for (std::size_t i = 0; i < a.joints.size(); ++i) {
      CHECK(a.joints[i].origin.rotation == b.joints[i].origin.rotation);
      CHECK(a.joints[i].origin.translation == b.joints[i].origin.translation);
      CHECK(a.joints[i].axis == b.joints[i].axis);
      CHECK(a.joints[i].position_limits.lower == b.joints[i].position_limits.lower);
      CHECK(a.joints[i].torque_limits.upper == b.joints[i].torque_limits.upper);
    }
    CHECK(a.rolling_pairs[0].r_distal == b.rolling_pairs[0].r_distal);
    CHECK(a.transmissions[1].gear_stages == b.transmissions[1].gear_stages);
    CHECK(a.contact_frames[0].offset.translation == b.contact_frames[0].offset.translation);
    // A second pass is a fixed point of the text.
    CHECK(serialize_model(b) == serialize_model(a));
  }

  TEST_CASE("serialized rotations survive a round trip") {
    ModelSpec s = testutil::biped().spec();
    s.joints[3].origin.rotation = rotation_from_rpy(Vector3(0.1, -0.2, 0.3));
    s.joints[3].axis = Vector3(1, 0, 0);
    const ModelSpec r = parse_model_spec(serialize_model(s));
    CHECK(r.joints[3].origin.rotation == s.joints[3].origin.rotation);
  }

  TEST_CASE("integrate_configuration keeps the quaternion unit") {
    const RobotModel& m = testutil::biped();
    testutil::Rng rng(7);
    RobotState s = testutil::random_state(m, rng);
    for (int i = 0; i < 1000; ++i) s.q = integrate_configuration(m, s.q, s.v, 1e-2);
    CHECK(std::abs(s.q.segment<4>(3).norm() - 1.0) < 1e-12);
  }

  TEST_CASE("transfer_point_mass preserves total mass and composite inertia") {
    const RobotModel& m = testutil::biped();
    const ModelSpec moved =
        transfer_point_mass(m.spec(), "l_thigh", Vector3(0, 0, -0.04), "l_shin", Vector3(0, 0, -0.03), 2.0);
    const RobotModel mm{moved};
    CHECK(mm.total_mass() == doctest::Approx(m.total_mass()).epsilon(1e-14));
    // Moving a point mass to the same world point leaves the composite inertia unchanged.
    const ModelSpec same =
        transfer_point_mass(m.spec(), "l_thigh", Vector3(0, 0, -0.04), "l_hip_roll_link", Vector3(0, 0, -0.04), 1.0);
    const RobotState s0 = neutral_state(m);
    const CentroidalInertia a = centroidal_inertia(m, s0);
    const CentroidalInertia b = centroidal_inertia(RobotModel{same}, s0);
    CHECK((a.I_G - b.I_G).norm() < 1e-12);
    CHECK((a.com - b.com).norm() < 1e-14);
  }

  TEST_CASE("bundled collocated variant equals the thigh-to-shin transfer") {
    const ModelSpec moved = transfer_point_mass(
        transfer_point_mass(testutil::biped().spec(), "l_thigh", Vector3(0, 0, -0.04), "l_shin", Vector3(0, 0, -0.03), 2.0),
        "r_thigh", Vector3(0, 0, -0.04), "r_shin", Vector3(0, 0, -0.03), 2.0);
    const ModelSpec& file = testutil::biped_collocated().spec();
    for (std::size_t i = 0; i < moved.links.size(); ++i) {
      CHECK(moved.links[i].mass == doctest::Approx(file.links[i].mass).epsilon(1e-12));
      CHECK((moved.links[i].com - file.links[i].com).norm() < 1e-12);
      CHECK((moved.links[i].inertia - file.links[i].inertia).norm() < 1e-12);
    }
  }
}
