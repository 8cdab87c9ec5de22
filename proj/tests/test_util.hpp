#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "rcwbc/model.hpp"

namespace testutil {

using namespace rcwbc;

inline std::filesystem::path data_path(const std::string& rel) { return std::filesystem::path(RCWBC_DATA_DIR) / rel; }

inline const RobotModel& biped() {
  static const RobotModel m = load_model(data_path("models/biped_rcj.yaml"));
  return m;
}

inline const RobotModel& biped_collocated() {
  static const RobotModel m = load_model(data_path("models/biped_rcj_collocated.yaml"));
  return m;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  VectorX vector(int n, double lo, double hi) {
    VectorX v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }
  MatrixX matrix(int r, int c, double lo, double hi) {
    MatrixX m(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) m(i, j) = uniform(lo, hi);
    return m;
  }
  Eigen::Quaterniond quaternion() {
    Eigen::Vector4d q(normal(), normal(), normal(), normal());
    q.normalize();
    return Eigen::Quaterniond(q(0), q(1), q(2), q(3));
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

/// Random state; joints within limits; rolling pairs consistent when asked.
inline RobotState random_state(const RobotModel& model, Rng& rng, bool consistent = true, double vscale = 1.0) {
  RobotState s;
  s.q = VectorX::Zero(model.nq());
  s.v = VectorX::Zero(model.nv());
  s.q.head<3>() = rng.vector(3, -1.0, 1.0);
  const Eigen::Quaterniond quat = rng.quaternion();
  s.q(3) = quat.w();
  s.q(4) = quat.x();
  s.q(5) = quat.y();
  s.q(6) = quat.z();
  for (int i = 6; i < model.nv(); ++i) {
    const Interval lim = model.joint_at_v_index(i).position_limits;
    s.q(i + 1) = rng.uniform(lim.lower, lim.upper);
  }
  s.v = rng.vector(model.nv(), -vscale, vscale);
  if (consistent) {
    for (std::size_t p = 0; p < model.rolling_pair_indices().size(); ++p) {
      const auto [prox, dist] = model.rolling_pair_indices()[p];
      const double ratio = model.spec().rolling_pairs[p].ratio();
      s.q(prox + 1) = ratio * s.q(dist + 1);
      s.v(prox) = ratio * s.v(dist);
    }
  }
  return s;
}

inline Matrix3 diag_inertia(double a, double b, double c) { return Vector3(a, b, c).asDiagonal(); }

/// Floating base with a chain of revolute joints about y; link i hangs along -z.
/// lengths[i] is the distance from joint i to joint i+1, coms[i] the com depth.
inline ModelSpec planar_chain(const std::vector<double>& masses, const std::vector<double>& lengths,
                              const std::vector<double>& coms, const std::vector<double>& inertia_y) {
  ModelSpec s;
  s.name = "chain";
  s.height = 1.0;
  s.links.push_back({"base", 5.0, Vector3::Zero(), diag_inertia(0.1, 0.1, 0.1), "root"});
  JointSpec root;
  root.name = "root";
  root.kind = JointKind::kFloatingBase;
  s.joints.push_back(root);
  std::string parent = "base";
  for (std::size_t i = 0; i < masses.size(); ++i) {
    const std::string link = "link" + std::to_string(i + 1);
    const std::string joint = "joint" + std::to_string(i + 1);
    s.links.push_back({link, masses[i], Vector3(0, 0, -coms[i]), diag_inertia(inertia_y[i], inertia_y[i], 1e-3), joint});
    JointSpec j;
    j.name = joint;
    j.parent_link = parent;
    j.axis = Vector3::UnitY();
    j.origin.translation = Vector3(0, 0, i == 0 ? 0.0 : -lengths[i - 1]);
    s.joints.push_back(j);
    parent = link;
  }
  s.contact_frames.push_back({"tip", parent, Transform{Matrix3::Identity(), Vector3(0, 0, -lengths.back())}});
  return s;
}

inline ModelSpec single_body(double mass, const Vector3& com, const Matrix3& inertia) {
  ModelSpec s;
  s.name = "body";
  s.links.push_back({"body", mass, com, inertia, "root"});
  JointSpec root;
  root.name = "root";
  root.kind = JointKind::kFloatingBase;
  s.joints.push_back(root);
  return s;
}

}  // namespace testutil
