#include "rcwbc/actuation.hpp"

#include <algorithm>

#include "rcwbc/errors.hpp"

namespace rcwbc {
namespace {

double sheave_ratio(const TransmissionSpec& spec) { return spec.r_fix / spec.r_rot; }

double icr_share(const RollingContactPair& pair) { return pair.r_proximal / (pair.r_proximal + pair.r_distal); }

}  // namespace

double hip_joint_to_motor(double tau_joint, const TransmissionSpec& spec) { return tau_joint / sheave_ratio(spec); }

double hip_motor_to_joint(double tau_motor, const TransmissionSpec& spec) { return tau_motor * sheave_ratio(spec); }

double hip_joint_to_motor_speed(double w_joint, const TransmissionSpec& spec) { return w_joint * sheave_ratio(spec); }

double gear_product(const TransmissionSpec& spec) {
  double p = 1.0;
  for (double s : spec.gear_stages) p *= s;
  return p;
}

double knee_distal_to_icr(double tau_distal, const RollingContactPair& pair) { return tau_distal * icr_share(pair); }

double knee_icr_speed(double w_distal, const RollingContactPair& pair) { return w_distal / icr_share(pair); }

double knee_joint_to_motor(double tau_distal, const RollingContactPair& pair, const TransmissionSpec& spec) {
  return knee_distal_to_icr(tau_distal, pair) / gear_product(spec);
}

double knee_motor_to_joint(double tau_motor, const RollingContactPair& pair, const TransmissionSpec& spec) {
  return tau_motor * gear_product(spec) / icr_share(pair);
}

double knee_distal_to_motor_speed(double w_distal, const RollingContactPair& pair, const TransmissionSpec& spec) {
  return knee_icr_speed(w_distal, pair) * gear_product(spec);
}

double motor_to_joint(double tau_motor, const TransmissionSpec& spec, const RollingContactPair* pair) {
  if (spec.kind == TransmissionKind::kHipSheave) return hip_motor_to_joint(tau_motor, spec);
  if (!pair) throw ValidationError("knee_rolling transmission on '" + spec.joint + "' needs its rolling pair");
  return knee_motor_to_joint(tau_motor, *pair, spec);
}

std::vector<MotorTorque> motor_torques(const RobotModel& model, const VectorX& tau_actuated) {
  const auto& act = model.actuated_v_indices();
  if (tau_actuated.size() != static_cast<Eigen::Index>(act.size()))
    throw DimensionMismatch("motor_torques: expected one torque per actuated joint");
  std::vector<MotorTorque> out;
  for (const TransmissionSpec& t : model.spec().transmissions) {
    const int v = model.joint_v_index(t.joint);
    const auto it = std::find(act.begin(), act.end(), v);
    const double tau = it == act.end() ? 0.0 : tau_actuated(it - act.begin());
    if (t.kind == TransmissionKind::kHipSheave) {
      out.push_back({t.joint, hip_joint_to_motor(tau, t)});
      continue;
    }
    const RollingContactPair* pair = nullptr;
    for (const RollingContactPair& p : model.spec().rolling_pairs)
      if (p.distal_joint == t.joint || p.proximal_joint == t.joint) pair = &p;
    if (!pair) throw ValidationError("knee_rolling transmission on '" + t.joint + "' is not on a rolling pair");
    out.push_back({t.joint, knee_joint_to_motor(tau, *pair, t)});
  }
  return out;
}

}  // namespace rcwbc
