#pragma once

#include <optional>
#include <string_view>

#include "biped/reduction.hpp"

namespace biped {

enum class Phase { SingleSupport, Impact, DoubleSupport };

std::string_view phase_name(Phase phase);

struct ContactState {
  Vec3 E = Vec3::Zero();  // swing-foot contact point, inertial frame
  MatX E_jac;             // dE/dPhi, 3 x n
  Phase phase = Phase::SingleSupport;
};

/// Swing-foot contact point: the distal end of link 7, X_7 - A_7 L_7.
Vec3 contact_point(const RobotModel& model, const FullState& state);

/// Analytic dE/dPhi through the velocity lift (dE = E_jac dPhi).
MatX contact_jacobian(const RobotModel& model, const DynamicsPoint& point);

/// dE_jac/dt * dPhi, so that ddE = E_jac ddPhi + contact_bias.
Vec3 contact_bias(const RobotModel& model, const DynamicsPoint& point);

/// Full-system generalized force of a ground force on the swing foot.
VecX contact_force_map(const RobotModel& model, const FullState& state, const Vec3& force);

struct ImpactResult {
  VecX phi_dot_plus;
  Vec3 impulse = Vec3::Zero();
};

/// Plastic impact: post-impact contact velocity E_jac dPhi+ = 0.
ImpactResult impact_map(const ReducedModel& reduced, const MatX& E_jac, const VecX& phi_dot_minus);

/// Ground reaction that keeps the swing foot from accelerating (ddE = 0).
Vec3 dsp_contact_force(const ReducedModel& reduced, const MatX& E_jac, const Vec3& bias,
                       const VecX& phi_dot, const VecX& tau);

/// Fraction in [0, 1] at which the contact height crosses zero downward.
/// A sample that starts exactly on the ground counts as touching at 0.
std::optional<double> detect_touchdown(double height_prev, double height_curr);

}  // namespace biped
