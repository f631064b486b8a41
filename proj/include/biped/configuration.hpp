#pragma once

#include <array>

#include "biped/kinematics.hpp"
#include "biped/model.hpp"

namespace biped {

/// Reduced configuration Phi. Every joint stores its relative rotation
/// (parent frame -> child frame, the ground for joint 1). Hinge and universal
/// joints also carry their angles, from which the rotation is derived; ball
/// joints are integrated directly on the rotation matrix and their rates are
/// parent-frame angular velocities.
struct Configuration {
  std::array<Vec3, kLinkCount> angles;
  std::array<Mat3, kLinkCount> rotation;

  /// All relative rotations identity: the sample robot stands upright.
  static Configuration upright(const RobotModel& model);
};

/// Linear combination space used by the integrators: q + h*dq.
struct ConfigurationDelta {
  std::array<Vec3, kLinkCount> angles;
  std::array<Mat3, kLinkCount> rotation;

  static ConfigurationDelta zero();
  ConfigurationDelta& operator+=(const ConfigurationDelta& other);
  friend ConfigurationDelta operator*(double s, ConfigurationDelta d);
  friend ConfigurationDelta operator+(ConfigurationDelta a, const ConfigurationDelta& b) {
    return a += b;
  }
};

/// Relative rotation of an angle-parameterised joint.
Mat3 joint_rotation(const JointSpec& joint, const Vec3& angles);

/// Parent-frame relative angular velocity per unit rate (3 x dof).
MatX joint_rate_map(const JointSpec& joint, const Vec3& angles);

/// d(B)/dt * rates for the joint's own rates.
Vec3 joint_rate_map_derivative(const JointSpec& joint, const Vec3& angles, const VecX& rates);

/// Link orientations A_1..A_7 by composing relative rotations.
std::array<Mat3, kLinkCount> link_orientations(const Configuration& q);

/// Orientations plus body rates W_j = E_j^T (W_{j-1} + B_j phi_dot_j).
FullState full_state(const RobotModel& model, const Configuration& q, const VecX& phi_dot);

/// Time derivative of the configuration along rates phi_dot.
ConfigurationDelta configuration_rate(const RobotModel& model, const Configuration& q,
                                      const VecX& phi_dot);

/// q + h*dq in the embedding space; angle joints re-derive their rotation.
Configuration displace(const RobotModel& model, const Configuration& q,
                       const ConfigurationDelta& dq, double h);

/// Tangent retraction: hinge angles add, ball joints left-multiply exp(delta).
Configuration advance(const RobotModel& model, const Configuration& q, const VecX& delta);

/// Tangent vector d with advance(q, d) == target (ball joints via log map).
VecX difference(const RobotModel& model, const Configuration& target, const Configuration& q);

/// Rebuild a configuration from link orientations (ball and hinge joints).
Configuration configuration_from_orientations(const RobotModel& model,
                                              const std::array<Mat3, kLinkCount>& A);

/// Polar-projects ball rotations whose residual exceeds `tolerance`;
/// returns the largest Frobenius correction applied.
double reorthonormalize(const RobotModel& model, Configuration& q, double tolerance);

/// Flattened tangent-space coordinates for reporting: angles for angle
/// joints, rotation vectors for ball joints.
VecX configuration_coordinates(const RobotModel& model, const Configuration& q);

}  // namespace biped
