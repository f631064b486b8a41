#pragma once

#include <array>

#include "biped/model.hpp"
#include "biped/types.hpp"

namespace biped {

/// Link orientations (body -> inertial) and body-frame angular velocities.
struct FullState {
  std::array<Mat3, kLinkCount> A;
  std::array<Vec3, kLinkCount> W;

  static FullState identity();
};

/// Centre-of-mass positions in the inertial frame, stance contact at origin.
struct ComPositions {
  std::array<Vec3, kLinkCount> X;
};

/// S with S*v = w x v.
Mat3 skew(const Vec3& w);

/// Intrinsic Z-Y-X rotation: angles = (yaw about z, pitch about y, roll about x).
Mat3 euler_to_rotation(const Vec3& angles);

/// Inverse of euler_to_rotation for pitch in (-pi/2, pi/2).
Vec3 rotation_to_euler(const Mat3& R);

/// Time derivative of a body->inertial rotation with body-frame rate W.
Mat3 rotation_rate(const Mat3& A, const Vec3& W);

/// Gyroscopic torque -W x (I W) that sits on the right of I*dW/dt.
Vec3 gyroscopic_torque(const Mat3& inertia, const Vec3& W);

Mat3 exp_so3(const Vec3& rotation_vector);
Vec3 log_so3(const Mat3& R);

/// Nearest rotation matrix in the Frobenius sense (polar decomposition).
Mat3 project_to_rotation(const Mat3& M);

/// max(|R^T R - I|_F, |det R - 1|).
double orthogonality_residual(const Mat3& R);

/// Forward recursion X_1 = A_1 K_1, X_i = A_i K_i - A_{i-1} L_{i-1} + X_{i-1}.
ComPositions chain_positions(const RobotModel& model, const FullState& state);

/// First derivative of the chain recursion.
std::array<Vec3, kLinkCount> com_velocities(const RobotModel& model, const FullState& state);

/// 1/2 sum W^T I W + 1/2 sum M |dX|^2.
double kinetic_energy(const RobotModel& model, const FullState& state,
                      const std::array<Vec3, kLinkCount>& com_velocity);

}  // namespace biped
