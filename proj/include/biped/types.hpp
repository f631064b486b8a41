#pragma once

#include <Eigen/Dense>

namespace biped {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr int kLinkCount = 7;
inline constexpr int kConstraintCount = 4;

// Dimensions of the unreduced system: 7 bodies x (rotation + translation).
inline constexpr int kFullDim = 42;
inline constexpr int kAngularDim = 21;
inline constexpr int kHolonomicDim = 21;
inline constexpr int kNonholonomicDim = 8;
inline constexpr int kTorqueDim = 21;

}  // namespace biped
