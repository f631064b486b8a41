#pragma once

#include <array>
#include <functional>

#include "biped/assembly.hpp"
#include "biped/kinematics.hpp"
#include "biped/reduction.hpp"

namespace biped {

/// Joint solution of the unreduced saddle-point system
///   [P1  -P3 -P4] [z1]     [P2 + P5 T]
///   [P3^T  0   0] [G ]  =  [P7       ]
///   [P4^T  0   0] [L ]     [P6       ]
struct KktSolution {
  VecX z1;
  VecX gamma;
  VecX lambda;
  double base = 0.0;  // pinned base reaction, when a BaseConstraint is given
  double dynamics_residual = 0.0;      // relative to the right-hand-side scale
  double holonomic_residual = 0.0;
  double nonholonomic_residual = 0.0;
};

/// Dense LU with one step of iterative refinement. `external` (42) adds a
/// generalized force to the dynamics rows; `base` appends the pinned-base row.
KktSolution solve_kkt(const AssemblyMatrices& assembly, const VecX& T,
                      const VecX& external = VecX(), const BaseConstraint* base = nullptr);

/// Central differences, one column per coordinate.
MatX fd_derivative(const std::function<VecX(const VecX&)>& f, const VecX& x, double h);

/// Kinetic plus gravitational potential energy. `positions` are inertial
/// centre-of-mass positions, `velocities` their rates.
double total_energy(const RobotModel& model, const FullState& state,
                    const std::array<Vec3, kLinkCount>& positions,
                    const std::array<Vec3, kLinkCount>& velocities);

/// Constraint Jacobians written directly from the constraint equations,
/// independent of the force tables: rows of the twice-differentiated chain
/// constraints (21 x 42) and of the differentiated hinge constraints (8 x 42),
/// with the same row signs as the multipliers.
struct ConstraintJacobians {
  MatX holonomic;
  MatX nonholonomic;
};

ConstraintJacobians constraint_jacobians(const RobotModel& model, const FullState& state);

/// Signed chain residuals s_i (X_i - A_i K_i + A_{i-1} L_{i-1} - X_{i-1}).
VecX holonomic_residual(const RobotModel& model, const FullState& state,
                        const std::array<Vec3, kLinkCount>& positions);

/// Time derivative of holonomic_residual for body rates W and COM rates.
VecX holonomic_rate_residual(const RobotModel& model, const FullState& state,
                             const std::array<Vec3, kLinkCount>& velocities);

/// Signed hinge residuals s R_j^T (A_{j-1}^T A_j W_j - W_{j-1}).
VecX nonholonomic_residual(const RobotModel& model, const FullState& state);

/// Reduced accelerations from the angular part of a full z1, by least
/// squares on P12 ddPhi = dW - P13.
VecX project_accelerations(const VelocityBasis& basis, const VecX& z1);

}  // namespace biped
