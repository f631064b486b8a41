#pragma once

#include <limits>
#include <optional>

#include "biped/assembly.hpp"
#include "biped/configuration.hpp"
#include "biped/errors.hpp"
#include "biped/model.hpp"

namespace biped {

/// Condition number above which P9 (or any Gram matrix) counts as singular.
inline constexpr double kSingularCondition = 1e12;

/// Reciprocal condition estimate of a factorization. Eigen's estimator can
/// report 1 for an exactly singular matrix, so a vanishing pivot counts as 0.
template <typename Factorization>
double reciprocal_condition(const Factorization& f, const VecX& pivots) {
  const VecX a = pivots.cwiseAbs();
  if (a.size() == 0 || !(a.minCoeff() > std::numeric_limits<double>::epsilon() * a.maxCoeff())) {
    return 0.0;
  }
  return f.rcond();
}

inline double reciprocal_condition(const Eigen::PartialPivLU<MatX>& lu) {
  return reciprocal_condition(lu, lu.matrixLU().diagonal());
}

template <typename Matrix>
double reciprocal_condition(const Eigen::LDLT<Matrix>& ldlt) {
  return reciprocal_condition(ldlt, ldlt.vectorD());
}

/// Holonomic-constraint elimination: P3^T = [P8 | P9] split into the
/// angular and translational columns; z1 = P10 dW + P11.
struct NullspaceLift {
  MatX P8;
  MatX P9;
  MatX P10;  // [I_21; -P9^{-1} P8]
  VecX P11;  // [0_21; P9^{-1} P7]
  double p9_condition = 0.0;
};

NullspaceLift lift_nullspace(const AssemblyMatrices& assembly);

/// Stacked body rates in terms of the reduced rates: W = P12 dPhi and
/// dW = P12 ddPhi + P13.
struct VelocityBasis {
  MatX P12;
  VecX P13;
};

VelocityBasis velocity_basis(const RobotModel& model, const Configuration& q, const VecX& phi_dot);

/// Maps reduced actuator torques tau (n) onto the joint torques T (21):
/// hinges push along Q_j, ball joints take all three parent-frame components.
MatX actuation_map(const RobotModel& model, const Configuration& q);

/// J(Phi) ddPhi + H(Phi, dPhi) + G(Phi) = D tau.
struct ReducedModel {
  int n = 0;
  MatX J;
  VecX H;          // Coriolis, centripetal and gyroscopic terms
  VecX G;          // gravity
  MatX D;          // n x n, acting on tau
  MatX input_map;  // P12^T P10^T P5, n x 21, acting on T
  MatX actuation;  // T = actuation * tau
  MatX P10;
  VecX P11;
  MatX P12;
  VecX P13;
  double d_condition = 0.0;
};

/// All intermediate products at one (Phi, dPhi).
struct DynamicsPoint {
  FullState state;
  AssemblyMatrices assembly;
  NullspaceLift lift;
  VelocityBasis basis;
  ReducedModel reduced;
};

DynamicsPoint evaluate(const RobotModel& model, const Configuration& q, const VecX& phi_dot);

ReducedModel reduce(const RobotModel& model, const Configuration& q, const VecX& phi_dot);

/// A pinned (universal) base is also held against turning about
/// n = a1 x R(a1, theta1) a2. Its ground reaction torque enters the dynamics
/// rows along `row` (42) and the differentiated constraint reads
/// row^T z1 = rhs.
struct BaseConstraint {
  VecX row;
  double rhs = 0.0;
};

/// Empty for a ball base.
std::optional<BaseConstraint> base_constraint(const RobotModel& model, const Configuration& q,
                                              const VecX& phi_dot);

struct ConstraintForces {
  VecX gamma;         // 21
  VecX lambda;        // 8
  double base = 0.0;  // pinned base only: reaction torque about n
};

/// Solves the Schur complement of the saddle-point system for the
/// multipliers; `external` (42, optional) is added to P2.
ConstraintForces constraint_forces(const AssemblyMatrices& assembly, const VecX& T,
                                   const VecX& external = VecX(),
                                   const BaseConstraint* base = nullptr);

ConstraintForces constraint_forces(const RobotModel& model, const Configuration& q,
                                   const VecX& phi_dot, const VecX& T);

/// ddPhi = J^{-1}(D tau - H - G + generalized_external).
VecX forward_dynamics(const ReducedModel& reduced, const VecX& tau,
                      const VecX& generalized_external = VecX());

VecX forward_dynamics(const RobotModel& model, const Configuration& q, const VecX& phi_dot,
                      const VecX& tau);

/// z1 = P10 (P12 ddPhi + P13) + P11.
VecX lift_accelerations(const ReducedModel& reduced, const VecX& phi_ddot);

/// Least-squares reduced rates reproducing the stacked body rates W (21).
VecX rates_from_body_rates(const RobotModel& model, const Configuration& q, const VecX& W);

/// Stacks W_1..W_7 into a 21-vector.
VecX stack_rates(const FullState& state);

}  // namespace biped
