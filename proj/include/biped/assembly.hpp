#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include "biped/kinematics.hpp"
#include "biped/model.hpp"

namespace biped {

/// Full linear system P1 z1 = P2 + P3 Gamma + P4 Lambda + P5 T at one state,
/// plus the differentiated-constraint right-hand sides P4^T z1 = P6 and
/// P3^T z1 = P7.
///
/// Row order: 21 rotational rows (bodies 1..7), then 21 translational rows.
/// z1 = [dW_1..dW_7; ddX_1..ddX_7]. Gamma = [G_1..G_7] (inertial frame),
/// Lambda = [L_2; L_3; L_6; L_7], T = [T_1..T_7] with T_1 in the inertial
/// frame and T_j in the frame of link j-1.
struct AssemblyMatrices {
  MatX P1;
  VecX P2;
  VecX P2_gyroscopic;  // f_i in the rotational rows
  VecX P2_gravity;     // M_i g in the translational rows
  MatX P3;
  MatX P4;
  MatX P5;
  VecX P6;
  VecX P7;
};

inline constexpr int rotational_row(int link) { return 3 * (link - 1); }
inline constexpr int translational_row(int link) { return kAngularDim + 3 * (link - 1); }

AssemblyMatrices assemble(const RobotModel& model, const FullState& state);

/// (P6, P7): velocity-quadratic terms of the differentiated constraints.
std::pair<VecX, VecX> constraint_rhs(const RobotModel& model, const FullState& state);

/// P1^{-1} * rhs using the 3x3 diagonal blocks of P1.
MatX solve_mass(const MatX& P1, const MatX& rhs);

/// Generalized force (42-vector) of an inertial-frame force applied to link
/// `link` at the body-frame point `point` (relative to its centre of mass).
VecX point_force_map(const FullState& state, int link, const Vec3& point, const Vec3& force);

/// Dense grid dump: "# name rows x cols" then one line per row.
void write_matrix(std::ostream& out, const std::string& name, const MatX& m);

}  // namespace biped
