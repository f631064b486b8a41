#include "biped/reduction.hpp"

#include <sstream>

namespace biped {

namespace {

double smallest_singular_value(const MatX& m) {
  Eigen::JacobiSVD<MatX> svd(m);
  return svd.singularValues().minCoeff();
}

}  // namespace

NullspaceLift lift_nullspace(const AssemblyMatrices& assembly) {
  NullspaceLift lift;
  const MatX P3t = assembly.P3.transpose();
  lift.P8 = P3t.leftCols(kAngularDim);
  lift.P9 = P3t.rightCols(kAngularDim);

  Eigen::PartialPivLU<MatX> lu(lift.P9);
  const double rcond = reciprocal_condition(lu);
  lift.p9_condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(lift.p9_condition <= kSingularCondition)) {
    const double sigma = smallest_singular_value(lift.P9);
    std::ostringstream msg;
    msg << "kinematic singularity at state: smallest singular value of P9 = " << sigma;
    throw KinematicSingularity(msg.str(), sigma);
  }

  lift.P10.resize(kFullDim, kAngularDim);
  lift.P10.topRows(kAngularDim).setIdentity();
  lift.P10.bottomRows(kAngularDim) = -lu.solve(lift.P8);
  lift.P11 = VecX::Zero(kFullDim);
  lift.P11.tail(kAngularDim) = lu.solve(assembly.P7);
  return lift;
}

VelocityBasis velocity_basis(const RobotModel& model, const Configuration& q, const VecX& phi_dot) {
  const int n = model.dof();
  VelocityBasis basis{MatX::Zero(kAngularDim, n), VecX::Zero(kAngularDim)};

  MatX parent_rows = MatX::Zero(3, n);
  Vec3 parent_bias = Vec3::Zero();
  Vec3 parent_rate = Vec3::Zero();
  for (int j = 1; j <= kLinkCount; ++j) {
    const JointSpec& spec = model.joint(j);
    const Mat3 Et = q.rotation[j - 1].transpose();
    const VecX rates = phi_dot.segment(spec.rate_offset, spec.dof);
    const MatX B = joint_rate_map(spec, q.angles[j - 1]);
    const Vec3 relative = B * rates;

    MatX rows = parent_rows;
    rows.middleCols(spec.rate_offset, spec.dof) += B;
    rows = Et * rows;
    const Vec3 bias = Et * (parent_bias + parent_rate.cross(relative) +
                            joint_rate_map_derivative(spec, q.angles[j - 1], rates));

    basis.P12.middleRows<3>(3 * (j - 1)) = rows;
    basis.P13.segment<3>(3 * (j - 1)) = bias;

    parent_rows = std::move(rows);
    parent_bias = bias;
    parent_rate = Et * (parent_rate + relative);
  }
  return basis;
}

MatX actuation_map(const RobotModel& model, const Configuration& q) {
  MatX S = MatX::Zero(kTorqueDim, model.dof());
  for (int j = 1; j <= kLinkCount; ++j) {
    const JointSpec& spec = model.joint(j);
    S.block(3 * (j - 1), spec.rate_offset, 3, spec.dof) = joint_rate_map(spec, q.angles[j - 1]);
  }
  return S;
}

DynamicsPoint evaluate(const RobotModel& model, const Configuration& q, const VecX& phi_dot) {
  DynamicsPoint p;
  p.state = full_state(model, q, phi_dot);
  p.assembly = assemble(model, p.state);
  p.lift = lift_nullspace(p.assembly);
  p.basis = velocity_basis(model, q, phi_dot);

  ReducedModel& r = p.reduced;
  const AssemblyMatrices& a = p.assembly;
  r.n = model.dof();
  r.P10 = p.lift.P10;
  r.P11 = p.lift.P11;
  r.P12 = p.basis.P12;
  r.P13 = p.basis.P13;

  const MatX lift = r.P10 * r.P12;          // 42 x n
  const MatX project = lift.transpose();    // P12^T P10^T
  r.J = project * (a.P1 * lift);
  r.H = project * (a.P1 * (r.P11 + r.P10 * r.P13) - a.P2_gyroscopic);
  r.G = -project * a.P2_gravity;
  r.input_map = project * a.P5;
  r.actuation = actuation_map(model, q);
  r.D = r.input_map * r.actuation;

  Eigen::JacobiSVD<MatX> svd(r.D);
  const auto& sv = svd.singularValues();
  r.d_condition = sv.minCoeff() > 0.0 ? sv.maxCoeff() / sv.minCoeff()
                                      : std::numeric_limits<double>::infinity();
  return p;
}

ReducedModel reduce(const RobotModel& model, const Configuration& q, const VecX& phi_dot) {
  return evaluate(model, q, phi_dot).reduced;
}

std::optional<BaseConstraint> base_constraint(const RobotModel& model, const Configuration& q,
                                              const VecX& phi_dot) {
  const JointSpec& spec = model.joint(1);
  if (spec.kind != JointKind::Universal) return std::nullopt;
  const Vec3 second = Eigen::AngleAxisd(q.angles[0](0), spec.axis) * spec.axis2;
  const Vec3 n = spec.axis.cross(second);
  BaseConstraint c;
  c.row = VecX::Zero(kFullDim);
  c.row.segment<3>(rotational_row(1)) = q.rotation[0].transpose() * n;
  const int k = spec.rate_offset;
  c.rhs = phi_dot.size() ? phi_dot(k) * phi_dot(k + 1) : 0.0;
  return c;
}

ConstraintForces constraint_forces(const AssemblyMatrices& assembly, const VecX& T,
                                   const VecX& external, const BaseConstraint* base) {
  const int m = kHolonomicDim + kNonholonomicDim + (base ? 1 : 0);
  MatX C(kFullDim, m);
  C.leftCols(kHolonomicDim) = assembly.P3;
  C.middleCols(kHolonomicDim, kNonholonomicDim) = assembly.P4;
  VecX rhs(m);
  rhs << assembly.P7, assembly.P6, VecX::Zero(m - kHolonomicDim - kNonholonomicDim);
  if (base) {
    C.col(m - 1) = base->row;
    rhs(m - 1) = base->rhs;
  }
  VecX bias = assembly.P2 + assembly.P5 * T;
  if (external.size() > 0) bias += external;

  const MatX Minv_C = solve_mass(assembly.P1, C);
  const MatX gram = C.transpose() * Minv_C;
  rhs -= C.transpose() * solve_mass(assembly.P1, bias);

  Eigen::LDLT<MatX> ldlt(gram);
  const double rcond = reciprocal_condition(ldlt);
  if (ldlt.info() != Eigen::Success || !(rcond * kSingularCondition >= 1.0)) {
    const double sigma = smallest_singular_value(gram);
    std::ostringstream msg;
    msg << "constraint degeneracy: smallest singular value of the constraint Gram matrix = "
        << sigma;
    throw ConstraintDegeneracy(msg.str(), sigma);
  }
  const VecX multipliers = ldlt.solve(rhs);
  ConstraintForces f{multipliers.head(kHolonomicDim),
                     multipliers.segment(kHolonomicDim, kNonholonomicDim)};
  if (base) f.base = multipliers(m - 1);
  return f;
}

ConstraintForces constraint_forces(const RobotModel& model, const Configuration& q,
                                   const VecX& phi_dot, const VecX& T) {
  const auto base = base_constraint(model, q, phi_dot);
  return constraint_forces(assemble(model, full_state(model, q, phi_dot)), T, VecX(),
                           base ? &*base : nullptr);
}

VecX forward_dynamics(const ReducedModel& reduced, const VecX& tau,
                      const VecX& generalized_external) {
  VecX rhs = reduced.D * tau - reduced.H - reduced.G;
  if (generalized_external.size() > 0) rhs += generalized_external;
  Eigen::LLT<MatX> llt(reduced.J);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("internal fault: reduced inertia matrix is not positive definite");
  }
  return llt.solve(rhs);
}

VecX forward_dynamics(const RobotModel& model, const Configuration& q, const VecX& phi_dot,
                      const VecX& tau) {
  return forward_dynamics(reduce(model, q, phi_dot), tau);
}

VecX lift_accelerations(const ReducedModel& reduced, const VecX& phi_ddot) {
  return reduced.P10 * (reduced.P12 * phi_ddot + reduced.P13) + reduced.P11;
}

VecX rates_from_body_rates(const RobotModel& model, const Configuration& q, const VecX& W) {
  const VelocityBasis basis = velocity_basis(model, q, VecX::Zero(model.dof()));
  return basis.P12.colPivHouseholderQr().solve(W);
}

VecX stack_rates(const FullState& state) {
  VecX w(kAngularDim);
  for (int i = 0; i < kLinkCount; ++i) w.segment<3>(3 * i) = state.W[i];
  return w;
}

}  // namespace biped
