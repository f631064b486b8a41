#include "biped/oracle.hpp"

#include <sstream>

namespace biped {

KktSolution solve_kkt(const AssemblyMatrices& assembly, const VecX& T, const VecX& external,
                      const BaseConstraint* base) {
  const int nh = kHolonomicDim + kNonholonomicDim;
  const int m = nh + (base ? 1 : 0);
  const int dim = kFullDim + m;

  MatX C(kFullDim, m);
  C.leftCols(kHolonomicDim) = assembly.P3;
  C.middleCols(kHolonomicDim, kNonholonomicDim) = assembly.P4;
  if (base) C.col(nh) = base->row;

  MatX K = MatX::Zero(dim, dim);
  K.topLeftCorner(kFullDim, kFullDim) = assembly.P1;
  K.topRightCorner(kFullDim, m) = -C;
  K.bottomLeftCorner(m, kFullDim) = C.transpose();

  VecX b(dim);
  b.head(kFullDim) = assembly.P2 + assembly.P5 * T;
  if (external.size() > 0) b.head(kFullDim) += external;
  b.segment(kFullDim, kHolonomicDim) = assembly.P7;
  b.segment(kFullDim + kHolonomicDim, kNonholonomicDim) = assembly.P6;
  if (base) b(dim - 1) = base->rhs;

  Eigen::PartialPivLU<MatX> lu(K);
  if (!(reciprocal_condition(lu) * kSingularCondition >= 1.0)) {
    const double sigma = Eigen::JacobiSVD<MatX>(K).singularValues().minCoeff();
    std::ostringstream msg;
    msg << "singular saddle-point system: smallest singular value = " << sigma;
    throw ConstraintDegeneracy(msg.str(), sigma);
  }
  VecX x = lu.solve(b);
  x += lu.solve(b - K * x);

  KktSolution s;
  s.z1 = x.head(kFullDim);
  s.gamma = x.segment(kFullDim, kHolonomicDim);
  s.lambda = x.segment(kFullDim + kHolonomicDim, kNonholonomicDim);
  if (base) s.base = x(dim - 1);

  const VecX r = b - K * x;
  const double scale = std::max(1.0, b.head(kFullDim).norm());
  s.dynamics_residual = r.head(kFullDim).norm() / scale;
  s.holonomic_residual = r.segment(kFullDim, kHolonomicDim).norm();
  s.nonholonomic_residual = r.tail(m - kHolonomicDim).norm();
  return s;
}

MatX fd_derivative(const std::function<VecX(const VecX&)>& f, const VecX& x, double h) {
  MatX out;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    VecX plus = x;
    VecX minus = x;
    plus(k) += h;
    minus(k) -= h;
    const VecX col = (f(plus) - f(minus)) / (2.0 * h);
    if (k == 0) out.resize(col.size(), x.size());
    out.col(k) = col;
  }
  return out;
}

double total_energy(const RobotModel& model, const FullState& state,
                    const std::array<Vec3, kLinkCount>& positions,
                    const std::array<Vec3, kLinkCount>& velocities) {
  double energy = kinetic_energy(model, state, velocities);
  for (int i = 0; i < kLinkCount; ++i) {
    energy -= model.link(i + 1).mass * model.gravity().dot(positions[i]);
  }
  return energy;
}

ConstraintJacobians constraint_jacobians(const RobotModel& model, const FullState& state) {
  const ChainSigns& signs = model.chain_signs();
  ConstraintJacobians jac{MatX::Zero(kHolonomicDim, kFullDim),
                          MatX::Zero(kNonholonomicDim, kFullDim)};

  // s_i (ddX_i + A_i KK_i dW_i - A_{i-1} LL_{i-1} dW_{i-1} - ddX_{i-1}) = P7_i
  for (int i = 1; i <= kLinkCount; ++i) {
    const double s = signs.links[i - 1].proximal;
    auto rows = jac.holonomic.middleRows<3>(3 * (i - 1));
    rows.block<3, 3>(0, kAngularDim + 3 * (i - 1)) = s * Mat3::Identity();
    rows.block<3, 3>(0, 3 * (i - 1)) = s * state.A[i - 1] * skew(model.link(i).proximal_offset);
    if (i > 1) {
      rows.block<3, 3>(0, kAngularDim + 3 * (i - 2)) = -s * Mat3::Identity();
      rows.block<3, 3>(0, 3 * (i - 2)) =
          -s * state.A[i - 2] * skew(model.link(i - 1).distal_offset);
    }
  }

  // s R_j^T (-dW_{j-1} + A_{j-1}^T A_j dW_j) = P6_j
  for (const JointConstraint& c : model.constraints()) {
    const int j = c.joint_index;
    const int slot = model.joint(j).constraint_slot;
    const double s = signs.lambda[slot];
    auto rows = jac.nonholonomic.middleRows<2>(2 * slot);
    rows.block<2, 3>(0, 3 * (j - 2)) = -s * c.connection.transpose();
    rows.block<2, 3>(0, 3 * (j - 1)) =
        s * c.connection.transpose() * state.A[j - 2].transpose() * state.A[j - 1];
  }
  return jac;
}

VecX holonomic_residual(const RobotModel& model, const FullState& state,
                        const std::array<Vec3, kLinkCount>& positions) {
  const ChainSigns& signs = model.chain_signs();
  VecX r(kHolonomicDim);
  for (int i = 1; i <= kLinkCount; ++i) {
    Vec3 block = positions[i - 1] - state.A[i - 1] * model.link(i).proximal_offset;
    if (i > 1) block += state.A[i - 2] * model.link(i - 1).distal_offset - positions[i - 2];
    r.segment<3>(3 * (i - 1)) = signs.links[i - 1].proximal * block;
  }
  return r;
}

VecX holonomic_rate_residual(const RobotModel& model, const FullState& state,
                             const std::array<Vec3, kLinkCount>& velocities) {
  const ChainSigns& signs = model.chain_signs();
  auto moving = [&](int i, const Vec3& r) -> Vec3 {
    return state.A[i - 1] * state.W[i - 1].cross(r);
  };
  VecX r(kHolonomicDim);
  for (int i = 1; i <= kLinkCount; ++i) {
    Vec3 block = velocities[i - 1] - moving(i, model.link(i).proximal_offset);
    if (i > 1) block += moving(i - 1, model.link(i - 1).distal_offset) - velocities[i - 2];
    r.segment<3>(3 * (i - 1)) = signs.links[i - 1].proximal * block;
  }
  return r;
}

VecX nonholonomic_residual(const RobotModel& model, const FullState& state) {
  const ChainSigns& signs = model.chain_signs();
  VecX r(kNonholonomicDim);
  for (const JointConstraint& c : model.constraints()) {
    const int j = c.joint_index;
    const int slot = model.joint(j).constraint_slot;
    const Vec3 relative =
        state.A[j - 2].transpose() * state.A[j - 1] * state.W[j - 1] - state.W[j - 2];
    r.segment<2>(2 * slot) = signs.lambda[slot] * c.connection.transpose() * relative;
  }
  return r;
}

VecX project_accelerations(const VelocityBasis& basis, const VecX& z1) {
  return basis.P12.colPivHouseholderQr().solve(z1.head(kAngularDim) - basis.P13);
}

}  // namespace biped
