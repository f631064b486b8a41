#include "biped/assembly.hpp"

#include <ostream>
#include <tuple>

#include "biped/format.hpp"

namespace biped {

namespace {

// Torque on a link from an inertial force (sign * F) applied at body-frame
// offset -r from the centre of mass: (-r) x (A^T sign F).
Mat3 lever_torque(const Mat3& A, const Vec3& r, int sign) {
  return -static_cast<double>(sign) * skew(r) * A.transpose();
}

}  // namespace

AssemblyMatrices assemble(const RobotModel& model, const FullState& state) {
  const ChainSigns& signs = model.chain_signs();
  AssemblyMatrices m;
  m.P1 = MatX::Zero(kFullDim, kFullDim);
  m.P2_gyroscopic = VecX::Zero(kFullDim);
  m.P2_gravity = VecX::Zero(kFullDim);
  m.P3 = MatX::Zero(kFullDim, kHolonomicDim);
  m.P4 = MatX::Zero(kFullDim, kNonholonomicDim);
  m.P5 = MatX::Zero(kFullDim, kTorqueDim);

  for (int i = 1; i <= kLinkCount; ++i) {
    const LinkParams& link = model.link(i);
    const Mat3& A = state.A[i - 1];
    const int rot = rotational_row(i);
    const int tr = translational_row(i);

    m.P1.block<3, 3>(rot, rot) = link.inertia;
    m.P1.block<3, 3>(tr, tr) = link.mass * Mat3::Identity();
    m.P2_gyroscopic.segment<3>(rot) = gyroscopic_torque(link.inertia, state.W[i - 1]);
    m.P2_gravity.segment<3>(tr) = link.mass * model.gravity();

    // Holonomic force at the proximal joint (Gamma_i) ...
    const int p = signs.links[i - 1].proximal;
    m.P3.block<3, 3>(tr, 3 * (i - 1)) = p * Mat3::Identity();
    m.P3.block<3, 3>(rot, 3 * (i - 1)) = lever_torque(A, link.proximal_offset, p);
    // ... and its reaction at the distal joint (Gamma_{i+1}).
    if (i < kLinkCount) {
      const int d = signs.links[i - 1].distal;
      m.P3.block<3, 3>(tr, 3 * i) = d * Mat3::Identity();
      m.P3.block<3, 3>(rot, 3 * i) = lever_torque(A, link.distal_offset, d);
    }

    // Muscular torque T_i, expressed in the parent frame, and its reaction
    // -T_{i+1} on the distal side.
    const Mat3 parent = i == 1 ? Mat3::Identity() : state.A[i - 2];
    m.P5.block<3, 3>(rot, 3 * (i - 1)) = p * A.transpose() * parent;
    if (i < kLinkCount) {
      m.P5.block<3, 3>(rot, 3 * i) = static_cast<double>(signs.links[i - 1].distal) * Mat3::Identity();
    }
  }

  for (const JointConstraint& c : model.constraints()) {
    const int j = c.joint_index;
    const int slot = model.joint(j).constraint_slot;
    const double s = signs.lambda[slot];
    const Mat3& child = state.A[j - 1];
    const Mat3& parent = state.A[j - 2];
    m.P4.block<3, 2>(rotational_row(j), 2 * slot) = s * child.transpose() * parent * c.connection;
    m.P4.block<3, 2>(rotational_row(j - 1), 2 * slot) = -s * c.connection;
  }

  m.P2 = m.P2_gyroscopic + m.P2_gravity;
  std::tie(m.P6, m.P7) = constraint_rhs(model, state);
  return m;
}

std::pair<VecX, VecX> constraint_rhs(const RobotModel& model, const FullState& state) {
  const ChainSigns& signs = model.chain_signs();
  VecX P6 = VecX::Zero(kNonholonomicDim);
  VecX P7 = VecX::Zero(kHolonomicDim);

  for (const JointConstraint& c : model.constraints()) {
    const int j = c.joint_index;
    const int slot = model.joint(j).constraint_slot;
    const Vec3& w_parent = state.W[j - 2];
    const Mat3 relative = state.A[j - 2].transpose() * state.A[j - 1];
    P6.segment<2>(2 * slot) = signs.lambda[slot] * c.connection.transpose() * skew(w_parent) *
                              relative * state.W[j - 1];
  }

  auto centripetal = [&](int i, const Vec3& r) -> Vec3 {
    const Mat3 ww = skew(state.W[i - 1]);
    return state.A[i - 1] * ww * ww * r;
  };
  for (int i = 1; i <= kLinkCount; ++i) {
    Vec3 block = centripetal(i, model.link(i).proximal_offset);
    if (i > 1) block -= centripetal(i - 1, model.link(i - 1).distal_offset);
    P7.segment<3>(3 * (i - 1)) = signs.links[i - 1].proximal * block;
  }
  return {P6, P7};
}

MatX solve_mass(const MatX& P1, const MatX& rhs) {
  MatX out(rhs.rows(), rhs.cols());
  for (int b = 0; b < kFullDim / 3; ++b) {
    const Mat3 block = P1.block<3, 3>(3 * b, 3 * b);
    out.middleRows<3>(3 * b) = block.llt().solve(rhs.middleRows<3>(3 * b));
  }
  return out;
}

VecX point_force_map(const FullState& state, int link, const Vec3& point, const Vec3& force) {
  VecX f = VecX::Zero(kFullDim);
  f.segment<3>(rotational_row(link)) = point.cross(state.A[link - 1].transpose() * force);
  f.segment<3>(translational_row(link)) = force;
  return f;
}

void write_matrix(std::ostream& out, const std::string& name, const MatX& m) {
  out << "# " << name << ' ' << m.rows() << 'x' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

}  // namespace biped
