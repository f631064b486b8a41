#include "biped/contact.hpp"

#include <sstream>

namespace biped {

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::SingleSupport: return "SSP";
    case Phase::Impact: return "Impact";
    case Phase::DoubleSupport: return "DSP";
  }
  return "?";
}

Vec3 contact_point(const RobotModel& model, const FullState& state) {
  const ComPositions pos = chain_positions(model, state);
  return pos.X[6] - state.A[6] * model.link(7).distal_offset;
}

namespace {

// dE = G_E [W; dX] with G_E nonzero on link 7 only.
Eigen::Matrix<double, 3, Eigen::Dynamic> contact_selector(const RobotModel& model,
                                                          const FullState& state) {
  Eigen::Matrix<double, 3, Eigen::Dynamic> G = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, kFullDim);
  G.block<3, 3>(0, rotational_row(7)) = state.A[6] * skew(model.link(7).distal_offset);
  G.block<3, 3>(0, translational_row(7)) = Mat3::Identity();
  return G;
}

Eigen::LDLT<Mat3> contact_gram(const MatX& E_jac, const Eigen::LLT<MatX>& inertia,
                               const char* what, MatX* Jinv_Et) {
  *Jinv_Et = inertia.solve(E_jac.transpose());
  const Mat3 gram = E_jac * *Jinv_Et;
  Eigen::LDLT<Mat3> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !(reciprocal_condition(ldlt) * kSingularCondition >= 1.0)) {
    const double sigma = Eigen::JacobiSVD<Mat3>(gram).singularValues().minCoeff();
    std::ostringstream msg;
    msg << what << ": smallest singular value of the contact Gram matrix = " << sigma;
    throw ImpactDegeneracy(msg.str(), sigma);
  }
  return ldlt;
}

}  // namespace

MatX contact_jacobian(const RobotModel& model, const DynamicsPoint& point) {
  return contact_selector(model, point.state) * (point.reduced.P10 * point.reduced.P12);
}

Vec3 contact_bias(const RobotModel& model, const DynamicsPoint& point) {
  const ReducedModel& r = point.reduced;
  const Mat3& A7 = point.state.A[6];
  const Vec3& W7 = point.state.W[6];
  const Vec3 spin = A7 * skew(W7) * skew(model.link(7).distal_offset) * W7;
  return contact_selector(model, point.state) * (r.P10 * r.P13 + r.P11) + spin;
}

VecX contact_force_map(const RobotModel& model, const FullState& state, const Vec3& force) {
  return point_force_map(state, 7, -model.link(7).distal_offset, force);
}

ImpactResult impact_map(const ReducedModel& reduced, const MatX& E_jac, const VecX& phi_dot_minus) {
  Eigen::LLT<MatX> inertia(reduced.J);
  MatX Jinv_Et;
  const auto gram = contact_gram(E_jac, inertia, "impact degeneracy", &Jinv_Et);
  ImpactResult out;
  out.impulse = -gram.solve(E_jac * phi_dot_minus);
  out.phi_dot_plus = phi_dot_minus + Jinv_Et * out.impulse;
  return out;
}

Vec3 dsp_contact_force(const ReducedModel& reduced, const MatX& E_jac, const Vec3& bias,
                       const VecX& phi_dot, const VecX& tau) {
  (void)phi_dot;  // enters through bias
  Eigen::LLT<MatX> inertia(reduced.J);
  MatX Jinv_Et;
  const auto gram = contact_gram(E_jac, inertia, "singular contact Gram matrix", &Jinv_Et);
  const VecX free_accel_bias = inertia.solve(reduced.H + reduced.G - reduced.D * tau);
  return gram.solve(E_jac * free_accel_bias - bias);
}

std::optional<double> detect_touchdown(double height_prev, double height_curr) {
  if (height_prev < 0.0 || height_curr > 0.0) return std::nullopt;
  if (height_prev == 0.0) return 0.0;
  return height_prev / (height_prev - height_curr);
}

}  // namespace biped
