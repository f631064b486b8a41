#include "biped/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace biped {

FullState FullState::identity() {
  FullState s;
  s.A.fill(Mat3::Identity());
  s.W.fill(Vec3::Zero());
  return s;
}

Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return s;
}

Mat3 euler_to_rotation(const Vec3& angles) {
  return (Eigen::AngleAxisd(angles(0), Vec3::UnitZ()) *
          Eigen::AngleAxisd(angles(1), Vec3::UnitY()) *
          Eigen::AngleAxisd(angles(2), Vec3::UnitX()))
      .toRotationMatrix();
}

Vec3 rotation_to_euler(const Mat3& R) {
  const double pitch = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
  const double yaw = std::atan2(R(1, 0), R(0, 0));
  const double roll = std::atan2(R(2, 1), R(2, 2));
  return {yaw, pitch, roll};
}

Mat3 rotation_rate(const Mat3& A, const Vec3& W) { return A * skew(W); }

Vec3 gyroscopic_torque(const Mat3& inertia, const Vec3& W) { return -W.cross(inertia * W); }

Mat3 exp_so3(const Vec3& rotation_vector) {
  const double angle = rotation_vector.norm();
  if (angle < 1e-12) return Mat3::Identity() + skew(rotation_vector);
  return Eigen::AngleAxisd(angle, rotation_vector / angle).toRotationMatrix();
}

Vec3 log_so3(const Mat3& R) {
  Eigen::AngleAxisd aa(R);
  return aa.angle() * aa.axis();
}

Mat3 project_to_rotation(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 U = svd.matrixU();
  const Mat3& V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0.0) U.col(2) *= -1.0;
  return U * V.transpose();
}

double orthogonality_residual(const Mat3& R) {
  return std::max((R.transpose() * R - Mat3::Identity()).norm(), std::abs(R.determinant() - 1.0));
}

ComPositions chain_positions(const RobotModel& model, const FullState& state) {
  ComPositions out;
  out.X[0] = state.A[0] * model.link(1).proximal_offset;
  for (int i = 1; i < kLinkCount; ++i) {
    out.X[i] = state.A[i] * model.link(i + 1).proximal_offset -
               state.A[i - 1] * model.link(i).distal_offset + out.X[i - 1];
  }
  return out;
}

std::array<Vec3, kLinkCount> com_velocities(const RobotModel& model, const FullState& state) {
  std::array<Vec3, kLinkCount> v;
  auto spin = [&](int i, const Vec3& r) -> Vec3 { return state.A[i] * state.W[i].cross(r); };
  v[0] = spin(0, model.link(1).proximal_offset);
  for (int i = 1; i < kLinkCount; ++i) {
    v[i] = spin(i, model.link(i + 1).proximal_offset) - spin(i - 1, model.link(i).distal_offset) +
           v[i - 1];
  }
  return v;
}

double kinetic_energy(const RobotModel& model, const FullState& state,
                      const std::array<Vec3, kLinkCount>& com_velocity) {
  double ke = 0.0;
  for (int i = 0; i < kLinkCount; ++i) {
    const LinkParams& l = model.link(i + 1);
    ke += 0.5 * state.W[i].dot(l.inertia * state.W[i]);
    ke += 0.5 * l.mass * com_velocity[i].squaredNorm();
  }
  return ke;
}

}  // namespace biped
