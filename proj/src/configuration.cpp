#include "biped/configuration.hpp"

#include <cmath>
#include <stdexcept>

namespace biped {

Configuration Configuration::upright(const RobotModel& model) {
  Configuration q;
  q.angles.fill(Vec3::Zero());
  q.rotation.fill(Mat3::Identity());
  (void)model;
  return q;
}

ConfigurationDelta ConfigurationDelta::zero() {
  ConfigurationDelta d;
  d.angles.fill(Vec3::Zero());
  d.rotation.fill(Mat3::Zero());
  return d;
}

ConfigurationDelta& ConfigurationDelta::operator+=(const ConfigurationDelta& other) {
  for (int j = 0; j < kLinkCount; ++j) {
    angles[j] += other.angles[j];
    rotation[j] += other.rotation[j];
  }
  return *this;
}

ConfigurationDelta operator*(double s, ConfigurationDelta d) {
  for (int j = 0; j < kLinkCount; ++j) {
    d.angles[j] *= s;
    d.rotation[j] *= s;
  }
  return d;
}

Mat3 joint_rotation(const JointSpec& joint, const Vec3& angles) {
  switch (joint.kind) {
    case JointKind::Hinge:
      return Eigen::AngleAxisd(angles(0), joint.axis).toRotationMatrix();
    case JointKind::Universal:
      return (Eigen::AngleAxisd(angles(0), joint.axis) * Eigen::AngleAxisd(angles(1), joint.axis2))
          .toRotationMatrix();
    case JointKind::Ball:
      break;
  }
  throw std::logic_error("ball joints carry no angles");
}

MatX joint_rate_map(const JointSpec& joint, const Vec3& angles) {
  MatX B(3, joint.dof);
  switch (joint.kind) {
    case JointKind::Hinge:
      B.col(0) = joint.axis;
      break;
    case JointKind::Universal:
      B.col(0) = joint.axis;
      B.col(1) = Eigen::AngleAxisd(angles(0), joint.axis) * joint.axis2;
      break;
    case JointKind::Ball:
      B = Mat3::Identity();
      break;
  }
  return B;
}

Vec3 joint_rate_map_derivative(const JointSpec& joint, const Vec3& angles, const VecX& rates) {
  if (joint.kind != JointKind::Universal) return Vec3::Zero();
  const Vec3 second = Eigen::AngleAxisd(angles(0), joint.axis) * joint.axis2;
  return rates(0) * rates(1) * joint.axis.cross(second);
}

std::array<Mat3, kLinkCount> link_orientations(const Configuration& q) {
  std::array<Mat3, kLinkCount> A;
  A[0] = q.rotation[0];
  for (int i = 1; i < kLinkCount; ++i) A[i] = A[i - 1] * q.rotation[i];
  return A;
}

FullState full_state(const RobotModel& model, const Configuration& q, const VecX& phi_dot) {
  FullState s;
  s.A = link_orientations(q);
  Vec3 parent_rate = Vec3::Zero();
  for (int j = 1; j <= kLinkCount; ++j) {
    const JointSpec& spec = model.joint(j);
    const VecX rates = phi_dot.segment(spec.rate_offset, spec.dof);
    const Vec3 relative = joint_rate_map(spec, q.angles[j - 1]) * rates;
    s.W[j - 1] = q.rotation[j - 1].transpose() * (parent_rate + relative);
    parent_rate = s.W[j - 1];
  }
  return s;
}

ConfigurationDelta configuration_rate(const RobotModel& model, const Configuration& q,
                                      const VecX& phi_dot) {
  ConfigurationDelta d = ConfigurationDelta::zero();
  for (int j = 1; j <= kLinkCount; ++j) {
    const JointSpec& spec = model.joint(j);
    const VecX rates = phi_dot.segment(spec.rate_offset, spec.dof);
    if (spec.kind == JointKind::Ball) {
      d.rotation[j - 1] = skew(rates) * q.rotation[j - 1];
    } else {
      d.angles[j - 1].head(spec.dof) = rates;
    }
  }
  return d;
}

Configuration displace(const RobotModel& model, const Configuration& q,
                       const ConfigurationDelta& dq, double h) {
  Configuration out = q;
  for (int j = 1; j <= kLinkCount; ++j) {
    const JointSpec& spec = model.joint(j);
    if (spec.kind == JointKind::Ball) {
      out.rotation[j - 1] += h * dq.rotation[j - 1];
    } else {
      out.angles[j - 1] += h * dq.angles[j - 1];
      out.rotation[j - 1] = joint_rotation(spec, out.angles[j - 1]);
    }
  }
  return out;
}

Configuration advance(const RobotModel& model, const Configuration& q, const VecX& delta) {
  Configuration out = q;
  for (int j = 1; j <= kLinkCount; ++j) {
    const JointSpec& spec = model.joint(j);
    const VecX d = delta.segment(spec.rate_offset, spec.dof);
    if (spec.kind == JointKind::Ball) {
      out.rotation[j - 1] = exp_so3(d) * q.rotation[j - 1];
    } else {
      out.angles[j - 1].head(spec.dof) += d;
      out.rotation[j - 1] = joint_rotation(spec, out.angles[j - 1]);
    }
  }
  return out;
}

VecX difference(const RobotModel& model, const Configuration& target, const Configuration& q) {
  VecX d(model.dof());
  for (int j = 1; j <= kLinkCount; ++j) {
    const JointSpec& spec = model.joint(j);
    if (spec.kind == JointKind::Ball) {
      d.segment<3>(spec.rate_offset) =
          log_so3(target.rotation[j - 1] * q.rotation[j - 1].transpose());
    } else {
      d.segment(spec.rate_offset, spec.dof) =
          (target.angles[j - 1] - q.angles[j - 1]).head(spec.dof);
    }
  }
  return d;
}

Configuration configuration_from_orientations(const RobotModel& model,
                                              const std::array<Mat3, kLinkCount>& A) {
  Configuration q = Configuration::upright(model);
  Mat3 parent = Mat3::Identity();
  for (int j = 1; j <= kLinkCount; ++j) {
    const JointSpec& spec = model.joint(j);
    const Mat3 relative = parent.transpose() * A[j - 1];
    switch (spec.kind) {
      case JointKind::Ball:
        q.rotation[j - 1] = relative;
        break;
      case JointKind::Hinge: {
        const Vec3 axial(relative(2, 1) - relative(1, 2), relative(0, 2) - relative(2, 0),
                         relative(1, 0) - relative(0, 1));
        const double s = 0.5 * spec.axis.dot(axial);
        const double c = 0.5 * (relative.trace() - 1.0);
        q.angles[j - 1] = Vec3(std::atan2(s, c), 0.0, 0.0);
        q.rotation[j - 1] = joint_rotation(spec, q.angles[j - 1]);
        break;
      }
      case JointKind::Universal:
        throw std::invalid_argument("cannot rebuild a universal base joint from orientations");
    }
    parent = A[j - 1];
  }
  return q;
}

double reorthonormalize(const RobotModel& model, Configuration& q, double tolerance) {
  double largest = 0.0;
  for (int j = 1; j <= kLinkCount; ++j) {
    if (model.joint(j).kind != JointKind::Ball) continue;
    Mat3& R = q.rotation[j - 1];
    if (orthogonality_residual(R) > tolerance) {
      const Mat3 projected = project_to_rotation(R);
      largest = std::max(largest, (projected - R).norm());
      R = projected;
    }
  }
  return largest;
}

VecX configuration_coordinates(const RobotModel& model, const Configuration& q) {
  VecX out(model.dof());
  for (int j = 1; j <= kLinkCount; ++j) {
    const JointSpec& spec = model.joint(j);
    if (spec.kind == JointKind::Ball) {
      out.segment<3>(spec.rate_offset) = log_so3(q.rotation[j - 1]);
    } else {
      out.segment(spec.rate_offset, spec.dof) = q.angles[j - 1].head(spec.dof);
    }
  }
  return out;
}

}  // namespace biped
