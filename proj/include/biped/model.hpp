#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "biped/types.hpp"

namespace biped {

/// Inertial and geometric description of one link.
///
/// Offsets follow the chain recursion X_{i+1} = A_{i+1}K_{i+1} - A_i L_i + X_i:
/// the proximal joint sits at X_i - A_i K_i and the distal joint at
/// X_i - A_i L_i, both offsets expressed in the body frame.
struct LinkParams {
  double mass = 0.0;
  Mat3 inertia = Mat3::Zero();
  Vec3 proximal_offset = Vec3::Zero();
  Vec3 distal_offset = Vec3::Zero();
};

/// Single-axis joint: relative rotation allowed about `free_axis` only.
/// Both `connection` and `free_axis` live in the parent link frame.
struct JointConstraint {
  int joint_index = 0;
  Mat32 connection = Mat32::Zero();
  Vec3 free_axis = Vec3::Zero();
};

/// Sign with which a joint force enters a link's translation equation.
struct LinkSigns {
  int proximal = 0;
  int distal = 0;
  bool operator==(const LinkSigns&) const = default;
};

/// Sign pattern of the force tables. `links[i].proximal` is also the sign of
/// holonomic constraint row i+1 and of muscular torque column i+1;
/// `lambda[k]` is the sign of the k-th non-holonomic multiplier (joints
/// 2, 3, 6, 7).
struct ChainSigns {
  std::array<LinkSigns, kLinkCount> links{};
  std::array<int, kConstraintCount> lambda{};

  static ChainSigns tables();
  bool operator==(const ChainSigns&) const = default;
};

enum class JointKind { Ball, Hinge, Universal };

/// Kinematic layout of joint j (connecting link j-1, or the ground, to link j).
struct JointSpec {
  JointKind kind = JointKind::Ball;
  int dof = 3;
  int rate_offset = 0;        // first column in the reduced coordinates
  Vec3 axis = Vec3::Zero();   // hinge axis, or first universal axis
  Vec3 axis2 = Vec3::Zero();  // second universal axis
  int constraint_slot = -1;   // index into the non-holonomic multipliers
};

class ModelError : public std::runtime_error {
 public:
  ModelError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Immutable robot description. Links and joints are indexed 1..7.
class RobotModel {
 public:
  RobotModel(std::array<LinkParams, kLinkCount> links,
             std::vector<JointConstraint> constraints, Vec3 gravity,
             std::optional<int> pinned_base_axis = std::nullopt);

  const LinkParams& link(int i) const { return links_.at(i - 1); }
  const std::array<LinkParams, kLinkCount>& links() const { return links_; }
  const std::vector<JointConstraint>& constraints() const { return constraints_; }
  const JointSpec& joint(int j) const { return joints_.at(j - 1); }
  const Vec3& gravity() const { return gravity_; }
  const ChainSigns& chain_signs() const { return signs_; }
  std::optional<int> pinned_base_axis() const { return pinned_axis_; }

  /// Active degree-of-freedom count n.
  int dof() const { return dof_; }
  double total_mass() const;

  /// Constraint declared at joint j, or nullptr for a 3-DOF joint.
  const JointConstraint* constraint_at(int j) const;

  /// Same robot with links renumbered 1<->7, 2<->6, 3<->5, so the swing foot
  /// becomes the stance foot.
  RobotModel mirrored() const;

  /// Same geometry with every mass and inertia multiplied by `factor`.
  RobotModel scaled(double factor) const;

  /// Same robot with a different gravity vector.
  RobotModel with_gravity(const Vec3& g) const;

 private:
  std::array<LinkParams, kLinkCount> links_;
  std::vector<JointConstraint> constraints_;
  Vec3 gravity_;
  std::optional<int> pinned_axis_;
  ChainSigns signs_;
  std::array<JointSpec, kLinkCount> joints_{};
  int dof_ = 0;
};

/// Ankle and knee hinges: R = [e_x e_z], Q = e_y at joints 2, 3, 6, 7.
std::vector<JointConstraint> default_constraints();

/// Parses a model config (INI-style sections, SI units) and validates it.
RobotModel load_model(std::string_view config_text);
RobotModel load_model_file(const std::string& path);

/// Serializes with shortest round-trip number formatting.
std::string save_model(const RobotModel& model);

/// Documented 60 kg sample robot.
std::string sample_model_config();

/// Throws ModelError on the first violated invariant.
void validate_link(const LinkParams& link, int index);
void validate_constraint(const JointConstraint& c);

}  // namespace biped
