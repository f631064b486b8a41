#include "biped/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "biped/format.hpp"

namespace biped {

namespace pt = boost::property_tree;

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

std::string format_numbers(const double* data, int count) {
  std::string out;
  for (int i = 0; i < count; ++i) {
    if (i) out += ' ';
    out += format_double(data[i]);
  }
  return out;
}

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) break;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    const char* first = text.data() + pos;
    const char* last = text.data() + end;
    if (*first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      throw std::invalid_argument("not a finite decimal number: '" +
                                  std::string(text.substr(pos, end - pos)) + "'");
    }
    values.push_back(v);
    pos = end;
  }
  return values;
}

// ---------------------------------------------------------------------------
// Sign tables
// ---------------------------------------------------------------------------

ChainSigns ChainSigns::tables() {
  ChainSigns s;
  // Translation table: bodies 1-3 (+G_i, -G_{i+1}), body 4 (+G_4, +G_5),
  // bodies 5-6 (-G_i, +G_{i+1}), body 7 (-G_7, no distal joint).
  s.links = {{{+1, -1}, {+1, -1}, {+1, -1}, {+1, +1}, {-1, +1}, {-1, +1}, {-1, 0}}};
  // Rotation table: L2, L3 enter as -R_j on the parent; L6, L7 as +R_j.
  s.lambda = {+1, +1, -1, -1};
  return s;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

void validate_link(const LinkParams& link, int index) {
  const std::string prefix = "link." + std::to_string(index);
  if (!(link.mass > 0.0) || !std::isfinite(link.mass)) {
    throw ModelError(prefix + ".mass", "mass must be positive, link " + std::to_string(index));
  }
  if (!link.inertia.allFinite()) {
    throw ModelError(prefix + ".inertia", "non-finite inertia, link " + std::to_string(index));
  }
  const double scale = std::max(link.inertia.norm(), 1e-300);
  if ((link.inertia - link.inertia.transpose()).norm() > 1e-12 * scale) {
    throw ModelError(prefix + ".inertia", "non-symmetric inertia, link " + std::to_string(index));
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(link.inertia, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw ModelError(prefix + ".inertia", "non-SPD inertia, link " + std::to_string(index));
  }
  if (!link.proximal_offset.allFinite()) {
    throw ModelError(prefix + ".K", "non-finite offset, link " + std::to_string(index));
  }
  if (!link.distal_offset.allFinite()) {
    throw ModelError(prefix + ".L", "non-finite offset, link " + std::to_string(index));
  }
  if (link.proximal_offset.norm() + link.distal_offset.norm() <= 0.0) {
    throw ModelError(prefix, "link " + std::to_string(index) + " has zero length");
  }
}

void validate_constraint(const JointConstraint& c) {
  const std::string prefix = "constraints.joint." + std::to_string(c.joint_index);
  Mat3 frame;
  frame << c.connection, c.free_axis;
  if (!frame.allFinite() ||
      (frame * frame.transpose() - Mat3::Identity()).norm() > 1e-12) {
    throw ModelError(prefix, "non-orthonormal R/Q at joint " + std::to_string(c.joint_index));
  }
}

// ---------------------------------------------------------------------------
// RobotModel
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<int, kConstraintCount> kConstraintJoints = {2, 3, 6, 7};

Vec3 unit_axis(int axis) { return Vec3::Unit(axis); }

}  // namespace

RobotModel::RobotModel(std::array<LinkParams, kLinkCount> links,
                       std::vector<JointConstraint> constraints, Vec3 gravity,
                       std::optional<int> pinned_base_axis)
    : links_(std::move(links)),
      constraints_(std::move(constraints)),
      gravity_(std::move(gravity)),
      pinned_axis_(pinned_base_axis),
      signs_(ChainSigns::tables()) {
  for (int i = 1; i <= kLinkCount; ++i) validate_link(link(i), i);
  if (!gravity_.allFinite()) throw ModelError("gravity", "non-finite gravity");

  std::sort(constraints_.begin(), constraints_.end(),
            [](const auto& a, const auto& b) { return a.joint_index < b.joint_index; });
  std::vector<int> joints;
  for (const auto& c : constraints_) joints.push_back(c.joint_index);
  if (joints != std::vector<int>(kConstraintJoints.begin(), kConstraintJoints.end())) {
    throw ModelError("constraints", "wrong constraint joint set: expected joints 2 3 6 7");
  }
  for (const auto& c : constraints_) validate_constraint(c);
  if (pinned_axis_ && (*pinned_axis_ < 0 || *pinned_axis_ > 2)) {
    throw ModelError("base.pinned_axis", "pinned axis must be x, y or z");
  }

  // The translation table must match the fixed pattern, and each distal sign
  // must be the reaction of the next link's proximal sign.
  if (!(signs_ == ChainSigns::tables())) throw ModelError("chain_signs", "sign table mismatch");
  for (int i = 0; i + 1 < kLinkCount; ++i) {
    if (signs_.links[i].distal != -signs_.links[i + 1].proximal) {
      throw ModelError("chain_signs", "distal sign of link " + std::to_string(i + 1) +
                                          " is not the reaction of link " + std::to_string(i + 2));
    }
  }

  int offset = 0;
  int slot = 0;
  for (int j = 1; j <= kLinkCount; ++j) {
    JointSpec& spec = joints_[j - 1];
    spec.rate_offset = offset;
    if (const JointConstraint* c = constraint_at(j)) {
      spec.kind = JointKind::Hinge;
      spec.dof = 1;
      spec.axis = c->free_axis;
      spec.constraint_slot = slot++;
    } else if (j == 1 && pinned_axis_) {
      spec.kind = JointKind::Universal;
      spec.dof = 2;
      spec.axis = unit_axis((*pinned_axis_ + 1) % 3);
      spec.axis2 = unit_axis((*pinned_axis_ + 2) % 3);
    } else {
      spec.kind = JointKind::Ball;
      spec.dof = 3;
    }
    offset += spec.dof;
  }
  dof_ = offset;
}

const JointConstraint* RobotModel::constraint_at(int j) const {
  for (const auto& c : constraints_) {
    if (c.joint_index == j) return &c;
  }
  return nullptr;
}

double RobotModel::total_mass() const {
  double m = 0.0;
  for (const auto& l : links_) m += l.mass;
  return m;
}

RobotModel RobotModel::mirrored() const {
  if (pinned_axis_) {
    throw ModelError("base.pinned_axis", "a pinned base cannot be mirrored onto the swing foot");
  }
  std::array<LinkParams, kLinkCount> links;
  for (int i = 1; i <= kLinkCount; ++i) {
    const LinkParams& src = link(kLinkCount + 1 - i);
    links[i - 1] = LinkParams{src.mass, src.inertia, src.distal_offset, src.proximal_offset};
  }
  // New joint j connects old links 9-j and 8-j, i.e. it is old joint 9-j.
  std::vector<JointConstraint> constraints;
  for (const auto& c : constraints_) {
    JointConstraint m = c;
    m.joint_index = kLinkCount + 2 - c.joint_index;
    constraints.push_back(m);
  }
  return RobotModel(links, constraints, gravity_);
}

RobotModel RobotModel::scaled(double factor) const {
  auto links = links_;
  for (auto& l : links) {
    l.mass *= factor;
    l.inertia *= factor;
  }
  return RobotModel(links, constraints_, gravity_, pinned_axis_);
}

RobotModel RobotModel::with_gravity(const Vec3& g) const {
  return RobotModel(links_, constraints_, g, pinned_axis_);
}

std::vector<JointConstraint> default_constraints() {
  Mat32 r;
  r << 1, 0,
       0, 0,
       0, 1;
  std::vector<JointConstraint> out;
  for (int j : kConstraintJoints) out.push_back(JointConstraint{j, r, Vec3::UnitY()});
  return out;
}

// ---------------------------------------------------------------------------
// Config text
// ---------------------------------------------------------------------------

namespace {

pt::ptree::path_type key_path(const std::string& key) { return pt::ptree::path_type(key, '/'); }

template <int N>
Eigen::Matrix<double, N, 1> read_vector(const pt::ptree& section, const std::string& key,
                                        const std::string& field) {
  auto node = section.get_optional<std::string>(key_path(key));
  if (!node) throw ModelError(field, "missing value");
  std::vector<double> v;
  try {
    v = parse_numbers(*node);
  } catch (const std::invalid_argument& e) {
    throw ModelError(field, e.what());
  }
  if (static_cast<int>(v.size()) != N) {
    throw ModelError(field, "expected " + std::to_string(N) + " numbers, got " +
                                std::to_string(v.size()));
  }
  return Eigen::Map<Eigen::Matrix<double, N, 1>>(v.data());
}

void reject_unknown(const pt::ptree& section, const std::string& name,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, child] : section) {
    if (!allowed.count(key)) {
      throw ModelError(name.empty() ? key : name + "." + key, "unknown key");
    }
  }
}

int parse_axis(const std::string& s) {
  if (s == "x") return 0;
  if (s == "y") return 1;
  if (s == "z") return 2;
  throw ModelError("base.pinned_axis", "expected x, y or z, got '" + s + "'");
}

}  // namespace

RobotModel load_model(std::string_view config_text) {
  pt::ptree root;
  try {
    std::istringstream in{std::string(config_text)};
    pt::ini_parser::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ModelError("", std::string("parse failure: ") + e.what());
  }

  std::set<std::string> top_allowed = {"gravity", "base", "constraints"};
  for (int i = 1; i <= kLinkCount; ++i) top_allowed.insert("link." + std::to_string(i));
  reject_unknown(root, "", top_allowed);

  std::array<LinkParams, kLinkCount> links;
  for (int i = 1; i <= kLinkCount; ++i) {
    const std::string name = "link." + std::to_string(i);
    auto section = root.get_child_optional(key_path(name));
    if (!section) throw ModelError(name, "missing link " + std::to_string(i));
    reject_unknown(*section, name, {"mass", "inertia", "K", "L"});
    LinkParams& l = links[i - 1];
    l.mass = read_vector<1>(*section, "mass", name + ".mass")(0);
    Eigen::Matrix<double, 9, 1> flat = read_vector<9>(*section, "inertia", name + ".inertia");
    l.inertia = Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(flat.data());
    l.proximal_offset = read_vector<3>(*section, "K", name + ".K");
    l.distal_offset = read_vector<3>(*section, "L", name + ".L");
    validate_link(l, i);
  }

  Vec3 gravity(0.0, 0.0, -9.81);
  if (root.get_optional<std::string>(key_path("gravity"))) {
    gravity = read_vector<3>(root, "gravity", "gravity");
  }

  std::optional<int> pinned;
  if (auto base = root.get_child_optional(key_path("base"))) {
    reject_unknown(*base, "base", {"pinned_axis"});
    if (auto axis = base->get_optional<std::string>(key_path("pinned_axis"))) {
      std::string a = *axis;
      a.erase(std::remove_if(a.begin(), a.end(), ::isspace), a.end());
      if (a != "none") pinned = parse_axis(a);
    }
  }

  std::vector<JointConstraint> constraints = default_constraints();
  if (auto section = root.get_child_optional(key_path("constraints"))) {
    std::set<std::string> allowed = {"joints"};
    for (int j = 1; j <= kLinkCount; ++j) {
      allowed.insert("joint." + std::to_string(j) + ".R");
      allowed.insert("joint." + std::to_string(j) + ".Q");
    }
    reject_unknown(*section, "constraints", allowed);
    if (auto joints = section->get_optional<std::string>(key_path("joints"))) {
      std::vector<double> listed;
      try {
        listed = parse_numbers(*joints);
      } catch (const std::invalid_argument& e) {
        throw ModelError("constraints.joints", e.what());
      }
      if (listed != std::vector<double>{2, 3, 6, 7}) {
        throw ModelError("constraints.joints",
                         "wrong constraint joint set: expected joints 2 3 6 7");
      }
    }
    for (int j = 1; j <= kLinkCount; ++j) {
      const std::string r_key = "joint." + std::to_string(j) + ".R";
      const std::string q_key = "joint." + std::to_string(j) + ".Q";
      const bool has_r = section->get_optional<std::string>(key_path(r_key)).has_value();
      const bool has_q = section->get_optional<std::string>(key_path(q_key)).has_value();
      if (!has_r && !has_q) continue;
      auto it = std::find_if(constraints.begin(), constraints.end(),
                             [j](const auto& c) { return c.joint_index == j; });
      if (it == constraints.end()) {
        throw ModelError("constraints." + (has_r ? r_key : q_key),
                         "wrong constraint joint set: joint " + std::to_string(j) +
                             " is not an ankle or knee");
      }
      if (has_r) {
        Eigen::Matrix<double, 6, 1> flat = read_vector<6>(*section, r_key, "constraints." + r_key);
        it->connection = Eigen::Map<Eigen::Matrix<double, 3, 2, Eigen::RowMajor>>(flat.data());
      }
      if (has_q) it->free_axis = read_vector<3>(*section, q_key, "constraints." + q_key);
      validate_constraint(*it);
    }
  }

  return RobotModel(links, constraints, gravity, pinned);
}

RobotModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open model file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_model(buffer.str());
}

std::string save_model(const RobotModel& model) {
  std::ostringstream out;
  out << "gravity = " << format_numbers(model.gravity()) << "\n";
  if (auto axis = model.pinned_base_axis()) {
    out << "\n[base]\npinned_axis = " << "xyz"[*axis] << "\n";
  }
  for (int i = 1; i <= kLinkCount; ++i) {
    const LinkParams& l = model.link(i);
    out << "\n[link." << i << "]\n";
    out << "mass = " << format_double(l.mass) << "\n";
    out << "inertia = " << format_numbers(l.inertia) << "\n";
    out << "K = " << format_numbers(l.proximal_offset.transpose()) << "\n";
    out << "L = " << format_numbers(l.distal_offset.transpose()) << "\n";
  }
  out << "\n[constraints]\njoints = 2 3 6 7\n";
  for (const auto& c : model.constraints()) {
    out << "joint." << c.joint_index << ".R = " << format_numbers(c.connection) << "\n";
    out << "joint." << c.joint_index << ".Q = " << format_numbers(c.free_axis.transpose())
        << "\n";
  }
  return out.str();
}

std::string sample_model_config() {
  // 60 kg, 1.60 m subject. Segment masses, lengths, centre-of-mass fractions
  // and radii of gyration from the Winter anthropometric table. Upright
  // posture with all frames aligned to the world: x forward, y to the left,
  // z up; knees and ankles flex about the body y axis.
  //   links: 1 right foot, 2 right shank, 3 right thigh, 4 pelvis/trunk,
  //          5 left thigh, 6 left shank, 7 left foot.
  return R"(# Seven-link biped sample, SI units.
gravity = 0 0 -9.81

[link.1]
mass = 0.87
inertia = 0.0030 0 0  0 0.0116 0  0 0 0.0125
K = 0.05 0 0.03
L = 0.05 0 -0.0324

[link.2]
mass = 2.79
inertia = 0.0394 0 0  0 0.0380 0  0 0 0.0048
K = 0 0 0.22317
L = 0 0 -0.17043

[link.3]
mass = 6.0
inertia = 0.0962 0 0  0 0.0930 0  0 0 0.0250
K = 0 0 0.22226
L = 0 0 -0.16974

[link.4]
mass = 40.68
inertia = 2.125 0 0  0 1.800 0  0 0 0.420
K = 0 0.1 0.2885
L = 0 -0.1 0.2885

[link.5]
mass = 6.0
inertia = 0.0962 0 0  0 0.0930 0  0 0 0.0250
K = 0 0 -0.16974
L = 0 0 0.22226

[link.6]
mass = 2.79
inertia = 0.0394 0 0  0 0.0380 0  0 0 0.0048
K = 0 0 -0.17043
L = 0 0 0.22317

[link.7]
mass = 0.87
inertia = 0.0030 0 0  0 0.0116 0  0 0 0.0125
K = 0.05 0 -0.0324
L = 0.05 0 0.03

[constraints]
joints = 2 3 6 7
joint.2.R = 1 0  0 0  0 1
joint.2.Q = 0 1 0
joint.3.R = 1 0  0 0  0 1
joint.3.Q = 0 1 0
joint.6.R = 1 0  0 0  0 1
joint.6.Q = 0 1 0
joint.7.R = 1 0  0 0  0 1
joint.7.Q = 0 1 0
)";
}

}  // namespace biped
