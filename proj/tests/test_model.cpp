#include <gmock/gmock.h>

#include "biped/format.hpp"
#include "support.hpp"

using namespace biped;
using biped::test::sample_robot;
using biped::test::with_value;
using ::testing::HasSubstr;

namespace {

std::string model_error(const std::string& text) {
  try {
    load_model(text);
  } catch (const ModelError& e) {
    return e.what();
  }
  return "";
}

std::string model_field(const std::string& text) {
  try {
    load_model(text);
  } catch (const ModelError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Model, SampleLoadsWithThirteenDof) {
  const RobotModel& m = sample_robot();
  EXPECT_EQ(m.dof(), 13);
  EXPECT_NEAR(m.total_mass(), 60.0, 1e-12);
  EXPECT_EQ(m.gravity(), Vec3(0, 0, -9.81));
}

TEST(Model, SampleFileMatchesBuiltInSample) {
  EXPECT_EQ(biped::test::read_file(std::string(BIPED_CONFIG_DIR) + "/robot.ini"),
            sample_model_config());
}

TEST(Model, AnkleConnectionMatricesAreAccepted) {
  // R2 = [[1,0],[0,0],[0,1]], Q2 = [0,1,0].
  const std::string text = sample_model_config();
  const RobotModel m = load_model(text);
  const JointConstraint* c = m.constraint_at(2);
  ASSERT_NE(c, nullptr);
  Mat32 R;
  R << 1, 0, 0, 0, 0, 1;
  EXPECT_EQ(c->connection, R);
  EXPECT_EQ(c->free_axis, Vec3(0, 1, 0));
}

TEST(Model, DefaultConstraints) {
  const auto cs = default_constraints();
  ASSERT_EQ(cs.size(), 4u);
  const int joints[] = {2, 3, 6, 7};
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const auto& c = cs[k];
    EXPECT_EQ(c.joint_index, joints[k]);
    EXPECT_EQ(c.connection.col(0), Vec3::UnitX());
    EXPECT_EQ(c.connection.col(1), Vec3::UnitZ());
    EXPECT_EQ(c.free_axis, Vec3::UnitY());
    EXPECT_EQ(c.connection.transpose() * c.free_axis, Eigen::Vector2d::Zero());
    Mat3 RQ;
    RQ << c.connection, c.free_axis;
    EXPECT_NEAR((RQ * RQ.transpose() - Mat3::Identity()).norm(), 0.0, 1e-14);
    // Columns e_x, e_z, e_y: a permutation of the identity.
    EXPECT_EQ(RQ.cwiseAbs().colwise().sum(), Eigen::RowVector3d::Ones());
    EXPECT_EQ(RQ.cwiseAbs().rowwise().sum(), Vec3::Ones());
  }
}

TEST(Model, TranslationSignTable) {
  // Bodies 1-3: +G_i, -G_{i+1}; body 4: +G_4, +G_5; bodies 5-7: -G_i, +G_{i+1}.
  const ChainSigns s = ChainSigns::tables();
  const int proximal[] = {+1, +1, +1, +1, -1, -1, -1};
  const int distal[] = {-1, -1, -1, +1, +1, +1, 0};
  for (int i = 0; i < kLinkCount; ++i) {
    EXPECT_EQ(s.links[i].proximal, proximal[i]) << "body " << i + 1;
    EXPECT_EQ(s.links[i].distal, distal[i]) << "body " << i + 1;
  }
  EXPECT_EQ(sample_robot().chain_signs(), s);
}

TEST(Model, SaveLoadRoundTripIsExact) {
  const RobotModel& a = sample_robot();
  const std::string text = save_model(a);
  const RobotModel b = load_model(text);
  EXPECT_EQ(save_model(b), text);
  for (int i = 1; i <= kLinkCount; ++i) {
    EXPECT_EQ(a.link(i).mass, b.link(i).mass);
    EXPECT_EQ(a.link(i).inertia, b.link(i).inertia);
    EXPECT_EQ(a.link(i).proximal_offset, b.link(i).proximal_offset);
    EXPECT_EQ(a.link(i).distal_offset, b.link(i).distal_offset);
  }
  EXPECT_EQ(a.gravity(), b.gravity());
}

TEST(Model, RoundTripPreservesAwkwardDoubles) {
  const std::string text =
      with_value(sample_model_config(), "link.3", "mass", "6.000000000000001");
  const RobotModel a = load_model(with_value(text, "link.3", "K", "0.1 -2.2250738585072014e-308 0.3"));
  const RobotModel b = load_model(save_model(a));
  EXPECT_EQ(b.link(3).mass, 6.000000000000001);
  EXPECT_EQ(b.link(3).proximal_offset, a.link(3).proximal_offset);
}

TEST(Model, ZeroInertiaIsRejected) {
  const std::string text = with_value(sample_model_config(), "link.3", "inertia", "0 0 0 0 0 0 0 0 0");
  EXPECT_THAT(model_error(text), HasSubstr("non-SPD inertia, link 3"));
  EXPECT_EQ(model_field(text), "link.3.inertia");
}

TEST(Model, IndefiniteAndAsymmetricInertiaAreRejected) {
  const std::string base = sample_model_config();
  EXPECT_THAT(model_error(with_value(base, "link.5", "inertia", "1 0 0 0 -1 0 0 0 1")),
              HasSubstr("non-SPD inertia, link 5"));
  EXPECT_THAT(model_error(with_value(base, "link.5", "inertia", "1 0.5 0 0 1 0 0 0 1")),
              HasSubstr("non-symmetric inertia, link 5"));
}

TEST(Model, BadMassIsRejected) {
  const std::string text = with_value(sample_model_config(), "link.2", "mass", "-1");
  EXPECT_EQ(model_field(text), "link.2.mass");
}

TEST(Model, CorruptedConnectionIsRejected) {
  const std::string text =
      with_value(sample_model_config(), "constraints", "joint.2.R", "1 0  0.1 0  0 1");
  EXPECT_THAT(model_error(text), HasSubstr("non-orthonormal R/Q at joint 2"));
}

TEST(Model, WrongConstraintJointSetIsRejected) {
  const std::string text = with_value(sample_model_config(), "constraints", "joints", "2 3 5 7");
  EXPECT_THAT(model_error(text), HasSubstr("wrong constraint joint set"));
}

TEST(Model, UnknownKeysAreRejected) {
  EXPECT_EQ(model_field(sample_model_config() + "\n[link.8]\nmass = 1\n"), "link.8");
  const std::string text =
      with_value(sample_model_config(), "link.1", "mass", "0.87\ncolour = red");
  EXPECT_EQ(model_field(text), "link.1.colour");
}

TEST(Model, MissingLinkIsRejected) {
  std::string text = sample_model_config();
  const auto s = text.find("[link.6]");
  const auto e = text.find("[link.7]");
  text.erase(s, e - s);
  EXPECT_THAT(model_error(text), HasSubstr("missing link 6"));
}

TEST(Model, ParseFailureIsReported) {
  EXPECT_THAT(model_error("[link.1\nmass = 1\n"), HasSubstr("parse failure"));
  EXPECT_THAT(model_error(with_value(sample_model_config(), "link.1", "mass", "heavy")),
              HasSubstr("not a finite decimal number"));
}

TEST(Model, MissingFileNamesThePath) {
  try {
    load_model_file("/nonexistent/robot.ini");
    FAIL() << "no exception";
  } catch (const std::ios_base::failure& e) {
    EXPECT_THAT(e.what(), HasSubstr("/nonexistent/robot.ini"));
  }
}

TEST(Model, PinnedBaseHasTwelveDof) {
  for (char axis : {'x', 'y', 'z'}) {
    const RobotModel m = biped::test::pinned_robot(axis);
    EXPECT_EQ(m.dof(), 12);
    EXPECT_EQ(m.joint(1).kind, JointKind::Universal);
    EXPECT_EQ(m.joint(1).dof, 2);
    const int p = axis - 'x';
    EXPECT_EQ(m.joint(1).axis, Vec3::Unit((p + 1) % 3));
    EXPECT_EQ(m.joint(1).axis2, Vec3::Unit((p + 2) % 3));
    EXPECT_THROW(m.mirrored(), ModelError);
  }
}

TEST(Model, JointLayout) {
  const RobotModel& m = sample_robot();
  const JointKind kinds[] = {JointKind::Ball,  JointKind::Hinge, JointKind::Hinge, JointKind::Ball,
                             JointKind::Ball,  JointKind::Hinge, JointKind::Hinge};
  int offset = 0;
  for (int j = 1; j <= kLinkCount; ++j) {
    EXPECT_EQ(m.joint(j).kind, kinds[j - 1]);
    EXPECT_EQ(m.joint(j).rate_offset, offset);
    offset += m.joint(j).dof;
  }
  EXPECT_EQ(offset, 13);
}

TEST(Model, MirrorIsAnInvolution) {
  const RobotModel& m = sample_robot();
  const RobotModel mm = m.mirrored().mirrored();
  EXPECT_EQ(save_model(mm), save_model(m));
  const RobotModel mirror = m.mirrored();
  EXPECT_EQ(mirror.link(1).proximal_offset, m.link(7).distal_offset);
  EXPECT_EQ(mirror.link(1).distal_offset, m.link(7).proximal_offset);
  EXPECT_EQ(mirror.link(4).mass, m.link(4).mass);
  EXPECT_EQ(mirror.chain_signs(), m.chain_signs());
}

TEST(Model, ScaledAndRegravitated) {
  const RobotModel& m = sample_robot();
  const RobotModel heavy = m.scaled(2.0);
  EXPECT_NEAR(heavy.total_mass(), 120.0, 1e-12);
  EXPECT_EQ(heavy.link(4).inertia, 2.0 * m.link(4).inertia);
  EXPECT_EQ(m.with_gravity(Vec3::Zero()).gravity(), Vec3::Zero());
}

TEST(Format, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-310, 9.81}) {
    const std::string s = format_double(v);
    EXPECT_EQ(parse_numbers(s).at(0), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_numbers(Mat32::Identity()), "1 0 0 1 0 0");
  EXPECT_THROW(parse_numbers("1 nan"), std::invalid_argument);
  EXPECT_THROW(parse_numbers("1,2"), std::invalid_argument);
  EXPECT_EQ(parse_numbers("  +1\t-2e3 \n").size(), 2u);
}
