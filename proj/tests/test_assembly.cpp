#include <sstream>

#include "biped/assembly.hpp"
#include "biped/oracle.hpp"
#include "biped/reduction.hpp"
#include "support.hpp"

using namespace biped;
using biped::test::max_abs;
using biped::test::sample_robot;

namespace {

FullState random_state(StateSampler& s) {
  FullState st;
  for (int i = 0; i < kLinkCount; ++i) {
    st.A[i] = s.rotation();
    st.W[i] = s.normal(3);
  }
  return st;
}

Mat32 connection(const RobotModel& m, int j) { return m.constraint_at(j)->connection; }

}  // namespace

TEST(Assembly, Dimensions) {
  const AssemblyMatrices a = assemble(sample_robot(), FullState::identity());
  EXPECT_EQ(a.P1.rows(), 42);
  EXPECT_EQ(a.P1.cols(), 42);
  EXPECT_EQ(a.P2.size(), 42);
  EXPECT_EQ(a.P3.rows(), 42);
  EXPECT_EQ(a.P3.cols(), 21);
  EXPECT_EQ(a.P4.rows(), 42);
  EXPECT_EQ(a.P4.cols(), 8);
  EXPECT_EQ(a.P5.rows(), 42);
  EXPECT_EQ(a.P5.cols(), 21);
  EXPECT_EQ(a.P6.size(), 8);
  EXPECT_EQ(a.P7.size(), 21);
}

TEST(Assembly, MassMatrixIsBlockDiagonal) {
  const RobotModel& m = sample_robot();
  StateSampler s(m, 21);
  const AssemblyMatrices a = assemble(m, random_state(s));
  MatX expected = MatX::Zero(42, 42);
  for (int i = 1; i <= kLinkCount; ++i) {
    expected.block<3, 3>(rotational_row(i), rotational_row(i)) = m.link(i).inertia;
    expected.block<3, 3>(translational_row(i), translational_row(i)) =
        m.link(i).mass * Mat3::Identity();
  }
  EXPECT_EQ(a.P1, expected);
  const VecX rhs = s.normal(42);
  EXPECT_LE((a.P1 * solve_mass(a.P1, rhs) - rhs).norm(), 1e-12);
}

TEST(Assembly, ConstraintBlocksAtIdentity) {
  const RobotModel& m = sample_robot();
  const AssemblyMatrices a = assemble(m, FullState::identity());
  const MatX R2 = connection(m, 2), R3 = connection(m, 3);
  EXPECT_EQ(MatX(a.P4.block(rotational_row(1), 0, 3, 2)), -R2);
  EXPECT_EQ(MatX(a.P4.block(rotational_row(2), 0, 3, 2)), R2);
  EXPECT_EQ(MatX(a.P4.block(rotational_row(2), 2, 3, 2)), -R3);
  EXPECT_EQ(MatX(a.P4.block(rotational_row(3), 2, 3, 2)), R3);
  // Hinge multipliers never touch translation.
  EXPECT_EQ(max_abs(a.P4.bottomRows(21)), 0.0);
}

TEST(Assembly, VelocityTermsVanishAtRest) {
  const RobotModel& m = sample_robot();
  StateSampler s(m, 22);
  FullState st = random_state(s);
  for (auto& w : st.W) w.setZero();
  const AssemblyMatrices a = assemble(m, st);
  EXPECT_EQ(max_abs(a.P6), 0.0);
  EXPECT_EQ(max_abs(a.P7), 0.0);
  EXPECT_EQ(max_abs(a.P2.head(21)), 0.0);
  for (int i = 1; i <= kLinkCount; ++i) {
    EXPECT_EQ(Vec3(a.P2.segment<3>(translational_row(i))), m.link(i).mass * m.gravity());
  }
}

TEST(Assembly, HolonomicForcesTelescope) {
  // Summed over all bodies only the ground reaction survives.
  const RobotModel& m = sample_robot();
  StateSampler s(m, 23);
  for (int k = 0; k < 20; ++k) {
    const AssemblyMatrices a = assemble(m, random_state(s));
    MatX sum = MatX::Zero(3, 21);
    for (int i = 1; i <= kLinkCount; ++i) sum += a.P3.middleRows<3>(translational_row(i));
    MatX expected = MatX::Zero(3, 21);
    expected.leftCols<3>().setIdentity();
    EXPECT_EQ(sum, expected);
  }
}

TEST(Assembly, InternalTorquesCancelInTheInertialFrame) {
  const RobotModel& m = sample_robot();
  StateSampler s(m, 24);
  for (int k = 0; k < 20; ++k) {
    const FullState st = random_state(s);
    const AssemblyMatrices a = assemble(m, st);
    MatX torque = MatX::Zero(3, 21), hinge = MatX::Zero(3, 8);
    for (int i = 1; i <= kLinkCount; ++i) {
      torque += st.A[i - 1] * a.P5.middleRows<3>(rotational_row(i));
      hinge += st.A[i - 1] * a.P4.middleRows<3>(rotational_row(i));
    }
    // T_1 is given in the inertial frame.
    EXPECT_LE(max_abs(torque.leftCols<3>() - MatX::Identity(3, 3)), 1e-14);
    EXPECT_LE(max_abs(torque.rightCols<18>()), 1e-14);
    EXPECT_LE(max_abs(hinge), 1e-14);
    EXPECT_EQ(max_abs(a.P5.bottomRows(21)), 0.0);
  }
}

TEST(Assembly, ForceTablesMatchConstraintGradients) {
  const RobotModel& m = sample_robot();
  StateSampler s(m, 25);
  for (int k = 0; k < 20; ++k) {
    const FullState st = random_state(s);
    const AssemblyMatrices a = assemble(m, st);
    const ConstraintJacobians c = constraint_jacobians(m, st);
    EXPECT_LE(max_abs(a.P3.transpose() - c.holonomic), 1e-13);
    EXPECT_LE(max_abs(a.P4.transpose() - c.nonholonomic), 1e-13);
  }
}

TEST(Assembly, ConstraintRhsMatchesSeparateEntryPoint) {
  const RobotModel& m = sample_robot();
  StateSampler s(m, 26);
  const FullState st = random_state(s);
  const AssemblyMatrices a = assemble(m, st);
  const auto [P6, P7] = constraint_rhs(m, st);
  EXPECT_EQ(a.P6, P6);
  EXPECT_EQ(a.P7, P7);
  EXPECT_EQ(a.P2, a.P2_gyroscopic + a.P2_gravity);
}

TEST(Assembly, PointForceAtCentreOfMassHasNoMoment) {
  StateSampler s(sample_robot(), 27);
  const FullState st = random_state(s);
  const Vec3 f(1, 2, 3);
  const VecX g = point_force_map(st, 5, Vec3::Zero(), f);
  EXPECT_EQ(max_abs(g.head(21)), 0.0);
  EXPECT_EQ(Vec3(g.segment<3>(translational_row(5))), f);
  const VecX h = point_force_map(FullState::identity(), 2, Vec3(0, 0, 1), Vec3(1, 0, 0));
  EXPECT_EQ(Vec3(h.segment<3>(rotational_row(2))), Vec3(0, 1, 0));
}

TEST(Assembly, WriteMatrixHeader) {
  std::ostringstream out;
  MatX m(2, 3);
  m << 1, 0.5, -2, 0, 0.1, 3;
  write_matrix(out, "M", m);
  EXPECT_EQ(out.str(), "# M 2x3\n1 0.5 -2\n0 0.1 3\n");
}

TEST(Assembly, KktSystemIsSatisfied) {
  const RobotModel& m = sample_robot();
  StateSampler s(m, 28);
  for (int k = 0; k < 20; ++k) {
    const AssemblyMatrices a = assemble(m, random_state(s));
    const VecX T = s.normal(21);
    const KktSolution sol = solve_kkt(a, T);
    const VecX r = a.P1 * sol.z1 - a.P2 - a.P3 * sol.gamma - a.P4 * sol.lambda - a.P5 * T;
    EXPECT_LE(r.norm() / std::max(1.0, (a.P2 + a.P5 * T).norm()), 1e-12);
    EXPECT_LE((a.P3.transpose() * sol.z1 - a.P7).norm(), 1e-10);
    EXPECT_LE((a.P4.transpose() * sol.z1 - a.P6).norm(), 1e-10);
  }
}

TEST(Assembly, DegenerateTablesAreReported) {
  AssemblyMatrices a = assemble(sample_robot(), FullState::identity());
  a.P4.col(1) = a.P4.col(0);
  EXPECT_THROW(solve_kkt(a, VecX::Zero(21)), ConstraintDegeneracy);
  EXPECT_THROW(constraint_forces(a, VecX::Zero(21)), ConstraintDegeneracy);

  AssemblyMatrices b = assemble(sample_robot(), FullState::identity());
  b.P3.block<3, 3>(translational_row(3), 6).setZero();
  try {
    lift_nullspace(b);
    FAIL() << "no exception";
  } catch (const KinematicSingularity& e) {
    EXPECT_LE(e.smallest_singular_value(), 1e-12);
  }
}
