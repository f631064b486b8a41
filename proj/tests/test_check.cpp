#include <sstream>

#include <gmock/gmock.h>

#include "support.hpp"

using namespace biped;
using biped::test::sample_robot;

TEST(Check, SuitePassesOnTheSampleRobot) {
  const CheckReport report = run_checks(sample_robot(), 42, 1000);
  EXPECT_EQ(report.results.size(), 17u);
  for (const CheckResult& r : report.results) {
    EXPECT_TRUE(r.passed()) << r.name << " = " << r.value;
    EXPECT_EQ(r.samples, 1000) << r.name;
  }
  EXPECT_TRUE(report.all_passed());
}

TEST(Check, PinnedBasePasses) {
  EXPECT_TRUE(run_checks(biped::test::pinned_robot('x'), 7, 100).all_passed());
}

TEST(Check, SameSeedSameReport) {
  const CheckReport a = run_checks(sample_robot(), 5, 50);
  const CheckReport b = run_checks(sample_robot(), 5, 50);
  const CheckReport c = run_checks(sample_robot(), 6, 50);
  ASSERT_EQ(a.results.size(), b.results.size());
  bool differs = false;
  for (std::size_t k = 0; k < a.results.size(); ++k) {
    EXPECT_EQ(a.results[k].name, b.results[k].name);
    EXPECT_EQ(a.results[k].value, b.results[k].value) << a.results[k].name;
    differs = differs || a.results[k].value != c.results[k].value;
  }
  EXPECT_TRUE(differs);
}

TEST(Check, SamplerDrawsRotations) {
  StateSampler s(sample_robot(), 9);
  for (int k = 0; k < 100; ++k) {
    const Mat3 R = s.rotation();
    EXPECT_LE((R.transpose() * R - Mat3::Identity()).norm(), 1e-14);
    EXPECT_NEAR(R.determinant(), 1.0, 1e-14);
  }
  const Configuration q = s.configuration();
  EXPECT_LE(std::abs(q.angles[1](0)), 3.1416);
  EXPECT_EQ(s.rates().size(), 13);
}

TEST(Check, ReportFormat) {
  CheckReport report{42, 10, {{"alpha", 1e-12, 1e-10, false, 10}, {"beta", 0.5, 0.0, true, 10}}};
  std::ostringstream out;
  print_report(out, report);
  EXPECT_THAT(out.str(), ::testing::HasSubstr("seed 42, 10 samples"));
  EXPECT_THAT(out.str(), ::testing::HasSubstr("alpha"));
  EXPECT_THAT(out.str(), ::testing::HasSubstr("all checks passed"));
  report.results[1].value = -1.0;
  EXPECT_FALSE(report.all_passed());
  std::ostringstream failed;
  print_report(failed, report);
  EXPECT_THAT(failed.str(), ::testing::HasSubstr("FAIL"));
}
