#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "biped/configuration.hpp"

namespace biped {

/// Seeded generator of random admissible states.
class StateSampler {
 public:
  StateSampler(const RobotModel& model, std::uint64_t seed);

  /// Uniform ball rotations, hinge and universal angles in [-pi, pi).
  Configuration configuration();
  /// Standard normal entries times `scale`.
  VecX rates(double scale = 1.0);
  VecX normal(int size, double scale = 1.0);
  Mat3 rotation();
  std::mt19937_64& engine() { return rng_; }

 private:
  const RobotModel* model_;
  std::mt19937_64 rng_;
};

struct CheckResult {
  std::string name;
  double value = 0.0;      // worst residual, or the worst margin for lower bounds
  double tolerance = 0.0;
  bool lower_bound = false;  // pass when value > tolerance instead of value <= tolerance
  int samples = 0;
  bool passed() const { return lower_bound ? value > tolerance : value <= tolerance; }
};

struct CheckReport {
  std::uint64_t seed = 0;
  int samples = 0;
  std::vector<CheckResult> results;
  bool all_passed() const;
};

/// Randomized invariant suite over `samples` states.
CheckReport run_checks(const RobotModel& model, std::uint64_t seed, int samples);

void print_report(std::ostream& out, const CheckReport& report);

}  // namespace biped
