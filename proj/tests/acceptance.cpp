// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "biped/check.hpp"
#include "biped/model.hpp"
#include "biped/sim.hpp"

using namespace biped;

namespace {

const std::string kConfigDir = BIPED_CONFIG_DIR;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Gate {
  int failures = 0;
  void line(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s %2d %-28s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

// Worst value of several named checks, and whether all of them passed.
struct Worst {
  double value = 0.0;
  bool pass = true;
};

Worst worst(const CheckReport& report, const std::vector<std::string>& names) {
  Worst w;
  int found = 0;
  for (const CheckResult& r : report.results) {
    for (const std::string& n : names) {
      if (r.name != n) continue;
      ++found;
      w.value = std::max(w.value, r.value);
      w.pass = w.pass && r.passed();
    }
  }
  w.pass = w.pass && found == static_cast<int>(names.size());
  return w;
}

const CheckResult* find(const CheckReport& report, const std::string& name) {
  for (const CheckResult& r : report.results) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

SimConfig passive(const RobotModel& m, double duration, double dt) {
  SimConfig c = load_sim_config_file(m, kConfigDir + "/passive_drop.ini");
  c.contact = false;
  c.duration = duration;
  c.dt = dt;
  return c;
}

VecX final_state(const RobotModel& m, const SimConfig& c, bool& ok) {
  const Trajectory t = simulate(m, c);
  ok = ok && t.ok;
  VecX out(2 * t.dof);
  if (t.samples.empty()) return VecX::Zero(2 * m.dof());
  out << t.samples.back().phi, t.samples.back().phi_dot;
  return out;
}

}  // namespace

int main() {
  Gate gate;
  try {
    const RobotModel model = load_model_file(kConfigDir + "/robot.ini");

    const auto check_start = std::chrono::steady_clock::now();
    const CheckReport report = run_checks(model, 42, 1000);
    const double check_time = seconds_since(check_start);

    {
      const Worst a = worst(report, {"oracle_accelerations"});
      const Worst f = worst(report, {"oracle_multipliers"});
      gate.line(1, "reduction vs saddle point",
                a.pass && f.pass && check_time < 30.0,
                fmt("accel rel %.2e <= 1e-8, forces rel %.2e <= 1e-9, 1000 states in %.2f s",
                    a.value, f.value, check_time));
    }
    {
      const Worst w = worst(report, {"annihilation_P10tP3", "annihilation_P12tP10tP4"});
      gate.line(2, "annihilation", w.pass, fmt("worst %.2e <= 1e-10 over 1000 states", w.value));
    }
    {
      const Worst w = worst(report, {"duality_holonomic", "duality_nonholonomic"});
      gate.line(3, "constraint duality", w.pass, fmt("worst %.2e <= 1e-12 over 1000 states", w.value));
    }
    const Trajectory passive_run = simulate(model, passive(model, 1.0, 1e-4));
    {
      const Trajectory& t = passive_run;
      const double e0 = t.samples.empty() ? 0.0 : t.samples.front().energy;
      double e_drift = 0.0;
      for (const Sample& s : t.samples) e_drift = std::max(e_drift, std::abs(s.energy - e0));
      const double e_rel = e_drift / std::abs(e0);

      const RobotModel weightless = model.with_gravity(Vec3::Zero());
      SimConfig c = passive(weightless, 0.1, 1e-4);
      c.initial_rates = StateSampler(weightless, 74).rates(1.0);
      const Trajectory w = simulate(weightless, c);
      const double k0 = w.samples.empty() ? 0.0 : w.samples.front().kinetic;
      double k_drift = 0.0;
      for (const Sample& s : w.samples) k_drift = std::max(k_drift, std::abs(s.kinetic - k0));

      gate.line(4, "energy conservation",
                t.ok && w.ok && e_rel <= 1e-6 && k_drift <= 1e-8 && k0 > 0.0,
                fmt("passive 1 s rel %.2e <= 1e-6, g = 0 KE %.2e J <= 1e-8", e_rel, k_drift));
    }
    double step_time = 0.0;
    {
      const auto step_start = std::chrono::steady_clock::now();
      const Trajectory step_run =
          simulate(model, load_sim_config_file(model, kConfigDir + "/step.ini"));
      step_time = seconds_since(step_start);

      SimConfig drop = load_sim_config_file(model, kConfigDir + "/passive_drop.ini");
      drop.duration = 1.0;
      const Trajectory drop_run = simulate(model, drop);

      const double worst_drift = std::max({passive_run.max_holonomic_drift,
                                           step_run.max_holonomic_drift,
                                           drop_run.max_holonomic_drift});
      gate.line(5, "holonomic drift",
                passive_run.ok && step_run.ok && drop_run.ok && worst_drift <= 1e-6,
                fmt("passive %.2e, step %.2e, drop %.2e, worst <= 1e-6 m",
                    passive_run.max_holonomic_drift, step_run.max_holonomic_drift,
                    drop_run.max_holonomic_drift));
    }
    {
      const Worst v = worst(report, {"impact_contact_velocity"});
      const Worst e = worst(report, {"impact_energy_gain"});
      const Worst i = worst(report, {"impact_idempotence"});
      gate.line(6, "plastic impact", v.pass && e.pass && i.pass,
                fmt("contact vel %.2e <= 1e-10, KE gain rel %.2e <= 1e-12, repeat %.2e <= 1e-12",
                    v.value, std::max(e.value, 0.0), i.value));
    }
    {
      const Worst w = worst(report, {"dsp_contact_acceleration"});
      gate.line(7, "double support", w.pass, fmt("|Eddot| %.2e <= 1e-8 over 1000 states", w.value));
    }
    {
      const Worst s = worst(report, {"inertia_symmetry"});
      const CheckResult* pd = find(report, "inertia_min_eigenvalue");
      const Worst k = worst(report, {"inertia_mass_scaling"});
      gate.line(8, "inertia matrix", s.pass && pd && pd->passed() && k.pass,
                fmt("asym %.2e <= 1e-10, min eig ratio %.2e > 0, mass scaling %.2e <= 1e-12",
                    s.value, pd ? pd->value : -1.0, k.value));
    }
    {
      const Worst w = worst(report, {"fd_contact_jacobian", "fd_P6", "fd_P7"});
      gate.line(9, "finite differences", w.pass, fmt("worst %.2e <= 1e-6", w.value));
    }
    {
      SimConfig c = passive(model, 0.1, 4e-4);
      c.initial_rates = StateSampler(model, 72).rates(3.0);
      bool ok = true;
      const VecX a = final_state(model, c, ok);
      c.dt = 2e-4;
      const VecX b = final_state(model, c, ok);
      c.dt = 1e-4;
      const VecX d = final_state(model, c, ok);
      const double order = std::log2((a - b).norm() / (b - d).norm());
      gate.line(10, "RK4 convergence order", ok && order >= 3.8, fmt("order %.3f >= 3.8", order));
    }
    gate.line(11, "runtime", check_time < 60.0 && step_time < 5.0,
              fmt("check suite %.2f s < 60, 1 s sim at dt 1e-3 %.2f s < 5", check_time, step_time));
  } catch (const std::exception& e) {
    std::printf("FAIL    aborted: %s\n", e.what());
    return 1;
  }
  return gate.failures == 0 ? 0 : 1;
}
