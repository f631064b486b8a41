#include "biped/check.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include "biped/contact.hpp"
#include "biped/format.hpp"
#include "biped/oracle.hpp"
#include "biped/reduction.hpp"

namespace biped {

StateSampler::StateSampler(const RobotModel& model, std::uint64_t seed)
    : model_(&model), rng_(seed) {}

Mat3 StateSampler::rotation() {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng_), n(rng_), n(rng_), n(rng_));
  q.normalize();
  return q.toRotationMatrix();
}

Configuration StateSampler::configuration() {
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  Configuration q = Configuration::upright(*model_);
  for (int j = 1; j <= kLinkCount; ++j) {
    const JointSpec& spec = model_->joint(j);
    if (spec.kind == JointKind::Ball) {
      q.rotation[j - 1] = rotation();
    } else {
      Vec3 a = Vec3::Zero();
      for (int k = 0; k < spec.dof; ++k) a(k) = angle(rng_);
      q.angles[j - 1] = a;
      q.rotation[j - 1] = joint_rotation(spec, a);
    }
  }
  return q;
}

VecX StateSampler::normal(int size, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  VecX v(size);
  for (int k = 0; k < size; ++k) v(k) = n(rng_);
  return v;
}

VecX StateSampler::rates(double scale) { return normal(model_->dof(), scale); }

bool CheckReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed(); });
}

namespace {

double rel(double num, double den) { return num / std::max(den, 1.0); }

double max_abs(const MatX& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

class Tracker {
 public:
  Tracker(std::string name, double tolerance, bool lower_bound = false)
      : r_{std::move(name), lower_bound ? std::numeric_limits<double>::infinity() : 0.0,
           tolerance, lower_bound, 0} {}
  void add(double v) {
    ++r_.samples;
    if (std::isnan(v)) {
      r_.value = r_.lower_bound ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity();
    } else if (r_.lower_bound) {
      r_.value = std::min(r_.value, v);
    } else {
      r_.value = std::max(r_.value, v);
    }
  }
  CheckResult result() const { return r_; }

 private:
  CheckResult r_;
};

std::array<Mat3, kLinkCount> flowed(const FullState& s, double t) {
  std::array<Mat3, kLinkCount> A;
  for (int i = 0; i < kLinkCount; ++i) A[i] = s.A[i] * exp_so3(t * s.W[i]);
  return A;
}

}  // namespace

CheckReport run_checks(const RobotModel& model, std::uint64_t seed, int samples) {
  CheckReport report;
  report.seed = seed;
  report.samples = samples;

  StateSampler sampler(model, seed);
  const RobotModel heavy = model.scaled(2.0);

  Tracker accel("oracle_accelerations", 1e-8);
  Tracker multipliers("oracle_multipliers", 1e-9);
  Tracker kkt("oracle_kkt_residual", 1e-9);
  Tracker ann_hol("annihilation_P10tP3", 1e-10);
  Tracker ann_non("annihilation_P12tP10tP4", 1e-10);
  Tracker sym("inertia_symmetry", 1e-10);
  Tracker spd("inertia_min_eigenvalue", 0.0, true);
  Tracker scaling("inertia_mass_scaling", 1e-12);
  Tracker dual_hol("duality_holonomic", 1e-12);
  Tracker dual_non("duality_nonholonomic", 1e-12);
  Tracker imp_vel("impact_contact_velocity", 1e-10);
  Tracker imp_energy("impact_energy_gain", 1e-12);
  Tracker imp_idem("impact_idempotence", 1e-12);
  Tracker dsp("dsp_contact_acceleration", 1e-8);
  Tracker fd_e("fd_contact_jacobian", 1e-6);
  Tracker fd_p6("fd_P6", 1e-6);
  Tracker fd_p7("fd_P7", 1e-6);

  for (int k = 0; k < samples; ++k) {
    const Configuration q = sampler.configuration();
    const VecX phi_dot = sampler.rates();
    const VecX tau = sampler.rates(10.0);
    const DynamicsPoint p = evaluate(model, q, phi_dot);
    const ReducedModel& r = p.reduced;
    const VecX T = r.actuation * tau;

    // Reduction against the saddle-point oracle.
    const VecX ddphi = forward_dynamics(r, tau);
    const auto base = base_constraint(model, q, phi_dot);
    const BaseConstraint* pin = base ? &*base : nullptr;
    const KktSolution sol = solve_kkt(p.assembly, T, VecX(), pin);
    const VecX ddphi_oracle = project_accelerations(p.basis, sol.z1);
    accel.add(rel((ddphi - ddphi_oracle).norm(), ddphi_oracle.norm()));
    const ConstraintForces cf = constraint_forces(p.assembly, T, VecX(), pin);
    VecX m(kHolonomicDim + kNonholonomicDim + 1), m_oracle(kHolonomicDim + kNonholonomicDim + 1);
    m << cf.gamma, cf.lambda, cf.base;
    m_oracle << sol.gamma, sol.lambda, sol.base;
    multipliers.add(rel((m - m_oracle).norm(), m_oracle.norm()));
    kkt.add(std::max({sol.dynamics_residual, sol.holonomic_residual, sol.nonholonomic_residual}));

    // The two elimination identities.
    ann_hol.add((r.P10.transpose() * p.assembly.P3).norm() /
                (r.P10.norm() * p.assembly.P3.norm()));
    ann_non.add((r.P12.transpose() * r.P10.transpose() * p.assembly.P4).norm() /
                (r.P12.norm() * r.P10.norm() * p.assembly.P4.norm()));

    // Reduced inertia.
    sym.add(max_abs(r.J - r.J.transpose()) / max_abs(r.J));
    const VecX eig = Eigen::SelfAdjointEigenSolver<MatX>(r.J).eigenvalues();
    spd.add(eig.minCoeff() / eig.maxCoeff());
    scaling.add(max_abs(reduce(heavy, q, phi_dot).J - 2.0 * r.J) / max_abs(r.J));

    // Impact and double support at the same state.
    const MatX E = contact_jacobian(model, p);
    const ImpactResult hit = impact_map(r, E, phi_dot);
    const double ke_minus = 0.5 * phi_dot.dot(r.J * phi_dot);
    const double ke_plus = 0.5 * hit.phi_dot_plus.dot(r.J * hit.phi_dot_plus);
    imp_vel.add((E * hit.phi_dot_plus).norm());
    imp_energy.add((ke_plus - ke_minus) / std::max(ke_minus, 1e-300));
    const ImpactResult again = impact_map(r, E, hit.phi_dot_plus);
    imp_idem.add(rel((again.phi_dot_plus - hit.phi_dot_plus).norm(), phi_dot.norm()));

    const Vec3 bias = contact_bias(model, p);
    const Vec3 force = dsp_contact_force(r, E, bias, phi_dot, tau);
    const VecX dd = forward_dynamics(r, tau, E.transpose() * force);
    dsp.add((E * dd + bias).norm());

    // Duality: independent constraint Jacobians against the force tables.
    const ConstraintJacobians cj = constraint_jacobians(model, p.state);
    dual_hol.add(max_abs(cj.holonomic - p.assembly.P3.transpose()));
    dual_non.add(max_abs(cj.nonholonomic - p.assembly.P4.transpose()));

    // Contact Jacobian against differences of the contact point.
    const auto point = [&](const VecX& d) {
      const Configuration qd = advance(model, q, d);
      return VecX(contact_point(model, full_state(model, qd, phi_dot)));
    };
    fd_e.add(max_abs(fd_derivative(point, VecX::Zero(model.dof()), 1e-6) - E));

    // P6 and P7 against time differences along the zero-acceleration flow.
    const double h = 1e-5;
    const auto velocities = com_velocities(model, p.state);
    auto shifted = [&](double t) {
      FullState s = p.state;
      s.A = flowed(p.state, t);
      return s;
    };
    const VecX dn = (nonholonomic_residual(model, shifted(h)) -
                     nonholonomic_residual(model, shifted(-h))) / (2 * h);
    fd_p6.add(max_abs(-dn - p.assembly.P6));
    const VecX dh = (holonomic_rate_residual(model, shifted(h), velocities) -
                     holonomic_rate_residual(model, shifted(-h), velocities)) / (2 * h);
    fd_p7.add(max_abs(-dh - p.assembly.P7));
  }

  for (const Tracker* t : {&accel, &multipliers, &kkt, &ann_hol, &ann_non, &sym, &spd, &scaling,
                           &dual_hol, &dual_non, &imp_vel, &imp_energy, &imp_idem, &dsp, &fd_e,
                           &fd_p6, &fd_p7}) {
    report.results.push_back(t->result());
  }
  return report;
}

void print_report(std::ostream& out, const CheckReport& report) {
  out << "seed " << report.seed << ", " << report.samples << " samples\n";
  for (const CheckResult& r : report.results) {
    out << std::left << std::setw(28) << r.name << ' ' << std::setw(24)
        << format_double(r.value) << (r.lower_bound ? " >  " : " <= ") << std::setw(8)
        << format_double(r.tolerance) << " n=" << std::setw(6) << r.samples << ' '
        << (r.passed() ? "PASS" : "FAIL") << '\n';
  }
  out << (report.all_passed() ? "all checks passed" : "some checks FAILED") << '\n';
}

}  // namespace biped
