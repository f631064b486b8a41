#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "biped/configuration.hpp"
#include "biped/contact.hpp"
#include "biped/reduction.hpp"

namespace biped {

enum class Integrator { RK4, SemiImplicitEuler };

/// Quintic blend from `start` by the tangent offset `delta` over `duration`
/// seconds, then held. Ball joints move along exp(s delta).
struct Reference {
  Configuration start;
  VecX delta;
  double duration = 1.0;

  struct Point {
    Configuration q;
    VecX phi_dot;
    VecX phi_ddot;
  };
  Point at(const RobotModel& model, double t) const;
};

struct SimConfig {
  double dt = 1e-3;
  double duration = 1.0;
  Integrator integrator = Integrator::RK4;

  Configuration initial;
  VecX initial_rates;  // n; empty means at rest

  bool controller = false;
  VecX kp;  // diagonal, n
  VecX kd;
  VecX reference_delta;  // empty means hold the initial posture
  double reference_duration = 1.0;

  bool contact = true;
  double event_tolerance = 1e-9;
  double drift_tolerance = 1e-6;
  double clearance = 1e-4;  // swing foot must rise this high before touchdown can fire
  double dsp_max_duration = std::numeric_limits<double>::infinity();
  double orthogonality_tolerance = 1e-9;
  int record_every = 1;

  static SimConfig defaults(const RobotModel& model);
};

/// Integrated state: reduced coordinates plus the auxiliary COM positions and
/// velocities integrated from the lifted accelerations (drift audit only).
struct SimState {
  Configuration q;
  VecX phi_dot;
  std::array<Vec3, kLinkCount> X{};
  std::array<Vec3, kLinkCount> V{};

  static SimState from(const RobotModel& model, const Configuration& q, const VecX& phi_dot);
};

struct Sample {
  double t = 0.0;
  Phase phase = Phase::SingleSupport;
  int stance = 0;  // 0 while the original link 1 is the stance foot, else 1
  VecX phi;
  VecX phi_dot;
  VecX tau;
  VecX gamma;
  VecX lambda;
  Vec3 contact_force = Vec3::Zero();  // impulse (N s) on Impact samples
  Vec3 contact_point = Vec3::Zero();  // world frame
  double energy = 0.0;
  double kinetic = 0.0;
  double holonomic_drift = 0.0;
  double contact_drift = 0.0;
  double orthogonality = 0.0;
};

struct Trajectory {
  int dof = 0;
  double dt = 0.0;
  Integrator integrator = Integrator::RK4;
  std::vector<Sample> samples;
  int steps = 0;
  int impacts = 0;
  int liftoffs = 0;
  int relabels = 0;
  double max_holonomic_drift = 0.0;
  double max_contact_drift = 0.0;
  double max_reorthonormalization = 0.0;
  bool ok = true;
  std::string error;
};

/// Reduced accelerations at a stage (q, phi_dot) whose dynamics are `point`.
using AccelerationLaw = std::function<VecX(const DynamicsPoint& point, const Configuration& q,
                                           const VecX& phi_dot, double t)>;

/// One step of the chosen integrator. Ball rotations whose orthogonality
/// residual exceeds `orthogonality_tolerance` are polar-projected afterwards;
/// the largest correction is written to `correction` when given.
SimState integrate(const RobotModel& model, const SimState& state, double t, double dt,
                   Integrator integrator, const AccelerationLaw& law,
                   double orthogonality_tolerance = 1e-9, double* correction = nullptr);

/// RK4 step of the free single-support dynamics under constant tau.
SimState step(const RobotModel& model, const SimState& state, const VecX& tau, double dt);

/// tau = D^{-1}(J(ddPhi_r + Kd(dPhi_r - dPhi) + Kp(Phi_r - Phi)) + H + G).
VecX computed_torque(const RobotModel& model, const ReducedModel& reduced, const Configuration& q,
                     const VecX& phi_dot, const Reference::Point& ref, const VecX& kp,
                     const VecX& kd);

Trajectory simulate(const RobotModel& model, const SimConfig& config);

/// Throws std::logic_error on a backwards time step or an illegal phase change.
void check_trajectory(const Trajectory& trajectory);

std::string_view integrator_name(Integrator integrator);

SimConfig load_sim_config(const RobotModel& model, std::string_view text);
SimConfig load_sim_config_file(const RobotModel& model, const std::string& path);

std::vector<std::string> trajectory_columns(int dof);
void write_csv(std::ostream& out, const Trajectory& trajectory);
void write_json(std::ostream& out, const Trajectory& trajectory);

}  // namespace biped
