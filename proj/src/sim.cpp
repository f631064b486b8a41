#include "biped/sim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "biped/oracle.hpp"

namespace biped {

std::string_view integrator_name(Integrator integrator) {
  return integrator == Integrator::RK4 ? "rk4" : "semi-implicit-euler";
}

Reference::Point Reference::at(const RobotModel& model, double t) const {
  const int n = model.dof();
  const double T = duration > 0.0 ? duration : 1.0;
  const double x = std::clamp(t / T, 0.0, 1.0);
  double s = 10 * x * x * x - 15 * x * x * x * x + 6 * x * x * x * x * x;
  double ds = (30 * x * x - 60 * x * x * x + 30 * x * x * x * x) / T;
  double dds = (60 * x - 180 * x * x + 120 * x * x * x) / (T * T);
  if (t >= T) {
    s = 1.0;
    ds = dds = 0.0;
  }
  const VecX d = delta.size() == n ? delta : VecX::Zero(n);
  return {advance(model, start, s * d), ds * d, dds * d};
}

SimConfig SimConfig::defaults(const RobotModel& model) {
  SimConfig c;
  c.initial = Configuration::upright(model);
  c.initial_rates = VecX::Zero(model.dof());
  c.kp = VecX::Zero(model.dof());
  c.kd = VecX::Zero(model.dof());
  return c;
}

SimState SimState::from(const RobotModel& model, const Configuration& q, const VecX& phi_dot) {
  SimState s{q, phi_dot, {}, {}};
  const FullState fs = full_state(model, q, phi_dot);
  s.X = chain_positions(model, fs).X;
  s.V = com_velocities(model, fs);
  return s;
}

namespace {

struct Rate {
  ConfigurationDelta dq;
  VecX dphi;
  std::array<Vec3, kLinkCount> dX;
  std::array<Vec3, kLinkCount> dV;
};

Rate rate(const RobotModel& model, const SimState& s, double t, const AccelerationLaw& law) {
  const DynamicsPoint point = evaluate(model, s.q, s.phi_dot);
  Rate r;
  r.dphi = law(point, s.q, s.phi_dot, t);
  const VecX z1 = lift_accelerations(point.reduced, r.dphi);
  r.dq = configuration_rate(model, s.q, s.phi_dot);
  for (int i = 0; i < kLinkCount; ++i) {
    r.dX[i] = s.V[i];
    r.dV[i] = z1.segment<3>(kAngularDim + 3 * i);
  }
  return r;
}

SimState apply(const RobotModel& model, const SimState& s, const Rate& r, double h) {
  SimState out{displace(model, s.q, r.dq, h), s.phi_dot + h * r.dphi, s.X, s.V};
  for (int i = 0; i < kLinkCount; ++i) {
    out.X[i] += h * r.dX[i];
    out.V[i] += h * r.dV[i];
  }
  return out;
}

bool finite(const SimState& s) {
  if (!s.phi_dot.allFinite()) return false;
  for (int i = 0; i < kLinkCount; ++i) {
    if (!s.q.rotation[i].allFinite() || !s.q.angles[i].allFinite() || !s.X[i].allFinite() ||
        !s.V[i].allFinite()) {
      return false;
    }
  }
  return true;
}

}  // namespace

SimState integrate(const RobotModel& model, const SimState& state, double t, double dt,
                   Integrator integrator, const AccelerationLaw& law,
                   double orthogonality_tolerance, double* correction) {
  SimState next;
  if (integrator == Integrator::RK4) {
    const Rate k1 = rate(model, state, t, law);
    const Rate k2 = rate(model, apply(model, state, k1, dt / 2), t + dt / 2, law);
    const Rate k3 = rate(model, apply(model, state, k2, dt / 2), t + dt / 2, law);
    const Rate k4 = rate(model, apply(model, state, k3, dt), t + dt, law);
    Rate sum;
    sum.dq = (1.0 / 6) * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    sum.dphi = (k1.dphi + 2 * k2.dphi + 2 * k3.dphi + k4.dphi) / 6;
    for (int i = 0; i < kLinkCount; ++i) {
      sum.dX[i] = (k1.dX[i] + 2 * k2.dX[i] + 2 * k3.dX[i] + k4.dX[i]) / 6;
      sum.dV[i] = (k1.dV[i] + 2 * k2.dV[i] + 2 * k3.dV[i] + k4.dV[i]) / 6;
    }
    next = apply(model, state, sum, dt);
  } else {
    // Velocities first, then positions with the updated velocities.
    const Rate k = rate(model, state, t, law);
    next = state;
    next.phi_dot += dt * k.dphi;
    next.q = displace(model, state.q, configuration_rate(model, state.q, next.phi_dot), dt);
    for (int i = 0; i < kLinkCount; ++i) {
      next.V[i] += dt * k.dV[i];
      next.X[i] += dt * next.V[i];
    }
  }
  const double moved = reorthonormalize(model, next.q, orthogonality_tolerance);
  if (correction) *correction = moved;
  return next;
}

SimState step(const RobotModel& model, const SimState& state, const VecX& tau, double dt) {
  const AccelerationLaw law = [&](const DynamicsPoint& p, const Configuration&, const VecX&,
                                  double) {
    return forward_dynamics(p.reduced, tau);
  };
  return integrate(model, state, 0.0, dt, Integrator::RK4, law);
}

VecX computed_torque(const RobotModel& model, const ReducedModel& reduced, const Configuration& q,
                     const VecX& phi_dot, const Reference::Point& ref, const VecX& kp,
                     const VecX& kd) {
  const VecX e = difference(model, ref.q, q);
  const VecX de = ref.phi_dot - phi_dot;
  const VecX v = ref.phi_ddot + kd.cwiseProduct(de) + kp.cwiseProduct(e);
  Eigen::PartialPivLU<MatX> lu(reduced.D);
  if (!(reciprocal_condition(lu) * kSingularCondition >= 1.0)) {
    const double sigma = Eigen::JacobiSVD<MatX>(reduced.D).singularValues().minCoeff();
    std::ostringstream msg;
    msg << "singular input matrix D: smallest singular value = " << sigma;
    throw NumericalError(msg.str(), sigma);
  }
  return lu.solve(reduced.J * v + reduced.H + reduced.G);
}

namespace {

bool legal_transition(Phase from, Phase to) {
  if (from == to) return from != Phase::Impact;
  switch (from) {
    case Phase::SingleSupport: return to == Phase::Impact;
    case Phase::Impact: return to == Phase::DoubleSupport;
    case Phase::DoubleSupport: return to == Phase::SingleSupport;
  }
  return false;
}

double max_ball_residual(const RobotModel& model, const Configuration& q) {
  double r = 0.0;
  for (int j = 1; j <= kLinkCount; ++j) {
    if (model.joint(j).kind == JointKind::Ball) {
      r = std::max(r, orthogonality_residual(q.rotation[j - 1]));
    }
  }
  return r;
}

class Runner {
 public:
  Runner(const RobotModel& model, const SimConfig& config)
      : config_(config), models_{model, model}, n_(model.dof()) {
    if (!(config.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(config.duration >= 0.0)) throw std::invalid_argument("duration must be non-negative");
    if (config.controller) {
      if (config.kp.size() != n_ || config.kd.size() != n_) {
        throw std::invalid_argument("controller gains must have one entry per degree of freedom");
      }
      if ((config.kp.array() < 0).any() || (config.kd.array() < 0).any()) {
        throw std::invalid_argument("controller gains must be non-negative");
      }
    }
    if (!model.pinned_base_axis()) models_[1] = model.mirrored();
    reference_ = Reference{config.initial, config.reference_delta, config.reference_duration};
    traj_.dof = n_;
    traj_.dt = config.dt;
    traj_.integrator = config.integrator;
  }

  Trajectory run() {
    const VecX rates = config_.initial_rates.size() == n_ ? config_.initial_rates : VecX::Zero(n_);
    state_ = SimState::from(model(), config_.initial, rates);
    try {
      armed_ = height(state_) > config_.clearance;
      record(t_, Phase::SingleSupport);
      while (t_ < config_.duration - 1e-12) {
        const double h = std::min(config_.dt, config_.duration - t_);
        if (phase_ == Phase::SingleSupport) {
          single_support(h);
        } else {
          double_support(h);
        }
      }
    } catch (const NumericalError& e) {
      fail(e.what());
    } catch (const Abort&) {
    }
    return std::move(traj_);
  }

 private:
  struct Abort {};

  const RobotModel& model() const { return models_[stance_]; }

  void fail(const std::string& message) {
    traj_.ok = false;
    traj_.error = message;
  }

  [[noreturn]] void abort(const std::string& message) {
    fail(message);
    throw Abort{};
  }

  VecX torque(const DynamicsPoint& p, const Configuration& q, const VecX& phi_dot,
              double t) const {
    if (!config_.controller) return VecX::Zero(n_);
    return computed_torque(model(), p.reduced, q, phi_dot, reference_.at(model(), t), config_.kp,
                           config_.kd);
  }

  // Free or contact-constrained accelerations; also reports tau and the contact force.
  VecX accelerate(const DynamicsPoint& p, const Configuration& q, const VecX& phi_dot, double t,
                  bool contact, VecX* tau_out, Vec3* force_out) const {
    const VecX tau = torque(p, q, phi_dot, t);
    if (tau_out) *tau_out = tau;
    if (!contact) {
      if (force_out) force_out->setZero();
      return forward_dynamics(p.reduced, tau);
    }
    const MatX E = contact_jacobian(model(), p);
    const Vec3 force = dsp_contact_force(p.reduced, E, contact_bias(model(), p), phi_dot, tau);
    if (force_out) *force_out = force;
    return forward_dynamics(p.reduced, tau, E.transpose() * force);
  }

  SimState advance_state(const SimState& s, double t, double h) {
    const bool contact = phase_ == Phase::DoubleSupport;
    const AccelerationLaw law = [&](const DynamicsPoint& p, const Configuration& q,
                                    const VecX& phi_dot, double time) {
      return accelerate(p, q, phi_dot, time, contact, nullptr, nullptr);
    };
    double moved = 0.0;
    const SimState next = integrate(model(), s, t, h, config_.integrator, law,
                                    config_.orthogonality_tolerance, &moved);
    traj_.max_reorthonormalization = std::max(traj_.max_reorthonormalization, moved);
    if (!finite(next)) abort(nan_message(t + h));
    return next;
  }

  static std::string nan_message(double t) {
    std::ostringstream msg;
    msg << "non-finite state at t = " << t;
    return msg.str();
  }

  double height(const SimState& s) const {
    return contact_point(model(), full_state(model(), s.q, s.phi_dot)).z() + offset_.z();
  }

  void single_support(double h) {
    SimState next = advance_state(state_, t_, h);
    const double before = height(state_);
    const double after = height(next);
    if (config_.contact && armed_ && detect_touchdown(before, after)) {
      touchdown(h, before);
      return;
    }
    if (after > config_.clearance) armed_ = true;
    state_ = std::move(next);
    t_ += h;
    ++traj_.steps;
    record(t_, Phase::SingleSupport);
  }

  void touchdown(double h, double before) {
    double lo = 0.0;
    double hi = h;
    SimState hit = state_;
    bool found = std::abs(before) <= config_.event_tolerance;
    for (int iter = 0; !found && iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      hit = advance_state(state_, t_, mid);
      const double z = height(hit);
      if (std::abs(z) <= config_.event_tolerance) {
        t_ += mid;
        found = true;
      } else if (z > 0) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (!found && hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, t_)) {
        break;
      }
    }
    if (!found) {
      std::ostringstream msg;
      msg << "event bisection failed near t = " << t_;
      abort(msg.str());
    }
    state_ = hit;
    ++traj_.steps;
    if (!traj_.samples.empty() && traj_.samples.back().t >= t_) traj_.samples.pop_back();

    const DynamicsPoint p = evaluate(model(), state_.q, state_.phi_dot);
    const MatX E = contact_jacobian(model(), p);
    const ImpactResult impact = impact_map(p.reduced, E, state_.phi_dot);
    state_.phi_dot = impact.phi_dot_plus;
    state_.V = com_velocities(model(), full_state(model(), state_.q, state_.phi_dot));
    ++traj_.impacts;

    phase_ = Phase::Impact;
    touchdown_point_ = contact_point(model(), p.state) + offset_;
    dsp_start_ = t_;
    record(t_, Phase::Impact, &impact.impulse);
    phase_ = Phase::DoubleSupport;
  }

  void double_support(double h) {
    state_ = advance_state(state_, t_, h);
    t_ += h;
    ++traj_.steps;
    const Sample& s = record(t_, Phase::DoubleSupport);
    const double stance_normal = s.gamma(2);
    const double swing_normal = s.contact_force.z();
    if (stance_normal <= 0.0 || t_ - dsp_start_ >= config_.dsp_max_duration) {
      ++traj_.liftoffs;
      relabel();
    } else if (swing_normal <= 0.0) {
      ++traj_.liftoffs;
      phase_ = Phase::SingleSupport;
      armed_ = false;
    }
  }

  void relabel() {
    const RobotModel& old_model = model();
    if (old_model.pinned_base_axis()) {
      abort("stance change requested but the base is pinned");
    }
    const FullState fs = full_state(old_model, state_.q, state_.phi_dot);
    const Vec3 E = contact_point(old_model, fs);
    std::array<Mat3, kLinkCount> A;
    VecX W(kAngularDim);
    SimState next;
    for (int i = 0; i < kLinkCount; ++i) {
      const int src = kLinkCount - 1 - i;
      A[i] = fs.A[src];
      W.segment<3>(3 * i) = fs.W[src];
      next.X[i] = state_.X[src] - E;
      next.V[i] = state_.V[src];
    }
    stance_ ^= 1;
    offset_ += E;
    next.q = configuration_from_orientations(model(), A);
    next.phi_dot = rates_from_body_rates(model(), next.q, W);
    state_ = std::move(next);
    ++traj_.relabels;
    phase_ = Phase::SingleSupport;
    armed_ = false;
    reference_ = Reference{state_.q, VecX(), 1.0};
  }

  const Sample& record(double t, Phase phase, const Vec3* impulse = nullptr) {
    const RobotModel& m = model();
    const DynamicsPoint p = evaluate(m, state_.q, state_.phi_dot);
    Sample s;
    s.t = t;
    s.phase = phase;
    s.stance = stance_;
    s.phi = configuration_coordinates(m, state_.q);
    s.phi_dot = state_.phi_dot;

    Vec3 force = Vec3::Zero();
    VecX tau;
    accelerate(p, state_.q, state_.phi_dot, t, phase == Phase::DoubleSupport, &tau, &force);
    s.tau = tau;
    s.contact_force = impulse ? *impulse : force;

    VecX external;
    if (phase == Phase::DoubleSupport) external = contact_force_map(m, p.state, force);
    const auto base = base_constraint(m, state_.q, state_.phi_dot);
    const ConstraintForces cf = constraint_forces(p.assembly, p.reduced.actuation * tau, external,
                                                  base ? &*base : nullptr);
    s.gamma = cf.gamma;
    s.lambda = cf.lambda;

    const ComPositions chain = chain_positions(m, p.state);
    const auto velocities = com_velocities(m, p.state);
    std::array<Vec3, kLinkCount> world;
    double drift = 0.0;
    for (int i = 0; i < kLinkCount; ++i) {
      world[i] = chain.X[i] + offset_;
      drift = std::max(drift, (chain.X[i] - state_.X[i]).norm());
    }
    s.kinetic = kinetic_energy(m, p.state, velocities);
    s.energy = total_energy(m, p.state, world, velocities);
    s.holonomic_drift = drift;
    s.contact_point = contact_point(m, p.state) + offset_;
    if (phase == Phase::DoubleSupport) {
      s.contact_drift = (s.contact_point - touchdown_point_).norm();
    }
    s.orthogonality = max_ball_residual(m, state_.q);

    traj_.max_holonomic_drift = std::max(traj_.max_holonomic_drift, s.holonomic_drift);
    traj_.max_contact_drift = std::max(traj_.max_contact_drift, s.contact_drift);

    const bool keep = phase != last_phase_ || traj_.steps % std::max(1, config_.record_every) == 0;
    last_phase_ = phase;
    const Sample* kept = &scratch_;
    if (keep) {
      traj_.samples.push_back(std::move(s));
      kept = &traj_.samples.back();
    } else {
      scratch_ = std::move(s);
    }
    const Sample& out = *kept;

    if (out.holonomic_drift > config_.drift_tolerance) {
      std::ostringstream msg;
      msg << "holonomic drift " << out.holonomic_drift << " m exceeds tolerance "
          << config_.drift_tolerance << " at t = " << t;
      abort(msg.str());
    }
    if (out.contact_drift > config_.drift_tolerance) {
      std::ostringstream msg;
      msg << "contact drift " << out.contact_drift << " m exceeds tolerance "
          << config_.drift_tolerance << " at t = " << t;
      abort(msg.str());
    }
    return out;
  }

  SimConfig config_;
  std::array<RobotModel, 2> models_;
  int n_;
  Reference reference_;
  Trajectory traj_;
  SimState state_;
  Sample scratch_;
  double t_ = 0.0;
  int stance_ = 0;
  Phase phase_ = Phase::SingleSupport;
  Phase last_phase_ = Phase::SingleSupport;
  bool armed_ = false;
  Vec3 offset_ = Vec3::Zero();
  Vec3 touchdown_point_ = Vec3::Zero();
  double dsp_start_ = 0.0;
};

}  // namespace

Trajectory simulate(const RobotModel& model, const SimConfig& config) {
  return Runner(model, config).run();
}

void check_trajectory(const Trajectory& trajectory) {
  const auto& s = trajectory.samples;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (!(s[k].t > s[k - 1].t)) {
      throw std::logic_error("trajectory time is not strictly increasing at sample " +
                             std::to_string(k));
    }
    if (!legal_transition(s[k - 1].phase, s[k].phase)) {
      throw std::logic_error("illegal phase transition " +
                             std::string(phase_name(s[k - 1].phase)) + " -> " +
                             std::string(phase_name(s[k].phase)) + " at sample " +
                             std::to_string(k));
    }
  }
}

}  // namespace biped
