#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include "json.hpp"

#include "biped/format.hpp"
#include "biped/sim.hpp"

namespace biped {

namespace pt = boost::property_tree;

namespace {

pt::ptree::path_type key_path(const std::string& key) { return pt::ptree::path_type(key, '/'); }

void reject_unknown(const pt::ptree& section, const std::string& name,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, child] : section) {
    if (!allowed.count(key)) throw ModelError(name.empty() ? key : name + "." + key, "unknown key");
  }
}

std::vector<double> numbers(const pt::ptree& section, const std::string& name,
                            const std::string& key) {
  try {
    return parse_numbers(section.get<std::string>(key_path(key)));
  } catch (const std::invalid_argument& e) {
    throw ModelError(name + "." + key, e.what());
  }
}

double scalar(const pt::ptree& section, const std::string& name, const std::string& key,
              double fallback) {
  if (!section.get_child_optional(key_path(key))) return fallback;
  const auto v = numbers(section, name, key);
  if (v.size() != 1) throw ModelError(name + "." + key, "expected one number");
  return v[0];
}

bool flag(const pt::ptree& section, const std::string& name, const std::string& key,
          bool fallback) {
  const auto node = section.get_optional<std::string>(key_path(key));
  if (!node) return fallback;
  if (*node == "true" || *node == "1" || *node == "yes") return true;
  if (*node == "false" || *node == "0" || *node == "no") return false;
  throw ModelError(name + "." + key, "expected true or false, got '" + *node + "'");
}

// One value broadcast to all coordinates, or exactly n values.
VecX per_dof(const pt::ptree& section, const std::string& name, const std::string& key, int n) {
  const auto v = numbers(section, name, key);
  if (v.size() == 1) return VecX::Constant(n, v[0]);
  if (static_cast<int>(v.size()) != n) {
    throw ModelError(name + "." + key, "expected 1 or " + std::to_string(n) + " numbers, got " +
                                           std::to_string(v.size()));
  }
  return Eigen::Map<const VecX>(v.data(), n);
}

void read_initial(const RobotModel& model, const pt::ptree& section, SimConfig& c) {
  std::set<std::string> allowed{"rates"};
  for (int j = 1; j <= kLinkCount; ++j) allowed.insert("joint." + std::to_string(j));
  reject_unknown(section, "initial", allowed);

  for (int j = 1; j <= kLinkCount; ++j) {
    const std::string key = "joint." + std::to_string(j);
    if (!section.get_child_optional(key_path(key))) continue;
    const JointSpec& spec = model.joint(j);
    const auto v = numbers(section, "initial", key);
    if (static_cast<int>(v.size()) != spec.dof) {
      throw ModelError("initial." + key, "expected " + std::to_string(spec.dof) + " numbers");
    }
    if (spec.kind == JointKind::Ball) {
      c.initial.rotation[j - 1] = euler_to_rotation(Vec3(v[0], v[1], v[2]));
    } else {
      Vec3 a = Vec3::Zero();
      for (int k = 0; k < spec.dof; ++k) a(k) = v[k];
      c.initial.angles[j - 1] = a;
      c.initial.rotation[j - 1] = joint_rotation(spec, a);
    }
  }
  if (section.get_child_optional(key_path("rates"))) {
    const auto v = numbers(section, "initial", "rates");
    if (static_cast<int>(v.size()) != model.dof()) {
      throw ModelError("initial.rates", "expected " + std::to_string(model.dof()) + " numbers");
    }
    c.initial_rates = Eigen::Map<const VecX>(v.data(), model.dof());
  }
}

}  // namespace

SimConfig load_sim_config(const RobotModel& model, std::string_view text) {
  pt::ptree root;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ModelError("", std::string("parse failure: ") + e.what());
  }
  reject_unknown(root, "", {"sim", "initial", "controller"});

  SimConfig c = SimConfig::defaults(model);
  const int n = model.dof();

  if (auto s = root.get_child_optional(key_path("sim"))) {
    reject_unknown(*s, "sim",
                   {"dt", "duration", "integrator", "contact", "event_tolerance",
                    "drift_tolerance", "clearance", "dsp_max_duration", "record_every"});
    c.dt = scalar(*s, "sim", "dt", c.dt);
    c.duration = scalar(*s, "sim", "duration", c.duration);
    if (auto name = s->get_optional<std::string>(key_path("integrator"))) {
      if (*name == "rk4") {
        c.integrator = Integrator::RK4;
      } else if (*name == "semi-implicit-euler") {
        c.integrator = Integrator::SemiImplicitEuler;
      } else {
        throw ModelError("sim.integrator", "expected rk4 or semi-implicit-euler, got '" + *name + "'");
      }
    }
    c.contact = flag(*s, "sim", "contact", c.contact);
    c.event_tolerance = scalar(*s, "sim", "event_tolerance", c.event_tolerance);
    c.drift_tolerance = scalar(*s, "sim", "drift_tolerance", c.drift_tolerance);
    c.clearance = scalar(*s, "sim", "clearance", c.clearance);
    c.dsp_max_duration = scalar(*s, "sim", "dsp_max_duration", c.dsp_max_duration);
    c.record_every = static_cast<int>(scalar(*s, "sim", "record_every", c.record_every));
  }
  if (!(c.dt > 0.0)) throw ModelError("sim.dt", "dt must be positive");
  if (!(c.duration >= 0.0)) throw ModelError("sim.duration", "duration must be non-negative");
  if (!(c.event_tolerance > 0.0)) throw ModelError("sim.event_tolerance", "must be positive");
  if (!(c.drift_tolerance > 0.0)) throw ModelError("sim.drift_tolerance", "must be positive");
  if (!(c.dsp_max_duration > 0.0)) throw ModelError("sim.dsp_max_duration", "must be positive");
  if (c.record_every < 1) throw ModelError("sim.record_every", "must be at least 1");

  if (auto s = root.get_child_optional(key_path("initial"))) read_initial(model, *s, c);

  if (auto s = root.get_child_optional(key_path("controller"))) {
    reject_unknown(*s, "controller", {"enabled", "kp", "kd", "target", "duration"});
    c.controller = flag(*s, "controller", "enabled", true);
    if (s->get_child_optional(key_path("kp"))) c.kp = per_dof(*s, "controller", "kp", n);
    if (s->get_child_optional(key_path("kd"))) c.kd = per_dof(*s, "controller", "kd", n);
    if (s->get_child_optional(key_path("target"))) {
      c.reference_delta = per_dof(*s, "controller", "target", n);
    }
    c.reference_duration = scalar(*s, "controller", "duration", c.reference_duration);
    if ((c.kp.array() < 0).any()) throw ModelError("controller.kp", "gains must be non-negative");
    if ((c.kd.array() < 0).any()) throw ModelError("controller.kd", "gains must be non-negative");
    if (!(c.reference_duration > 0.0)) throw ModelError("controller.duration", "must be positive");
  }
  return c;
}

SimConfig load_sim_config_file(const RobotModel& model, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open sim config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_sim_config(model, buf.str());
}

std::vector<std::string> trajectory_columns(int dof) {
  std::vector<std::string> c{"t"};
  auto series = [&](const std::string& stem, int count) {
    for (int k = 1; k <= count; ++k) c.push_back(stem + "_" + std::to_string(k));
  };
  series("phi", dof);
  series("phidot", dof);
  series("tau", dof);
  series("gamma", kHolonomicDim);
  series("lambda", kNonholonomicDim);
  for (const char* s : {"gc_x", "gc_y", "gc_z", "E_x", "E_y", "E_z", "energy", "kinetic",
                        "holonomic_drift", "contact_drift", "orthogonality", "phase", "stance"}) {
    c.emplace_back(s);
  }
  return c;
}

namespace {

std::map<std::string, std::string> column_units() {
  return {{"t", "s"},
          {"phi", "rad"},
          {"phidot", "rad/s"},
          {"tau", "N m"},
          {"gamma", "N"},
          {"lambda", "N m"},
          {"gc", "N (N s on Impact rows)"},
          {"E", "m"},
          {"energy", "J"},
          {"kinetic", "J"},
          {"holonomic_drift", "m"},
          {"contact_drift", "m"},
          {"orthogonality", "1"}};
}

}  // namespace

void write_csv(std::ostream& out, const Trajectory& trajectory) {
  const auto columns = trajectory_columns(trajectory.dof);
  for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << columns[k];
  out << '\n';
  auto put = [&](const auto& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) out << ',' << format_double(v(k));
  };
  for (const Sample& s : trajectory.samples) {
    out << format_double(s.t);
    put(s.phi);
    put(s.phi_dot);
    put(s.tau);
    put(s.gamma);
    put(s.lambda);
    put(s.contact_force);
    put(s.contact_point);
    for (double v : {s.energy, s.kinetic, s.holonomic_drift, s.contact_drift, s.orthogonality}) {
      out << ',' << format_double(v);
    }
    out << ',' << phase_name(s.phase) << ',' << s.stance << '\n';
  }
}

void write_json(std::ostream& out, const Trajectory& trajectory) {
  using nlohmann::json;
  auto vec = [](const auto& v) {
    std::vector<double> x(v.data(), v.data() + v.size());
    return json(x);
  };
  json meta = {{"dof", trajectory.dof},
               {"dt", trajectory.dt},
               {"integrator", std::string(integrator_name(trajectory.integrator))},
               {"steps", trajectory.steps},
               {"impacts", trajectory.impacts},
               {"liftoffs", trajectory.liftoffs},
               {"relabels", trajectory.relabels},
               {"max_holonomic_drift", trajectory.max_holonomic_drift},
               {"max_contact_drift", trajectory.max_contact_drift},
               {"max_reorthonormalization", trajectory.max_reorthonormalization},
               {"ok", trajectory.ok},
               {"error", trajectory.error},
               {"units", column_units()}};
  json samples = json::array();
  for (const Sample& s : trajectory.samples) {
    samples.push_back({{"t", s.t},
                       {"phase", std::string(phase_name(s.phase))},
                       {"stance", s.stance},
                       {"phi", vec(s.phi)},
                       {"phidot", vec(s.phi_dot)},
                       {"tau", vec(s.tau)},
                       {"gamma", vec(s.gamma)},
                       {"lambda", vec(s.lambda)},
                       {"gc", vec(s.contact_force)},
                       {"E", vec(s.contact_point)},
                       {"energy", s.energy},
                       {"kinetic", s.kinetic},
                       {"holonomic_drift", s.holonomic_drift},
                       {"contact_drift", s.contact_drift},
                       {"orthogonality", s.orthogonality}});
  }
  out << json{{"metadata", meta}, {"samples", samples}}.dump(1) << '\n';
}

}  // namespace biped
