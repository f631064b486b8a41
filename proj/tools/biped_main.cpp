// biped: simulate, verify and inspect the reduced seven-link biped model.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "biped/check.hpp"
#include "biped/model.hpp"
#include "biped/sim.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kConfigError = 1, kNumericalError = 2, kIoError = 3 };

struct Options {
  std::string model;
  std::string sim;
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 42;
  int samples = 1000;
  bool dump_all = false;
  bool quiet = false;
};

biped::RobotModel load(const Options& o) {
  if (o.model.empty()) return biped::load_model(biped::sample_model_config());
  return biped::load_model_file(o.model);
}

// Output goes to --out when given, else stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw std::ios_base::failure("cannot write output file '" + path + "'");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void close(const std::string& path) {
    if (!file_.is_open()) return;
    file_.close();
    if (file_.fail()) throw std::ios_base::failure("error writing output file '" + path + "'");
  }

 private:
  std::ofstream file_;
};

int cmd_simulate(const Options& o) {
  const biped::RobotModel model = load(o);
  const biped::SimConfig config = biped::load_sim_config_file(model, o.sim);

  const auto start = std::chrono::steady_clock::now();
  const biped::Trajectory traj = biped::simulate(model, config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Sink sink(o.out);
  if (o.format == "json") {
    biped::write_json(sink.stream(), traj);
  } else {
    biped::write_csv(sink.stream(), traj);
  }
  sink.close(o.out);

  std::ostream& log = o.out.empty() ? std::cerr : std::cout;
  if (!o.quiet) {
    double e_first = 0.0, e_drift = 0.0;
    if (!traj.samples.empty()) {
      e_first = traj.samples.front().energy;
      for (const auto& s : traj.samples) {
        if (s.phase != biped::Phase::SingleSupport || s.stance != 0) break;
        e_drift = std::max(e_drift, std::abs(s.energy - e_first));
      }
    }
    log << "steps " << traj.steps << '\n'
        << "samples " << traj.samples.size() << '\n'
        << "impacts " << traj.impacts << '\n'
        << "liftoffs " << traj.liftoffs << '\n'
        << "stance changes " << traj.relabels << '\n'
        << "max holonomic drift " << traj.max_holonomic_drift << " m\n"
        << "max contact drift " << traj.max_contact_drift << " m\n"
        << "energy drift (first single support) " << e_drift << " J\n"
        << "wall time " << wall << " s\n";
  }
  if (!traj.ok) {
    std::cerr << "numerical failure: " << traj.error << '\n';
    if (!traj.samples.empty()) std::cerr << "last valid sample at t = " << traj.samples.back().t << '\n';
    return kNumericalError;
  }
  return kOk;
}

int cmd_check(const Options& o) {
  const biped::RobotModel model = load(o);
  const auto start = std::chrono::steady_clock::now();
  const biped::CheckReport report = biped::run_checks(model, o.seed, o.samples);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  biped::print_report(std::cout, report);
  if (!o.quiet) std::cout << "wall time " << wall << " s\n";
  if (!report.all_passed()) {
    std::cerr << "failed checks:";
    for (const auto& r : report.results) {
      if (!r.passed()) std::cerr << ' ' << r.name;
    }
    std::cerr << '\n';
    return kNumericalError;
  }
  return kOk;
}

int cmd_reduce(const Options& o) {
  const biped::RobotModel model = load(o);
  biped::SimConfig config = biped::SimConfig::defaults(model);
  if (!o.sim.empty()) config = biped::load_sim_config_file(model, o.sim);
  const biped::VecX rates =
      config.initial_rates.size() == model.dof() ? config.initial_rates : biped::VecX::Zero(model.dof());
  const biped::DynamicsPoint p = biped::evaluate(model, config.initial, rates);

  Sink sink(o.out);
  std::ostream& out = sink.stream();
  const auto& r = p.reduced;
  biped::write_matrix(out, "J", r.J);
  biped::write_matrix(out, "H", r.H);
  biped::write_matrix(out, "G", r.G);
  biped::write_matrix(out, "D", r.D);
  if (o.dump_all) {
    const auto& a = p.assembly;
    biped::write_matrix(out, "P1", a.P1);
    biped::write_matrix(out, "P2", a.P2);
    biped::write_matrix(out, "P3", a.P3);
    biped::write_matrix(out, "P4", a.P4);
    biped::write_matrix(out, "P5", a.P5);
    biped::write_matrix(out, "P6", a.P6);
    biped::write_matrix(out, "P7", a.P7);
    biped::write_matrix(out, "P8", p.lift.P8);
    biped::write_matrix(out, "P9", p.lift.P9);
    biped::write_matrix(out, "P10", p.lift.P10);
    biped::write_matrix(out, "P11", p.lift.P11);
    biped::write_matrix(out, "P12", p.basis.P12);
    biped::write_matrix(out, "P13", p.basis.P13);
  }
  sink.close(o.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced Newton-Euler dynamics of a seven-link biped"};
  app.require_subcommand(1);
  Options o;

  auto model_opt = [&](CLI::App* c) {
    c->add_option("--model", o.model, "Robot model config (defaults to the built-in sample robot)");
    c->add_flag("-q,--quiet", o.quiet, "Suppress the summary");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Run a simulation and export the trajectory");
  model_opt(simulate);
  simulate->add_option("--sim", o.sim, "Simulation config")->required();
  simulate->add_option("--out", o.out, "Output file (stdout when omitted)");
  simulate->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI::App* check = app.add_subcommand("check", "Run the randomized invariant suite");
  model_opt(check);
  check->add_option("--seed", o.seed, "Random seed");
  check->add_option("--samples", o.samples, "Number of random states")->check(CLI::PositiveNumber);

  CLI::App* reduce = app.add_subcommand("reduce", "Print J, H, G, D at a state");
  model_opt(reduce);
  reduce->add_option("--sim", o.sim, "Sim config whose [initial] section gives the state");
  reduce->add_option("--out", o.out, "Output file (stdout when omitted)");
  reduce->add_flag("--dump-all", o.dump_all, "Also print P1 to P13");

  CLI::App* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(o);
    if (check->parsed()) return cmd_check(o);
    if (reduce->parsed()) return cmd_reduce(o);
    if (version->parsed()) {
      std::cout << "biped " << kVersion << '\n';
      return kOk;
    }
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const biped::ModelError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const biped::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  return kOk;
}
