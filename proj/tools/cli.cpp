#include "cli.hpp"

#include "portsheaf/errors.hpp"
#include "portsheaf/interval_sheaf.hpp"
#include "portsheaf/trajectory_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#ifndef PORTSHEAF_VERSION
#define PORTSHEAF_VERSION "unknown"
#endif

namespace portsheaf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Context {
  const RunConfig& cfg;
  const LoadedSystem& sys;
  json& residuals;
  json& notes;
  json& report;

  fs::path file(const std::string& name) const { return cfg.output_dir / name; }
};

const PHSystem& require_ph(const Context& c) {
  if (!c.sys.ph) {
    throw Error(ErrorKind::ConfigError,
                "'" + c.sys.name + "' is not a port-Hamiltonian system (try mass_spring)");
  }
  return *c.sys.ph;
}

const MetriplecticSystem& require_mp(const Context& c) {
  if (!c.sys.mp) {
    throw Error(ErrorKind::ConfigError, "'" + c.sys.name + "' is not a metriplectic system (try rigid_body)");
  }
  return *c.sys.mp;
}

double field_residual(const LoadedSystem& sys, const Trajectory& e) {
  return stencil_residual(e, 0, e.dim(), [&](Index j) { return sys.field(e.field_time(j), e.value(j)); });
}

// Closed run from the configured initial state. Returns false on blow-up.
bool simulate_closed(const Context& c, Trajectory& out) {
  try {
    out = integrate(c.sys.field, c.sys.initial_state, 0.0, c.cfg.length, c.cfg.step, c.sys.labels);
  } catch (const BlowUpError& b) {
    out = b.truncated();
    save_csv(out, c.file("trajectory.csv"));
    std::ostringstream os;
    os << "blow-up: |x| exceeded " << kBlowUpThreshold << " after t = " << b.last_valid_time();
    c.notes.push_back(os.str());
    c.residuals["blowup_time"] = b.last_valid_time();
    return false;
  }
  save_csv(out, c.file("trajectory.csv"));
  return true;
}

bool cmd_simulate(const Context& c) {
  Trajectory e = Trajectory::token(0, 0.0, c.cfg.step);
  if (!simulate_closed(c, e)) return true;
  const double r = field_residual(c.sys, e);
  c.residuals["membership"] = number(r);
  if (c.sys.ph) {
    c.residuals["energy_drift"] = energy_audit(c.sys.ph->H, e).max_drift;
  }
  if (c.sys.mp) {
    const DegeneracyAudit a = degeneracy_audit(*c.sys.mp, e);
    c.residuals["energy_drift"] = a.energy_drift;
    c.residuals["min_entropy_rate"] = a.min_entropy_rate;
  }
  return r <= c.cfg.tolerance;
}

bool cmd_ph_simulate(const Context& c) {
  const PHSystem& sys = require_ph(c);
  Trajectory e = Trajectory::token(0, 0.0, c.cfg.step);
  if (!simulate_closed(c, e)) return true;
  const double r = field_residual(c.sys, e);
  const Trajectory extended = embed_closed(sys, e, c.cfg.tolerance);
  const auto [a_leg, e_leg] = projections(sys);
  save_csv(extended, c.file("extended.csv"));
  save_csv(e_leg(extended), c.file("output.csv"));
  const double er = extended_residual(sys, extended);
  c.residuals["membership"] = number(r);
  c.residuals["extended_membership"] = number(er);
  c.residuals["energy_drift"] = energy_audit(sys.H, e).max_drift;
  return r <= c.cfg.tolerance && er <= c.cfg.tolerance;
}

bool cmd_ph_audit_power(const Context& c) {
  const PHSystem& sys = require_ph(c);
  const Index m = sys.m;
  const Trajectory e = simulate_iso(ph_iso_system(sys), c.sys.initial_state,
                                    [m](double s) { return Eigen::VectorXd::Constant(m, std::sin(s)).eval(); },
                                    0.0, c.cfg.length, c.cfg.step);
  save_csv(e, c.file("port_trajectory.csv"));
  save_csv(iso_output(ph_iso_system(sys), e), c.file("output.csv"));
  const PowerAudit a = power_balance_audit(sys, e);
  c.notes.push_back("input u(t) = sin t on every port channel");
  c.residuals["balance_defect"] = a.balance_defect;
  c.residuals["supply_excess"] = a.supply_excess;
  return a.balance_defect <= c.cfg.tolerance && a.supply_excess <= c.cfg.tolerance;
}

bool cmd_mp_simulate(const Context& c) {
  require_mp(c);
  return cmd_simulate(c);
}

bool cmd_mp_audit_rates(const Context& c) {
  const MetriplecticSystem& sys = require_mp(c);
  const Index m = sys.m;
  const Trajectory e = simulate_port_metriplectic(
      sys, c.sys.initial_state,
      [m](double s) { return Eigen::VectorXd::Constant(m, 0.5 * std::sin(s)).eval(); },
      [m](double) { return Eigen::VectorXd::Zero(m).eval(); }, 0.0, c.cfg.length, c.cfg.step);
  save_csv(e, c.file("port_trajectory.csv"));
  save_csv(iso_output(port_metriplectic_system(sys), e), c.file("output.csv"));
  c.notes.push_back("inputs u(t) = 0.5 sin t, tau_in = 0");
  bool conditions_hold = true;
  for (const auto& cond : port_conditions(sys, e)) {
    c.residuals["condition " + cond.name] = number(cond.value);
    if (!(cond.value <= 1e-8)) {
      conditions_hold = false;
      c.notes.push_back("condition '" + cond.name + "' violated at node " + std::to_string(cond.node));
    }
  }
  const RateAudit a = rate_audit(sys, e);
  c.residuals["energy_rate_defect"] = a.energy_defect;
  c.residuals["entropy_rate_defect"] = a.entropy_defect;
  return conditions_hold && a.energy_defect <= c.cfg.tolerance && a.entropy_defect <= c.cfg.tolerance;
}

bool cmd_mp_check_noninteraction(const Context& c) {
  const MetriplecticSystem& sys = require_mp(c);
  const auto points = probe_points(sys.n, 100, c.cfg.seed, 2.0);
  const NoninteractionResiduals r = noninteraction_residuals(sys, points);
  const MetriplecticStructure s = check_metriplectic_structure(sys, points);
  c.residuals["j_grad_s"] = r.j_grad_s;
  c.residuals["g_grad_h"] = r.g_grad_h;
  c.residuals["antisymmetry"] = s.antisymmetry;
  c.residuals["extended_min_eigenvalue"] = s.extended_min_eigenvalue;
  return r.j_grad_s <= 1e-10 && r.g_grad_h <= 1e-10;
}

bool cmd_verify_diagram(const Context& c) {
  std::vector<Trajectory> probes;
  DiagramReport rep;
  if (c.sys.ph) {
    probes = closed_probes(*c.sys.ph, 5, c.cfg.seed, c.cfg.length, c.cfg.step);
    rep = build_ph_diagram(*c.sys.ph, probes, c.cfg.tolerance);
  } else if (c.sys.mp) {
    probes = metriplectic_probes(*c.sys.mp, 5, c.cfg.seed, c.cfg.length, c.cfg.step);
    rep = build_metriplectic_diagram(*c.sys.mp, probes, c.cfg.tolerance);
    c.notes.push_back("input channel tau is labelled tau_in");
    c.notes.push_back("port side condition enforced as B tau = A u = 0");
  } else {
    throw Error(ErrorKind::ConfigError,
                "verify-diagram needs a port-Hamiltonian or metriplectic system, got '" + c.sys.name + "'");
  }
  c.notes.push_back("closed machine: a_leg is the constant leg, e_leg is the enclosing e_leg after embedding");
  for (std::size_t i = 0; i < probes.size(); ++i) {
    save_csv(probes[i], c.file("probe_" + std::to_string(i) + ".csv"));
  }
  for (const auto& [name, value] : rep.worst_by_name()) c.residuals[name] = number(value);
  for (const auto& n : rep.notes) c.notes.push_back(n);
  c.report["diagram"] = to_json(rep);
  return rep.pass;
}

bool cmd_ph_verify_diagram(const Context& c) {
  require_ph(c);
  return cmd_verify_diagram(c);
}

bool cmd_mp_verify_diagram(const Context& c) {
  require_mp(c);
  return cmd_verify_diagram(c);
}

bool cmd_check_sheaf(const Context& c) {
  const double length = std::min(c.cfg.length, 2.0);
  if (length < c.cfg.length) c.notes.push_back("probe length capped at 2");
  // |x0| <= 0.3 keeps blowup probes at most 0.75 over length 2.
  const double magnitude = c.sys.name == "blowup" ? 0.3 : 2.0;
  const SheafSuite s = sheaf_suite(c.sys, 10, c.cfg.seed, length, c.cfg.step, magnitude);
  c.residuals["functoriality_failures"] = s.functoriality_failures;
  c.residuals["gluing_failures"] = s.gluing_failures;
  c.residuals["separation_violations"] = s.separation_violations;
  c.residuals["max_membership"] = number(s.max_residual);
  return s.pass();
}

bool cmd_audit(const Context& c) {
  if (c.sys.ph) return cmd_ph_audit_power(c);
  if (c.sys.mp) return cmd_mp_audit_rates(c);
  Trajectory e = Trajectory::token(0, 0.0, c.cfg.step);
  if (!simulate_closed(c, e)) return true;
  const double r = field_residual(c.sys, e);
  std::vector<Eigen::VectorXd> points;
  for (Index j = 0; j < e.nodes(); j += std::max<Index>(1, e.nodes() / 8)) points.push_back(e.value(j));
  c.residuals["membership"] = number(r);
  c.residuals["lipschitz_estimate"] = number(lipschitz_estimate(c.sys.field, points));
  return r <= c.cfg.tolerance;
}

bool dispatch(const Context& c) {
  switch (c.cfg.command) {
    case Command::simulate: return cmd_simulate(c);
    case Command::audit: return cmd_audit(c);
    case Command::check_sheaf: return cmd_check_sheaf(c);
    case Command::verify_diagram: return cmd_verify_diagram(c);
    case Command::ph_simulate: return cmd_ph_simulate(c);
    case Command::ph_audit_power: return cmd_ph_audit_power(c);
    case Command::ph_verify_diagram: return cmd_ph_verify_diagram(c);
    case Command::mp_simulate: return cmd_mp_simulate(c);
    case Command::mp_audit_rates: return cmd_mp_audit_rates(c);
    case Command::mp_check_noninteraction: return cmd_mp_check_noninteraction(c);
    case Command::mp_verify_diagram: return cmd_mp_verify_diagram(c);
    case Command::list: return true;
  }
  return false;
}

bool is_config_kind(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigError:
    case ErrorKind::IoError:
    case ErrorKind::StructureViolation:
    case ErrorKind::NoninteractionViolation:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::GridMismatch:
    case ErrorKind::MisalignedOffset:
    case ErrorKind::OutOfRange:
      return true;
    default:
      return false;
  }
}

void validate(const RunConfig& cfg) {
  if (!(cfg.length > 0.0) || !std::isfinite(cfg.length)) throw Error(ErrorKind::ConfigError, "--length must be positive");
  if (!(cfg.step > 0.0) || !std::isfinite(cfg.step)) throw Error(ErrorKind::ConfigError, "--step must be positive");
  if (!(cfg.tolerance > 0.0)) throw Error(ErrorKind::ConfigError, "--tol must be positive");
  const double nodes = cfg.length / cfg.step;
  if (!(nodes >= 10.0) || !(nodes <= 1e7)) {
    throw Error(ErrorKind::ConfigError, "length/step must lie in [10, 1e7], got " + std::to_string(nodes));
  }
  if (cfg.system.empty() && cfg.config.empty()) {
    throw Error(ErrorKind::ConfigError, "one of --system or --config is required");
  }
}

}  // namespace

std::string command_name(Command c) {
  switch (c) {
    case Command::list: return "list";
    case Command::simulate: return "simulate";
    case Command::audit: return "audit";
    case Command::check_sheaf: return "check-sheaf";
    case Command::verify_diagram: return "verify-diagram";
    case Command::ph_simulate: return "ph simulate";
    case Command::ph_audit_power: return "ph audit-power";
    case Command::ph_verify_diagram: return "ph verify-diagram";
    case Command::mp_simulate: return "mp simulate";
    case Command::mp_audit_rates: return "mp audit-rates";
    case Command::mp_check_noninteraction: return "mp check-noninteraction";
    case Command::mp_verify_diagram: return "mp verify-diagram";
  }
  return "unknown";
}

SheafSuite sheaf_suite(const LoadedSystem& system, std::size_t count, std::uint64_t seed,
                       double length, double step, double magnitude) {
  OdeBehavior behavior;
  behavior.field = system.field;
  behavior.step = step;
  behavior.labels = system.labels;
  const BehaviorSheaf sheaf = as_behavior_sheaf(behavior);

  std::vector<Trajectory> probes;
  for (const auto& x0 : probe_points(system.field.dim, count, seed, magnitude)) {
    probes.push_back(sheaf.sampler(x0, length, 0.5));
  }

  SheafSuite out;
  out.probes = probes.size();
  for (const auto& e : probes) out.max_residual = std::max(out.max_residual, sheaf.residual(e));

  const Index last = probes.empty() ? 0 : probes.front().last();
  auto at = [step](Index k) { return static_cast<double>(k) * step; };
  const std::vector<double> cuts = {at(last / 4), at(last / 2), at((7 * last) / 10)};
  const AxiomReport axioms = check_sheaf_axioms(sheaf, probes, cuts);
  out.gluing_checks = axioms.checks.size();
  out.gluing_failures = axioms.gluing_failures();
  out.separation_violations = axioms.separation_violations();

  // (length, offset) pairs: outer restriction, then inner relative to it.
  const std::vector<std::array<Index, 4>> windows = {
      {last / 2, last / 4, last / 4, last / 8},
      {last - last / 3, last / 3, last / 5, last / 7},
      {last, 0, last / 2, last / 2},
      {last / 3, last / 6, 0, 0},
  };
  for (const auto& e : probes) {
    for (const auto& w : windows) {
      ++out.functoriality_checks;
      if (!restriction_functorial(e, at(w[0]), at(w[1]), at(w[2]), at(w[3]))) ++out.functoriality_failures;
    }
  }
  return out;
}

std::string list_examples() {
  std::ostringstream os;
  for (const auto& b : builtin_systems()) {
    os << b.name << "  [" << to_string(b.kind) << "]  " << b.summary << "  defaults: " << b.defaults.dump()
       << '\n';
  }
  return os.str();
}

int run(const RunConfig& cfg, std::ostream& log) {
  if (cfg.command == Command::list) {
    log << list_examples();
    return kPass;
  }

  json report = {{"command", command_name(cfg.command)},
                 {"version", PORTSHEAF_VERSION},
                 {"pass", false},
                 {"residuals", json::object()},
                 {"notes", json::array()}};
  std::optional<LoadedSystem> sys;
  try {
    validate(cfg);
    sys = cfg.config.empty() ? builtin_system(cfg.system) : load_system_file(cfg.config);
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create '" + cfg.output_dir.string() + "': " + ec.message());
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  }

  report["system"] = sys->name;
  report["config"] = {{"system", sys->name},
                      {"kind", to_string(sys->kind)},
                      {"parameters", sys->parameters},
                      {"length", cfg.length},
                      {"step", cfg.step},
                      {"tol", cfg.tolerance},
                      {"seed", cfg.seed}};

  int status = kCheckFailed;
  const Context ctx{cfg, *sys, report["residuals"], report["notes"], report};
  try {
    const bool pass = dispatch(ctx);
    report["pass"] = pass;
    status = pass ? kPass : kCheckFailed;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    report["notes"].push_back(e.what());
    if (is_config_kind(e.kind())) return kConfigError;
    status = kCheckFailed;
  }

  try {
    std::ofstream out(cfg.output_dir / "report.json", std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write report.json");
    out << report.dump(2) << '\n';
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  }

  log << command_name(cfg.command) << " " << sys->name << ": " << (status == kPass ? "pass" : "FAIL") << '\n';
  for (const auto& [name, value] : report["residuals"].items()) log << "  " << name << " = " << value << '\n';
  for (const auto& note : report["notes"]) log << "  note: " << note.get<std::string>() << '\n';
  return status;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Interval-sheaf behaviours, machines and port-control diagrams"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add = [&cfg](CLI::App* parent, const std::string& name, const std::string& help, Command command) {
    CLI::App* sub = parent->add_subcommand(name, help);
    sub->add_option("--system", cfg.system, "built-in system name");
    sub->add_option("--config", cfg.config, "JSON system configuration")->check(CLI::ExistingFile);
    sub->add_option("--length", cfg.length, "trajectory length")->capture_default_str();
    sub->add_option("--step", cfg.step, "grid step")->capture_default_str();
    sub->add_option("--tol", cfg.tolerance, "pass tolerance")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "probe seed")->capture_default_str();
    sub->add_option("--out", cfg.output_dir, "output directory")->capture_default_str();
    sub->callback([&cfg, command] { cfg.command = command; });
    return sub;
  };

  app.add_subcommand("list", "list built-in systems")->callback([&cfg] { cfg.command = Command::list; });
  add(&app, "simulate", "integrate the closed dynamics", Command::simulate);
  add(&app, "audit", "power or rate audit for the system class", Command::audit);
  add(&app, "check-sheaf", "restriction, gluing and separation on seeded probes", Command::check_sheaf);
  add(&app, "verify-diagram", "verify the port-control diagram", Command::verify_diagram);

  CLI::App* ph = app.add_subcommand("ph", "port-Hamiltonian systems");
  ph->require_subcommand(1);
  add(ph, "simulate", "closed run, embedding and port output", Command::ph_simulate);
  add(ph, "audit-power", "power balance under u = sin t", Command::ph_audit_power);
  add(ph, "verify-diagram", "port-control diagram", Command::ph_verify_diagram);

  CLI::App* mp = app.add_subcommand("mp", "metriplectic systems");
  mp->require_subcommand(1);
  add(mp, "simulate", "closed run with degeneracy audit", Command::mp_simulate);
  add(mp, "audit-rates", "energy and entropy rate audit of the port system", Command::mp_audit_rates);
  add(mp, "check-noninteraction", "noninteraction residuals on seeded points", Command::mp_check_noninteraction);
  add(mp, "verify-diagram", "port-control diagram", Command::mp_verify_diagram);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }
  return run(cfg, std::cout);
}

}  // namespace portsheaf::cli
