#pragma once

#include "portsheaf/config.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace portsheaf::cli {

enum class Command {
  list,
  simulate,
  audit,
  check_sheaf,
  verify_diagram,
  ph_simulate,
  ph_audit_power,
  ph_verify_diagram,
  mp_simulate,
  mp_audit_rates,
  mp_check_noninteraction,
  mp_verify_diagram,
};

std::string command_name(Command c);

struct RunConfig {
  Command command = Command::simulate;
  std::string system;  ///< built-in name; ignored when config is set
  std::filesystem::path config;
  double length = 10.0;
  double step = 1e-3;
  double tolerance = 1e-5;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = ".";
};

enum ExitStatus : int { kPass = 0, kCheckFailed = 1, kConfigError = 2 };

/// Runs one command, writes CSVs and report.json into output_dir and returns
/// the exit status. Diagnostics go to `log`.
int run(const RunConfig& config, std::ostream& log);

/// Built-in systems, one per line, in a fixed order.
std::string list_examples();

struct SheafSuite {
  std::size_t probes = 0;
  std::size_t functoriality_checks = 0;
  std::size_t functoriality_failures = 0;
  std::size_t gluing_checks = 0;
  std::size_t gluing_failures = 0;
  std::size_t separation_violations = 0;
  double max_residual = 0.0;

  bool pass() const {
    return probes > 0 && functoriality_failures == 0 && gluing_failures == 0 &&
           separation_violations == 0;
  }
};

/// Seeded probes of the closed behaviour of a built-in or configured system,
/// checked for restriction functoriality, glue-of-restrictions round trips
/// and separation. Initial states are drawn from [-magnitude, magnitude].
SheafSuite sheaf_suite(const LoadedSystem& system, std::size_t count, std::uint64_t seed,
                       double length, double step, double magnitude);

/// Parses argv (CLI11) and runs; returns the process exit status.
int main_entry(int argc, char** argv);

}  // namespace portsheaf::cli
