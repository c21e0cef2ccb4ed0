#pragma once

#include "portsheaf/metriplectic.hpp"
#include "portsheaf/ode_behavior.hpp"
#include "portsheaf/port_hamiltonian.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace portsheaf {

enum class SystemKind { ode, port_hamiltonian, metriplectic };

std::string_view to_string(SystemKind kind) noexcept;

/// A system resolved from a built-in name or a JSON document. `field` is
/// always the closed dynamics; `ph` / `mp` are set for structured systems.
struct LoadedSystem {
  std::string name;
  SystemKind kind = SystemKind::ode;
  nlohmann::json parameters;  ///< fully resolved, defaults included
  VectorField field;
  std::vector<std::string> labels;
  Eigen::VectorXd initial_state;
  std::optional<PHSystem> ph;
  std::optional<MetriplecticSystem> mp;
};

struct BuiltinInfo {
  std::string name;
  SystemKind kind;
  std::string summary;
  nlohmann::json defaults;
};

/// Built-in systems in a fixed order.
const std::vector<BuiltinInfo>& builtin_systems();

/// Throws ConfigError for unknown names, listing the built-ins.
LoadedSystem builtin_system(const std::string& name, const nlohmann::json& overrides = nlohmann::json::object());

/// Either {"system": <builtin>, "parameters": {...}} or
/// {"type": "linear" | "port_hamiltonian" | "metriplectic", ...} with dense
/// matrices and polynomial potentials {"monomials": [[...]], "coefficients": [...]}.
/// "initial_state" is optional in both forms.
LoadedSystem system_from_json(const nlohmann::json& doc);

/// Reads and parses a JSON file; IoError when unreadable, ConfigError when invalid.
LoadedSystem load_system_file(const std::filesystem::path& path);

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what);
Polynomial polynomial_from_json(const nlohmann::json& j, const std::string& what);

}  // namespace portsheaf
