#include "portsheaf/config.hpp"

#include "portsheaf/errors.hpp"

#include <algorithm>
#include <fstream>

namespace portsheaf {

using nlohmann::json;

namespace {

double number(const json& params, const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end() || !it->is_number()) {
    throw Error(ErrorKind::ConfigError, "parameter '" + key + "' must be a number");
  }
  return it->get<double>();
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorKind::ConfigError, what + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::ConfigError, what + " must hold numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

json merged(json defaults, const json& overrides) {
  if (!overrides.is_object()) throw Error(ErrorKind::ConfigError, "parameters must be an object");
  for (const auto& [key, value] : overrides.items()) {
    if (!defaults.contains(key)) throw Error(ErrorKind::ConfigError, "unknown parameter '" + key + "'");
    defaults[key] = value;
  }
  return defaults;
}

std::string builtin_names() {
  std::string out;
  for (const auto& b : builtin_systems()) out += (out.empty() ? "" : ", ") + b.name;
  return out;
}

LoadedSystem from_ph(PHSystem sys, json params, Eigen::VectorXd x0) {
  LoadedSystem out;
  out.name = sys.name;
  out.kind = SystemKind::port_hamiltonian;
  out.parameters = std::move(params);
  out.field = closed_behavior(sys).field;
  out.labels = sys.state_labels;
  out.initial_state = std::move(x0);
  out.ph = std::move(sys);
  return out;
}

LoadedSystem from_mp(MetriplecticSystem sys, json params, Eigen::VectorXd x0) {
  LoadedSystem out;
  out.name = sys.name;
  out.kind = SystemKind::metriplectic;
  out.parameters = std::move(params);
  out.field = closed_metriplectic_behavior(sys).field;
  out.labels = sys.state_labels;
  out.initial_state = std::move(x0);
  out.mp = std::move(sys);
  return out;
}

LoadedSystem from_field(std::string name, VectorField field, json params, Eigen::VectorXd x0) {
  LoadedSystem out;
  out.name = std::move(name);
  out.kind = SystemKind::ode;
  out.parameters = std::move(params);
  out.labels = indexed_labels("x", field.dim);
  out.field = std::move(field);
  out.initial_state = std::move(x0);
  return out;
}

void check_initial(const LoadedSystem& s) {
  if (s.initial_state.size() != s.field.dim) {
    throw Error(ErrorKind::ConfigError, "initial_state of '" + s.name + "' needs " +
                                            std::to_string(s.field.dim) + " entries");
  }
}

}  // namespace

std::string_view to_string(SystemKind kind) noexcept {
  switch (kind) {
    case SystemKind::ode: return "ode";
    case SystemKind::port_hamiltonian: return "port_hamiltonian";
    case SystemKind::metriplectic: return "metriplectic";
  }
  return "ode";
}

const std::vector<BuiltinInfo>& builtin_systems() {
  static const std::vector<BuiltinInfo> systems = {
      {"blowup", SystemKind::ode, "x' = x^2, finite escape at t = 1/x0",
       {{"initial_state", {1.0}}}},
      {"linear", SystemKind::ode, "x' = A x with a constant matrix",
       {{"A", {{0.0, 1.0}, {-1.0, -0.1}}}, {"initial_state", {1.0, 0.0}}}},
      {"mass_spring", SystemKind::port_hamiltonian,
       "mass on a Hooke spring with a force port on the momentum",
       {{"k", 1.0}, {"m", 1.0}, {"initial_state", {1.0, 0.0}}}},
      {"rigid_body", SystemKind::metriplectic,
       "free rigid body with entropy-producing projector damping and a rotation port",
       {{"I1", 1.0}, {"I2", 2.0}, {"I3", 3.0}, {"gamma", 0.1}, {"initial_state", {1.0, 0.5, 0.2}}}},
  };
  return systems;
}

LoadedSystem builtin_system(const std::string& name, const json& overrides) {
  const auto& all = builtin_systems();
  const auto it = std::find_if(all.begin(), all.end(), [&](const BuiltinInfo& b) { return b.name == name; });
  if (it == all.end()) {
    throw Error(ErrorKind::ConfigError, "unknown system '" + name + "'; built-ins: " + builtin_names());
  }
  const json p = merged(it->defaults, overrides);
  const Eigen::VectorXd x0 = vector_from_json(p.at("initial_state"), "initial_state");
  LoadedSystem out;
  if (name == "blowup") {
    out = from_field(name, blowup_field(), p, x0);
  } else if (name == "linear") {
    const Eigen::MatrixXd a = matrix_from_json(p.at("A"), "A");
    if (a.rows() != a.cols()) throw Error(ErrorKind::ConfigError, "A must be square");
    out = from_field(name, linear_field(a), p, x0);
  } else if (name == "mass_spring") {
    out = from_ph(mass_spring_system(number(p, "k"), number(p, "m")), p, x0);
  } else {
    const Eigen::Vector3d inertia(number(p, "I1"), number(p, "I2"), number(p, "I3"));
    out = from_mp(rigid_body_system(inertia, number(p, "gamma")), p, x0);
  }
  check_initial(out);
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::ConfigError, what + " must be a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw Error(ErrorKind::ConfigError, what + " rows must be arrays of equal length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw Error(ErrorKind::ConfigError, what + " must hold numbers");
      m(static_cast<Index>(r), static_cast<Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

Polynomial polynomial_from_json(const json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("monomials") || !j.contains("coefficients")) {
    throw Error(ErrorKind::ConfigError, what + " needs 'monomials' and 'coefficients'");
  }
  try {
    return Polynomial(j.at("monomials").get<std::vector<std::vector<int>>>(),
                      j.at("coefficients").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, what + ": " + e.what());
  }
}

LoadedSystem system_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::ConfigError, "configuration must be a JSON object");
  if (doc.contains("system")) {
    if (!doc["system"].is_string()) throw Error(ErrorKind::ConfigError, "'system' must be a string");
    json overrides = doc.value("parameters", json::object());
    if (doc.contains("initial_state")) overrides["initial_state"] = doc["initial_state"];
    return builtin_system(doc["system"].get<std::string>(), overrides);
  }
  if (!doc.contains("type") || !doc["type"].is_string()) {
    throw Error(ErrorKind::ConfigError, "configuration needs 'system' or 'type'");
  }
  const std::string type = doc["type"].get<std::string>();
  const std::string name = doc.value("name", type);
  auto mat = [&](const char* key) {
    if (!doc.contains(key)) throw Error(ErrorKind::ConfigError, std::string("missing matrix '") + key + "'");
    return matrix_from_json(doc[key], key);
  };
  auto zeros_or = [&](const char* key, Index rows, Index cols) -> Eigen::MatrixXd {
    return doc.contains(key) ? mat(key) : Eigen::MatrixXd::Zero(rows, cols);
  };
  LoadedSystem out;
  if (type == "linear") {
    const Eigen::MatrixXd a = mat("A");
    if (a.rows() != a.cols()) throw Error(ErrorKind::ConfigError, "A must be square");
    out = from_field(name, linear_field(a), doc, Eigen::VectorXd::Zero(a.rows()));
  } else if (type == "port_hamiltonian") {
    const Eigen::MatrixXd j = mat("J");
    const Eigen::MatrixXd b = mat("B");
    const Eigen::MatrixXd r = zeros_or("R", j.rows(), j.rows());
    if (!doc.contains("H")) throw Error(ErrorKind::ConfigError, "missing Hamiltonian 'H'");
    out = from_ph(linear_ph_system(j, r, b, polynomial_from_json(doc["H"], "H"), name), doc,
                  Eigen::VectorXd::Zero(j.rows()));
  } else if (type == "metriplectic") {
    const Eigen::MatrixXd j = mat("J");
    const Index n = j.rows();
    const Eigen::MatrixXd g = zeros_or("G", n, n);
    const Eigen::MatrixXd b = doc.contains("B") ? mat("B") : Eigen::MatrixXd::Zero(n, 0);
    const Index m = b.cols();
    if (!doc.contains("H") || !doc.contains("S")) {
      throw Error(ErrorKind::ConfigError, "metriplectic systems need 'H' and 'S'");
    }
    out = from_mp(linear_metriplectic_system(j, g, b, zeros_or("A", n, m), zeros_or("Jt", m, m),
                                             zeros_or("Gt", m, m), polynomial_from_json(doc["H"], "H"),
                                             polynomial_from_json(doc["S"], "S"), name),
                  doc, Eigen::VectorXd::Zero(n));
  } else {
    throw Error(ErrorKind::ConfigError, "unknown system type '" + type + "'");
  }
  if (doc.contains("initial_state")) out.initial_state = vector_from_json(doc["initial_state"], "initial_state");
  check_initial(out);
  return out;
}

LoadedSystem load_system_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open configuration '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return system_from_json(doc);
}

}  // namespace portsheaf
