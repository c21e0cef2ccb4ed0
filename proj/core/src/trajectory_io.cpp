#include "portsheaf/trajectory_io.hpp"

#include "portsheaf/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace portsheaf {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw Error(ErrorKind::IoError, "line " + std::to_string(line) + ": '" + s + "' is not a number");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

}  // namespace

void write_csv(const Trajectory& e, std::ostream& out) {
  out << "# shift=" << num(e.shift()) << " step=" << num(e.step());
  if (e.token_id()) out << " token=" << *e.token_id();
  out << "\nt";
  for (const auto& l : e.labels()) out << ',' << l;
  out << '\n';
  for (Index j = 0; j < e.nodes(); ++j) {
    out << num(static_cast<double>(j) * e.step());
    for (Index c = 0; c < e.dim(); ++c) out << ',' << num(e.values()(j, c));
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "failed to write trajectory");
}

Trajectory read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::IoError, "empty trajectory file");
  strip_cr(line);
  if (line.rfind("# ", 0) != 0) throw Error(ErrorKind::IoError, "missing '# shift=... step=...' line");

  double shift = 0.0;
  double step = 0.0;
  bool have_shift = false;
  bool have_step = false;
  std::optional<int> token;
  std::istringstream meta(line.substr(2));
  std::string field;
  while (meta >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::IoError, "malformed header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string val = field.substr(eq + 1);
    if (key == "shift") {
      shift = parse_double(val, 1);
      have_shift = true;
    } else if (key == "step") {
      step = parse_double(val, 1);
      have_step = true;
    } else if (key == "token") {
      token = static_cast<int>(parse_double(val, 1));
    } else {
      throw Error(ErrorKind::IoError, "unknown header field '" + key + "'");
    }
  }
  if (!have_shift || !have_step) throw Error(ErrorKind::IoError, "header needs shift and step");

  if (!std::getline(in, line)) throw Error(ErrorKind::IoError, "missing column header");
  strip_cr(line);
  std::vector<std::string> labels = split(line);
  if (labels.empty() || labels.front() != "t") throw Error(ErrorKind::IoError, "first column must be 't'");
  labels.erase(labels.begin());
  const auto dim = static_cast<Index>(labels.size());

  std::vector<double> flat;
  Index rows = 0;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (static_cast<Index>(cells.size()) != dim + 1) {
      throw Error(ErrorKind::IoError, "line " + std::to_string(lineno) + " has " +
                                          std::to_string(cells.size()) + " cells, expected " +
                                          std::to_string(dim + 1));
    }
    const double t = parse_double(cells[0], lineno);
    const double expected = static_cast<double>(rows) * step;
    if (std::abs(t - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw Error(ErrorKind::IoError, "line " + std::to_string(lineno) + ": time " + cells[0] +
                                          " is off the grid (expected " + num(expected) + ")");
    }
    for (Index c = 0; c < dim; ++c) flat.push_back(parse_double(cells[static_cast<std::size_t>(c + 1)], lineno));
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::IoError, "trajectory file has no samples");

  Eigen::MatrixXd values(rows, dim);
  for (Index j = 0; j < rows; ++j) {
    for (Index c = 0; c < dim; ++c) values(j, c) = flat[static_cast<std::size_t>(j * dim + c)];
  }
  if (token) {
    if (dim != 0) throw Error(ErrorKind::IoError, "token trajectories carry no channels");
    return Trajectory::token(*token, static_cast<double>(rows - 1) * step, step, shift);
  }
  return Trajectory(step, shift, std::move(values), std::move(labels));
}

void save_csv(const Trajectory& e, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
  write_csv(e, out);
}

Trajectory load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  return read_csv(in);
}

}  // namespace portsheaf
