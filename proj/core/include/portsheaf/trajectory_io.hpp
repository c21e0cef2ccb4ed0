#pragma once

#include "portsheaf/trajectory.hpp"

#include <filesystem>
#include <iosfwd>

namespace portsheaf {

// CSV layout:
//   # shift=<shift> step=<step> [token=<k>]
//   t,<label_1>,...,<label_n>
//   <t_0>,<x_0>,...
// Times are absolute node times j * step. Numbers use 17 significant digits,
// so a write/read round trip reproduces values, step and shift exactly.
// Tags are not serialised.

void write_csv(const Trajectory& e, std::ostream& out);
Trajectory read_csv(std::istream& in);

void save_csv(const Trajectory& e, const std::filesystem::path& path);
Trajectory load_csv(const std::filesystem::path& path);

}  // namespace portsheaf
