#pragma once

#include "portsheaf/trajectory.hpp"

namespace portsheaf {

// Private construction hooks for the library's own translation units.
class TrajectoryAccess {
 public:
  static Eigen::MatrixXd& values(Trajectory& t) { return t.values_; }
  static std::map<std::string, NodeTag>& tags(Trajectory& t) { return t.tags_; }
  static void set_token(Trajectory& t, std::optional<int> token) { t.token_ = token; }
};

}  // namespace portsheaf
