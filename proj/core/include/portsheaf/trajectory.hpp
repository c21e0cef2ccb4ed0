#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace portsheaf {

using Index = Eigen::Index;

/// Node-aligned metadata that travels with a trajectory through restriction
/// and gluing. `samples` has one row per grid node; `fixed` holds data that
/// does not depend on time (e.g. the matrix of a quadratic form).
struct NodeTag {
  std::string kind;
  Eigen::MatrixXd samples;
  Eigen::MatrixXd fixed;

  friend bool operator==(const NodeTag& a, const NodeTag& b);
};

/// A sampled curve on [0, length] with time-shift bookkeeping.
///
/// Values are stored one row per grid node (0, h, 2h, ..., length) and one
/// column per labelled channel. The shift is kept as an anchor minus an
/// integer number of grid steps, so restricting by grid-aligned offsets never
/// rounds: shift() and field_time() of a restricted trajectory are bit-equal
/// to the values obtained by restricting in any other grid-aligned order.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(double step, double shift, Eigen::MatrixXd values,
             std::vector<std::string> labels);

  /// Dimension-0 trajectory carrying a token (element of a constant sheaf).
  static Trajectory token(int token, double length, double step, double shift = 0.0);

  double step() const noexcept { return step_; }
  double shift() const noexcept {
    return anchor_ - static_cast<double>(shift_nodes_) * step_;
  }
  Index nodes() const noexcept { return values_.rows(); }
  Index dim() const noexcept { return values_.cols(); }
  Index last() const noexcept { return values_.rows() - 1; }
  double length() const noexcept { return static_cast<double>(last()) * step_; }

  /// Local node time t_j = j h.
  double node_time(Index j) const noexcept { return static_cast<double>(j) * step_; }
  /// Argument handed to time-varying fields at node j, i.e. t_j - shift.
  double field_time(Index j) const noexcept {
    return static_cast<double>(j + shift_nodes_) * step_ - anchor_;
  }

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Eigen::VectorXd value(Index j) const { return values_.row(j).transpose(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::optional<int>& token_id() const noexcept { return token_; }

  /// Column index of a label; throws DimensionMismatch if absent.
  Index channel(const std::string& label) const;
  /// Columns selected by label, in the order given.
  Eigen::MatrixXd channels(const std::vector<std::string>& labels) const;

  const std::map<std::string, NodeTag>& tags() const noexcept { return tags_; }
  const NodeTag* tag(const std::string& name) const;
  void set_tag(const std::string& name, NodeTag tag);
  void clear_tags() { tags_.clear(); }

  /// New trajectory on the same grid with the same shift bookkeeping and
  /// no tags or token. Used by sheaf morphisms, which preserve length and shift.
  Trajectory with_values(Eigen::MatrixXd values, std::vector<std::string> labels) const;

  /// Dimension-0 trajectory on the same grid and shift carrying `token`.
  Trajectory as_token(int token) const;

  /// Rows [first, first + count) as a trajectory whose node 0 sits at the
  /// old node `first`; shift bookkeeping advances by `first` steps.
  Trajectory slice(Index first, Index count) const;

  /// Bit-exact equality of grid, shift, values, labels, token and tags.
  friend bool identical(const Trajectory& a, const Trajectory& b);

 private:
  friend class TrajectoryAccess;

  double step_ = 1e-3;
  double anchor_ = 0.0;
  std::int64_t shift_nodes_ = 0;
  Eigen::MatrixXd values_ = Eigen::MatrixXd::Zero(1, 0);
  std::vector<std::string> labels_;
  std::optional<int> token_;
  std::map<std::string, NodeTag> tags_;
};

bool identical(const Trajectory& a, const Trajectory& b);

/// Sup-norm distance over values and shift. Infinite when the trajectories
/// live on different grids, have different shapes or carry different tokens.
double sup_distance(const Trajectory& a, const Trajectory& b);

/// Default channel names x0, x1, ... (prefix configurable).
std::vector<std::string> indexed_labels(const std::string& prefix, Index count);

}  // namespace portsheaf
