#include "portsheaf/trajectory.hpp"

#include "portsheaf/errors.hpp"
#include "trajectory_access.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace portsheaf {

bool operator==(const NodeTag& a, const NodeTag& b) {
  auto same = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
  };
  return a.kind == b.kind && same(a.samples, b.samples) && same(a.fixed, b.fixed);
}

Trajectory::Trajectory(double step, double shift, Eigen::MatrixXd values,
                       std::vector<std::string> labels)
    : step_(step), anchor_(shift), values_(std::move(values)), labels_(std::move(labels)) {
  if (!(step_ > 0.0) || !std::isfinite(step_)) {
    throw Error(ErrorKind::GridMismatch, "grid step must be positive and finite");
  }
  if (values_.rows() < 1) {
    throw Error(ErrorKind::GridMismatch, "a trajectory needs at least one node");
  }
  if (labels_.empty() && values_.cols() > 0) {
    labels_ = indexed_labels("x", values_.cols());
  }
  if (static_cast<Index>(labels_.size()) != values_.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                "label count " + std::to_string(labels_.size()) + " != channel count " +
                    std::to_string(values_.cols()));
  }
}

Trajectory Trajectory::token(int token, double length, double step, double shift) {
  const double q = length / step;
  const auto k = static_cast<Index>(std::llround(q));
  if (length < 0.0 || std::abs(q - static_cast<double>(k)) > 1e-12 * std::max(1.0, q)) {
    throw Error(ErrorKind::MisalignedOffset, "token length is not a multiple of the step");
  }
  Trajectory t(step, shift, Eigen::MatrixXd::Zero(k + 1, 0), {});
  t.token_ = token;
  return t;
}

Index Trajectory::channel(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) {
    throw Error(ErrorKind::DimensionMismatch, "no channel labelled '" + label + "'");
  }
  return static_cast<Index>(it - labels_.begin());
}

Eigen::MatrixXd Trajectory::channels(const std::vector<std::string>& labels) const {
  Eigen::MatrixXd out(values_.rows(), static_cast<Index>(labels.size()));
  for (std::size_t c = 0; c < labels.size(); ++c) {
    out.col(static_cast<Index>(c)) = values_.col(channel(labels[c]));
  }
  return out;
}

const NodeTag* Trajectory::tag(const std::string& name) const {
  const auto it = tags_.find(name);
  return it == tags_.end() ? nullptr : &it->second;
}

void Trajectory::set_tag(const std::string& name, NodeTag tag) {
  if (tag.samples.rows() != values_.rows()) {
    throw Error(ErrorKind::GridMismatch, "tag '" + name + "' is not node-aligned");
  }
  tags_[name] = std::move(tag);
}

Trajectory Trajectory::with_values(Eigen::MatrixXd values, std::vector<std::string> labels) const {
  if (values.rows() != values_.rows()) {
    throw Error(ErrorKind::GridMismatch, "sheaf morphisms must preserve the grid");
  }
  Trajectory out = *this;
  out.values_ = std::move(values);
  out.labels_ = std::move(labels);
  out.token_.reset();
  out.tags_.clear();
  if (out.labels_.empty() && out.values_.cols() > 0) {
    out.labels_ = indexed_labels("y", out.values_.cols());
  }
  if (static_cast<Index>(out.labels_.size()) != out.values_.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "label count does not match channel count");
  }
  return out;
}

Trajectory Trajectory::as_token(int token) const {
  Trajectory out = with_values(Eigen::MatrixXd::Zero(values_.rows(), 0), {});
  out.token_ = token;
  return out;
}

Trajectory Trajectory::slice(Index first, Index count) const {
  if (first < 0 || count < 1 || first + count > values_.rows()) {
    throw Error(ErrorKind::OutOfRange, "slice [" + std::to_string(first) + ", " +
                                           std::to_string(first + count) + ") outside " +
                                           std::to_string(values_.rows()) + " nodes");
  }
  Trajectory out = *this;
  out.values_ = values_.middleRows(first, count);
  out.shift_nodes_ = shift_nodes_ + first;
  for (auto& [name, tag] : out.tags_) {
    tag.samples = tag.samples.middleRows(first, count).eval();
  }
  return out;
}

bool identical(const Trajectory& a, const Trajectory& b) {
  return a.step_ == b.step_ && a.shift() == b.shift() && a.values_.rows() == b.values_.rows() &&
         a.values_.cols() == b.values_.cols() && (a.values_.array() == b.values_.array()).all() &&
         a.labels_ == b.labels_ && a.token_ == b.token_ && a.tags_ == b.tags_;
}

double sup_distance(const Trajectory& a, const Trajectory& b) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (a.step() != b.step() || a.nodes() != b.nodes() || a.dim() != b.dim() ||
      a.token_id() != b.token_id()) {
    return inf;
  }
  double d = std::abs(a.shift() - b.shift());
  if (a.dim() > 0) {
    d = std::max(d, (a.values() - b.values()).cwiseAbs().maxCoeff());
  }
  return d;
}

std::vector<std::string> indexed_labels(const std::string& prefix, Index count) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace portsheaf
