#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "countdag/graph.hpp"

namespace countdag {

// n observations (rows) by p variables (columns) of non-negative integer counts.
// Entries are held as doubles so columns feed the GLM directly; every entry is
// validated to be a finite non-negative integer.
class CountMatrix {
 public:
  CountMatrix() = default;
  explicit CountMatrix(Eigen::MatrixXd values, std::vector<std::string> labels = {});

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  double operator()(std::size_t i, std::size_t j) const { return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  auto column(NodeId j) const { return values_.col(static_cast<Eigen::Index>(j)); }
  // Columns `cols` gathered into a dense n x |cols| design matrix.
  Eigen::MatrixXd columns(std::span<const NodeId> cols) const;

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  // Column index for a label, or cols() when absent.
  std::size_t find_label(const std::string& label) const;

  friend bool operator==(const CountMatrix& a, const CountMatrix& b) {
    return a.labels_ == b.labels_ && a.values_.rows() == b.values_.rows() &&
           a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
  }

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> labels_;
};

}  // namespace countdag
