#include "countdag/count_matrix.hpp"

#include <cmath>

#include "countdag/error.hpp"

namespace countdag {

CountMatrix::CountMatrix(Eigen::MatrixXd values, std::vector<std::string> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
  if (labels_.empty()) labels_ = default_labels(cols());
  if (labels_.size() != cols()) {
    throw InvalidData("count matrix has " + std::to_string(cols()) + " columns but " +
                      std::to_string(labels_.size()) + " labels");
  }
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      const double v = values_(i, j);
      if (!std::isfinite(v) || v < 0.0 || v != std::floor(v)) {
        throw InvalidData("entry (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                          ") is not a non-negative integer count");
      }
    }
  }
}

Eigen::MatrixXd CountMatrix::columns(std::span<const NodeId> cols) const {
  Eigen::MatrixXd out(values_.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = values_.col(static_cast<Eigen::Index>(cols[k]));
  }
  return out;
}

std::size_t CountMatrix::find_label(const std::string& label) const {
  for (std::size_t j = 0; j < labels_.size(); ++j) {
    if (labels_[j] == label) return j;
  }
  return labels_.size();
}

}  // namespace countdag
