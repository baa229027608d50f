#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "countdag/count_matrix.hpp"
#include "countdag/graph.hpp"
#include "countdag/poisson_glm.hpp"

namespace countdag {

enum class Criterion { Bic, Aic };

std::string_view to_string(Criterion c);
Criterion parse_criterion(std::string_view name);

struct ScoreConfig {
  Criterion criterion = Criterion::Bic;
  // Cap on |pa(s)|; unrestricted when unset.
  std::optional<std::size_t> max_parents;
  FitOptions fit;
  std::size_t threads = 1;

  // Per-parameter penalty: log n for BIC, 2 for AIC.
  double penalty(std::size_t n) const;
};

struct NodeScore {
  NodeId node = 0;
  std::vector<NodeId> parents;
  // 2 n nll(theta_hat) + penalty |parents|; +inf when the fit fails. Lower is better.
  double score = 0.0;
};

NodeScore node_score(const CountMatrix& data, NodeId s, std::vector<NodeId> parents, const ScoreConfig& cfg);

struct SearchResult {
  Dag dag;
  double total_score = 0.0;
  std::vector<NodeScore> node_scores;  // indexed by node
  std::size_t forward_steps = 0;
  std::size_t backward_steps = 0;
  std::size_t fits = 0;
};

// Greedy K2-style forward parent addition along the ordering, then global
// backward deletion of the edge whose removal lowers the total score most.
// Ties go to the smallest node index.
SearchResult pk2(const CountMatrix& data, const Ordering& ordering, const ScoreConfig& cfg);

}  // namespace countdag
