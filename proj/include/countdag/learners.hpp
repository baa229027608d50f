#pragma once

#include <optional>
#include <string>
#include <vector>

#include "countdag/count_matrix.hpp"
#include "countdag/graph.hpp"
#include "countdag/poisson_glm.hpp"

namespace countdag {

struct LearnConfig {
  // Largest conditioning-set size tested by Or-PPGM; defaults to p - 2.
  std::optional<std::size_t> max_level;
  // Exactly one of a fixed level or the exponent b of alpha_n = 2 (1 - Phi(n^b)).
  std::optional<double> alpha;
  std::optional<double> alpha_exponent;
  FitOptions fit;
  std::size_t threads = 1;

  void validate(std::size_t p) const;
  double resolve_alpha(std::size_t n) const;
  std::size_t resolve_max_level(std::size_t p) const;
};

// Last Wald test run on an edge, kept or removed.
struct EdgeEvidence {
  Edge edge;
  std::vector<NodeId> conditioning;  // S, without the tested parent
  double z = 0.0;
  double p_value = 1.0;
  bool kept = false;
};

struct LearnResult {
  Dag dag;
  double alpha = 0.0;
  std::size_t tests = 0;
  std::size_t fits = 0;
  std::vector<EdgeEvidence> evidence;  // sorted by edge
  std::vector<std::string> warnings;
};

// PC-style search from the complete ordered DAG: at level l every remaining
// edge t -> s is tested against each l-subset S of pa(s) \ {t}, and removed at
// the first non-rejected H0: theta_{st|S+t} = 0.
LearnResult or_ppgm(const CountMatrix& data, const Ordering& ordering, const LearnConfig& cfg);

// One regression of every node on all of its predecessors; the parents are the
// covariates whose Wald test rejects.
LearnResult or_lpgm(const CountMatrix& data, const Ordering& ordering, const LearnConfig& cfg);

}  // namespace countdag
