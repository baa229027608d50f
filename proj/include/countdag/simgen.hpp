#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "countdag/count_matrix.hpp"
#include "countdag/graph.hpp"
#include "countdag/rng.hpp"

namespace countdag {

enum class GraphKind { ScaleFree, Hub, ErdosRenyi };

std::string_view to_string(GraphKind kind);
GraphKind parse_graph_kind(std::string_view name);

struct SimConfig {
  GraphKind graph_kind = GraphKind::ErdosRenyi;
  std::size_t p = 10;
  double er_gamma = 0.2;
  std::size_t hub_count = 2;
  double sf_power = 0.01;
  // Attachment weight of a degree-zero node; <= 0 means "use p".
  double sf_zero_appeal = 0.0;
  std::size_t n = 100;
  std::uint64_t seed = 1;
  double root_log_rate = 0.0;
  double overflow_threshold = 1e9;

  void validate() const;
  double zero_appeal() const { return sf_zero_appeal > 0.0 ? sf_zero_appeal : static_cast<double>(p); }
};

// Per-kind defaults used in the benchmark tables: ER gamma 0.2 (p <= 10) or
// 0.02, 2 hubs (p <= 10) or 5, scale-free power 0.01 with zero appeal p.
SimConfig table_defaults(GraphKind kind, std::size_t p);

struct GeneratedGraph {
  Dag dag;
  Ordering ordering;
};

struct WeightedDag {
  Dag dag;
  // theta_st keyed by edge t -> s.
  std::map<Edge, double> weights;

  double weight(NodeId from, NodeId to) const { return weights.at({from, to}); }
};

// Undirected skeleton for the configured kind, oriented by a uniform random permutation.
GeneratedGraph gen_graph(const SimConfig& cfg, SplitMix64& rng);

// i.i.d. U([-0.5, 0.5]) weight per edge, drawn in sorted edge order.
WeightedDag gen_weights(const Dag& dag, SplitMix64& rng);

struct SampleStats {
  std::size_t attempted_rows = 0;
  std::size_t rejected_rows = 0;
};

// Recursive Poisson sampling along the ordering. Row i uses its own substream
// keyed by (stream_key, i, attempt), so output does not depend on `threads`.
// Rows with any count above cfg.overflow_threshold are redrawn; more than 10%
// rejected rows raises RowRejectionLimit.
CountMatrix sample_data(const WeightedDag& wdag, const Ordering& ordering, std::size_t n, const SimConfig& cfg,
                        std::uint64_t stream_key, std::size_t threads = 1, SampleStats* stats = nullptr);

}  // namespace countdag
