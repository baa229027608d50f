#include "countdag/simgen.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "countdag/error.hpp"
#include "countdag/parallel.hpp"

namespace countdag {
namespace {

constexpr std::size_t kMaxRowAttempts = 100;
// Beyond this rate a draw cannot stay below any sensible overflow threshold.
constexpr double kRateCeiling = 1e15;

std::size_t uniform_index(SplitMix64& rng, std::size_t bound) {
  // Rejection keeps the draw unbiased for any bound.
  const std::uint64_t b = bound;
  const std::uint64_t limit = SplitMix64::max() - SplitMix64::max() % b;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::size_t>(x % b);
}

std::vector<std::pair<NodeId, NodeId>> erdos_renyi(std::size_t p, double gamma, SplitMix64& rng) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId a = 0; a < p; ++a) {
    for (NodeId b = a + 1; b < p; ++b) {
      if (rng.uniform() < gamma) edges.emplace_back(a, b);
    }
  }
  return edges;
}

std::vector<std::pair<NodeId, NodeId>> hub(std::size_t p, std::size_t hubs) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId v = hubs; v < p; ++v) edges.emplace_back((v - hubs) % hubs, v);
  return edges;
}

// Sequential attachment, one edge per new node: node k links to an earlier
// node i with probability proportional to degree(i)^power + zero_appeal.
std::vector<std::pair<NodeId, NodeId>> scale_free(std::size_t p, double power, double zero_appeal,
                                                  SplitMix64& rng) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::size_t> degree(p, 0);
  std::vector<double> weight(p, 0.0);
  for (NodeId k = 1; k < p; ++k) {
    double total = 0.0;
    for (NodeId i = 0; i < k; ++i) {
      weight[i] = (degree[i] > 0 ? std::pow(static_cast<double>(degree[i]), power) : 0.0) + zero_appeal;
      total += weight[i];
    }
    const double u = rng.uniform() * total;
    NodeId target = k - 1;
    double acc = 0.0;
    for (NodeId i = 0; i < k; ++i) {
      acc += weight[i];
      if (u < acc) {
        target = i;
        break;
      }
    }
    edges.emplace_back(target, k);
    ++degree[target];
    ++degree[k];
  }
  return edges;
}

}  // namespace

std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::ScaleFree: return "scale_free";
    case GraphKind::Hub: return "hub";
    case GraphKind::ErdosRenyi: return "erdos_renyi";
  }
  return "unknown";
}

GraphKind parse_graph_kind(std::string_view name) {
  if (name == "scale_free" || name == "scale-free" || name == "sf") return GraphKind::ScaleFree;
  if (name == "hub") return GraphKind::Hub;
  if (name == "erdos_renyi" || name == "erdos-renyi" || name == "er") return GraphKind::ErdosRenyi;
  throw std::invalid_argument("unknown graph kind '" + std::string(name) + "'");
}

void SimConfig::validate() const {
  if (p < 1) throw std::invalid_argument("p must be at least 1");
  if (!(er_gamma >= 0.0 && er_gamma <= 1.0)) throw std::invalid_argument("er_gamma must lie in [0, 1]");
  if (graph_kind == GraphKind::Hub && (hub_count < 1 || hub_count > p)) {
    throw std::invalid_argument("hub_count must lie in [1, p]");
  }
  if (!std::isfinite(sf_power) || sf_power < 0.0) throw std::invalid_argument("sf_power must be >= 0");
  if (!std::isfinite(root_log_rate)) throw std::invalid_argument("root_log_rate must be finite");
  if (!(overflow_threshold > 0.0)) throw std::invalid_argument("overflow_threshold must be positive");
}

SimConfig table_defaults(GraphKind kind, std::size_t p) {
  SimConfig cfg;
  cfg.graph_kind = kind;
  cfg.p = p;
  cfg.er_gamma = p <= 10 ? 0.2 : 0.02;
  cfg.hub_count = p <= 10 ? 2 : 5;
  cfg.sf_power = 0.01;
  cfg.sf_zero_appeal = static_cast<double>(p);
  return cfg;
}

GeneratedGraph gen_graph(const SimConfig& cfg, SplitMix64& rng) {
  cfg.validate();
  std::vector<std::pair<NodeId, NodeId>> skeleton;
  switch (cfg.graph_kind) {
    case GraphKind::ErdosRenyi: skeleton = erdos_renyi(cfg.p, cfg.er_gamma, rng); break;
    case GraphKind::Hub: skeleton = hub(cfg.p, cfg.hub_count); break;
    case GraphKind::ScaleFree: skeleton = scale_free(cfg.p, cfg.sf_power, cfg.zero_appeal(), rng); break;
  }

  std::vector<NodeId> perm(cfg.p);
  for (NodeId i = 0; i < cfg.p; ++i) perm[i] = i;
  for (std::size_t i = cfg.p; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
  Ordering ordering(std::move(perm));

  std::vector<Edge> edges;
  edges.reserve(skeleton.size());
  for (auto [a, b] : skeleton) {
    edges.push_back(ordering.precedes(a, b) ? Edge{a, b} : Edge{b, a});
  }
  return {Dag(cfg.p, std::move(edges)), std::move(ordering)};
}

WeightedDag gen_weights(const Dag& dag, SplitMix64& rng) {
  WeightedDag out{dag, {}};
  for (const Edge& e : dag.edges()) out.weights.emplace(e, rng.uniform() - 0.5);
  return out;
}

CountMatrix sample_data(const WeightedDag& wdag, const Ordering& ordering, std::size_t n, const SimConfig& cfg,
                        std::uint64_t stream_key, std::size_t threads, SampleStats* stats) {
  cfg.validate();
  const std::size_t p = wdag.dag.size();
  if (!is_consistent(wdag.dag, ordering)) throw std::invalid_argument("weighted DAG violates the ordering");
  if (wdag.weights.size() != wdag.dag.edge_count()) throw std::invalid_argument("weights do not match the edges");

  std::vector<std::vector<std::pair<NodeId, double>>> terms(p);
  for (NodeId s = 0; s < p; ++s) {
    for (NodeId t : wdag.dag.parents(s)) terms[s].emplace_back(t, wdag.weight(t, s));
  }
  const double root_rate = std::exp(cfg.root_log_rate);

  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  std::vector<std::size_t> attempts(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<double> row(p);
    for (std::size_t attempt = 0; attempt < kMaxRowAttempts; ++attempt) {
      SplitMix64 rng(SplitMix64::derive(stream_key, {i, attempt}));
      bool ok = true;
      for (NodeId s : ordering.perm()) {
        double rate = root_rate;
        if (!terms[s].empty()) {
          double eta = 0.0;
          for (auto [t, theta] : terms[s]) eta += theta * row[t];
          rate = std::exp(eta);
        }
        if (!(rate <= kRateCeiling)) {
          ok = false;
          break;
        }
        row[s] = static_cast<double>(poisson(rng, rate));
        if (row[s] > cfg.overflow_threshold) {
          ok = false;
          break;
        }
      }
      attempts[i] = attempt + 1;
      if (ok) {
        for (NodeId s = 0; s < p; ++s) values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = row[s];
        return;
      }
    }
    throw RowRejectionLimit("row " + std::to_string(i) + " overflowed on " + std::to_string(kMaxRowAttempts) +
                            " consecutive attempts");
  });

  SampleStats local;
  for (std::size_t a : attempts) local.attempted_rows += a;
  local.rejected_rows = local.attempted_rows - n;
  if (stats) *stats = local;
  if (10 * local.rejected_rows > local.attempted_rows) {
    throw RowRejectionLimit(std::to_string(local.rejected_rows) + " of " + std::to_string(local.attempted_rows) +
                            " sampled rows overflowed");
  }
  return CountMatrix(std::move(values), wdag.dag.labels());
}

}  // namespace countdag
