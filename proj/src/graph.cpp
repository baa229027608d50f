#include "countdag/graph.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace countdag {

Ordering::Ordering(std::vector<NodeId> perm) : perm_(std::move(perm)), pos_(perm_.size(), perm_.size()) {
  for (std::size_t k = 0; k < perm_.size(); ++k) {
    const NodeId s = perm_[k];
    if (s >= perm_.size()) {
      throw std::invalid_argument("ordering entry " + std::to_string(s) + " out of range for " +
                                  std::to_string(perm_.size()) + " nodes");
    }
    if (pos_[s] != perm_.size()) {
      throw std::invalid_argument("ordering lists node " + std::to_string(s) + " twice");
    }
    pos_[s] = k;
  }
}

Ordering Ordering::identity(std::size_t p) {
  std::vector<NodeId> perm(p);
  for (std::size_t i = 0; i < p; ++i) perm[i] = i;
  return Ordering(std::move(perm));
}

std::vector<NodeId> Ordering::predecessors(NodeId s) const {
  const std::size_t k = position(s);
  std::vector<NodeId> pre(perm_.begin(), perm_.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(pre.begin(), pre.end());
  return pre;
}

std::vector<std::string> default_labels(std::size_t p) {
  std::vector<std::string> labels;
  labels.reserve(p);
  for (std::size_t i = 0; i < p; ++i) labels.push_back("X" + std::to_string(i + 1));
  return labels;
}

bool is_acyclic(std::size_t p, std::span<const Edge> edges) {
  std::vector<std::size_t> indegree(p, 0);
  std::vector<std::vector<NodeId>> out(p);
  for (const Edge& e : edges) {
    if (e.from >= p || e.to >= p) throw std::invalid_argument("edge endpoint out of range");
    if (e.from == e.to) return false;
    out[e.from].push_back(e.to);
    ++indegree[e.to];
  }
  std::vector<NodeId> ready;
  for (NodeId v = 0; v < p; ++v) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const NodeId v = ready.back();
    ready.pop_back();
    ++visited;
    for (NodeId w : out[v]) {
      if (--indegree[w] == 0) ready.push_back(w);
    }
  }
  return visited == p;
}

Dag::Dag(std::size_t p, std::vector<Edge> edges, std::vector<std::string> labels)
    : edges_(std::move(edges)), parents_(p), children_(p), labels_(std::move(labels)) {
  if (labels_.empty()) labels_ = default_labels(p);
  if (labels_.size() != p) throw std::invalid_argument("label count does not match node count");
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw std::invalid_argument("duplicate edge");
  }
  for (const Edge& e : edges_) {
    if (e.from >= p || e.to >= p) throw std::invalid_argument("edge endpoint out of range");
    if (e.from == e.to) throw std::invalid_argument("self-loop on node " + labels_[e.from]);
  }
  if (!is_acyclic(p, edges_)) throw std::invalid_argument("edge set contains a directed cycle");
  for (const Edge& e : edges_) {
    parents_[e.to].push_back(e.from);
    children_[e.from].push_back(e.to);
  }
  for (auto& pa : parents_) std::sort(pa.begin(), pa.end());
}

Dag Dag::from_parents(const std::vector<std::vector<NodeId>>& parents, std::vector<std::string> labels) {
  std::vector<Edge> edges;
  for (NodeId s = 0; s < parents.size(); ++s) {
    for (NodeId t : parents[s]) edges.push_back({t, s});
  }
  return Dag(parents.size(), std::move(edges), std::move(labels));
}

bool Dag::has_edge(NodeId from, NodeId to) const {
  const auto& pa = parents_.at(to);
  return std::binary_search(pa.begin(), pa.end(), from);
}

Dag Dag::with_labels(std::vector<std::string> labels) const {
  return Dag(size(), edges_, std::move(labels));
}

std::vector<NodeId> Dag::topological_sort() const {
  const std::size_t p = size();
  std::vector<std::size_t> indegree(p);
  for (NodeId v = 0; v < p; ++v) indegree[v] = parents_[v].size();
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId v = 0; v < p; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<NodeId> order;
  order.reserve(p);
  while (!ready.empty()) {
    const NodeId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (NodeId w : children_[v]) {
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  return order;
}

bool is_consistent(const Dag& dag, const Ordering& ordering) {
  if (dag.size() != ordering.size()) {
    throw std::invalid_argument("dag has " + std::to_string(dag.size()) + " nodes but ordering has " +
                                std::to_string(ordering.size()));
  }
  return std::all_of(dag.edges().begin(), dag.edges().end(),
                     [&](const Edge& e) { return ordering.precedes(e.from, e.to); });
}

Dag complete_dag(const Ordering& ordering) {
  const std::size_t p = ordering.size();
  std::vector<Edge> edges;
  edges.reserve(p * (p - (p > 0 ? 1 : 0)) / 2);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) edges.push_back({ordering.at(a), ordering.at(b)});
  }
  return Dag(p, std::move(edges));
}

double f1_score(std::optional<double> precision, std::optional<double> recall) {
  if (!precision || !recall) return 0.0;
  const double denom = *precision + *recall;
  return denom > 0.0 ? 2.0 * *precision * *recall / denom : 0.0;
}

RecoveryMetrics compare(const Dag& estimated, const Dag& reference) {
  if (estimated.size() != reference.size()) {
    throw std::invalid_argument("cannot compare graphs with " + std::to_string(estimated.size()) + " and " +
                                std::to_string(reference.size()) + " nodes");
  }
  RecoveryMetrics m;
  for (const Edge& e : estimated.edges()) {
    if (reference.has_edge(e.from, e.to)) {
      ++m.tp;
    } else {
      ++m.fp;
    }
  }
  m.fn = reference.edge_count() - m.tp;
  if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

}  // namespace countdag
