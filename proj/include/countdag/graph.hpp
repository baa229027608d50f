#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace countdag {

using NodeId = std::size_t;

// Directed edge `from -> to` ("from is a parent of to").
struct Edge {
  NodeId from = 0;
  NodeId to = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// A topological ordering: perm[k] is the node at position k (0-based).
class Ordering {
 public:
  Ordering() = default;
  explicit Ordering(std::vector<NodeId> perm);

  static Ordering identity(std::size_t p);

  std::size_t size() const noexcept { return perm_.size(); }
  std::span<const NodeId> perm() const noexcept { return perm_; }
  NodeId at(std::size_t position) const { return perm_.at(position); }
  // 0-based position of node s; the 1-based ord(s) is position(s) + 1.
  std::size_t position(NodeId s) const { return pos_.at(s); }
  bool precedes(NodeId a, NodeId b) const { return pos_.at(a) < pos_.at(b); }
  // Nodes strictly before s, sorted by node index.
  std::vector<NodeId> predecessors(NodeId s) const;

  friend bool operator==(const Ordering& a, const Ordering& b) { return a.perm_ == b.perm_; }

 private:
  std::vector<NodeId> perm_;
  std::vector<std::size_t> pos_;
};

// Immutable DAG over nodes 0..p-1. Construction rejects self-loops, duplicates, and cycles.
class Dag {
 public:
  Dag() = default;
  Dag(std::size_t p, std::vector<Edge> edges, std::vector<std::string> labels = {});

  // Builds from per-node parent lists (parents[s] = pa(s)).
  static Dag from_parents(const std::vector<std::vector<NodeId>>& parents,
                          std::vector<std::string> labels = {});

  std::size_t size() const noexcept { return parents_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  // Sorted by (from, to).
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const NodeId> parents(NodeId s) const { return parents_.at(s); }
  std::span<const NodeId> children(NodeId s) const { return children_.at(s); }
  bool has_edge(NodeId from, NodeId to) const;

  // Labels default to "X1".."Xp".
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  Dag with_labels(std::vector<std::string> labels) const;

  // Kahn's algorithm, smallest ready index first.
  std::vector<NodeId> topological_sort() const;

  friend bool operator==(const Dag& a, const Dag& b) { return a.edges_ == b.edges_ && a.size() == b.size(); }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<std::string> labels_;
};

std::vector<std::string> default_labels(std::size_t p);

// True when a topological sort of the edge set exists (self-loops count as cycles).
bool is_acyclic(std::size_t p, std::span<const Edge> edges);

bool is_consistent(const Dag& dag, const Ordering& ordering);

// Every pair oriented from the earlier to the later node.
Dag complete_dag(const Ordering& ordering);

struct RecoveryMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  // Undefined (nullopt) when tp + fp == 0.
  std::optional<double> precision;
  // Undefined when the reference graph has no edges.
  std::optional<double> recall;
  // 0 whenever precision or recall is undefined or both are zero.
  double f1 = 0.0;
};

// Directed-pair comparison: a reversed edge counts as one FP and one FN.
RecoveryMetrics compare(const Dag& estimated, const Dag& reference);

// Harmonic mean with the F1 conventions above.
double f1_score(std::optional<double> precision, std::optional<double> recall);

}  // namespace countdag
