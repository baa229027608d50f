#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "countdag/graph.hpp"

using namespace countdag;

namespace {

Dag chain3() { return Dag(3, {{0, 1}, {1, 2}}); }

}  // namespace

TEST_CASE("ordering validates permutations") {
  CHECK_THROWS_AS(Ordering({0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Ordering({0, 3}), std::invalid_argument);
  const Ordering o({2, 0, 1});
  CHECK(o.position(2) == 0);
  CHECK(o.position(1) == 2);
  CHECK(o.precedes(0, 1));
  CHECK_FALSE(o.precedes(1, 2));
  CHECK(o.predecessors(1) == std::vector<NodeId>{0, 2});
  CHECK(o.predecessors(2).empty());
  for (NodeId s = 0; s < 3; ++s) CHECK(o.predecessors(s).size() == o.position(s));
}

TEST_CASE("dag construction rejects loops, duplicates and cycles") {
  CHECK_THROWS_AS(Dag(2, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Dag(2, {{0, 1}, {0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(Dag(3, {{0, 1}, {1, 2}, {2, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Dag(2, {{0, 5}}), std::invalid_argument);

  const Dag d = chain3();
  CHECK(d.edge_count() == 2);
  CHECK(d.has_edge(0, 1));
  CHECK_FALSE(d.has_edge(1, 0));
  CHECK(d.labels() == std::vector<std::string>{"X1", "X2", "X3"});
  CHECK(d.topological_sort() == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("parent view and edge view agree") {
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 50; ++rep) {
    const Ordering o = [&] {
      std::vector<NodeId> perm(8);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), gen);
      return Ordering(perm);
    }();
    std::vector<Edge> edges;
    std::bernoulli_distribution coin(0.3);
    for (NodeId a = 0; a < 8; ++a) {
      for (NodeId b = a + 1; b < 8; ++b) {
        if (coin(gen)) edges.push_back({o.at(a), o.at(b)});
      }
    }
    const Dag d(8, edges);
    std::size_t total = 0;
    for (NodeId s = 0; s < 8; ++s) {
      for (NodeId t : d.parents(s)) CHECK(d.has_edge(t, s));
      total += d.parents(s).size();
    }
    CHECK(total == d.edge_count());
    CHECK(is_consistent(d, o));
    CHECK(Dag::from_parents([&] {
            std::vector<std::vector<NodeId>> pa(8);
            for (NodeId s = 0; s < 8; ++s) pa[s].assign(d.parents(s).begin(), d.parents(s).end());
            return pa;
          }()) == d);
  }
}

TEST_CASE("random cyclic edge sets are rejected") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 100; ++rep) {
    // A random simple cycle of length 2..p.
    const std::size_t p = 6;
    std::vector<NodeId> nodes(p);
    std::iota(nodes.begin(), nodes.end(), 0);
    std::shuffle(nodes.begin(), nodes.end(), gen);
    const std::size_t len = 2 + gen() % (p - 1);
    std::vector<Edge> edges;
    for (std::size_t k = 0; k < len; ++k) edges.push_back({nodes[k], nodes[(k + 1) % len]});
    CHECK_FALSE(is_acyclic(p, edges));
    CHECK_THROWS_AS(Dag(p, edges), std::invalid_argument);
  }
}

TEST_CASE("is_consistent examples") {
  const Ordering o = Ordering::identity(3);
  CHECK(is_consistent(Dag(3, {}), o));
  CHECK(is_consistent(chain3(), o));
  CHECK_FALSE(is_consistent(Dag(3, {{2, 0}}), o));
  CHECK_THROWS_AS(is_consistent(chain3(), Ordering::identity(4)), std::invalid_argument);
}

TEST_CASE("complete_dag examples") {
  CHECK(complete_dag(Ordering::identity(1)).edge_count() == 0);
  CHECK(complete_dag(Ordering::identity(10)).edge_count() == 45);
  // Ordering (2,1,3) in 1-based labels.
  const Dag d = complete_dag(Ordering({1, 0, 2}));
  CHECK(d == Dag(3, {{1, 0}, {1, 2}, {0, 2}}));

  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<NodeId> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    const Ordering o(perm);
    CHECK(is_consistent(complete_dag(o), o));
  }
}

TEST_CASE("compare examples") {
  std::vector<Edge> eight;
  for (NodeId s = 1; s <= 8; ++s) eight.push_back({0, s});
  const Dag ref(9, eight);
  const RecoveryMetrics same = compare(ref, ref);
  CHECK(same.tp == 8);
  CHECK(same.fp == 0);
  CHECK(same.fn == 0);
  CHECK(*same.precision == 1.0);
  CHECK(*same.recall == 1.0);
  CHECK(same.f1 == 1.0);

  const RecoveryMetrics m = compare(Dag(3, {{0, 1}, {1, 2}}), Dag(3, {{0, 1}, {2, 1}}));
  CHECK(m.tp == 1);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(*m.precision == doctest::Approx(0.5));
  CHECK(*m.recall == doctest::Approx(0.5));
  CHECK(m.f1 == doctest::Approx(0.5));

  CHECK(f1_score(1.0, 0.882) == doctest::Approx(0.937).epsilon(0.002));
  CHECK_THROWS_AS(compare(Dag(2, {}), Dag(3, {})), std::invalid_argument);
}

TEST_CASE("compare conventions for undefined ratios") {
  const RecoveryMetrics empty_est = compare(Dag(3, {}), chain3());
  CHECK_FALSE(empty_est.precision.has_value());
  CHECK(*empty_est.recall == 0.0);
  CHECK(empty_est.f1 == 0.0);

  const RecoveryMetrics empty_ref = compare(chain3(), Dag(3, {}));
  CHECK(*empty_ref.precision == 0.0);
  CHECK_FALSE(empty_ref.recall.has_value());
  CHECK(empty_ref.f1 == 0.0);

  const RecoveryMetrics wrong = compare(Dag(3, {{1, 0}}), Dag(3, {{0, 1}}));
  CHECK(wrong.f1 == 0.0);
}

TEST_CASE("compare swaps fp and fn when arguments swap") {
  std::mt19937_64 gen(5);
  std::bernoulli_distribution coin(0.4);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<Edge> a, b;
    for (NodeId i = 0; i < 6; ++i) {
      for (NodeId j = i + 1; j < 6; ++j) {
        if (coin(gen)) a.push_back({i, j});
        if (coin(gen)) b.push_back({i, j});
      }
    }
    const RecoveryMetrics ab = compare(Dag(6, a), Dag(6, b));
    const RecoveryMetrics ba = compare(Dag(6, b), Dag(6, a));
    CHECK(ab.tp == ba.tp);
    CHECK(ab.fp == ba.fn);
    CHECK(ab.fn == ba.fp);
    CHECK(ab.tp + ab.fn == b.size());
  }
}
