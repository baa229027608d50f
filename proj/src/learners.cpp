#include "countdag/learners.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "countdag/error.hpp"
#include "countdag/parallel.hpp"

namespace countdag {
namespace {

struct NodeLog {
  std::vector<EdgeEvidence> evidence;
  std::vector<std::string> warnings;
  std::size_t tests = 0;
  std::size_t fits = 0;
};

void check_inputs(const CountMatrix& data, const Ordering& ordering, const LearnConfig& cfg) {
  if (data.cols() != ordering.size()) {
    throw std::invalid_argument("data has " + std::to_string(data.cols()) + " columns but the ordering has " +
                                std::to_string(ordering.size()) + " nodes");
  }
  if (data.rows() < 2) throw InvalidData("need at least two observations");
  cfg.validate(data.cols());
}

std::string node_name(const CountMatrix& data, NodeId s) { return data.labels()[s]; }

// Advances `idx` (sorted, distinct, values < n) to the next combination in
// lexicographic order; false once exhausted.
bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

struct TestOutcome {
  WaldTest test;
  bool singular = false;
};

class NodeTester {
 public:
  NodeTester(const CountMatrix& data, NodeId s, const LearnConfig& cfg, double alpha, NodeLog& log)
      : data_(data), s_(s), cfg_(cfg), alpha_(alpha), log_(log), y_(data.column(s)) {}

  TestOutcome test(NodeId t, const std::vector<NodeId>& covariates) {
    const GlmFit& f = fit_for(covariates);
    ++log_.tests;
    TestOutcome out;
    try {
      out.test = wald(f, t, alpha_);
    } catch (const SingularInformation& e) {
      out.singular = true;
      out.test.target = t;
      out.test.alpha = alpha_;
      log_.warnings.push_back("test " + node_name(data_, t) + " -> " + node_name(data_, s_) +
                              ": singular Fisher information (" + e.what() + "), treated as non-rejection");
    }
    return out;
  }

  void clear() { cache_.clear(); }

 private:
  const GlmFit& fit_for(const std::vector<NodeId>& covariates) {
    auto it = cache_.find(covariates);
    if (it != cache_.end()) return it->second;
    ++log_.fits;
    GlmFit f = fit(y_, data_.columns(covariates), cfg_.fit, covariates);
    if (!f.converged) {
      std::string names;
      for (NodeId c : covariates) names += (names.empty() ? "" : ",") + node_name(data_, c);
      log_.warnings.push_back("regression of " + node_name(data_, s_) + " on {" + names +
                              "} did not converge (gradient " + std::to_string(f.gradient_norm) + ")");
    }
    return cache_.emplace(covariates, std::move(f)).first->second;
  }

  const CountMatrix& data_;
  NodeId s_;
  const LearnConfig& cfg_;
  double alpha_;
  NodeLog& log_;
  Eigen::VectorXd y_;
  std::map<std::vector<NodeId>, GlmFit> cache_;
};

EdgeEvidence make_evidence(NodeId t, NodeId s, std::vector<NodeId> conditioning, const TestOutcome& outcome) {
  EdgeEvidence ev;
  ev.edge = {t, s};
  ev.conditioning = std::move(conditioning);
  ev.z = outcome.test.z;
  ev.p_value = outcome.test.p_value;
  ev.kept = outcome.test.reject;
  return ev;
}

LearnResult assemble(const CountMatrix& data, const std::vector<std::vector<NodeId>>& parents,
                     std::vector<NodeLog>& logs, double alpha) {
  LearnResult result;
  result.dag = Dag::from_parents(parents, data.labels());
  result.alpha = alpha;
  for (NodeLog& log : logs) {
    result.tests += log.tests;
    result.fits += log.fits;
    for (auto& ev : log.evidence) result.evidence.push_back(std::move(ev));
    for (auto& w : log.warnings) result.warnings.push_back(std::move(w));
  }
  std::sort(result.evidence.begin(), result.evidence.end(),
            [](const EdgeEvidence& a, const EdgeEvidence& b) { return a.edge < b.edge; });
  return result;
}

}  // namespace

void LearnConfig::validate(std::size_t p) const {
  if (alpha.has_value() == alpha_exponent.has_value()) {
    throw std::invalid_argument("supply exactly one of alpha and alpha_exponent");
  }
  if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (alpha_exponent && !(*alpha_exponent > 0.0 && *alpha_exponent < 0.5)) {
    throw std::invalid_argument("alpha exponent must lie in (0, 0.5)");
  }
  if (max_level && p >= 2 && *max_level > p - 2) {
    throw std::invalid_argument("max level m = " + std::to_string(*max_level) + " exceeds p - 2 = " +
                                std::to_string(p - 2));
  }
  fit.validate();
}

double LearnConfig::resolve_alpha(std::size_t n) const {
  return alpha ? *alpha : alpha_schedule(n, *alpha_exponent);
}

std::size_t LearnConfig::resolve_max_level(std::size_t p) const {
  if (max_level) return *max_level;
  return p >= 2 ? p - 2 : 0;
}

LearnResult or_ppgm(const CountMatrix& data, const Ordering& ordering, const LearnConfig& cfg) {
  check_inputs(data, ordering, cfg);
  const std::size_t p = data.cols();
  const double alpha = cfg.resolve_alpha(data.rows());
  const std::size_t max_level = cfg.resolve_max_level(p);

  std::vector<std::vector<NodeId>> parents(p);
  for (NodeId s = 0; s < p; ++s) parents[s] = ordering.predecessors(s);
  std::vector<NodeLog> logs(p);
  // Final evidence per edge, overwritten by each later test of the same edge.
  std::vector<std::map<NodeId, EdgeEvidence>> last(p);

  std::vector<NodeId> by_position(ordering.perm().begin(), ordering.perm().end());

  for (std::size_t level = 0; level <= max_level; ++level) {
    const bool any = std::any_of(parents.begin(), parents.end(),
                                 [&](const std::vector<NodeId>& pa) { return pa.size() >= level + 1; });
    if (!any) break;

    // Tests for different children touch disjoint parent sets.
    parallel_for(p, cfg.threads, [&](std::size_t k) {
      const NodeId s = by_position[k];
      std::vector<NodeId>& pa = parents[s];
      if (pa.size() < level + 1) return;
      NodeTester tester(data, s, cfg, alpha, logs[s]);

      std::vector<NodeId> visit = pa;
      std::sort(visit.begin(), visit.end(),
                [&](NodeId a, NodeId b) { return ordering.position(a) < ordering.position(b); });
      for (NodeId t : visit) {
        std::vector<NodeId> others;
        for (NodeId u : pa) {
          if (u != t) others.push_back(u);
        }
        if (others.size() < level) continue;

        std::vector<std::size_t> idx(level);
        for (std::size_t i = 0; i < level; ++i) idx[i] = i;
        bool removed = false;
        do {
          std::vector<NodeId> subset;
          subset.reserve(level);
          for (std::size_t i : idx) subset.push_back(others[i]);
          std::vector<NodeId> covariates = subset;
          covariates.insert(std::upper_bound(covariates.begin(), covariates.end(), t), t);

          const TestOutcome outcome = tester.test(t, covariates);
          last[s][t] = make_evidence(t, s, std::move(subset), outcome);
          if (outcome.singular || !outcome.test.reject) {
            pa.erase(std::find(pa.begin(), pa.end(), t));
            removed = true;
          }
        } while (!removed && next_combination(idx, others.size()));
      }
    });
  }

  for (NodeId s = 0; s < p; ++s) {
    for (auto& [t, ev] : last[s]) logs[s].evidence.push_back(std::move(ev));
  }
  return assemble(data, parents, logs, alpha);
}

LearnResult or_lpgm(const CountMatrix& data, const Ordering& ordering, const LearnConfig& cfg) {
  check_inputs(data, ordering, cfg);
  const std::size_t p = data.cols();
  const std::size_t n = data.rows();
  const double alpha = cfg.resolve_alpha(n);

  std::vector<std::vector<NodeId>> parents(p);
  std::vector<NodeLog> logs(p);
  parallel_for(p, cfg.threads, [&](std::size_t s) {
    const std::vector<NodeId> pre = ordering.predecessors(s);
    if (pre.empty()) return;
    NodeLog& log = logs[s];
    if (n <= pre.size()) {
      log.warnings.push_back("node " + node_name(data, s) + ": " + std::to_string(pre.size()) +
                             " predecessors but only " + std::to_string(n) + " observations; regression is rank deficient");
    }
    NodeTester tester(data, s, cfg, alpha, log);
    for (NodeId t : pre) {
      const TestOutcome outcome = tester.test(t, pre);
      std::vector<NodeId> rest;
      for (NodeId u : pre) {
        if (u != t) rest.push_back(u);
      }
      log.evidence.push_back(make_evidence(t, s, std::move(rest), outcome));
      if (!outcome.singular && outcome.test.reject) parents[s].push_back(t);
    }
  });
  return assemble(data, parents, logs, alpha);
}

}  // namespace countdag
