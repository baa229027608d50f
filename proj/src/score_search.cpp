#include "countdag/score_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include "countdag/error.hpp"
#include "countdag/parallel.hpp"

namespace countdag {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Scores keyed by (node, sorted parent set), shared by both phases.
class ScoreCache {
 public:
  ScoreCache(const CountMatrix& data, const ScoreConfig& cfg) : data_(data), cfg_(cfg) {}

  double get(NodeId s, const std::vector<NodeId>& parents) {
    {
      std::lock_guard lock(mutex_);
      auto it = scores_.find({s, parents});
      if (it != scores_.end()) return it->second;
    }
    const double score = node_score(data_, s, parents, cfg_).score;
    std::lock_guard lock(mutex_);
    ++fits_;
    scores_.emplace(std::make_pair(s, parents), score);
    return score;
  }

  std::size_t fits() const { return fits_; }

 private:
  const CountMatrix& data_;
  const ScoreConfig& cfg_;
  std::mutex mutex_;
  std::map<std::pair<NodeId, std::vector<NodeId>>, double> scores_;
  std::size_t fits_ = 0;
};

std::vector<NodeId> with(std::vector<NodeId> set, NodeId t) {
  set.insert(std::upper_bound(set.begin(), set.end(), t), t);
  return set;
}

std::vector<NodeId> without(std::vector<NodeId> set, NodeId t) {
  set.erase(std::find(set.begin(), set.end(), t));
  return set;
}

}  // namespace

std::string_view to_string(Criterion c) { return c == Criterion::Bic ? "bic" : "aic"; }

Criterion parse_criterion(std::string_view name) {
  if (name == "bic" || name == "BIC") return Criterion::Bic;
  if (name == "aic" || name == "AIC") return Criterion::Aic;
  throw std::invalid_argument("unknown criterion '" + std::string(name) + "' (expected bic or aic)");
}

double ScoreConfig::penalty(std::size_t n) const {
  return criterion == Criterion::Bic ? std::log(static_cast<double>(n)) : 2.0;
}

NodeScore node_score(const CountMatrix& data, NodeId s, std::vector<NodeId> parents, const ScoreConfig& cfg) {
  if (s >= data.cols()) throw std::invalid_argument("node index out of range");
  std::sort(parents.begin(), parents.end());
  NodeScore out{s, parents, kInf};
  const std::size_t n = data.rows();
  try {
    const GlmFit f = fit(data.column(s), data.columns(parents), cfg.fit, parents);
    if (std::isfinite(f.nll)) {
      out.score = 2.0 * static_cast<double>(n) * f.nll + cfg.penalty(n) * static_cast<double>(parents.size());
    }
  } catch (const InvalidData&) {
  } catch (const SingularInformation&) {
  }
  return out;
}

SearchResult pk2(const CountMatrix& data, const Ordering& ordering, const ScoreConfig& cfg) {
  const std::size_t p = data.cols();
  if (p != ordering.size()) {
    throw std::invalid_argument("data has " + std::to_string(p) + " columns but the ordering has " +
                                std::to_string(ordering.size()) + " nodes");
  }
  if (data.rows() < 1) throw InvalidData("need at least one observation");
  cfg.fit.validate();
  const std::size_t max_parents = cfg.max_parents.value_or(p);

  ScoreCache cache(data, cfg);
  std::vector<std::vector<NodeId>> parents(p);
  std::vector<double> current(p);
  std::vector<std::size_t> forward_steps(p, 0);

  parallel_for(p, cfg.threads, [&](std::size_t k) {
    const NodeId s = ordering.at(k);
    const std::vector<NodeId> pre = ordering.predecessors(s);
    std::vector<NodeId>& pa = parents[s];
    double score = cache.get(s, pa);
    while (pa.size() < max_parents) {
      double best = score;
      std::optional<NodeId> pick;
      for (NodeId t : pre) {
        if (std::binary_search(pa.begin(), pa.end(), t)) continue;
        const double trial = cache.get(s, with(pa, t));
        if (trial < best) {
          best = trial;
          pick = t;
        }
      }
      if (!pick) break;
      pa = with(pa, *pick);
      score = best;
      ++forward_steps[s];
    }
    current[s] = score;
  });

  SearchResult result;
  for (std::size_t steps : forward_steps) result.forward_steps += steps;

  for (;;) {
    std::vector<Edge> edges;
    for (NodeId s = 0; s < p; ++s) {
      for (NodeId t : parents[s]) edges.push_back({t, s});
    }
    std::sort(edges.begin(), edges.end());
    std::vector<double> delta(edges.size());
    parallel_for(edges.size(), cfg.threads, [&](std::size_t i) {
      const Edge e = edges[i];
      delta[i] = cache.get(e.to, without(parents[e.to], e.from)) - current[e.to];
    });
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (delta[i] < 0.0 && (!best || delta[i] < delta[*best])) best = i;
    }
    if (!best) break;
    const Edge e = edges[*best];
    parents[e.to] = without(parents[e.to], e.from);
    current[e.to] = cache.get(e.to, parents[e.to]);
    ++result.backward_steps;
  }

  result.dag = Dag::from_parents(parents, data.labels());
  result.total_score = 0.0;
  for (NodeId s = 0; s < p; ++s) {
    result.node_scores.push_back({s, parents[s], current[s]});
    result.total_score += current[s];
  }
  result.fits = cache.fits();
  return result;
}

}  // namespace countdag
