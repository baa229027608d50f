#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "countdag/graph.hpp"
#include "countdag/learners.hpp"
#include "countdag/score_search.hpp"
#include "countdag/simgen.hpp"

namespace countdag {

// "oracle" and "empty" are reference learners for checking the harness itself.
enum class Algorithm { OrPpgm, OrLpgm, Pkbic, Pkaic, Oracle, Empty };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct LearnerSpec {
  std::string name;
  Algorithm algorithm = Algorithm::OrPpgm;
  LearnConfig learn;  // Or-PPGM / Or-LPGM
  ScoreConfig score;  // PKBIC / PKAIC
};

// Runs a learner on data; `truth` is consulted only by the oracle.
Dag run_learner(const LearnerSpec& learner, const CountMatrix& data, const Ordering& ordering, const Dag& truth);

struct Experiment {
  SimConfig sim;  // sim.n is the sample size, sim.seed keys every random draw
  std::vector<LearnerSpec> learners;
  std::size_t replicates = 50;
  // One graph and weight draw shared by all replicates.
  bool fixed_graph = true;
  std::size_t threads = 1;

  void validate() const;
};

struct ReplicateRecord {
  std::size_t replicate = 0;
  bool failed = false;
  std::string error;
  RecoveryMetrics metrics;
  double seconds = 0.0;
};

struct Summary {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

// Compensated mean and standard error (sample sd / sqrt(count)) in index order.
Summary summarize(const std::vector<double>& values);

struct LearnerAggregate {
  std::string name;
  Summary tp, fp, fn, precision, recall, f1;
  double runtime_mean = 0.0;
  std::size_t failures = 0;
  std::size_t precision_undefined = 0;
  std::vector<ReplicateRecord> replicates;
};

// Means are over per-replicate metrics, never ratios of pooled counts.
LearnerAggregate aggregate(std::string name, std::vector<ReplicateRecord> records);

struct AggregateResult {
  std::size_t n = 0;
  std::string graph;  // graph kind, or "pooled"
  std::vector<LearnerAggregate> learners;
};

// Throws only when every replicate of some learner failed.
AggregateResult run(const Experiment& exp);

// Concatenates replicate records per learner across results with equal n.
AggregateResult pool(const std::vector<AggregateResult>& results, std::string graph = "pooled");

struct TableRow {
  std::size_t n = 0;
  std::string graph;
  std::string algorithm;
  double tp = 0, fp = 0, fn = 0, precision = 0, recall = 0, f1 = 0;
  double f1_se = 0;
  std::size_t replicates = 0;
  std::size_t failures = 0;

  friend bool operator==(const TableRow&, const TableRow&) = default;
};

std::vector<TableRow> table_rows(const std::vector<AggregateResult>& results);
// Aligned text with the columns n, Algorithm, TP, FP, FN, P, R, F1 at three decimals.
std::string format_table(const std::vector<TableRow>& rows);
// Full-precision CSV; read_table_csv(write_table_csv(rows)) == rows.
void write_table_csv(std::ostream& out, const std::vector<TableRow>& rows);
std::vector<TableRow> read_table_csv(std::istream& in);

nlohmann::json to_json(const AggregateResult& result);

// Expands a bench config into one Experiment per (graph kind, sample size).
// Schema:
//   { "seed": 1, "replicates": 50, "fixed_graph": true, "pooled": true,
//     "sim": { "graphs": ["scale_free", "hub", "erdos_renyi"], "p": 10, "n": [100, 1000],
//              "er_gamma": .., "hub_count": .., "sf_power": .., "sf_zero_appeal": ..,
//              "root_log_rate": 0, "overflow_threshold": 1e9 },
//     "learners": [ { "name": "Or-PPGM", "algo": "or-ppgm", "alpha_b": 0.15, "m": 8 },
//                   { "name": "PKBIC", "algo": "pkbic", "max_parents": 3 } ] }
struct BenchPlan {
  std::vector<Experiment> experiments;
  bool pooled = true;
  std::uint64_t seed = 0;
};

BenchPlan parse_bench_config(const nlohmann::json& config);

// Runs every experiment, then adds one pooled result per sample size when requested.
std::vector<AggregateResult> run_plan(const BenchPlan& plan);

}  // namespace countdag
