#include "countdag/bench.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "countdag/error.hpp"
#include "countdag/io.hpp"
#include "countdag/parallel.hpp"

namespace countdag {
namespace {

// Stream ids under the experiment seed.
constexpr std::uint64_t kGraphStream = 1;
constexpr std::uint64_t kDataStream = 2;

double neumaier_sum(const std::vector<double>& values) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::OrPpgm: return "or-ppgm";
    case Algorithm::OrLpgm: return "or-lpgm";
    case Algorithm::Pkbic: return "pkbic";
    case Algorithm::Pkaic: return "pkaic";
    case Algorithm::Oracle: return "oracle";
    case Algorithm::Empty: return "empty";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (Algorithm a : {Algorithm::OrPpgm, Algorithm::OrLpgm, Algorithm::Pkbic, Algorithm::Pkaic, Algorithm::Oracle,
                      Algorithm::Empty}) {
    if (lower == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown learner '" + std::string(name) +
                              "' (expected or-ppgm, or-lpgm, pkbic, pkaic, oracle or empty)");
}

Dag run_learner(const LearnerSpec& learner, const CountMatrix& data, const Ordering& ordering, const Dag& truth) {
  switch (learner.algorithm) {
    case Algorithm::OrPpgm: return or_ppgm(data, ordering, learner.learn).dag;
    case Algorithm::OrLpgm: return or_lpgm(data, ordering, learner.learn).dag;
    case Algorithm::Pkbic: {
      ScoreConfig cfg = learner.score;
      cfg.criterion = Criterion::Bic;
      return pk2(data, ordering, cfg).dag;
    }
    case Algorithm::Pkaic: {
      ScoreConfig cfg = learner.score;
      cfg.criterion = Criterion::Aic;
      return pk2(data, ordering, cfg).dag;
    }
    case Algorithm::Oracle: return truth.with_labels(data.labels());
    case Algorithm::Empty: return Dag(data.cols(), {}, data.labels());
  }
  throw std::logic_error("unhandled algorithm");
}

void Experiment::validate() const {
  sim.validate();
  if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
  if (learners.empty()) throw std::invalid_argument("experiment has no learners");
  std::set<std::string> names;
  for (const auto& l : learners) {
    if (!names.insert(l.name).second) throw std::invalid_argument("duplicate learner name '" + l.name + "'");
  }
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = neumaier_sum(values) / static_cast<double>(values.size());
  if (values.size() > 1) {
    std::vector<double> sq;
    sq.reserve(values.size());
    for (double v : values) sq.push_back((v - s.mean) * (v - s.mean));
    const double var = neumaier_sum(sq) / static_cast<double>(values.size() - 1);
    s.se = std::sqrt(var / static_cast<double>(values.size()));
  }
  return s;
}

LearnerAggregate aggregate(std::string name, std::vector<ReplicateRecord> records) {
  LearnerAggregate agg;
  agg.name = std::move(name);
  std::vector<double> tp, fp, fn, precision, recall, f1, seconds;
  for (const auto& r : records) {
    if (r.failed) {
      ++agg.failures;
      continue;
    }
    tp.push_back(static_cast<double>(r.metrics.tp));
    fp.push_back(static_cast<double>(r.metrics.fp));
    fn.push_back(static_cast<double>(r.metrics.fn));
    if (r.metrics.precision) {
      precision.push_back(*r.metrics.precision);
    } else {
      ++agg.precision_undefined;
    }
    if (r.metrics.recall) recall.push_back(*r.metrics.recall);
    f1.push_back(r.metrics.f1);
    seconds.push_back(r.seconds);
  }
  agg.tp = summarize(tp);
  agg.fp = summarize(fp);
  agg.fn = summarize(fn);
  agg.precision = summarize(precision);
  agg.recall = summarize(recall);
  agg.f1 = summarize(f1);
  agg.runtime_mean = summarize(seconds).mean;
  agg.replicates = std::move(records);
  return agg;
}

AggregateResult run(const Experiment& exp) {
  exp.validate();
  const SimConfig& sim = exp.sim;

  auto draw_graph = [&](std::uint64_t key) {
    SplitMix64 rng(key);
    GeneratedGraph g = gen_graph(sim, rng);
    WeightedDag w = gen_weights(g.dag, rng);
    return std::make_pair(std::move(w), std::move(g.ordering));
  };
  std::optional<std::pair<WeightedDag, Ordering>> shared;
  if (exp.fixed_graph) shared = draw_graph(SplitMix64::derive(sim.seed, {kGraphStream}));

  const std::size_t L = exp.learners.size();
  std::vector<std::vector<ReplicateRecord>> records(L, std::vector<ReplicateRecord>(exp.replicates));
  // Replicates run in parallel, so each learner runs single-threaded inside.
  std::vector<LearnerSpec> learners = exp.learners;
  if (exp.threads > 1) {
    for (auto& l : learners) l.learn.threads = l.score.threads = 1;
  }

  parallel_for(exp.replicates, exp.threads, [&](std::size_t r) {
    std::optional<std::pair<WeightedDag, Ordering>> own;
    try {
      if (!exp.fixed_graph) own = draw_graph(SplitMix64::derive(sim.seed, {kGraphStream, r}));
    } catch (const std::exception& e) {
      for (std::size_t l = 0; l < L; ++l) records[l][r] = {r, true, e.what(), {}, 0.0};
      return;
    }
    const auto& [wdag, ordering] = exp.fixed_graph ? *shared : *own;
    std::optional<CountMatrix> data;
    try {
      data = sample_data(wdag, ordering, sim.n, sim, SplitMix64::derive(sim.seed, {kDataStream, sim.n, r}));
    } catch (const std::exception& e) {
      for (std::size_t l = 0; l < L; ++l) records[l][r] = {r, true, e.what(), {}, 0.0};
      return;
    }
    for (std::size_t l = 0; l < L; ++l) {
      ReplicateRecord rec;
      rec.replicate = r;
      const auto start = std::chrono::steady_clock::now();
      try {
        const Dag estimate = run_learner(learners[l], *data, ordering, wdag.dag);
        rec.metrics = compare(estimate, wdag.dag);
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
      }
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      records[l][r] = std::move(rec);
    }
  });

  AggregateResult result;
  result.n = sim.n;
  result.graph = std::string(to_string(sim.graph_kind));
  for (std::size_t l = 0; l < L; ++l) {
    LearnerAggregate agg = aggregate(exp.learners[l].name, std::move(records[l]));
    if (agg.failures == exp.replicates) {
      throw std::runtime_error("learner '" + agg.name + "' failed on every replicate: " +
                               agg.replicates.front().error);
    }
    result.learners.push_back(std::move(agg));
  }
  return result;
}

AggregateResult pool(const std::vector<AggregateResult>& results, std::string graph) {
  if (results.empty()) throw std::invalid_argument("nothing to pool");
  AggregateResult out;
  out.n = results.front().n;
  out.graph = std::move(graph);
  std::vector<std::string> order;
  std::map<std::string, std::vector<ReplicateRecord>> merged;
  for (const auto& res : results) {
    if (res.n != out.n) throw std::invalid_argument("cannot pool results with different sample sizes");
    for (const auto& l : res.learners) {
      if (!merged.count(l.name)) order.push_back(l.name);
      auto& dst = merged[l.name];
      for (const auto& rec : l.replicates) {
        dst.push_back(rec);
        dst.back().replicate = dst.size() - 1;
      }
    }
  }
  for (const auto& name : order) out.learners.push_back(aggregate(name, std::move(merged[name])));
  return out;
}

std::vector<TableRow> table_rows(const std::vector<AggregateResult>& results) {
  std::vector<TableRow> rows;
  for (const auto& res : results) {
    for (const auto& l : res.learners) {
      rows.push_back({res.n, res.graph, l.name, l.tp.mean, l.fp.mean, l.fn.mean, l.precision.mean, l.recall.mean,
                      l.f1.mean, l.f1.se, l.replicates.size(), l.failures});
    }
  }
  return rows;
}

std::string format_table(const std::vector<TableRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"n", "Graph", "Algorithm", "TP", "FP", "FN", "P", "R", "F1"});
  for (const auto& r : rows) {
    cells.push_back({std::to_string(r.n), r.graph, r.algorithm, fixed3(r.tp), fixed3(r.fp), fixed3(r.fn),
                     fixed3(r.precision), fixed3(r.recall), fixed3(r.f1)});
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      const std::size_t pad = width[j] - row[j].size();
      // Text columns left-aligned, numbers right-aligned.
      if (j >= 1 && j <= 2) {
        out += row[j] + std::string(pad, ' ');
      } else {
        out += std::string(pad, ' ') + row[j];
      }
      out += j + 1 < row.size() ? "  " : "\n";
    }
  }
  return out;
}

void write_table_csv(std::ostream& out, const std::vector<TableRow>& rows) {
  out << "n,graph,algorithm,tp,fp,fn,precision,recall,f1,f1_se,replicates,failures\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.graph << ',' << r.algorithm << ',' << io::format_double(r.tp) << ','
        << io::format_double(r.fp) << ',' << io::format_double(r.fn) << ',' << io::format_double(r.precision) << ','
        << io::format_double(r.recall) << ',' << io::format_double(r.f1) << ',' << io::format_double(r.f1_se) << ','
        << r.replicates << ',' << r.failures << '\n';
  }
}

std::vector<TableRow> read_table_csv(std::istream& in) {
  std::vector<TableRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line_no == 1) continue;
    const auto f = split(line);
    if (f.size() != 12) throw ParseError("<table>", line_no, 1, "expected 12 fields");
    try {
      TableRow r;
      r.n = std::stoull(f[0]);
      r.graph = f[1];
      r.algorithm = f[2];
      r.tp = std::stod(f[3]);
      r.fp = std::stod(f[4]);
      r.fn = std::stod(f[5]);
      r.precision = std::stod(f[6]);
      r.recall = std::stod(f[7]);
      r.f1 = std::stod(f[8]);
      r.f1_se = std::stod(f[9]);
      r.replicates = std::stoull(f[10]);
      r.failures = std::stoull(f[11]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error& e) {
      throw ParseError("<table>", line_no, 1, e.what());
    }
  }
  return rows;
}

nlohmann::json to_json(const AggregateResult& result) {
  auto summary = [](const Summary& s) { return nlohmann::json{{"mean", s.mean}, {"se", s.se}, {"count", s.count}}; };
  nlohmann::json learners = nlohmann::json::array();
  for (const auto& l : result.learners) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& r : l.replicates) {
      if (r.failed) failures.push_back({{"replicate", r.replicate}, {"error", r.error}});
    }
    learners.push_back({{"name", l.name},
                        {"tp", summary(l.tp)},
                        {"fp", summary(l.fp)},
                        {"fn", summary(l.fn)},
                        {"precision", summary(l.precision)},
                        {"recall", summary(l.recall)},
                        {"f1", summary(l.f1)},
                        {"runtime_mean_seconds", l.runtime_mean},
                        {"failures", l.failures},
                        {"precision_undefined", l.precision_undefined},
                        {"failed_replicates", failures}});
  }
  return {{"n", result.n}, {"graph", result.graph}, {"learners", learners}};
}

BenchPlan parse_bench_config(const nlohmann::json& config) {
  if (!config.is_object()) throw InvalidData("bench config must be a JSON object");
  BenchPlan plan;
  plan.seed = config.value("seed", std::uint64_t{1});
  plan.pooled = config.value("pooled", true);
  const std::size_t replicates = config.value("replicates", std::size_t{50});
  const bool fixed_graph = config.value("fixed_graph", true);
  const std::size_t threads = config.value("threads", std::size_t{1});

  if (!config.contains("sim")) throw InvalidData("bench config has no 'sim' block");
  const auto& sim = config.at("sim");
  std::vector<GraphKind> kinds;
  if (sim.contains("graphs")) {
    for (const auto& g : sim.at("graphs")) kinds.push_back(parse_graph_kind(g.get<std::string>()));
  } else {
    kinds.push_back(parse_graph_kind(sim.value("graph", std::string("erdos_renyi"))));
  }
  const std::size_t p = sim.value("p", std::size_t{10});
  std::vector<std::size_t> sizes;
  if (sim.contains("n") && sim.at("n").is_array()) {
    sizes = sim.at("n").get<std::vector<std::size_t>>();
  } else {
    sizes.push_back(sim.value("n", std::size_t{100}));
  }

  if (!config.contains("learners") || !config.at("learners").is_array()) {
    throw InvalidData("bench config needs a 'learners' array");
  }
  std::vector<LearnerSpec> learners;
  for (const auto& j : config.at("learners")) {
    LearnerSpec l;
    const std::string algo = j.value("algo", j.value("name", std::string()));
    l.algorithm = parse_algorithm(algo);
    l.name = j.value("name", algo);
    if (j.contains("alpha")) l.learn.alpha = j.at("alpha").get<double>();
    if (j.contains("alpha_b")) l.learn.alpha_exponent = j.at("alpha_b").get<double>();
    if (!l.learn.alpha && !l.learn.alpha_exponent) l.learn.alpha = 0.05;
    if (j.contains("m")) l.learn.max_level = j.at("m").get<std::size_t>();
    if (j.contains("max_parents")) l.score.max_parents = j.at("max_parents").get<std::size_t>();
    if (j.contains("criterion")) l.score.criterion = parse_criterion(j.at("criterion").get<std::string>());
    FitOptions fit;
    fit.tol = j.value("tol", fit.tol);
    fit.max_iter = j.value("max_iter", fit.max_iter);
    fit.theta_cap = j.value("theta_cap", fit.theta_cap);
    fit.lp_cap = j.value("lp_cap", fit.lp_cap);
    fit.intercept = j.value("intercept", fit.intercept);
    l.learn.fit = l.score.fit = fit;
    if (l.algorithm == Algorithm::OrPpgm || l.algorithm == Algorithm::OrLpgm) l.learn.validate(p);
    learners.push_back(std::move(l));
  }

  for (std::size_t k = 0; k < kinds.size(); ++k) {
    SimConfig base = table_defaults(kinds[k], p);
    base.er_gamma = sim.value("er_gamma", base.er_gamma);
    base.hub_count = sim.value("hub_count", base.hub_count);
    base.sf_power = sim.value("sf_power", base.sf_power);
    base.sf_zero_appeal = sim.value("sf_zero_appeal", base.sf_zero_appeal);
    base.root_log_rate = sim.value("root_log_rate", base.root_log_rate);
    base.overflow_threshold = sim.value("overflow_threshold", base.overflow_threshold);
    // One seed per graph kind, shared across sample sizes so the fixed graph is reused.
    base.seed = SplitMix64::derive(plan.seed, {static_cast<std::uint64_t>(kinds[k])});
    for (std::size_t n : sizes) {
      Experiment exp;
      exp.sim = base;
      exp.sim.n = n;
      exp.learners = learners;
      exp.replicates = replicates;
      exp.fixed_graph = fixed_graph;
      exp.threads = threads;
      exp.validate();
      plan.experiments.push_back(std::move(exp));
    }
  }
  return plan;
}

std::vector<AggregateResult> run_plan(const BenchPlan& plan) {
  std::vector<AggregateResult> results;
  std::map<std::size_t, std::vector<AggregateResult>> by_n;
  std::vector<std::size_t> sizes;
  for (const auto& exp : plan.experiments) {
    AggregateResult res = run(exp);
    if (!by_n.count(res.n)) sizes.push_back(res.n);
    by_n[res.n].push_back(res);
    results.push_back(std::move(res));
  }
  if (plan.pooled) {
    for (std::size_t n : sizes) {
      if (by_n[n].size() > 1) results.push_back(pool(by_n[n]));
    }
  }
  return results;
}

}  // namespace countdag
