#include "countdag/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "countdag/bench.hpp"
#include "countdag/error.hpp"
#include "countdag/io.hpp"
#include "countdag/learners.hpp"
#include "countdag/score_search.hpp"
#include "countdag/simgen.hpp"

namespace countdag::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Thrown for malformed invocations and unreadable inputs (exit 2).
struct BadInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitFlags {
  double tol = FitOptions{}.tol;
  std::size_t max_iter = FitOptions{}.max_iter;
  double theta_cap = FitOptions{}.theta_cap;
  double lp_cap = FitOptions{}.lp_cap;

  FitOptions options() const {
    FitOptions f;
    f.tol = tol;
    f.max_iter = max_iter;
    f.theta_cap = theta_cap;
    f.lp_cap = lp_cap;
    return f;
  }
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--tol", f.tol, "Newton gradient tolerance")->capture_default_str();
  cmd->add_option("--max-iter", f.max_iter, "Newton iteration limit")->capture_default_str();
  cmd->add_option("--theta-cap", f.theta_cap, "Coefficients below -cap are frozen as diverged")->capture_default_str();
  cmd->add_option("--lp-cap", f.lp_cap, "Clamp for linear predictors inside exp()")->capture_default_str();
}

std::size_t resolve_threads(std::optional<std::size_t> flag) {
  if (flag) return std::max<std::size_t>(1, *flag);
  if (const char* env = std::getenv("COUNTDAG_THREADS"); env && *env) {
    try {
      return std::max<std::size_t>(1, std::stoul(env));
    } catch (const std::exception&) {
      throw BadInput(std::string("COUNTDAG_THREADS='") + env + "' is not a thread count");
    }
  }
  return 1;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw BadInput(std::string("missing ") + what);
  if (!fs::is_regular_file(path)) throw BadInput(std::string(what) + " '" + path + "' does not exist");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw BadInput("cannot write '" + path.string() + "'");
  out << text;
}

struct LearnArgs {
  std::string counts;
  std::string ordering;
  std::string algo = "or-ppgm";
  std::optional<double> alpha;
  std::optional<double> alpha_b;
  std::optional<std::size_t> m;
  std::optional<std::string> criterion;
  std::optional<std::size_t> max_parents;
  std::string out;
  std::string report;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool filter_outliers = false;
  FitFlags fit;
};

json fit_json(const FitOptions& f) {
  return {{"tol", f.tol}, {"max_iter", f.max_iter}, {"theta_cap", f.theta_cap}, {"lp_cap", f.lp_cap}};
}

int cmd_learn(const LearnArgs& a, std::ostream& out, std::ostream& err) {
  require_file(a.counts, "counts file");
  require_file(a.ordering, "ordering file");
  const Algorithm algo = parse_algorithm(a.algo);
  if (algo == Algorithm::Oracle || algo == Algorithm::Empty) {
    throw BadInput("learner '" + a.algo + "' is only available in bench");
  }
  if (a.alpha && a.alpha_b) throw BadInput("--alpha and --alpha-b are mutually exclusive");
  std::optional<Criterion> criterion;
  if (a.criterion) criterion = parse_criterion(*a.criterion);
  if (criterion && ((algo == Algorithm::Pkbic && *criterion != Criterion::Bic) ||
                    (algo == Algorithm::Pkaic && *criterion != Criterion::Aic))) {
    throw BadInput("--criterion " + *a.criterion + " contradicts --algo " + a.algo);
  }

  CountMatrix data = io::read_counts(fs::path(a.counts));
  const Ordering ordering = io::resolve_ordering(io::read_ordering_labels(fs::path(a.ordering)), data.labels());
  std::size_t dropped = 0;
  if (a.filter_outliers) {
    auto filtered = io::outlier_filter(data);
    dropped = filtered.dropped;
    data = std::move(filtered.data);
  }
  const std::size_t threads = resolve_threads(a.threads);

  LearnConfig learn;
  learn.alpha = a.alpha;
  learn.alpha_exponent = a.alpha_b;
  if (!learn.alpha && !learn.alpha_exponent) learn.alpha = 0.05;
  learn.max_level = a.m;
  learn.fit = a.fit.options();
  learn.threads = threads;
  ScoreConfig score;
  score.criterion = algo == Algorithm::Pkaic ? Criterion::Aic : Criterion::Bic;
  score.max_parents = a.max_parents;
  score.fit = learn.fit;
  score.threads = threads;
  if (algo == Algorithm::OrPpgm || algo == Algorithm::OrLpgm) {
    try {
      learn.validate(data.cols());
    } catch (const std::invalid_argument& e) {
      throw BadInput(e.what());
    }
  }
  if (data.rows() < 2) throw BadInput("need at least two observations");

  json report;
  report["algorithm"] = a.algo;
  report["n"] = data.rows();
  report["p"] = data.cols();
  report["dropped_rows"] = dropped;
  report["config"] = {{"counts", a.counts},      {"ordering", a.ordering}, {"filter_outliers", a.filter_outliers},
                      {"threads", threads},       {"fit", fit_json(learn.fit)}};
  if (a.seed) report["config"]["seed"] = *a.seed;

  Dag dag;
  json warnings = json::array();
  json edges = json::array();
  try {
    if (algo == Algorithm::OrPpgm || algo == Algorithm::OrLpgm) {
      const LearnResult res = algo == Algorithm::OrPpgm ? or_ppgm(data, ordering, learn) : or_lpgm(data, ordering, learn);
      dag = res.dag;
      report["alpha"] = res.alpha;
      report["config"]["m"] = learn.resolve_max_level(data.cols());
      if (learn.alpha_exponent) report["config"]["alpha_b"] = *learn.alpha_exponent;
      report["tests"] = res.tests;
      report["fits"] = res.fits;
      for (const auto& ev : res.evidence) {
        json cond = json::array();
        for (NodeId c : ev.conditioning) cond.push_back(data.labels()[c]);
        edges.push_back({{"from", data.labels()[ev.edge.from]},
                         {"to", data.labels()[ev.edge.to]},
                         {"kept", ev.kept},
                         {"z", ev.z},
                         {"p_value", ev.p_value},
                         {"conditioning", cond}});
      }
      for (const auto& w : res.warnings) warnings.push_back(w);
    } else {
      const SearchResult res = pk2(data, ordering, score);
      dag = res.dag;
      report["criterion"] = std::string(to_string(score.criterion));
      report["total_score"] = res.total_score;
      report["forward_steps"] = res.forward_steps;
      report["backward_steps"] = res.backward_steps;
      if (a.max_parents) report["config"]["max_parents"] = *a.max_parents;
      for (const Edge& e : dag.edges()) {
        std::vector<NodeId> rest;
        for (NodeId t : dag.parents(e.to)) {
          if (t != e.from) rest.push_back(t);
        }
        const double without = node_score(data, e.to, rest, score).score;
        edges.push_back({{"from", data.labels()[e.from]},
                         {"to", data.labels()[e.to]},
                         {"kept", true},
                         {"score_delta_if_removed", without - res.node_scores[e.to].score}});
      }
    }
  } catch (const InvalidData&) {
    throw;
  } catch (const std::exception& e) {
    err << "countdag learn: algorithm failure: " << e.what() << '\n';
    return kExitAlgorithm;
  }
  report["edges"] = edges;
  report["warnings"] = warnings;
  report["edge_count"] = dag.edge_count();

  std::ostringstream edge_text;
  io::write_edge_list(edge_text, dag);
  if (a.out.empty()) {
    out << edge_text.str();
  } else {
    write_text(a.out, edge_text.str());
  }
  const std::string report_path = !a.report.empty() ? a.report : (a.out.empty() ? "" : a.out + ".json");
  if (!report_path.empty()) write_text(report_path, report.dump(2) + "\n");
  for (const auto& w : warnings) err << "warning: " << w.get<std::string>() << '\n';
  err << "learned " << dag.edge_count() << " edges from " << data.rows() << " rows";
  if (dropped) err << " (" << dropped << " outlier rows dropped)";
  err << '\n';
  return kExitOk;
}

struct SimulateArgs {
  std::string graph = "erdos_renyi";
  std::size_t p = 10;
  std::size_t n = 100;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> er_gamma;
  std::optional<std::size_t> hubs;
  std::optional<double> sf_power;
  std::optional<double> sf_zero_appeal;
  double root_log_rate = 0.0;
  double overflow_threshold = 1e9;
  std::optional<std::size_t> threads;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.out.empty()) throw BadInput("missing --out directory");
  SimConfig cfg = table_defaults(parse_graph_kind(a.graph), a.p);
  if (a.er_gamma) cfg.er_gamma = *a.er_gamma;
  if (a.hubs) cfg.hub_count = *a.hubs;
  if (a.sf_power) cfg.sf_power = *a.sf_power;
  if (a.sf_zero_appeal) cfg.sf_zero_appeal = *a.sf_zero_appeal;
  cfg.root_log_rate = a.root_log_rate;
  cfg.overflow_threshold = a.overflow_threshold;
  cfg.n = a.n;
  cfg.seed = resolve_seed(a.seed);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw BadInput(e.what());
  }
  err << "seed: " << cfg.seed << '\n';

  SplitMix64 rng(SplitMix64::derive(cfg.seed, {1}));
  const GeneratedGraph g = gen_graph(cfg, rng);
  const WeightedDag wdag = gen_weights(g.dag, rng);
  SampleStats stats;
  CountMatrix data;
  try {
    data = sample_data(wdag, g.ordering, cfg.n, cfg, SplitMix64::derive(cfg.seed, {2}), resolve_threads(a.threads),
                       &stats);
  } catch (const RowRejectionLimit& e) {
    err << "countdag simulate: " << e.what() << '\n';
    return kExitAlgorithm;
  }

  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw BadInput("cannot create '" + dir.string() + "': " + ec.message());
  io::write_counts(dir / "counts.csv", data);
  io::write_edge_list(dir / "truth.edges", g.dag);
  io::write_weights(dir / "weights.csv", wdag);
  io::write_ordering(dir / "ordering.txt", g.ordering, g.dag.labels());
  out << "wrote " << data.rows() << " x " << data.cols() << " counts, " << g.dag.edge_count() << " true edges to "
      << dir.string() << '\n';
  if (stats.rejected_rows) err << "redrew " << stats.rejected_rows << " overflowing rows\n";
  return kExitOk;
}

struct BenchArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> threads;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  require_file(a.config, "bench config");
  json config;
  {
    std::ifstream in(a.config);
    try {
      config = json::parse(in);
    } catch (const json::parse_error& e) {
      throw BadInput(a.config + ": " + e.what());
    }
  }
  if (a.seed) config["seed"] = *a.seed;
  if (!config.contains("seed")) config["seed"] = resolve_seed(std::nullopt);
  if (a.replicates) config["replicates"] = *a.replicates;
  if (a.threads || !config.contains("threads")) config["threads"] = resolve_threads(a.threads);

  BenchPlan plan;
  try {
    plan = parse_bench_config(config);
  } catch (const json::exception& e) {
    throw BadInput(a.config + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw BadInput(a.config + ": " + e.what());
  }
  err << "seed: " << plan.seed << '\n';

  std::vector<AggregateResult> results;
  try {
    results = run_plan(plan);
  } catch (const std::exception& e) {
    err << "countdag bench: " << e.what() << '\n';
    return kExitAlgorithm;
  }
  const auto rows = table_rows(results);
  out << format_table(rows);
  if (!a.out.empty()) {
    std::ostringstream csv;
    write_table_csv(csv, rows);
    write_text(a.out + ".csv", csv.str());
    json all = json::array();
    for (const auto& r : results) all.push_back(to_json(r));
    write_text(a.out + ".json", json{{"seed", plan.seed}, {"results", all}}.dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structure learning for Poisson DAGs with a known topological ordering"};
  app.name("countdag");
  app.require_subcommand(1);

  LearnArgs learn;
  auto* lc = app.add_subcommand("learn", "Learn a DAG from a counts CSV and an ordering file");
  lc->add_option("--counts", learn.counts, "Counts CSV (rows = observations)")->required();
  lc->add_option("--ordering", learn.ordering, "Ordering file: one line of comma-separated labels")->required();
  lc->add_option("--algo", learn.algo, "or-ppgm | or-lpgm | pkbic | pkaic")->capture_default_str();
  lc->add_option("--alpha", learn.alpha, "Significance level (default 0.05)");
  lc->add_option("--alpha-b", learn.alpha_b, "Exponent b of alpha = 2(1 - Phi(n^b))");
  lc->add_option("--m", learn.m, "Largest conditioning-set size (default p - 2)");
  lc->add_option("--criterion", learn.criterion, "bic | aic (score search)");
  lc->add_option("--max-parents", learn.max_parents, "Parent cap for score search");
  lc->add_option("--out", learn.out, "Edge list output (default stdout)");
  lc->add_option("--report", learn.report, "JSON report path (default <out>.json)");
  lc->add_option("--seed", learn.seed, "Recorded in the report; learning is deterministic");
  lc->add_option("--threads", learn.threads, "Worker threads (fallback: COUNTDAG_THREADS)");
  lc->add_flag("--filter-outliers", learn.filter_outliers, "Drop rows with values beyond 3 sd of the column mean");
  add_fit_flags(lc, learn.fit);

  SimulateArgs sim;
  auto* sc = app.add_subcommand("simulate", "Generate a graph, weights and count data");
  sc->add_option("--graph", sim.graph, "scale_free | hub | erdos_renyi")->capture_default_str();
  sc->add_option("--p", sim.p, "Number of variables")->capture_default_str();
  sc->add_option("--n", sim.n, "Number of observations")->capture_default_str();
  sc->add_option("--seed", sim.seed, "Random seed (printed when drawn)");
  sc->add_option("--out", sim.out, "Output directory")->required();
  sc->add_option("--er-gamma", sim.er_gamma, "Edge probability for erdos_renyi");
  sc->add_option("--hubs", sim.hubs, "Hub count for hub graphs");
  sc->add_option("--sf-power", sim.sf_power, "Attachment power for scale_free");
  sc->add_option("--sf-zero-appeal", sim.sf_zero_appeal, "Zero appeal for scale_free (default p)");
  sc->add_option("--root-log-rate", sim.root_log_rate, "Log rate of parentless nodes")->capture_default_str();
  sc->add_option("--overflow-threshold", sim.overflow_threshold, "Rows with larger counts are redrawn");
  sc->add_option("--threads", sim.threads, "Worker threads (fallback: COUNTDAG_THREADS)");

  BenchArgs bench;
  auto* bc = app.add_subcommand("bench", "Run a Monte-Carlo benchmark from a JSON config");
  bc->add_option("--config", bench.config, "Bench config JSON")->required();
  bc->add_option("--out", bench.out, "Output prefix for <out>.csv and <out>.json");
  bc->add_option("--seed", bench.seed, "Override the config seed");
  bc->add_option("--replicates", bench.replicates, "Override the replicate count");
  bc->add_option("--threads", bench.threads, "Worker threads (fallback: COUNTDAG_THREADS)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*lc) return cmd_learn(learn, out, err);
    if (*sc) return cmd_simulate(sim, out, err);
    if (*bc) return cmd_bench(bench, out, err);
  } catch (const BadInput& e) {
    err << "countdag: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const InvalidData& e) {
    err << "countdag: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    err << "countdag: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "countdag: " << e.what() << '\n';
    return kExitAlgorithm;
  }
  return kExitBadInput;
}

}  // namespace countdag::cli
