#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "countdag/bench.hpp"
#include "countdag/error.hpp"
#include "countdag/graph.hpp"
#include "countdag/io.hpp"
#include "countdag/learners.hpp"
#include "countdag/poisson_glm.hpp"
#include "countdag/score_search.hpp"
#include "countdag/simgen.hpp"

namespace py = pybind11;
using namespace countdag;

namespace {

std::vector<std::pair<NodeId, NodeId>> edge_pairs(const Dag& dag) {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const Edge& e : dag.edges()) out.emplace_back(e.from, e.to);
  return out;
}

Dag make_dag(std::size_t p, const std::vector<std::pair<NodeId, NodeId>>& edges) {
  std::vector<Edge> es;
  for (auto [a, b] : edges) es.push_back({a, b});
  return Dag(p, std::move(es));
}

FitOptions fit_options(double tol, std::size_t max_iter, double theta_cap, double lp_cap, bool intercept) {
  FitOptions f;
  f.tol = tol;
  f.max_iter = max_iter;
  f.theta_cap = theta_cap;
  f.lp_cap = lp_cap;
  f.intercept = intercept;
  return f;
}

LearnConfig learn_config(std::optional<double> alpha, std::optional<double> alpha_b, std::optional<std::size_t> m,
                         std::size_t threads) {
  LearnConfig cfg;
  cfg.alpha = alpha;
  cfg.alpha_exponent = alpha_b;
  if (!alpha && !alpha_b) cfg.alpha = 0.05;
  cfg.max_level = m;
  cfg.threads = threads;
  return cfg;
}

py::dict learn_result(const LearnResult& r) {
  py::dict d;
  d["edges"] = edge_pairs(r.dag);
  d["alpha"] = r.alpha;
  d["tests"] = r.tests;
  d["fits"] = r.fits;
  d["warnings"] = r.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Structure learning for Poisson DAGs with a known ordering";

  py::register_exception<InvalidData>(m, "InvalidData", PyExc_ValueError);
  py::register_exception<SingularInformation>(m, "SingularInformation", PyExc_ArithmeticError);
  py::register_exception<RowRejectionLimit>(m, "RowRejectionLimit", PyExc_RuntimeError);

  m.def("nll", &nll, py::arg("theta"), py::arg("y"), py::arg("X"));
  m.def("gradient", &gradient, py::arg("theta"), py::arg("y"), py::arg("X"));
  m.def("fisher_information", &fisher_information, py::arg("theta"), py::arg("X"));
  m.def("alpha_schedule", &alpha_schedule, py::arg("n"), py::arg("b"));

  py::class_<GlmFit>(m, "GlmFit")
      .def_readonly("covariates", &GlmFit::covariates)
      .def_readonly("theta", &GlmFit::theta)
      .def_readonly("fisher", &GlmFit::fisher)
      .def_readonly("nll", &GlmFit::nll)
      .def_readonly("gradient_norm", &GlmFit::gradient_norm)
      .def_readonly("converged", &GlmFit::converged)
      .def_readonly("iterations", &GlmFit::iterations)
      .def_readonly("diverged", &GlmFit::diverged)
      .def_readonly("lp_capped", &GlmFit::lp_capped);

  m.def(
      "fit",
      [](const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double tol, std::size_t max_iter, double theta_cap,
         double lp_cap, bool intercept) {
        return fit(y, X, fit_options(tol, max_iter, theta_cap, lp_cap, intercept));
      },
      py::arg("y"), py::arg("X"), py::arg("tol") = 1e-8, py::arg("max_iter") = 100, py::arg("theta_cap") = 20.0,
      py::arg("lp_cap") = 30.0, py::arg("intercept") = false);

  py::class_<WaldTest>(m, "WaldTest")
      .def_readonly("target", &WaldTest::target)
      .def_readonly("z", &WaldTest::z)
      .def_readonly("alpha", &WaldTest::alpha)
      .def_readonly("p_value", &WaldTest::p_value)
      .def_readonly("reject", &WaldTest::reject)
      .def_readonly("diverged", &WaldTest::diverged);
  m.def("wald", &wald, py::arg("fit"), py::arg("target"), py::arg("alpha"));

  m.def(
      "compare",
      [](std::size_t p, const std::vector<std::pair<NodeId, NodeId>>& estimated,
         const std::vector<std::pair<NodeId, NodeId>>& reference) {
        const RecoveryMetrics r = compare(make_dag(p, estimated), make_dag(p, reference));
        py::dict d;
        d["tp"] = r.tp;
        d["fp"] = r.fp;
        d["fn"] = r.fn;
        d["precision"] = r.precision;
        d["recall"] = r.recall;
        d["f1"] = r.f1;
        return d;
      },
      py::arg("p"), py::arg("estimated"), py::arg("reference"));

  m.def(
      "or_ppgm",
      [](const Eigen::MatrixXd& counts, std::vector<NodeId> ordering, std::optional<double> alpha,
         std::optional<double> alpha_b, std::optional<std::size_t> max_level, std::size_t threads) {
        return learn_result(
            or_ppgm(CountMatrix(counts), Ordering(std::move(ordering)), learn_config(alpha, alpha_b, max_level, threads)));
      },
      py::arg("counts"), py::arg("ordering"), py::arg("alpha") = py::none(), py::arg("alpha_b") = py::none(),
      py::arg("m") = py::none(), py::arg("threads") = 1);

  m.def(
      "or_lpgm",
      [](const Eigen::MatrixXd& counts, std::vector<NodeId> ordering, std::optional<double> alpha,
         std::optional<double> alpha_b, std::size_t threads) {
        return learn_result(or_lpgm(CountMatrix(counts), Ordering(std::move(ordering)),
                                    learn_config(alpha, alpha_b, std::nullopt, threads)));
      },
      py::arg("counts"), py::arg("ordering"), py::arg("alpha") = py::none(), py::arg("alpha_b") = py::none(),
      py::arg("threads") = 1);

  m.def(
      "pk2",
      [](const Eigen::MatrixXd& counts, std::vector<NodeId> ordering, const std::string& criterion,
         std::optional<std::size_t> max_parents, std::size_t threads) {
        ScoreConfig cfg;
        cfg.criterion = parse_criterion(criterion);
        cfg.max_parents = max_parents;
        cfg.threads = threads;
        const SearchResult r = pk2(CountMatrix(counts), Ordering(std::move(ordering)), cfg);
        py::dict d;
        d["edges"] = edge_pairs(r.dag);
        d["total_score"] = r.total_score;
        d["forward_steps"] = r.forward_steps;
        d["backward_steps"] = r.backward_steps;
        return d;
      },
      py::arg("counts"), py::arg("ordering"), py::arg("criterion") = "bic", py::arg("max_parents") = py::none(),
      py::arg("threads") = 1);

  // Same draws as `countdag simulate --seed`.
  m.def(
      "simulate",
      [](const std::string& graph, std::size_t p, std::size_t n, std::uint64_t seed, std::size_t threads) {
        SimConfig cfg = table_defaults(parse_graph_kind(graph), p);
        cfg.n = n;
        cfg.seed = seed;
        cfg.validate();
        SplitMix64 rng(SplitMix64::derive(seed, {1}));
        const GeneratedGraph g = gen_graph(cfg, rng);
        const WeightedDag w = gen_weights(g.dag, rng);
        const CountMatrix data = sample_data(w, g.ordering, n, cfg, SplitMix64::derive(seed, {2}), threads);
        py::dict weights;
        for (const auto& [e, theta] : w.weights) weights[py::make_tuple(e.from, e.to)] = theta;
        py::dict d;
        d["counts"] = data.values();
        d["edges"] = edge_pairs(g.dag);
        d["ordering"] = std::vector<NodeId>(g.ordering.perm().begin(), g.ordering.perm().end());
        d["weights"] = weights;
        return d;
      },
      py::arg("graph"), py::arg("p"), py::arg("n"), py::arg("seed"), py::arg("threads") = 1);

  m.def("outlier_filter", [](const Eigen::MatrixXd& counts) {
    const io::FilterResult r = io::outlier_filter(CountMatrix(counts));
    return py::make_tuple(r.data.values(), r.dropped);
  });
}
