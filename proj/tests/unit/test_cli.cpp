#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "countdag/cli.hpp"

using namespace countdag;
namespace fs = std::filesystem;

namespace {

const fs::path kData = COUNTDAG_TEST_DATA;

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("countdag_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("help and unknown subcommands") {
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({}).code == cli::kExitBadInput);
  CHECK(invoke({"frobnicate"}).code == cli::kExitBadInput);
  CHECK(invoke({"learn", "--bogus"}).code == cli::kExitBadInput);
}

TEST_CASE("learn on independent counts finds no edges") {
  const fs::path dir = scratch("learn");
  for (std::string algo : {"or-ppgm", "or-lpgm", "pkbic"}) {
    const fs::path out = dir / (algo + ".edges");
    const Result r = invoke({"learn", "--counts", (kData / "independent_pois1.csv").string(), "--ordering",
                             (kData / "independent_pois1.ordering").string(), "--algo", algo, "--alpha", "0.01",
                             "--out", out.string()});
    INFO(algo << ": " << r.err);
    CHECK(r.code == 0);
    CHECK(slurp(out).empty());
    CHECK(r.err.find("learned 0 edges") != std::string::npos);
    const auto report = nlohmann::json::parse(slurp(out.string() + ".json"));
    CHECK(report.contains("config"));
  }

  // Edge list on stdout when --out is absent.
  const Result s = invoke({"learn", "--counts", (kData / "independent_pois1.csv").string(), "--ordering",
                           (kData / "independent_pois1.ordering").string(), "--report",
                           (dir / "r.json").string()});
  CHECK(s.code == 0);
  CHECK(s.out.empty());
  const auto report = nlohmann::json::parse(slurp(dir / "r.json"));
  CHECK(report["edges"].size() == 1);
  CHECK(report["edges"][0]["kept"] == false);
  CHECK(report["edges"][0]["from"] == "A");
}

TEST_CASE("learn rejects bad input with exit code 2") {
  const std::string counts = (kData / "independent_pois1.csv").string();
  const Result missing = invoke({"learn", "--counts", counts, "--ordering", "/nonexistent/order.txt"});
  CHECK(missing.code == cli::kExitBadInput);
  CHECK(missing.err.find("/nonexistent/order.txt") != std::string::npos);

  const Result label = invoke({"learn", "--counts", counts, "--ordering", (kData / "bad_label.ordering").string()});
  CHECK(label.code == cli::kExitBadInput);
  CHECK(label.err.find("Z") != std::string::npos);

  const Result neg = invoke({"learn", "--counts", (kData / "negative.csv").string(), "--ordering",
                             (kData / "independent_pois1.ordering").string()});
  CHECK(neg.code == cli::kExitBadInput);
  CHECK(neg.err.find("negative.csv:3:2") != std::string::npos);

  const Result ragged = invoke({"learn", "--counts", (kData / "ragged.csv").string(), "--ordering",
                                (kData / "independent_pois1.ordering").string()});
  CHECK(ragged.code == cli::kExitBadInput);

  const Result both = invoke({"learn", "--counts", counts, "--ordering", (kData / "independent_pois1.ordering").string(),
                              "--alpha", "0.1", "--alpha-b", "0.2"});
  CHECK(both.code == cli::kExitBadInput);

  const Result alpha = invoke({"learn", "--counts", counts, "--ordering",
                               (kData / "independent_pois1.ordering").string(), "--alpha", "1.5"});
  CHECK(alpha.code == cli::kExitBadInput);
}

TEST_CASE("simulate is byte-identical for a fixed seed") {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  const Result ra = invoke({"simulate", "--graph", "hub", "--p", "10", "--n", "300", "--seed", "77", "--out",
                            a.string()});
  const Result rb = invoke({"simulate", "--graph", "hub", "--p", "10", "--n", "300", "--seed", "77", "--out",
                            b.string(), "--threads", "3"});
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  CHECK(ra.err.find("seed: 77") != std::string::npos);
  for (const char* f : {"counts.csv", "truth.edges", "weights.csv", "ordering.txt"}) {
    INFO(f);
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }

  // Without --seed one is drawn and reported.
  const Result r = invoke({"simulate", "--graph", "erdos_renyi", "--p", "5", "--n", "10", "--out",
                           scratch("sim_c").string()});
  CHECK(r.code == 0);
  CHECK(r.err.find("seed: ") != std::string::npos);

  CHECK(invoke({"simulate", "--graph", "lattice", "--p", "5", "--n", "10", "--out", a.string()}).code ==
        cli::kExitBadInput);
  CHECK(invoke({"simulate", "--graph", "hub", "--p", "5", "--n", "10"}).code == cli::kExitBadInput);
}

TEST_CASE("simulated data feeds back into learn") {
  const fs::path dir = scratch("roundtrip");
  REQUIRE(invoke({"simulate", "--graph", "scale_free", "--p", "6", "--n", "500", "--seed", "3", "--out",
                  dir.string()})
              .code == 0);
  const Result r = invoke({"learn", "--counts", (dir / "counts.csv").string(), "--ordering",
                           (dir / "ordering.txt").string(), "--algo", "pkbic", "--out",
                           (dir / "learned.edges").string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "learned.edges.json"));
}

TEST_CASE("bench with the oracle learner") {
  const fs::path dir = scratch("bench");
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"seed": 11, "replicates": 1,
    "sim": {"graph": "hub", "p": 8, "n": 50},
    "learners": [{"algo": "oracle"}]})";
  const Result r = invoke({"bench", "--config", cfg.string(), "--out", (dir / "res").string()});
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.err.find("seed: 11") != std::string::npos);
  CHECK(r.out.find("oracle") != std::string::npos);
  CHECK(r.out.find("1.000") != std::string::npos);
  const std::string csv = slurp(dir / "res.csv");
  CHECK(csv.find("hub,oracle,") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "res.json"));
  CHECK_FALSE(j.empty());

  // --seed and --replicates override the file.
  const Result s = invoke({"bench", "--config", cfg.string(), "--out", (dir / "res2").string(), "--seed", "12",
                           "--replicates", "2"});
  CHECK(s.code == 0);
  CHECK(s.err.find("seed: 12") != std::string::npos);

  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << R"({"sim": {"p": 5, "n": 50}, "learners": [{"algo": "ges"}]})";
  const Result u = invoke({"bench", "--config", bad.string(), "--out", (dir / "res3").string()});
  CHECK(u.code == cli::kExitBadInput);
  CHECK(u.err.find("ges") != std::string::npos);

  const fs::path broken = dir / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK(invoke({"bench", "--config", broken.string(), "--out", (dir / "res4").string()}).code ==
        cli::kExitBadInput);
}
