#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "countdag/error.hpp"
#include "countdag/io.hpp"

using namespace countdag;
namespace fs = std::filesystem;

namespace {

const fs::path kData = COUNTDAG_TEST_DATA;

CountMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return io::read_counts(in, "t.csv");
}

template <class F>
ParseError catch_parse(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected ParseError");
  return ParseError("", 0, 0, "");
}

}  // namespace

TEST_CASE("counts with and without a header") {
  const CountMatrix h = parse("a,b\n1,2\n3,4\n");
  CHECK(h.rows() == 2);
  CHECK(h.labels() == std::vector<std::string>{"a", "b"});
  CHECK(h(1, 0) == 3.0);

  const CountMatrix bare = parse("1,2\n3,4\n\n");
  CHECK(bare.rows() == 2);
  CHECK(bare.labels() == std::vector<std::string>{"X1", "X2"});

  const CountMatrix crlf = parse("a,b\r\n1,2\r\n");
  CHECK(crlf.labels() == std::vector<std::string>{"a", "b"});
  CHECK(crlf(0, 1) == 2.0);
}

TEST_CASE("malformed counts report line and column") {
  const ParseError neg = catch_parse([] { parse("a,b\n1,2\n3,-1\n"); });
  CHECK(neg.line() == 3);
  CHECK(neg.column() == 2);

  const ParseError frac = catch_parse([] { parse("a,b\n1,2.5\n"); });
  CHECK(frac.line() == 2);
  CHECK(frac.column() == 2);

  const ParseError ragged = catch_parse([] { parse("a,b\n1,2\n3\n"); });
  CHECK(ragged.line() == 3);

  const ParseError word = catch_parse([] { parse("1,2\n3,x\n"); });
  CHECK(word.line() == 2);
  CHECK(word.column() == 2);

  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("a,a\n1,2\n"), ParseError);
  CHECK_THROWS_AS(io::read_counts(kData / "does_not_exist.csv"), InvalidData);
  CHECK_THROWS_AS(io::read_counts(kData / "negative.csv"), ParseError);
}

TEST_CASE("count matrix round trip") {
  Eigen::MatrixXd v(3, 3);
  v << 0, 1, 2, 3, 400000, 5, 6, 7, 8;
  const CountMatrix m(v, {"g1", "g2", "g3"});
  std::ostringstream out;
  io::write_counts(out, m);
  CHECK(parse(out.str()) == m);
}

TEST_CASE("ordering files") {
  std::istringstream in("b, a ,c\n");
  const auto labels = io::read_ordering_labels(in);
  CHECK(labels == std::vector<std::string>{"b", "a", "c"});
  const Ordering o = io::resolve_ordering(labels, {"a", "b", "c"});
  CHECK(o == Ordering({1, 0, 2}));

  std::ostringstream out;
  io::write_ordering(out, o, {"a", "b", "c"});
  std::istringstream back(out.str());
  CHECK(io::resolve_ordering(io::read_ordering_labels(back), {"a", "b", "c"}) == o);

  try {
    io::resolve_ordering({"a", "zz", "c"}, {"a", "b", "c"});
    FAIL("expected InvalidData");
  } catch (const InvalidData& e) {
    CHECK(std::string(e.what()).find("zz") != std::string::npos);
  }
  CHECK_THROWS_AS(io::resolve_ordering({"a", "a", "c"}, {"a", "b", "c"}), InvalidData);
  CHECK_THROWS_AS(io::resolve_ordering({"a", "b"}, {"a", "b", "c"}), InvalidData);
  std::istringstream two("a,b\nc\n");
  CHECK_THROWS_AS(io::read_ordering_labels(two), ParseError);
}

TEST_CASE("edge lists and adjacency round trip") {
  const Dag d = Dag(4, {{0, 1}, {0, 3}, {2, 3}}, {"a", "b", "c", "d"});
  std::ostringstream el;
  io::write_edge_list(el, d);
  CHECK(el.str() == "a -> b\na -> d\nc -> d\n");
  std::istringstream in("# comment\n\n" + el.str());
  CHECK(io::read_edge_list(in, d.labels()) == d);

  std::ostringstream adj;
  io::write_adjacency(adj, d);
  std::istringstream adj_in(adj.str());
  const Dag back = io::read_adjacency(adj_in);
  CHECK(back == d);
  CHECK(back.labels() == d.labels());

  std::istringstream unknown("a -> q\n");
  const ParseError e = catch_parse([&] { io::read_edge_list(unknown, d.labels()); });
  CHECK(e.line() == 1);
  std::istringstream cyclic("a -> b\nb -> a\n");
  CHECK_THROWS_AS(io::read_edge_list(cyclic, d.labels()), InvalidData);
}

TEST_CASE("weights round trip at full precision") {
  const Dag d(3, {{0, 1}, {1, 2}});
  const WeightedDag w{d, {{Edge{0, 1}, 0.1 + 0.2}, {Edge{1, 2}, -1.0 / 3.0}}};
  std::ostringstream out;
  io::write_weights(out, w);
  std::istringstream in(out.str());
  const WeightedDag back = io::read_weights(in, d.labels());
  CHECK(back.dag == d);
  CHECK(back.weights == w.weights);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.0, 1.0, -0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, 0.1 + 0.2}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("outlier filter") {
  const io::FilterResult r = io::outlier_filter(io::read_counts(kData / "outliers.csv"));
  CHECK(r.dropped == 1);
  CHECK(r.data.rows() == 19);
  CHECK(r.data.values().col(0).maxCoeff() == 1.0);

  // Nine ones and a 100: deviation 89.1 stays inside 3 sample sd (93.9).
  Eigen::MatrixXd kept = Eigen::MatrixXd::Ones(10, 1);
  kept(9, 0) = 100;
  CHECK(io::outlier_filter(CountMatrix(kept)).dropped == 0);

  const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(5, 3, 2.0);
  const io::FilterResult flat = io::outlier_filter(CountMatrix(same));
  CHECK(flat.dropped == 0);
  CHECK(flat.data == CountMatrix(same));

  CHECK_THROWS_AS(io::outlier_filter(CountMatrix(Eigen::MatrixXd::Ones(1, 2))), InvalidData);
}

TEST_CASE("count matrix validation") {
  Eigen::MatrixXd bad(1, 2);
  bad << 1, 0.5;
  CHECK_THROWS_AS(CountMatrix{bad}, InvalidData);
  bad << 1, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(CountMatrix{bad}, InvalidData);
  CHECK_THROWS_AS(CountMatrix(Eigen::MatrixXd::Ones(2, 2), {"a"}), InvalidData);
  const CountMatrix m(Eigen::MatrixXd::Ones(2, 2), {"a", "b"});
  CHECK(m.find_label("b") == 1);
  CHECK(m.find_label("q") == 2);
}
