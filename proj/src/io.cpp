#include "countdag/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "countdag/error.hpp"

namespace countdag::io {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_number(const std::string& field, double& out) {
  if (field.empty()) return false;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool is_blank(const std::string& line) { return trim(line).empty(); }

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidData("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::map<std::string, NodeId> label_index(const std::vector<std::string>& labels) {
  std::map<std::string, NodeId> index;
  for (NodeId i = 0; i < labels.size(); ++i) index.emplace(labels[i], i);
  return index;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

CountMatrix read_counts(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::vector<std::string> fields = split_csv(line);
    if (first) {
      first = false;
      width = fields.size();
      double dummy = 0.0;
      bool numeric = true;
      for (const auto& f : fields) numeric = numeric && parse_number(f, dummy);
      if (!numeric) {
        std::set<std::string> seen;
        for (std::size_t j = 0; j < fields.size(); ++j) {
          if (fields[j].empty()) throw ParseError(source, line_no, j + 1, "empty column label");
          if (!seen.insert(fields[j]).second) {
            throw ParseError(source, line_no, j + 1, "duplicate column label '" + fields[j] + "'");
          }
        }
        labels = std::move(fields);
        continue;
      }
    }
    if (fields.size() != width) {
      throw ParseError(source, line_no, std::min(fields.size(), width) + 1,
                       "expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j) {
      double v = 0.0;
      if (!parse_number(fields[j], v)) {
        throw ParseError(source, line_no, j + 1, "'" + fields[j] + "' is not a number");
      }
      if (!std::isfinite(v) || v < 0.0 || v != std::floor(v)) {
        throw ParseError(source, line_no, j + 1, "'" + fields[j] + "' is not a non-negative integer count");
      }
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }
  if (first) throw ParseError(source, line_no + 1, 1, "no data");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return CountMatrix(std::move(values), std::move(labels));
}

CountMatrix read_counts(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_counts(in, path.string());
}

void write_counts(std::ostream& out, const CountMatrix& data) {
  for (std::size_t j = 0; j < data.cols(); ++j) out << (j ? "," : "") << data.labels()[j];
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      out << (j ? "," : "") << static_cast<unsigned long long>(data(i, j));
    }
    out << '\n';
  }
}

void write_counts(const std::filesystem::path& path, const CountMatrix& data) {
  auto out = open_out(path);
  write_counts(out, data);
}

std::vector<std::string> read_ordering_labels(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::vector<std::string> labels = split_csv(line);
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j].empty()) throw ParseError(source, line_no, j + 1, "empty label in ordering");
    }
    std::string rest;
    while (std::getline(in, rest)) {
      ++line_no;
      if (!is_blank(rest)) throw ParseError(source, line_no, 1, "ordering must be a single line");
    }
    return labels;
  }
  throw ParseError(source, 1, 1, "ordering file is empty");
}

std::vector<std::string> read_ordering_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_ordering_labels(in, path.string());
}

Ordering resolve_ordering(const std::vector<std::string>& ordering_labels, const std::vector<std::string>& labels) {
  const auto index = label_index(labels);
  std::vector<NodeId> perm;
  std::set<std::string> seen;
  std::vector<std::string> unknown;
  for (const auto& name : ordering_labels) {
    auto it = index.find(name);
    if (it == index.end()) {
      unknown.push_back(name);
      continue;
    }
    if (!seen.insert(name).second) throw InvalidData("ordering lists '" + name + "' more than once");
    perm.push_back(it->second);
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + u;
    throw InvalidData("ordering labels not found among data columns: " + list);
  }
  if (perm.size() != labels.size()) {
    std::string list;
    for (const auto& l : labels) {
      if (!seen.count(l)) list += (list.empty() ? "" : ", ") + l;
    }
    throw InvalidData("ordering does not mention columns: " + list);
  }
  return Ordering(std::move(perm));
}

void write_ordering(std::ostream& out, const Ordering& ordering, const std::vector<std::string>& labels) {
  for (std::size_t k = 0; k < ordering.size(); ++k) out << (k ? "," : "") << labels.at(ordering.at(k));
  out << '\n';
}

void write_ordering(const std::filesystem::path& path, const Ordering& ordering,
                    const std::vector<std::string>& labels) {
  auto out = open_out(path);
  write_ordering(out, ordering, labels);
}

Dag read_edge_list(std::istream& in, const std::vector<std::string>& labels, const std::string& source) {
  const auto index = label_index(labels);
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto arrow = body.find("->");
    if (arrow == std::string::npos) throw ParseError(source, line_no, 1, "expected 't -> s'");
    const std::string from = trim(std::string_view(body).substr(0, arrow));
    const std::string to = trim(std::string_view(body).substr(arrow + 2));
    auto f = index.find(from);
    if (f == index.end()) throw ParseError(source, line_no, 1, "unknown node '" + from + "'");
    auto t = index.find(to);
    if (t == index.end()) throw ParseError(source, line_no, arrow + 3, "unknown node '" + to + "'");
    edges.push_back({f->second, t->second});
  }
  try {
    return Dag(labels.size(), std::move(edges), labels);
  } catch (const std::invalid_argument& e) {
    throw InvalidData(source + ": " + e.what());
  }
}

Dag read_edge_list(const std::filesystem::path& path, const std::vector<std::string>& labels) {
  auto in = open_in(path);
  return read_edge_list(in, labels, path.string());
}

void write_edge_list(std::ostream& out, const Dag& dag) {
  for (const Edge& e : dag.edges()) out << dag.labels()[e.from] << " -> " << dag.labels()[e.to] << '\n';
}

void write_edge_list(const std::filesystem::path& path, const Dag& dag) {
  auto out = open_out(path);
  write_edge_list(out, dag);
}

Dag read_adjacency(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> labels;
  std::vector<Edge> edges;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto fields = split_csv(line);
    if (labels.empty()) {
      labels = std::move(fields);
      continue;
    }
    if (fields.size() != labels.size()) {
      throw ParseError(source, line_no, 1, "expected " + std::to_string(labels.size()) + " fields");
    }
    if (row >= labels.size()) throw ParseError(source, line_no, 1, "more rows than columns");
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (fields[j] == "1") {
        edges.push_back({row, j});
      } else if (fields[j] != "0") {
        throw ParseError(source, line_no, j + 1, "adjacency entries must be 0 or 1");
      }
    }
    ++row;
  }
  if (row != labels.size()) throw ParseError(source, line_no, 1, "adjacency matrix is not square");
  const std::size_t p = labels.size();
  try {
    return Dag(p, std::move(edges), std::move(labels));
  } catch (const std::invalid_argument& e) {
    throw InvalidData(source + ": " + e.what());
  }
}

void write_adjacency(std::ostream& out, const Dag& dag) {
  const std::size_t p = dag.size();
  for (std::size_t j = 0; j < p; ++j) out << (j ? "," : "") << dag.labels()[j];
  out << '\n';
  for (NodeId t = 0; t < p; ++t) {
    for (NodeId s = 0; s < p; ++s) out << (s ? "," : "") << (dag.has_edge(t, s) ? 1 : 0);
    out << '\n';
  }
}

void write_weights(std::ostream& out, const WeightedDag& wdag) {
  out << "from,to,theta\n";
  for (const auto& [e, theta] : wdag.weights) {
    out << wdag.dag.labels()[e.from] << ',' << wdag.dag.labels()[e.to] << ',' << format_double(theta) << '\n';
  }
}

void write_weights(const std::filesystem::path& path, const WeightedDag& wdag) {
  auto out = open_out(path);
  write_weights(out, wdag);
}

WeightedDag read_weights(std::istream& in, const std::vector<std::string>& labels, const std::string& source) {
  const auto index = label_index(labels);
  std::string line;
  std::size_t line_no = 0;
  std::vector<Edge> edges;
  std::map<Edge, double> weights;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto fields = split_csv(line);
    if (header) {
      header = false;
      if (fields.size() == 3 && fields[0] == "from") continue;
    }
    if (fields.size() != 3) throw ParseError(source, line_no, 1, "expected from,to,theta");
    auto f = index.find(fields[0]);
    auto t = index.find(fields[1]);
    if (f == index.end()) throw ParseError(source, line_no, 1, "unknown node '" + fields[0] + "'");
    if (t == index.end()) throw ParseError(source, line_no, 2, "unknown node '" + fields[1] + "'");
    double theta = 0.0;
    if (!parse_number(fields[2], theta)) throw ParseError(source, line_no, 3, "bad weight '" + fields[2] + "'");
    edges.push_back({f->second, t->second});
    weights[{f->second, t->second}] = theta;
  }
  return WeightedDag{Dag(labels.size(), std::move(edges), labels), std::move(weights)};
}

FilterResult outlier_filter(const CountMatrix& data) {
  const std::size_t n = data.rows();
  const std::size_t p = data.cols();
  if (n < 2) throw InvalidData("outlier filter needs at least two rows");
  const Eigen::MatrixXd& x = data.values();
  std::vector<bool> keep(n, true);
  for (std::size_t j = 0; j < p; ++j) {
    const auto col = x.col(static_cast<Eigen::Index>(j));
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / static_cast<double>(n - 1);
    const double bound = 3.0 * std::sqrt(var);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(col[static_cast<Eigen::Index>(i)] - mean) > bound) keep[i] = false;
    }
  }
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) rows.push_back(static_cast<Eigen::Index>(i));
  }
  if (rows.empty()) throw InvalidData("outlier filter removed every row");
  Eigen::MatrixXd kept(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < rows.size(); ++r) kept.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
  return {CountMatrix(std::move(kept), data.labels()), n - rows.size()};
}

}  // namespace countdag::io
