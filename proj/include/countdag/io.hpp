#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "countdag/count_matrix.hpp"
#include "countdag/graph.hpp"
#include "countdag/simgen.hpp"

namespace countdag::io {

// Counts CSV: optional header row of labels, then one row per observation.
// A first row with any non-numeric field is taken as the header.
CountMatrix read_counts(std::istream& in, const std::string& source = "<stream>");
CountMatrix read_counts(const std::filesystem::path& path);
void write_counts(std::ostream& out, const CountMatrix& data);
void write_counts(const std::filesystem::path& path, const CountMatrix& data);

// Ordering file: a single line of comma-separated labels, earliest first.
std::vector<std::string> read_ordering_labels(std::istream& in, const std::string& source = "<stream>");
std::vector<std::string> read_ordering_labels(const std::filesystem::path& path);
// Maps labels onto column indices; every label must appear exactly once.
Ordering resolve_ordering(const std::vector<std::string>& ordering_labels, const std::vector<std::string>& labels);
void write_ordering(std::ostream& out, const Ordering& ordering, const std::vector<std::string>& labels);
void write_ordering(const std::filesystem::path& path, const Ordering& ordering,
                    const std::vector<std::string>& labels);

// Edge list: one "t -> s" line per edge; blank lines and '#' comments are skipped.
Dag read_edge_list(std::istream& in, const std::vector<std::string>& labels, const std::string& source = "<stream>");
Dag read_edge_list(const std::filesystem::path& path, const std::vector<std::string>& labels);
void write_edge_list(std::ostream& out, const Dag& dag);
void write_edge_list(const std::filesystem::path& path, const Dag& dag);

// Adjacency CSV: header of labels, then p rows of 0/1 where entry (t, s) = 1 means t -> s.
Dag read_adjacency(std::istream& in, const std::string& source = "<stream>");
void write_adjacency(std::ostream& out, const Dag& dag);

// Weights CSV: "from,to,theta" header then one triplet per edge.
void write_weights(std::ostream& out, const WeightedDag& wdag);
void write_weights(const std::filesystem::path& path, const WeightedDag& wdag);
WeightedDag read_weights(std::istream& in, const std::vector<std::string>& labels,
                         const std::string& source = "<stream>");

struct FilterResult {
  CountMatrix data;
  std::size_t dropped = 0;
};

// Drops every row holding an entry more than three sample standard deviations
// from its column mean. Throws InvalidData when nothing survives.
FilterResult outlier_filter(const CountMatrix& data);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace countdag::io
