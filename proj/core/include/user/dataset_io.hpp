#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "user/graph.hpp"

namespace user {

struct LoadStats {
  int duplicate_edges = 0;
  int self_loops = 0;
};

/// Reads edges.csv / features.csv / labels.csv (optional) from a directory.
/// features.csv starts with an "n,d" header; edges.csv holds one 0-indexed
/// "u,v" pair per line. Duplicate and self-loop edges are dropped and counted.
Dataset load_dataset(const std::filesystem::path& dir, LoadStats* stats = nullptr);

/// Writes the same three files (labels.csv only when present).
void save_dataset(const std::filesystem::path& dir, const Dataset& ds);

void save_edges_csv(const std::filesystem::path& file, const Graph& g);

nd::Tensor load_matrix_csv(const std::filesystem::path& file);  // headerless dense
void save_matrix_csv(const std::filesystem::path& file, const nd::Tensor& m);

std::vector<int> load_labels_csv(const std::filesystem::path& file);
void save_labels_csv(const std::filesystem::path& file, const std::vector<int>& labels);

/// Shortest round-trip decimal form (used by every CSV writer so outputs are
/// byte-stable).
std::string format_double(double v);

}  // namespace user
