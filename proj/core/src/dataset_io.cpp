#include "user/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace user {

namespace fs = std::filesystem;
using nd::Tensor;

namespace {

std::ifstream open_input(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  return in;
}

std::ofstream open_output(const fs::path& file) {
  std::ofstream out(file, std::ios::binary);  // LF line endings everywhere
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& s, const fs::path& file) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr == first)
    throw std::runtime_error("bad number '" + s + "' in " + file.string());
  return v;
}

long parse_long(const std::string& s, const fs::path& file) {
  long v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr == first)
    throw std::runtime_error("bad integer '" + s + "' in " + file.string());
  return v;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

Dataset load_dataset(const fs::path& dir, LoadStats* stats) {
  const fs::path features_file = dir / "features.csv";
  const fs::path edges_file = dir / "edges.csv";
  const fs::path labels_file = dir / "labels.csv";

  // features.csv: "n,d" header then n rows of d values
  std::ifstream fin = open_input(features_file);
  std::string line;
  if (!std::getline(fin, line)) throw std::runtime_error("empty " + features_file.string());
  const auto header = split_commas(strip_cr(line));
  if (header.size() != 2) throw std::runtime_error("bad header in " + features_file.string());
  const int n = static_cast<int>(parse_long(header[0], features_file));
  const int d = static_cast<int>(parse_long(header[1], features_file));
  if (n <= 0 || d <= 0) throw std::runtime_error("bad dimensions in " + features_file.string());

  Tensor x(n, d);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(fin, line))
      throw std::runtime_error("missing feature row " + std::to_string(i) + " in " +
                               features_file.string());
    const auto cells = split_commas(strip_cr(line));
    if (static_cast<int>(cells.size()) != d)
      throw std::runtime_error("ragged feature row " + std::to_string(i) + " in " +
                               features_file.string());
    for (int j = 0; j < d; ++j) x(i, j) = parse_double(cells[static_cast<std::size_t>(j)], features_file);
  }

  // edges.csv: one "u,v" pair per line
  std::ifstream ein = open_input(edges_file);
  std::set<std::pair<int, int>> unique_edges;
  LoadStats local{};
  while (std::getline(ein, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != 2) throw std::runtime_error("bad edge line '" + line + "'");
    int u = static_cast<int>(parse_long(cells[0], edges_file));
    int v = static_cast<int>(parse_long(cells[1], edges_file));
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw std::out_of_range("edge (" + std::to_string(u) + "," + std::to_string(v) +
                              ") out of range in " + edges_file.string());
    if (u == v) {
      ++local.self_loops;
      continue;
    }
    if (u > v) std::swap(u, v);
    if (!unique_edges.emplace(u, v).second) ++local.duplicate_edges;
  }

  Tensor a(n, n);
  for (auto [u, v] : unique_edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }

  std::optional<std::vector<int>> labels;
  if (fs::exists(labels_file)) {
    std::vector<int> l = load_labels_csv(labels_file);
    if (static_cast<int>(l.size()) != n)
      throw std::runtime_error("labels.csv row count != n in " + dir.string());
    labels = std::move(l);
  }

  Dataset ds{Graph(std::move(a)), std::move(x), std::move(labels)};
  validate_dataset(ds);
  if (stats) *stats = local;
  return ds;
}

void save_dataset(const fs::path& dir, const Dataset& ds) {
  std::error_code ec;
  fs::create_directories(dir, ec);

  save_edges_csv(dir / "edges.csv", ds.graph);

  std::ofstream fout = open_output(dir / "features.csv");
  fout << ds.features.rows() << ',' << ds.features.cols() << '\n';
  for (int i = 0; i < ds.features.rows(); ++i) {
    for (int j = 0; j < ds.features.cols(); ++j) {
      if (j) fout << ',';
      fout << format_double(ds.features(i, j));
    }
    fout << '\n';
  }

  if (ds.labels) save_labels_csv(dir / "labels.csv", *ds.labels);
}

void save_edges_csv(const fs::path& file, const Graph& g) {
  std::ofstream out = open_output(file);
  for (auto [u, v] : g.edges()) out << u << ',' << v << '\n';
}

Tensor load_matrix_csv(const fs::path& file) {
  std::ifstream in = open_input(file);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, file));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("ragged row in " + file.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty matrix file " + file.string());
  Tensor m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void save_matrix_csv(const fs::path& file, const Tensor& m) {
  std::ofstream out = open_output(file);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::vector<int> load_labels_csv(const fs::path& file) {
  std::ifstream in = open_input(file);
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    labels.push_back(static_cast<int>(parse_long(line, file)));
  }
  return labels;
}

void save_labels_csv(const fs::path& file, const std::vector<int>& labels) {
  std::ofstream out = open_output(file);
  for (int v : labels) out << v << '\n';
}

}  // namespace user
