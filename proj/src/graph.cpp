#include "graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace fs = std::filesystem;

namespace lrgae {

// ---- Graph ------------------------------------------------------------------

Graph::Graph(std::size_t n, std::vector<Edge> edges, Tensor features,
             std::optional<std::vector<int>> labels,
             std::optional<int> num_classes)
    : n_(n),
      edges_(std::move(edges)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes) {
  if (features_.rows() != n_) {
    throw ValidationError("graph: " + std::to_string(features_.rows()) +
                          " feature rows for " + std::to_string(n_) + " nodes");
  }
  for (const Edge& e : edges_) {
    if (e.u >= e.v) {
      throw ValidationError("graph: edge endpoints must satisfy u < v");
    }
    if (e.v >= n_) {
      throw ValidationError("graph: endpoint " + std::to_string(e.v) +
                            " out of range for n=" + std::to_string(n_));
    }
  }
  if (!std::is_sorted(edges_.begin(), edges_.end())) {
    std::sort(edges_.begin(), edges_.end());
  }
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw ValidationError("graph: duplicate edge");
  }
  if (labels_) {
    if (labels_->size() != n_) {
      throw ValidationError("graph: label count mismatch");
    }
    int max_label = -1;
    for (int l : *labels_) {
      if (l < 0) throw ValidationError("graph: negative label");
      max_label = std::max(max_label, l);
    }
    if (!num_classes_) num_classes_ = max_label + 1;
    if (max_label >= *num_classes_) {
      throw ValidationError("graph: label " + std::to_string(max_label) +
                            " >= num_classes " + std::to_string(*num_classes_));
    }
  }
  degrees_.assign(n_, 0);
  for (const Edge& e : edges_) {
    ++degrees_[e.u];
    ++degrees_[e.v];
  }
}

Graph Graph::canonicalize(std::size_t n, std::vector<Edge> raw_edges,
                          Tensor features, std::optional<std::vector<int>> labels,
                          std::optional<int> num_classes) {
  std::vector<Edge> cleaned;
  cleaned.reserve(raw_edges.size());
  for (const Edge& e : raw_edges) {
    if (e.u == e.v) continue;  // self-loops dropped
    if (e.u >= n || e.v >= n) {
      throw ValidationError("graph: endpoint " +
                            std::to_string(std::max(e.u, e.v)) +
                            " out of range for n=" + std::to_string(n));
    }
    cleaned.push_back(ordered_edge(e.u, e.v));
  }
  std::sort(cleaned.begin(), cleaned.end());
  cleaned.erase(std::unique(cleaned.begin(), cleaned.end()), cleaned.end());
  return Graph(n, std::move(cleaned), std::move(features), std::move(labels),
               num_classes);
}

bool Graph::operator==(const Graph& other) const {
  if (n_ != other.n_ || edges_ != other.edges_) return false;
  if (features_.rows() != other.features_.rows() ||
      features_.cols() != other.features_.cols()) {
    return false;
  }
  if (!std::equal(features_.values().begin(), features_.values().end(),
                  other.features_.values().begin())) {
    return false;
  }
  return labels_ == other.labels_;
}

std::vector<std::vector<NodeId>> adjacency_lists(std::size_t n,
                                                 std::span<const Edge> edges) {
  std::vector<std::vector<NodeId>> adj(n);
  for (const Edge& e : edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

// ---- normalization ----------------------------------------------------------

SparseMatrix gcn_normalize(std::size_t n, std::span<const Edge> edges) {
  std::vector<double> deg(n, 1.0);  // self-loop included
  for (const Edge& e : edges) {
    deg[e.u] += 1.0;
    deg[e.v] += 1.0;
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
  triplets.reserve(2 * edges.size() + n);
  for (std::size_t i = 0; i < n; ++i) triplets.emplace_back(i, i, 1.0 / deg[i]);
  for (const Edge& e : edges) {
    const double w = 1.0 / std::sqrt(deg[e.u] * deg[e.v]);
    triplets.emplace_back(e.u, e.v, w);
    triplets.emplace_back(e.v, e.u, w);
  }
  return SparseMatrix::from_triplets(n, n, std::move(triplets),
                                     /*symmetric=*/true);
}

SparseMatrix gcn_normalize(const Graph& g) {
  return gcn_normalize(g.n(), g.edges());
}

SparseMatrix mean_neighbor_matrix(std::size_t n, std::span<const Edge> edges) {
  std::vector<double> deg(n, 0.0);
  for (const Edge& e : edges) {
    deg[e.u] += 1.0;
    deg[e.v] += 1.0;
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
  triplets.reserve(2 * edges.size());
  for (const Edge& e : edges) {
    triplets.emplace_back(e.u, e.v, 1.0 / deg[e.u]);
    triplets.emplace_back(e.v, e.u, 1.0 / deg[e.v]);
  }
  return SparseMatrix::from_triplets(n, n, std::move(triplets));
}

// ---- dataset IO --------------------------------------------------------------

namespace {

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // A single trailing blank line (file ends with \n) is not a record.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

long parse_int(std::string_view tok, const fs::path& file, std::size_t lineno) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(file.filename().string() + ":" + std::to_string(lineno) +
                     ": expected integer, got '" + std::string(tok) + "'");
  }
  return value;
}

double parse_double(std::string_view tok, const fs::path& file,
                    std::size_t lineno) {
  // strtod requires a terminated buffer.
  std::string buf(tok);
  char* end = nullptr;
  const double value = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || buf.empty()) {
    throw ParseError(file.filename().string() + ":" + std::to_string(lineno) +
                     ": expected number, got '" + buf + "'");
  }
  return value;
}

std::vector<std::size_t> parse_index_array(const nlohmann::json& arr,
                                           const std::string& key,
                                           std::size_t n) {
  if (!arr.is_array()) {
    throw ParseError("splits.json: \"" + key + "\" must be an array");
  }
  std::vector<std::size_t> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number_integer()) {
      throw ParseError("splits.json: \"" + key + "\" contains a non-integer");
    }
    const long idx = v.get<long>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
      throw ValidationError("splits.json: index " + std::to_string(idx) +
                            " out of range in \"" + key + "\"");
    }
    out.push_back(static_cast<std::size_t>(idx));
  }
  return out;
}

}  // namespace

Graph load_graph(const std::string& dir) {
  const fs::path root(dir);
  const fs::path edges_path = root / "edges.tsv";
  const fs::path features_path = root / "features.csv";
  if (!fs::exists(edges_path)) throw IoError("missing " + edges_path.string());
  if (!fs::exists(features_path)) {
    throw IoError("missing " + features_path.string());
  }

  // features.csv fixes the node count.
  const auto feat_lines = read_lines(features_path);
  const std::size_t n = feat_lines.size();
  std::size_t d = 0;
  std::vector<double> feat_values;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row;
    std::size_t start = 0;
    const std::string& line = feat_lines[i];
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view tok(line.data() + start,
                                 (comma == std::string::npos ? line.size()
                                                             : comma) -
                                     start);
      row.push_back(parse_double(tok, features_path, i + 1));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (i == 0) {
      d = row.size();
    } else if (row.size() != d) {
      throw ParseError("features.csv:" + std::to_string(i + 1) + ": " +
                       std::to_string(row.size()) + " fields, expected " +
                       std::to_string(d));
    }
    feat_values.insert(feat_values.end(), row.begin(), row.end());
  }
  Tensor features = Tensor::from_values(n, d, std::move(feat_values));

  std::vector<Edge> raw;
  const auto edge_lines = read_lines(edges_path);
  raw.reserve(edge_lines.size());
  for (std::size_t i = 0; i < edge_lines.size(); ++i) {
    const std::string& line = edge_lines[i];
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("edges.tsv:" + std::to_string(i + 1) +
                       ": expected two tab-separated integers");
    }
    const long a = parse_int(std::string_view(line).substr(0, tab), edges_path,
                             i + 1);
    const long b = parse_int(std::string_view(line).substr(tab + 1), edges_path,
                             i + 1);
    if (a < 0 || b < 0) {
      throw ValidationError("edges.tsv:" + std::to_string(i + 1) +
                            ": negative node id");
    }
    raw.push_back(Edge{static_cast<NodeId>(a), static_cast<NodeId>(b)});
  }

  std::optional<std::vector<int>> labels;
  const fs::path labels_path = root / "labels.csv";
  if (fs::exists(labels_path)) {
    const auto label_lines = read_lines(labels_path);
    if (label_lines.size() != n) {
      throw ValidationError("labels.csv: " +
                            std::to_string(label_lines.size()) +
                            " lines for " + std::to_string(n) + " nodes");
    }
    std::vector<int> ls(n);
    for (std::size_t i = 0; i < n; ++i) {
      ls[i] = static_cast<int>(parse_int(label_lines[i], labels_path, i + 1));
    }
    labels = std::move(ls);
  }

  Graph g = Graph::canonicalize(n, std::move(raw), std::move(features),
                                std::move(labels));

  const fs::path splits_path = root / "splits.json";
  if (fs::exists(splits_path)) {
    std::ifstream in(splits_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("splits.json: " + std::string(e.what()));
    }
    NodeSplit split;
    split.train = parse_index_array(j.at("train"), "train", n);
    split.val = parse_index_array(j.at("val"), "val", n);
    split.test = parse_index_array(j.at("test"), "test", n);
    g.set_public_split(std::move(split));
  }
  return g;
}

void save_graph(const Graph& g, const std::string& dir) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());

  {
    std::ofstream out(root / "edges.tsv");
    if (!out) throw IoError("cannot write " + (root / "edges.tsv").string());
    for (const Edge& e : g.edges()) out << e.u << '\t' << e.v << '\n';
  }
  {
    std::ofstream out(root / "features.csv");
    if (!out) throw IoError("cannot write " + (root / "features.csv").string());
    char buf[64];
    const Tensor& X = g.features();
    for (std::size_t i = 0; i < X.rows(); ++i) {
      for (std::size_t j = 0; j < X.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", X.at(i, j));
        out << (j ? "," : "") << buf;
      }
      out << '\n';
    }
  }
  if (g.has_labels()) {
    std::ofstream out(root / "labels.csv");
    if (!out) throw IoError("cannot write " + (root / "labels.csv").string());
    for (int l : g.labels()) out << l << '\n';
  }
  if (g.public_split()) {
    nlohmann::json j;
    j["train"] = g.public_split()->train;
    j["val"] = g.public_split()->val;
    j["test"] = g.public_split()->test;
    std::ofstream out(root / "splits.json");
    if (!out) throw IoError("cannot write " + (root / "splits.json").string());
    out << j.dump(2) << '\n';
  }
}

// ---- splits -------------------------------------------------------------------

NodeSplit node_split(const Graph& g, std::array<double, 3> fractions,
                     std::uint64_t seed) {
  if (g.public_split()) return *g.public_split();
  if (!g.has_labels()) {
    throw ContractError("node_split: graph has no labels");
  }
  const std::size_t n = g.n();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng = Rng::seeded(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
  }
  const auto n_train = static_cast<std::size_t>(fractions[0] * static_cast<double>(n));
  const auto n_val = static_cast<std::size_t>(fractions[1] * static_cast<double>(n));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
    throw ContractError("node_split: graph too small for fractions");
  }
  NodeSplit split;
  split.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                   perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                    perm.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

LinkSplit link_split(const Graph& g, std::array<double, 3> fractions,
                     std::uint64_t seed) {
  const std::size_t m = g.num_edges();
  const std::size_t n = g.n();
  if (n * (n - 1) / 2 <= m) {
    throw CapacityError("link_split: graph has no non-edges to sample");
  }
  if (m < 20) {
    throw ContractError("link_split: graph has " + std::to_string(m) +
                        " edges, need at least 20");
  }
  std::vector<Edge> perm(g.edges().begin(), g.edges().end());
  Rng rng = Rng::seeded(seed);
  for (std::size_t i = m; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
  }
  const auto n_val = static_cast<std::size_t>(fractions[1] * static_cast<double>(m));
  const auto n_test = static_cast<std::size_t>(fractions[2] * static_cast<double>(m));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= m) {
    throw ContractError("link_split: graph too small for fractions");
  }

  LinkSplit split;
  split.val_pos.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.test_pos.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val),
                        perm.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  split.train_edges.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val + n_test),
                           perm.end());
  std::sort(split.val_pos.begin(), split.val_pos.end());
  std::sort(split.test_pos.begin(), split.test_pos.end());
  std::sort(split.train_edges.begin(), split.train_edges.end());

  // Distinct non-edge negatives, never colliding with any true edge.
  const std::size_t need = n_val + n_test;
  const std::size_t total_pairs = n * (n - 1) / 2;
  if (total_pairs < m + need) {
    throw CapacityError("link_split: only " + std::to_string(total_pairs - m) +
                        " non-edges available, need " + std::to_string(need));
  }
  auto key = [n](const Edge& e) {
    return static_cast<std::uint64_t>(e.u) * n + e.v;
  };
  std::unordered_set<std::uint64_t> taken;
  taken.reserve(m + need);
  for (const Edge& e : g.edges()) taken.insert(key(e));

  std::vector<Edge> negatives;
  negatives.reserve(need);
  const std::size_t free_pairs = total_pairs - m;
  if (free_pairs < 4 * need) {
    // Dense regime: enumerate all non-edges and sample without replacement.
    std::vector<Edge> pool;
    pool.reserve(free_pairs);
    for (NodeId u = 0; u + 1 < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (!taken.count(key(Edge{u, v}))) pool.push_back(Edge{u, v});
      }
    }
    for (std::size_t i = 0; i < need; ++i) {
      const std::size_t j = i + rng.uniform_index(pool.size() - i);
      std::swap(pool[i], pool[j]);
      negatives.push_back(pool[i]);
    }
  } else {
    while (negatives.size() < need) {
      const NodeId a = static_cast<NodeId>(rng.uniform_index(n));
      const NodeId b = static_cast<NodeId>(rng.uniform_index(n));
      if (a == b) continue;
      const Edge e = ordered_edge(a, b);
      if (taken.insert(key(e)).second) negatives.push_back(e);
    }
  }
  split.val_neg.assign(negatives.begin(),
                       negatives.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.test_neg.assign(negatives.begin() + static_cast<std::ptrdiff_t>(n_val),
                        negatives.end());
  return split;
}

// ---- synthetic graphs ----------------------------------------------------------

Graph generate_synthetic(const SbmSpec& spec) {
  if (!(spec.p_out >= 0.0 && spec.p_out < spec.p_in && spec.p_in <= 1.0)) {
    throw ContractError(
        "generate_synthetic: need 0 <= p_out < p_in <= 1, got p_in=" +
        std::to_string(spec.p_in) + " p_out=" + std::to_string(spec.p_out));
  }
  if (spec.block_sizes.empty() || spec.feature_dim == 0) {
    throw ContractError("generate_synthetic: empty block sizes or feature dim");
  }
  std::size_t n = 0;
  for (std::size_t s : spec.block_sizes) {
    if (s == 0) throw ContractError("generate_synthetic: empty block");
    n += s;
  }
  std::vector<int> block_of(n);
  {
    std::size_t node = 0;
    for (std::size_t b = 0; b < spec.block_sizes.size(); ++b) {
      for (std::size_t i = 0; i < spec.block_sizes[b]; ++i) {
        block_of[node++] = static_cast<int>(b);
      }
    }
  }
  Rng rng = Rng::seeded(spec.seed);
  std::vector<Edge> edges;
  for (NodeId u = 0; u + 1 < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = block_of[u] == block_of[v] ? spec.p_in : spec.p_out;
      if (rng.bernoulli(p)) edges.push_back(Edge{u, v});
    }
  }
  Tensor features(n, spec.feature_dim);
  for (std::size_t i = 0; i < n; ++i) {
    features.at(i, static_cast<std::size_t>(block_of[i]) % spec.feature_dim) = 1.0;
  }
  if (spec.noise > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < spec.feature_dim; ++j) {
        features.at(i, j) += spec.noise * rng.normal();
      }
    }
  }
  return Graph(n, std::move(edges), std::move(features), block_of,
               static_cast<int>(spec.block_sizes.size()));
}

}  // namespace lrgae
