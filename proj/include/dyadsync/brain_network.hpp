#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dyadsync/recording.hpp"
#include "dyadsync/stats.hpp"
#include "dyadsync/types.hpp"

namespace dyadsync {

/// Symmetric weighted adjacency with zero diagonal, weights in [0, 1].
class ConnectivityMatrix {
 public:
  explicit ConnectivityMatrix(std::vector<Electrode> labels);
  /// Throws Errc::invalid_argument when `weights` is not n*n, symmetric, zero-diagonal and in [0, 1].
  ConnectivityMatrix(std::vector<Electrode> labels, std::vector<double> weights);

  std::size_t size() const { return labels_.size(); }
  const std::vector<Electrode>& labels() const { return labels_; }
  double at(std::size_t i, std::size_t j) const { return w_[i * size() + j]; }
  /// Sets (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double w);
  const std::vector<double>& weights() const { return w_; }

 private:
  std::vector<Electrode> labels_;
  std::vector<double> w_;
};

/// Undirected simple graph on n nodes.
class BinaryGraph {
 public:
  explicit BinaryGraph(std::size_t n = 0) : n_(n), adj_(n * n, 0) {}

  static BinaryGraph complete(std::size_t n);
  static BinaryGraph star(std::size_t n);  // node 0 is the hub
  static BinaryGraph path(std::size_t n);

  std::size_t size() const { return n_; }
  bool has_edge(std::size_t i, std::size_t j) const { return adj_[i * n_ + j] != 0; }
  void add_edge(std::size_t i, std::size_t j);
  void remove_edge(std::size_t i, std::size_t j);
  std::size_t degree(std::size_t i) const;
  std::size_t edge_count() const;
  std::vector<std::size_t> neighbors(std::size_t i) const;
  bool is_connected() const;
  /// Relabel: node i of the result is node perm[i] of this graph.
  BinaryGraph permuted(std::span<const std::size_t> perm) const;

  friend bool operator==(const BinaryGraph&, const BinaryGraph&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint8_t> adj_;
};

inline constexpr double kDefaultThreshold = 0.3;

/// Whole-task-window PLV between every electrode pair of one subject.
/// Throws Errc::incomplete_montage when an electrode is missing.
ConnectivityMatrix intra_brain_connectivity(std::span<const Epoch> epochs, const FrequencyBand& band);

/// Edge (i, j) iff weight > tau.
BinaryGraph threshold_graph(const ConnectivityMatrix& m, double tau);

/// Largest tau whose thresholded graph is still connected: just below the
/// weakest edge of the maximum spanning tree. Throws Errc::no_threshold when
/// the graph is disconnected even at tau = 0.
double max_connected_threshold(const ConnectivityMatrix& m);

/// Breadth-first distances from `source`; unreachable nodes get -1.
std::vector<int> bfs_distances(const BinaryGraph& g, std::size_t source);

/// Mean shortest-path length over unordered pairs. Throws Errc::disconnected.
double characteristic_path_length(const BinaryGraph& g);

/// Local clustering of every node; degree < 2 gives 0.
std::vector<double> local_clustering(const BinaryGraph& g);
double clustering_coefficient(const BinaryGraph& g);

std::vector<int> degree_centrality(const BinaryGraph& g);

/// Unnormalized betweenness over unordered pairs (Brandes accumulation).
std::vector<double> betweenness_centrality(const BinaryGraph& g);

/// Maslov-Sneppen double-edge swaps that keep every degree and keep the graph
/// connected. Performs up to swaps_per_edge * |E| successful swaps.
BinaryGraph rewire_degree_preserving(const BinaryGraph& g, std::uint64_t seed, double swaps_per_edge = 10.0);

struct SmallWorldResult {
  double sigma = 0.0;  // NaN when degenerate
  double clustering = 0.0;
  double path_length = 0.0;
  double clustering_ref = 0.0;
  double path_length_ref = 0.0;
  bool degenerate = false;  // reference clustering (or clustering) was zero
};

struct SmallWorldOptions {
  std::size_t n_refs = 100;
  std::uint64_t seed = 1;
  double swaps_per_edge = 10.0;
};

/// sigma = (C / C_ref) / (L / L_ref) against degree-preserving rewired references.
/// Throws Errc::disconnected when g is disconnected and Errc::invalid_argument when n_refs == 0.
SmallWorldResult small_worldness(const BinaryGraph& g, const SmallWorldOptions& opts = {});

struct NetworkMetrics {
  double char_path_length = 0.0;
  double clustering_coeff = 0.0;
  double small_worldness = 0.0;  // NaN when degenerate
  std::vector<int> degree;
  std::vector<double> betweenness;
};

NetworkMetrics network_metrics(const BinaryGraph& g, const SmallWorldOptions& opts = {});

struct SubjectMetrics {
  std::string subject;
  NetworkMetrics metrics;
};

struct MetricComparison {
  std::string metric;           // char_path_length, clustering_coeff, small_worldness, degree, betweenness
  std::optional<std::size_t> node;  // montage index, set for per-node centralities
  double mean_difference = 0.0;   // mean(Phase 1 - Phase 3)
  std::optional<TestResult> test; // empty when the test is degenerate or undefined
  std::string note;
};

/// Paired t-tests Phase 1 vs Phase 3 for each global metric and each node's
/// centralities. Throws Errc::pairing when the subject sets differ.
std::vector<MetricComparison> compare_phases(std::span<const SubjectMetrics> phase1,
                                             std::span<const SubjectMetrics> phase3);

}  // namespace dyadsync
