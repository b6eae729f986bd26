#include "dyadsync/brain_network.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>

#include "dyadsync/error.hpp"
#include "dyadsync/phase_sync.hpp"

namespace dyadsync {

ConnectivityMatrix::ConnectivityMatrix(std::vector<Electrode> labels)
    : labels_(std::move(labels)), w_(labels_.size() * labels_.size(), 0.0) {}

ConnectivityMatrix::ConnectivityMatrix(std::vector<Electrode> labels, std::vector<double> weights)
    : labels_(std::move(labels)), w_(std::move(weights)) {
  const std::size_t n = labels_.size();
  if (w_.size() != n * n) throw Error(Errc::invalid_argument, "connectivity weights must be n x n");
  for (std::size_t i = 0; i < n; ++i) {
    if (at(i, i) != 0.0) throw Error(Errc::invalid_argument, "connectivity diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = at(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::invalid_argument, "connectivity weights must lie in [0, 1]");
      if (v != at(j, i)) throw Error(Errc::invalid_argument, "connectivity matrix must be symmetric");
    }
  }
}

void ConnectivityMatrix::set(std::size_t i, std::size_t j, double w) {
  if (i == j) throw Error(Errc::invalid_argument, "connectivity diagonal is fixed at zero");
  if (!(w >= 0.0 && w <= 1.0)) throw Error(Errc::invalid_argument, "connectivity weights must lie in [0, 1]");
  w_[i * size() + j] = w;
  w_[j * size() + i] = w;
}

BinaryGraph BinaryGraph::complete(std::size_t n) {
  BinaryGraph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

BinaryGraph BinaryGraph::star(std::size_t n) {
  BinaryGraph g(n);
  for (std::size_t i = 1; i < n; ++i) g.add_edge(0, i);
  return g;
}

BinaryGraph BinaryGraph::path(std::size_t n) {
  BinaryGraph g(n);
  for (std::size_t i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

void BinaryGraph::add_edge(std::size_t i, std::size_t j) {
  if (i == j) throw Error(Errc::invalid_argument, "self-loops are not allowed");
  adj_[i * n_ + j] = 1;
  adj_[j * n_ + i] = 1;
}

void BinaryGraph::remove_edge(std::size_t i, std::size_t j) {
  adj_[i * n_ + j] = 0;
  adj_[j * n_ + i] = 0;
}

std::size_t BinaryGraph::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < n_; ++j) d += adj_[i * n_ + j];
  return d;
}

std::size_t BinaryGraph::edge_count() const {
  std::size_t e = 0;
  for (std::size_t i = 0; i < n_; ++i) e += degree(i);
  return e / 2;
}

std::vector<std::size_t> BinaryGraph::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n_; ++j)
    if (adj_[i * n_ + j]) out.push_back(j);
  return out;
}

bool BinaryGraph::is_connected() const {
  if (n_ <= 1) return true;
  const auto d = bfs_distances(*this, 0);
  return std::none_of(d.begin(), d.end(), [](int v) { return v < 0; });
}

BinaryGraph BinaryGraph::permuted(std::span<const std::size_t> perm) const {
  BinaryGraph g(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (has_edge(perm[i], perm[j])) g.add_edge(i, j);
  return g;
}

ConnectivityMatrix intra_brain_connectivity(std::span<const Epoch> epochs, const FrequencyBand& band) {
  if (epochs.empty()) throw Error(Errc::invalid_argument, "connectivity needs at least one trial");
  for (Electrode e : kMontage) {
    if (!epochs.front().find_channel(e)) {
      throw Error(Errc::incomplete_montage, fmt::format("electrode {} missing from montage", to_string(e)));
    }
  }
  const auto phases = montage_phases(epochs, band, BrainState::task);
  ConnectivityMatrix m(std::vector<Electrode>(kMontage.begin(), kMontage.end()));
  for (std::size_t i = 0; i < kMontage.size(); ++i) {
    for (std::size_t j = i + 1; j < kMontage.size(); ++j) {
      const auto per_sample = plv_per_sample(phases[i], phases[j]);
      double s = 0.0;
      std::size_t k = 0;
      for (double v : per_sample) {
        if (!std::isnan(v)) {
          s += v;
          ++k;
        }
      }
      m.set(i, j, k > 0 ? std::clamp(s / static_cast<double>(k), 0.0, 1.0) : 0.0);
    }
  }
  return m;
}

BinaryGraph threshold_graph(const ConnectivityMatrix& m, double tau) {
  BinaryGraph g(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j)
      if (m.at(i, j) > tau) g.add_edge(i, j);
  return g;
}

double max_connected_threshold(const ConnectivityMatrix& m) {
  const std::size_t n = m.size();
  if (n <= 1) throw Error(Errc::no_threshold, "a threshold needs at least two nodes");
  struct Edge {
    double w;
    std::size_t i, j;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (m.at(i, j) > 0.0) edges.push_back({m.at(i, j), i, j});
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.w > b.w; });

  // Kruskal on descending weights; the last edge that joins two components is the bottleneck.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t joined = 0;
  double bottleneck = 0.0;
  for (const auto& e : edges) {
    const auto ri = find(e.i);
    const auto rj = find(e.j);
    if (ri == rj) continue;
    parent[ri] = rj;
    bottleneck = e.w;
    if (++joined == n - 1) break;
  }
  if (joined != n - 1) throw Error(Errc::no_threshold, "graph is disconnected even at tau = 0");
  return std::nextafter(bottleneck, -std::numeric_limits<double>::infinity());
}

std::vector<int> bfs_distances(const BinaryGraph& g, std::size_t source) {
  std::vector<int> dist(g.size(), -1);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (g.has_edge(u, v) && dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

double characteristic_path_length(const BinaryGraph& g) {
  const std::size_t n = g.size();
  if (n < 2) throw Error(Errc::disconnected, "path length needs at least two nodes");
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const auto d = bfs_distances(g, s);
    for (std::size_t t = s + 1; t < n; ++t) {
      if (d[t] < 0) throw Error(Errc::disconnected, fmt::format("nodes {} and {} are not connected", s, t));
      total += d[t];
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

std::vector<double> local_clustering(const BinaryGraph& g) {
  std::vector<double> c(g.size(), 0.0);
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto nb = g.neighbors(v);
    const std::size_t k = nb.size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b) links += g.has_edge(nb[a], nb[b]);
    c[v] = static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1) / 2.0);
  }
  return c;
}

double clustering_coefficient(const BinaryGraph& g) {
  if (g.size() == 0) return 0.0;
  const auto c = local_clustering(g);
  return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
}

std::vector<int> degree_centrality(const BinaryGraph& g) {
  std::vector<int> d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) d[i] = static_cast<int>(g.degree(i));
  return d;
}

std::vector<double> betweenness_centrality(const BinaryGraph& g) {
  const std::size_t n = g.size();
  std::vector<double> cb(n, 0.0);
  std::vector<std::vector<std::size_t>> pred(n);
  std::vector<double> sigma(n);
  std::vector<int> dist(n);
  std::vector<double> delta(n);
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < n; ++s) {
    for (auto& p : pred) p.clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<std::size_t> queue{s};
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (std::size_t w = 0; w < n; ++w) {
        if (!g.has_edge(v, w)) continue;
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          pred[w].push_back(v);
        }
      }
    }
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = *it;
      for (auto v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  // Each unordered pair was counted from both endpoints.
  for (auto& v : cb) v /= 2.0;
  return cb;
}

BinaryGraph rewire_degree_preserving(const BinaryGraph& g, std::uint64_t seed, double swaps_per_edge) {
  BinaryGraph out = g;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if (g.has_edge(i, j)) edges.emplace_back(i, j);
  if (edges.size() < 2 || swaps_per_edge <= 0.0) return out;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
  std::bernoulli_distribution flip(0.5);
  const auto target = static_cast<std::size_t>(std::ceil(swaps_per_edge * static_cast<double>(edges.size())));
  const std::size_t max_attempts = 100 * target;
  std::size_t done = 0;
  for (std::size_t attempt = 0; attempt < max_attempts && done < target; ++attempt) {
    const auto e1 = pick(rng);
    const auto e2 = pick(rng);
    if (e1 == e2) continue;
    auto [a, b] = edges[e1];
    auto [c, d] = edges[e2];
    if (flip(rng)) std::swap(c, d);
    if (a == c || a == d || b == c || b == d) continue;
    if (out.has_edge(a, d) || out.has_edge(c, b)) continue;
    out.remove_edge(a, b);
    out.remove_edge(c, d);
    out.add_edge(a, d);
    out.add_edge(c, b);
    if (!out.is_connected()) {
      out.remove_edge(a, d);
      out.remove_edge(c, b);
      out.add_edge(a, b);
      out.add_edge(c, d);
      continue;
    }
    edges[e1] = {std::min(a, d), std::max(a, d)};
    edges[e2] = {std::min(c, b), std::max(c, b)};
    ++done;
  }
  return out;
}

SmallWorldResult small_worldness(const BinaryGraph& g, const SmallWorldOptions& opts) {
  if (opts.n_refs == 0) throw Error(Errc::invalid_argument, "small-worldness needs at least one reference graph");
  SmallWorldResult r;
  r.path_length = characteristic_path_length(g);
  r.clustering = clustering_coefficient(g);
  double c_sum = 0.0;
  double l_sum = 0.0;
  for (std::size_t k = 0; k < opts.n_refs; ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::uint64_t ref_seed = 0;
    std::array<std::uint32_t, 2> words{};
    seq.generate(words.begin(), words.end());
    ref_seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    const auto ref = rewire_degree_preserving(g, ref_seed, opts.swaps_per_edge);
    c_sum += clustering_coefficient(ref);
    l_sum += characteristic_path_length(ref);
  }
  r.clustering_ref = c_sum / static_cast<double>(opts.n_refs);
  r.path_length_ref = l_sum / static_cast<double>(opts.n_refs);
  if (r.clustering_ref <= 0.0) {
    r.degenerate = true;
    r.sigma = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.sigma = (r.clustering / r.clustering_ref) / (r.path_length / r.path_length_ref);
  return r;
}

NetworkMetrics network_metrics(const BinaryGraph& g, const SmallWorldOptions& opts) {
  NetworkMetrics m;
  m.char_path_length = characteristic_path_length(g);
  m.clustering_coeff = clustering_coefficient(g);
  m.small_worldness = small_worldness(g, opts).sigma;
  m.degree = degree_centrality(g);
  m.betweenness = betweenness_centrality(g);
  return m;
}

namespace {

MetricComparison compare_values(std::string metric, std::optional<std::size_t> node, const std::vector<double>& p1,
                                const std::vector<double>& p3) {
  MetricComparison c;
  c.metric = std::move(metric);
  c.node = node;
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    if (std::isnan(p1[i]) || std::isnan(p3[i])) continue;
    a.push_back(p1[i]);
    b.push_back(p3[i]);
  }
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] - b[i];
  c.mean_difference = a.empty() ? std::numeric_limits<double>::quiet_NaN() : diff / static_cast<double>(a.size());
  try {
    c.test = paired_t_test(a, b);
  } catch (const Error& e) {
    c.note = std::string(to_string(e.code()));
  }
  return c;
}

}  // namespace

std::vector<MetricComparison> compare_phases(std::span<const SubjectMetrics> phase1,
                                             std::span<const SubjectMetrics> phase3) {
  if (phase1.size() != phase3.size()) {
    throw Error(Errc::pairing, fmt::format("{} subjects in Phase 1 but {} in Phase 3", phase1.size(), phase3.size()));
  }
  std::vector<const NetworkMetrics*> matched;
  for (const auto& s : phase1) {
    const auto it = std::find_if(phase3.begin(), phase3.end(), [&](const SubjectMetrics& o) { return o.subject == s.subject; });
    if (it == phase3.end()) throw Error(Errc::pairing, fmt::format("subject {} has no Phase 3 metrics", s.subject));
    matched.push_back(&it->metrics);
  }
  auto column = [&](auto getter) {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (std::size_t i = 0; i < phase1.size(); ++i) {
      out.first.push_back(getter(phase1[i].metrics));
      out.second.push_back(getter(*matched[i]));
    }
    return out;
  };

  std::vector<MetricComparison> out;
  auto add_global = [&](const char* name, auto getter) {
    auto [a, b] = column(getter);
    out.push_back(compare_values(name, std::nullopt, a, b));
  };
  add_global("char_path_length", [](const NetworkMetrics& m) { return m.char_path_length; });
  add_global("clustering_coeff", [](const NetworkMetrics& m) { return m.clustering_coeff; });
  add_global("small_worldness", [](const NetworkMetrics& m) { return m.small_worldness; });

  const std::size_t nodes = phase1.empty() ? 0 : phase1.front().metrics.degree.size();
  for (std::size_t v = 0; v < nodes; ++v) {
    auto [a, b] = column([v](const NetworkMetrics& m) { return static_cast<double>(m.degree.at(v)); });
    out.push_back(compare_values("degree", v, a, b));
  }
  for (std::size_t v = 0; v < nodes; ++v) {
    auto [a, b] = column([v](const NetworkMetrics& m) { return m.betweenness.at(v); });
    out.push_back(compare_values("betweenness", v, a, b));
  }
  return out;
}

}  // namespace dyadsync
