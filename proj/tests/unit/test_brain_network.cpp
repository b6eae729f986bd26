#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dyadsync/brain_network.hpp"
#include "dyadsync/error.hpp"
#include "fixtures.hpp"
#include "oracles/graph_oracles.hpp"
#include "oracles/stats_oracles.hpp"

using namespace dyadsync;

namespace {

std::vector<Electrode> labels(std::size_t n) { return {kMontage.begin(), kMontage.begin() + n}; }

BinaryGraph from_adj(const oracle::Adj& a) {
  BinaryGraph g(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if (a[i][j]) g.add_edge(i, j);
  return g;
}

ConnectivityMatrix triangle(double ab, double bc, double ac) {
  ConnectivityMatrix m(labels(3));
  m.set(0, 1, ab);
  m.set(1, 2, bc);
  m.set(0, 2, ac);
  return m;
}

ConnectivityMatrix random_matrix(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ConnectivityMatrix m(labels(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, u(rng));
  return m;
}

BinaryGraph ring_lattice(std::size_t n, std::size_t k) {
  BinaryGraph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 1; d <= k / 2; ++d) g.add_edge(i, (i + d) % n);
  return g;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected dyadsync::Error");
  return Errc::io;
}

}  // namespace

TEST_CASE("connectivity matrix validation") {
  CHECK_NOTHROW(ConnectivityMatrix(labels(2), {0, 0.5, 0.5, 0}));
  CHECK(code_of([] { ConnectivityMatrix(labels(2), {0, 0.5, 0.4, 0}); }) == Errc::invalid_argument);
  CHECK(code_of([] { ConnectivityMatrix(labels(2), {0.1, 0.5, 0.5, 0}); }) == Errc::invalid_argument);
  CHECK(code_of([] { ConnectivityMatrix(labels(2), {0, 1.5, 1.5, 0}); }) == Errc::invalid_argument);
  CHECK(code_of([] { ConnectivityMatrix(labels(2), {0, 0.5, 0.5}); }) == Errc::invalid_argument);
}

TEST_CASE("threshold graph") {
  std::mt19937 rng(1);
  auto m = random_matrix(8, rng);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = i + 1; j < 8; ++j) m.set(i, j, std::max(m.at(i, j), 0.01));
  CHECK(threshold_graph(m, 0.0) == BinaryGraph::complete(8));
  CHECK(threshold_graph(m, 1.0).edge_count() == 0);

  const auto g = threshold_graph(triangle(0.9, 0.8, 0.1), 0.3);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 2));
  CHECK_FALSE(g.has_edge(0, 2));
  CHECK(g.edge_count() == 2);

  // Strict inequality: a weight equal to tau is dropped.
  CHECK_FALSE(threshold_graph(triangle(0.3, 0.8, 0.1), 0.3).has_edge(0, 1));

  SUBCASE("monotone in tau") {
    for (int rep = 0; rep < 20; ++rep) {
      const auto r = random_matrix(8, rng);
      const auto lo = threshold_graph(r, 0.2), hi = threshold_graph(r, 0.6);
      for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
          if (hi.has_edge(i, j)) CHECK(lo.has_edge(i, j));
    }
  }
}

TEST_CASE("max connected threshold") {
  const double t = max_connected_threshold(triangle(0.9, 0.8, 0.1));
  CHECK(t < 0.8);
  CHECK(t == std::nextafter(0.8, 0.0));

  ConnectivityMatrix flat(labels(8));
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = i + 1; j < 8; ++j) flat.set(i, j, 0.5);
  CHECK(max_connected_threshold(flat) == std::nextafter(0.5, 0.0));

  ConnectivityMatrix split(labels(4));
  split.set(0, 1, 0.5);
  split.set(2, 3, 0.5);
  CHECK(code_of([&] { max_connected_threshold(split); }) == Errc::no_threshold);

  std::mt19937 rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const auto m = random_matrix(8, rng);
    const double tau = max_connected_threshold(m);
    CHECK(tau == std::nextafter(oracle::connecting_weight(m.weights(), 8), 0.0));
    CHECK(threshold_graph(m, tau).is_connected());
    CHECK_FALSE(threshold_graph(m, std::nextafter(tau, 2.0) + 1e-12).is_connected());
  }
}

TEST_CASE("analytic graphs") {
  const auto k8 = BinaryGraph::complete(8);
  const auto star = BinaryGraph::star(8);
  const auto p3 = BinaryGraph::path(3);

  CHECK(characteristic_path_length(k8) == 1.0);
  CHECK(characteristic_path_length(star) == 49.0 / 28.0);
  CHECK(characteristic_path_length(p3) == 4.0 / 3.0);

  CHECK(clustering_coefficient(k8) == 1.0);
  CHECK(clustering_coefficient(star) == 0.0);

  CHECK(degree_centrality(k8) == std::vector<int>(8, 7));
  const auto sd = degree_centrality(star);
  CHECK(sd[0] == 7);
  for (std::size_t i = 1; i < 8; ++i) CHECK(sd[i] == 1);
  CHECK(degree_centrality(BinaryGraph(5)) == std::vector<int>(5, 0));

  CHECK(betweenness_centrality(p3) == std::vector<double>{0.0, 1.0, 0.0});
  const auto sb = betweenness_centrality(star);
  CHECK(sb[0] == 21.0);
  for (std::size_t i = 1; i < 8; ++i) CHECK(sb[i] == 0.0);

  for (std::size_t n = 3; n <= 10; ++n) {
    CHECK(characteristic_path_length(BinaryGraph::complete(n)) == 1.0);
    CHECK(clustering_coefficient(BinaryGraph::complete(n)) == 1.0);
  }

  BinaryGraph two(4);
  two.add_edge(0, 1);
  two.add_edge(2, 3);
  CHECK(code_of([&] { characteristic_path_length(two); }) == Errc::disconnected);
  CHECK(bfs_distances(two, 0) == std::vector<int>{0, 1, -1, -1});
}

TEST_CASE("metrics match brute-force enumeration") {
  std::mt19937 rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 6;
    const auto adj = oracle::random_connected(n, 0.35, rng);
    const auto g = from_adj(adj);
    CHECK(std::abs(characteristic_path_length(g) - oracle::path_length(adj)) < 1e-9);
    const auto lc = local_clustering(g);
    const auto lo = oracle::local_clustering(adj);
    const auto bc = betweenness_centrality(g);
    const auto bo = oracle::betweenness(adj);
    for (std::size_t v = 0; v < n; ++v) {
      CHECK(std::abs(lc[v] - lo[v]) < 1e-9);
      CHECK(std::abs(bc[v] - bo[v]) < 1e-9);
    }
  }
}

TEST_CASE("metrics are invariant under relabeling") {
  std::mt19937 rng(4);
  for (int rep = 0; rep < 30; ++rep) {
    const auto g = from_adj(oracle::random_connected(7, 0.3, rng));
    std::vector<std::size_t> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto h = g.permuted(perm);
    CHECK(characteristic_path_length(h) == doctest::Approx(characteristic_path_length(g)));
    CHECK(clustering_coefficient(h) == doctest::Approx(clustering_coefficient(g)));
    const auto dg = degree_centrality(g), dh = degree_centrality(h);
    const auto bg = betweenness_centrality(g), bh = betweenness_centrality(h);
    for (std::size_t i = 0; i < 7; ++i) {
      CHECK(dh[i] == dg[perm[i]]);
      CHECK(bh[i] == doctest::Approx(bg[perm[i]]));
    }
  }
}

TEST_CASE("degree-preserving rewiring") {
  std::mt19937 rng(5);
  const auto g = from_adj(oracle::random_connected(10, 0.4, rng));
  const auto r = rewire_degree_preserving(g, 8);
  CHECK(degree_centrality(r) == degree_centrality(g));
  CHECK(r.is_connected());
  CHECK(rewire_degree_preserving(g, 8) == r);
  CHECK(rewire_degree_preserving(g, 8, 0.0) == g);
}

TEST_CASE("small-worldness") {
  std::mt19937 rng(6);
  const auto g = from_adj(oracle::random_connected(8, 0.4, rng));

  SUBCASE("zero rewires give sigma one") {
    const auto s = small_worldness(g, {.n_refs = 5, .seed = 1, .swaps_per_edge = 0.0});
    CHECK(s.sigma == doctest::Approx(1.0));
  }
  SUBCASE("deterministic") {
    const auto s1 = small_worldness(g, {.n_refs = 10, .seed = 3});
    const auto s2 = small_worldness(g, {.n_refs = 10, .seed = 3});
    CHECK(s1.sigma == s2.sigma);
  }
  SUBCASE("star is degenerate") {
    const auto s = small_worldness(BinaryGraph::star(8), {.n_refs = 5});
    CHECK(s.degenerate);
    CHECK(std::isnan(s.sigma));
    CHECK(s.clustering_ref == 0.0);
  }
  SUBCASE("ring lattice with shortcuts") {
    auto ring = ring_lattice(20, 4);
    std::mt19937 r2(10);
    std::uniform_int_distribution<std::size_t> node(0, 19);
    for (int k = 0; k < 4; ++k) {
      const std::size_t a = node(r2), b = node(r2);
      if (a != b) ring.add_edge(a, b);
    }
    const auto s = small_worldness(ring, {.n_refs = 20, .seed = 2});
    CHECK(s.sigma > 1.0);
    CHECK(s.clustering == doctest::Approx(clustering_coefficient(ring)));
    CHECK(s.path_length == doctest::Approx(characteristic_path_length(ring)));
  }
  SUBCASE("errors") {
    BinaryGraph two(4);
    two.add_edge(0, 1);
    CHECK(code_of([&] { small_worldness(two); }) == Errc::disconnected);
    CHECK(code_of([&] { small_worldness(g, {.n_refs = 0}); }) == Errc::invalid_argument);
  }
}

TEST_CASE("intra-brain connectivity") {
  const auto same = fixtures::noise_epochs(10, 250, 1);
  std::vector<Epoch> identical;
  for (auto e : same) {
    for (auto& ch : e.data) ch = e.data[0];
    identical.push_back(std::move(e));
  }
  const auto alpha = FrequencyBand::named(BandName::alpha);
  const auto m1 = intra_brain_connectivity(identical, alpha);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) CHECK(m1.at(i, j) == doctest::Approx(i == j ? 0.0 : 1.0));

  const auto noise = fixtures::noise_epochs(60, 250, 2);
  const auto m2 = intra_brain_connectivity(noise, alpha);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      CHECK(m2.at(i, j) == m2.at(j, i));
      if (i != j) CHECK(m2.at(i, j) < 0.25);
    }

  auto missing = noise;
  for (auto& e : missing) {
    e.channels.pop_back();
    e.data.pop_back();
  }
  CHECK(code_of([&] { intra_brain_connectivity(missing, alpha); }) == Errc::incomplete_montage);
}

TEST_CASE("phase comparison of metrics") {
  std::mt19937 rng(8);
  std::vector<SubjectMetrics> p1, p3;
  std::normal_distribution<double> base(2.0, 0.3), shift(0.5, 0.1);
  for (int s = 0; s < 10; ++s) {
    const auto g = from_adj(oracle::random_connected(8, 0.5, rng));
    auto m = network_metrics(g, {.n_refs = 3, .seed = 1});
    m.char_path_length = base(rng);
    p1.push_back({"s" + std::to_string(s), m});
    auto m3 = m;
    m3.char_path_length += shift(rng);
    p3.push_back({"s" + std::to_string(s), m3});
  }

  SUBCASE("identical phases") {
    for (const auto& c : compare_phases(p1, p1)) {
      if (!c.test) continue;
      CHECK(c.test->statistic == 0.0);
      CHECK(c.test->p_value == 1.0);
    }
  }
  SUBCASE("shifted path length") {
    const auto cmp = compare_phases(p1, p3);
    const auto it = std::find_if(cmp.begin(), cmp.end(), [](const auto& c) { return c.metric == "char_path_length"; });
    REQUIRE(it != cmp.end());
    REQUIRE(it->test);
    CHECK(it->test->p_value < 0.05);
    std::vector<double> a, b;
    for (int s = 0; s < 10; ++s) a.push_back(p1[s].metrics.char_path_length), b.push_back(p3[s].metrics.char_path_length);
    const auto ref = oracle::paired_t(a, b);
    CHECK(it->test->statistic == doctest::Approx(ref.statistic).epsilon(1e-9));
    CHECK(it->test->p_value == doctest::Approx(ref.p).epsilon(1e-6));
    CHECK(it->mean_difference < 0);
  }
  SUBCASE("pairing") {
    auto other = p3;
    other[0].subject = "x";
    CHECK(code_of([&] { compare_phases(p1, other); }) == Errc::pairing);
  }
}
