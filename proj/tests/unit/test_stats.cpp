#include "doctest.h"

#include <functional>
#include <cmath>
#include <random>

#include "dyadsync/error.hpp"
#include "dyadsync/special_functions.hpp"
#include "dyadsync/stats.hpp"
#include "oracles/stats_oracles.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

using namespace dyadsync;

namespace {

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

TEST_CASE("incomplete beta") {
  CHECK(regularized_incomplete_beta(2.5, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.5, 3.0, 1.0) == 1.0);
  for (double x : {0.01, 0.3, 0.5, 0.77, 0.999}) CHECK(regularized_incomplete_beta(1, 1, x) == doctest::Approx(x).epsilon(1e-14));

  std::mt19937 rng(1);
  std::uniform_real_distribution<double> ab(0.2, 40.0), ux(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const double a = ab(rng), b = ab(rng), x = ux(rng);
    CHECK(std::abs(regularized_incomplete_beta(a, b, x) - boost::math::ibeta(a, b, x)) < 1e-10);
  }
  double prev = 0;
  for (int i = 1; i <= 100; ++i) {
    const double v = regularized_incomplete_beta(3.0, 7.0, i / 100.0);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("incomplete gamma") {
  CHECK(chi_square_cdf(2.0, 2.0) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-12));
  CHECK(chi_square_cdf(2.0, 2.0) == doctest::Approx(0.63212).epsilon(1e-5));
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> us(0.1, 60.0), ux(0.0, 120.0);
  for (int k = 0; k < 300; ++k) {
    const double s = us(rng), x = ux(rng);
    CHECK(std::abs(regularized_incomplete_gamma(s, x) - boost::math::gamma_p(s, x)) < 1e-10);
    const double q = boost::math::gamma_q(s, x);
    CHECK(std::abs(regularized_incomplete_gamma_upper(s, x) - q) <= 1e-10 * std::max(q, 1e-300) + 1e-300);
  }
}

TEST_CASE("paired t-test") {
  const std::vector<double> a{1, 2, 3, 4}, b{1.1, 2.0, 3.2, 3.9};
  const auto r = paired_t_test(a, b);
  const auto ref = oracle::paired_t(a, b);
  CHECK(r.statistic == doctest::Approx(-0.7746).epsilon(1e-4));
  CHECK(r.df == 3);
  CHECK(std::abs(r.statistic - ref.statistic) < 1e-12);
  CHECK(std::abs(r.p_value - ref.p) < 1e-9);

  const auto rev = paired_t_test(b, a);
  CHECK(rev.statistic == -r.statistic);
  CHECK(rev.p_value == doctest::Approx(r.p_value).epsilon(1e-14));

  const auto same = paired_t_test(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);

  CHECK(code_of([] { paired_t_test(std::vector<double>{1, 2}, std::vector<double>{2, 3}); }) == Errc::degenerate_test);
  CHECK(code_of([] { paired_t_test(std::vector<double>{1}, std::vector<double>{2}); }) == Errc::sample_size);
  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1, 2}, std::vector<double>{2}), Error);

  SUBCASE("p decreases with |t|") {
    double prev = 1.0;
    for (double t = 0.0; t < 8; t += 0.25) {
      const double p = student_t_two_sided_p(t, 9);
      CHECK(p <= prev);
      prev = p;
    }
  }
}

TEST_CASE("kruskal-wallis") {
  const auto r = kruskal_wallis({{1, 2, 3}, {4, 5, 6}});
  const auto ref = oracle::kruskal_wallis({{1, 2, 3}, {4, 5, 6}});
  CHECK(r.statistic == doctest::Approx(3.857).epsilon(1e-3));
  CHECK(r.df == 1);
  CHECK(std::abs(r.statistic - ref.statistic) < 1e-12);
  CHECK(std::abs(r.p_value - ref.p) < 1e-9);

  const auto same = kruskal_wallis({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}});
  CHECK(same.statistic == doctest::Approx(0.0));
  CHECK(same.p_value == doctest::Approx(1.0));

  const auto tied = kruskal_wallis({{5, 5}, {5, 5, 5}});
  CHECK(tied.statistic == 0.0);
  CHECK(tied.p_value == 1.0);

  CHECK(code_of([] { kruskal_wallis({{1, 2}, {}}); }) == Errc::empty_group);
  CHECK(code_of([] { kruskal_wallis({{1, 2}}); }) == Errc::sample_size);

  SUBCASE("monotone transform invariance") {
    std::mt19937 rng(3);
    std::normal_distribution<double> n;
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<std::vector<double>> g(3), h(3);
      for (std::size_t k = 0; k < 3; ++k)
        for (int i = 0; i < 6; ++i) {
          const double v = std::round(n(rng) * 3) / 3;
          g[k].push_back(v);
          h[k].push_back(std::exp(v) * 2 + 1);
        }
      CHECK(kruskal_wallis(g).statistic == doctest::Approx(kruskal_wallis(h).statistic).epsilon(1e-12));
    }
  }
}

TEST_CASE("randomized tests against high-precision references") {
  std::mt19937 rng(4);
  std::normal_distribution<double> n;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a(12), b(12);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = n(rng), b[i] = a[i] + 0.4 * n(rng) + 0.2;
    const auto r = paired_t_test(a, b);
    const auto ref = oracle::paired_t(a, b);
    CHECK(std::abs(r.statistic - ref.statistic) < 1e-6);
    CHECK(std::abs(r.p_value - ref.p) < 1e-6);

    std::vector<std::vector<double>> groups(3);
    for (std::size_t k = 0; k < 3; ++k)
      for (int i = 0; i < 7; ++i) groups[k].push_back(std::round((n(rng) + 0.3 * k) * 4) / 4);
    const auto kw = kruskal_wallis(groups);
    const auto kref = oracle::kruskal_wallis(groups);
    CHECK(std::abs(kw.statistic - kref.statistic) < 1e-6);
    CHECK(std::abs(kw.p_value - kref.p) < 1e-6);
  }
}

TEST_CASE("benjamini-hochberg") {
  const auto q = benjamini_hochberg(std::vector<double>{0.01, 0.04, 0.03, 0.5});
  CHECK(q[0] == doctest::Approx(0.04));
  CHECK(q[1] == doctest::Approx(0.04 * 4 / 3));
  CHECK(q[2] == doctest::Approx(0.04 * 4 / 3));
  CHECK(q[3] == doctest::Approx(0.5));
  CHECK(benjamini_hochberg(std::vector<double>{}).empty());
}

TEST_CASE("f1 scores") {
  ConfusionMatrix perfect(4);
  for (std::size_t c = 0; c < 4; ++c) perfect.add(c, c, 5);
  const auto p = f1_scores(perfect);
  CHECK(p.macro == 1.0);
  for (double v : p.per_class) CHECK(v == 1.0);
  CHECK(perfect.accuracy() == 1.0);

  ConfusionMatrix half(2);
  half.add(0, 0, 5);
  half.add(0, 1, 5);
  half.add(1, 0, 5);
  half.add(1, 1, 5);
  const auto h = f1_scores(half);
  CHECK(h.per_class[0] == doctest::Approx(0.5));
  CHECK(h.per_class[1] == doctest::Approx(0.5));

  ConfusionMatrix absent(3);
  absent.add(0, 0, 3);
  absent.add(1, 0, 1);
  const auto a = f1_scores(absent);
  CHECK(a.absent_classes == std::vector<std::size_t>{2});
  CHECK(a.per_class[2] == 0.0);

  SUBCASE("random matrices against direct counting") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<std::size_t> cls(0, 3);
    for (int rep = 0; rep < 30; ++rep) {
      std::vector<std::pair<std::size_t, std::size_t>> samples;
      ConfusionMatrix cm(4);
      for (int i = 0; i < 40; ++i) {
        const std::size_t t = cls(rng), pr = cls(rng);
        samples.emplace_back(t, pr);
        cm.add(t, pr);
      }
      const auto f = f1_scores(cm);
      double macro = 0;
      for (std::size_t c = 0; c < 4; ++c) {
        double tp = 0, fp = 0, fn = 0;
        for (auto [t, pr] : samples) {
          tp += t == c && pr == c;
          fp += t != c && pr == c;
          fn += t == c && pr != c;
        }
        const double ref = tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
        CHECK(f.per_class[c] == doctest::Approx(ref).epsilon(1e-12));
        macro += ref / 4;
      }
      CHECK(f.macro == doctest::Approx(macro).epsilon(1e-12));

      // Relabel rows and columns together: macro F1 is unchanged.
      const std::array<std::size_t, 4> perm{2, 0, 3, 1};
      ConfusionMatrix pm(4);
      for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t pr = 0; pr < 4; ++pr) pm.add(perm[t], perm[pr], cm.at(t, pr));
      CHECK(f1_scores(pm).macro == doctest::Approx(f.macro).epsilon(1e-12));
    }
  }
}

TEST_CASE("test result json") {
  TestResult r{TestKind::kruskal_wallis, 3.5, 2, 0.17, 30};
  const auto j = to_json(r);
  CHECK(j.find("\"kind\"") != std::string::npos);
  CHECK(j.find("kruskal_wallis") != std::string::npos);
  CHECK(j.find("\"p_value\"") != std::string::npos);
  CHECK(j.find("\"n\":30") != std::string::npos);
}

TEST_CASE("mean and sample deviation") {
  const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(mean(x) == 5.0);
  CHECK(stddev(x) == doctest::Approx(std::sqrt(32.0 / 7.0)));
}
