#include "dyadsync/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dyadsync/error.hpp"
#include "dyadsync/special_functions.hpp"

namespace dyadsync {

std::string to_string(TestKind k) { return k == TestKind::paired_t ? "paired_t" : "kruskal_wallis"; }

std::string to_json(const TestResult& r) {
  auto num = [](double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : std::string("null"); };
  return fmt::format(R"({{"kind":"{}","statistic":{},"df":{},"p_value":{},"n":{}}})", to_string(r.kind),
                     num(r.statistic), num(r.df), num(r.p_value), r.n);
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

TestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::shape_mismatch, fmt::format("paired samples differ in length ({} vs {})", a.size(), b.size()));
  }
  const std::size_t n = a.size();
  if (n < 2) throw Error(Errc::sample_size, fmt::format("paired t-test needs at least 2 pairs, got {}", n));
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];

  TestResult r;
  r.kind = TestKind::paired_t;
  r.df = static_cast<double>(n - 1);
  r.n = n;
  const double md = mean(d);
  const double sd = stddev(d);
  // Differences that agree up to rounding (e.g. x + c - x) count as constant.
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  const double tol = 1e-12 * scale;
  if (sd <= tol) {
    if (std::abs(md) <= tol) {
      r.statistic = 0.0;
      r.p_value = 1.0;
      return r;
    }
    throw Error(Errc::degenerate_test, "paired differences have zero variance");
  }
  r.statistic = md / (sd / std::sqrt(static_cast<double>(n)));
  r.p_value = std::clamp(student_t_two_sided_p(r.statistic, r.df), 0.0, 1.0);
  return r;
}

TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) {
    throw Error(Errc::sample_size, fmt::format("Kruskal-Wallis needs at least 2 groups, got {}", groups.size()));
  }
  struct Obs {
    double value;
    std::size_t group;
  };
  std::vector<Obs> obs;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw Error(Errc::empty_group, fmt::format("group {} is empty", g));
    for (double v : groups[g]) obs.push_back({v, g});
  }
  std::sort(obs.begin(), obs.end(), [](const Obs& x, const Obs& y) { return x.value < y.value; });

  const double n = static_cast<double>(obs.size());
  std::vector<double> rank_sum(groups.size(), 0.0);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < obs.size();) {
    std::size_t j = i;
    while (j < obs.size() && obs[j].value == obs[i].value) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) rank_sum[obs[k].group] += mid_rank;
    i = j;
  }

  TestResult r;
  r.kind = TestKind::kruskal_wallis;
  r.df = static_cast<double>(groups.size() - 1);
  r.n = obs.size();
  const double correction = 1.0 - tie_term / (n * n * n - n);
  if (correction <= 0.0) {
    // Every observation tied: no rank information at all.
    r.statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  double h = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    h += rank_sum[g] * rank_sum[g] / static_cast<double>(groups[g].size());
  }
  h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
  h = std::max(0.0, h / correction);
  r.statistic = h;
  r.p_value = std::clamp(chi_square_sf(h, r.df), 0.0, 1.0);
  return r;
}

std::vector<double> benjamini_hochberg(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return p_values[x] < p_values[y]; });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const std::size_t i = order[k];
    running = std::min(running, p_values[i] * static_cast<double>(m) / static_cast<double>(k + 1));
    adjusted[i] = std::min(1.0, running);
  }
  return adjusted;
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::size_t count) {
  if (truth >= k_ || predicted >= k_) {
    throw Error(Errc::invalid_argument, fmt::format("class index out of range for {}-class matrix", k_));
  }
  counts_[truth * k_ + predicted] += count;
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

double ConfusionMatrix::accuracy() const {
  const std::size_t t = total();
  if (t == 0) return 0.0;
  std::size_t diag = 0;
  for (std::size_t i = 0; i < k_; ++i) diag += at(i, i);
  return static_cast<double>(diag) / static_cast<double>(t);
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.k_ != k_) throw Error(Errc::shape_mismatch, "confusion matrices differ in class count");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

F1Scores f1_scores(const ConfusionMatrix& cm) {
  const std::size_t k = cm.classes();
  F1Scores out;
  out.per_class.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = cm.at(c, c);
    std::size_t actual = 0;
    std::size_t predicted = 0;
    for (std::size_t j = 0; j < k; ++j) {
      actual += cm.at(c, j);
      predicted += cm.at(j, c);
    }
    if (actual == 0 && predicted == 0) {
      out.absent_classes.push_back(c);
      continue;
    }
    // 2PR / (P + R) == 2 tp / (actual + predicted)
    out.per_class[c] = 2.0 * static_cast<double>(tp) / static_cast<double>(actual + predicted);
  }
  out.macro = k == 0 ? 0.0 : mean(out.per_class);
  return out;
}

}  // namespace dyadsync
