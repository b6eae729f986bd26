#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dyadsync {

enum class TestKind { paired_t, kruskal_wallis };

std::string to_string(TestKind k);

struct TestResult {
  TestKind kind = TestKind::paired_t;
  double statistic = 0.0;
  double df = 1.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// JSON record {kind, statistic, df, p_value, n}.
std::string to_json(const TestResult& r);

/// Two-sided paired t-test on a - b.
/// All-zero differences give t = 0, p = 1. Constant nonzero differences throw
/// Errc::degenerate_test; fewer than two pairs throw Errc::sample_size.
TestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Kruskal-Wallis H with mid-ranks and tie correction, chi-square p-value.
/// Needs >= 2 groups (Errc::sample_size) and no empty group (Errc::empty_group).
TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

/// Benjamini-Hochberg adjusted p-values, same order as the input.
std::vector<double> benjamini_hochberg(std::span<const double> p_values);

/// k x k counts, rows = true class, columns = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {}

  std::size_t classes() const { return k_; }
  void add(std::size_t truth, std::size_t predicted, std::size_t count = 1);
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }
  std::size_t total() const;
  double accuracy() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

 private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
};

struct F1Scores {
  std::vector<double> per_class;
  double macro = 0.0;
  /// Classes with neither true nor predicted samples; their F1 is reported as 0.
  std::vector<std::size_t> absent_classes;
};

F1Scores f1_scores(const ConfusionMatrix& cm);

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator).
double stddev(std::span<const double> x);

}  // namespace dyadsync
