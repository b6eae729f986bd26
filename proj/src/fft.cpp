#include "dyadsync/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace dyadsync {

namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plan {
  int n = 0;
  fftw_complex* buf = nullptr;
  fftw_plan plan = nullptr;

  Plan(int size, int sign) : n(size) {
    std::lock_guard lock(planner_mutex());
    buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(size)));
    plan = fftw_plan_dft_1d(size, buf, buf, sign, FFTW_ESTIMATE);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }
};

std::vector<std::complex<double>> transform(std::span<const std::complex<double>> x, int sign) {
  if (x.empty()) return {};
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Plan>> cache;
  const int n = static_cast<int>(x.size());
  auto& slot = cache[{n, sign}];
  if (!slot) slot = std::make_unique<Plan>(n, sign);
  auto* data = reinterpret_cast<std::complex<double>*>(slot->buf);
  std::copy(x.begin(), x.end(), data);
  fftw_execute(slot->plan);
  return {data, data + n};
}

}  // namespace

std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x) { return transform(x, FFTW_FORWARD); }

std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x) {
  auto y = transform(x, FFTW_BACKWARD);
  const double inv = 1.0 / static_cast<double>(y.size());
  for (auto& v : y) v *= inv;
  return y;
}

}  // namespace dyadsync
