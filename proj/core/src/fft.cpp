#include "sctqm/fft.h"

#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>
#include <fmt/format.h>

#include "sctqm/errors.h"

namespace sctqm {
namespace {

// Plans are created once per shape and reused. Planning is serialized;
// fftw_execute_dft on a finished plan is thread-safe.
class PlanCache {
 public:
  // rank, n, count, stride, dist, sign, alignment offset of the data
  using Key = std::tuple<int, int, int, int, int, int, int>;

  fftw_plan get(const Key& key) {
    std::lock_guard lock(mu_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const auto [rank, n, count, stride, dist, sign, offset] = key;
    const std::size_t total =
        rank == 2 ? static_cast<std::size_t>(n) * n
                  : static_cast<std::size_t>((count - 1) * dist + (n - 1) * stride + 1);
    // SIMD plans may only run on arrays with the alignment they were planned
    // for, so plan on scratch memory shifted by the same offset.
    auto* raw = fftw_alloc_complex(total + 4);
    auto* buf = reinterpret_cast<fftw_complex*>(reinterpret_cast<char*>(raw) + offset);
    // ESTIMATE keeps plan choice, and hence rounding, identical across runs.
    const unsigned flags = FFTW_ESTIMATE;
    fftw_plan plan = nullptr;
    if (rank == 2) {
      plan = fftw_plan_dft_2d(n, n, buf, buf, sign, flags);
    } else {
      int len = n;
      plan = fftw_plan_many_dft(1, &len, count, buf, nullptr, stride, dist, buf, nullptr, stride,
                                dist, sign, flags);
    }
    fftw_free(raw);
    if (!plan) throw std::runtime_error("FFTW planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mu_;
  std::map<Key, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

fftw_complex* as_fftw(std::span<cplx> data) {
  return reinterpret_cast<fftw_complex*>(data.data());
}

int alignment(std::span<cplx> data) {
  return fftw_alignment_of(reinterpret_cast<double*>(data.data()));
}

void run2(std::span<cplx> data, int n, int sign) {
  if (!is_power_of_two(n)) throw ConfigError(fmt::format("FFT size {} is not a power of two", n));
  if (data.size() != static_cast<std::size_t>(n) * n)
    throw ConfigError(fmt::format("FFT buffer holds {} values, expected {}x{}", data.size(), n, n));
  auto plan = cache().get({2, n, 1, 1, 1, sign, alignment(data)});
  fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

void run_batch(std::span<cplx> data, int length, int count, int stride, int dist, int sign) {
  if (length < 1 || count < 1) throw ConfigError("empty FFT batch");
  const auto needed = static_cast<std::size_t>((count - 1) * dist + (length - 1) * stride + 1);
  if (data.size() < needed) throw ConfigError("FFT batch exceeds buffer");
  auto plan = cache().get({1, length, count, stride, dist, sign, alignment(data)});
  fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

}  // namespace

void fft2(std::span<cplx> data, int n) { run2(data, n, FFTW_FORWARD); }

void ifft2(std::span<cplx> data, int n) {
  run2(data, n, FFTW_BACKWARD);
  const double s = 1.0 / (static_cast<double>(n) * n);
  for (auto& v : data) v *= s;
}

void ifft2_unscaled(std::span<cplx> data, int n) { run2(data, n, FFTW_BACKWARD); }

void ifft_batch_unscaled(std::span<cplx> data, int length, int count, int stride, int dist) {
  run_batch(data, length, count, stride, dist, FFTW_BACKWARD);
}

void fft_batch(std::span<cplx> data, int length, int count, int stride, int dist) {
  run_batch(data, length, count, stride, dist, FFTW_FORWARD);
}

void ifft_batch(std::span<cplx> data, int length, int count, int stride, int dist) {
  run_batch(data, length, count, stride, dist, FFTW_BACKWARD);
  const double s = 1.0 / length;
  for (int b = 0; b < count; ++b)
    for (int t = 0; t < length; ++t) data[static_cast<std::size_t>(b * dist + t * stride)] *= s;
}

void fft1(std::span<cplx> data) {
  run_batch(data, static_cast<int>(data.size()), 1, 1, 1, FFTW_FORWARD);
}

void ifft1(std::span<cplx> data) {
  run_batch(data, static_cast<int>(data.size()), 1, 1, 1, FFTW_BACKWARD);
  for (auto& v : data) v /= static_cast<double>(data.size());
}

}  // namespace sctqm
