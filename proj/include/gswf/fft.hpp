#pragma once

// Thin FFTW wrapper: cached plans for in-place complex transforms of any rank.
// Plans are created under a mutex; execution with the new-array interface is
// thread-safe.

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "gswf/errors.hpp"

namespace gswf::fft {

using cplx = std::complex<double>;

namespace detail {

struct PlanCache {
  std::mutex mu;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& kv : plans) fftw_destroy_plan(kv.second);
  }
};

inline PlanCache& cache() {
  static PlanCache c;
  return c;
}

inline fftw_plan plan_for(const std::vector<int>& shape, int sign) {
  auto& c = cache();
  std::lock_guard<std::mutex> lock(c.mu);
  auto key = std::make_pair(shape, sign);
  auto it = c.plans.find(key);
  if (it != c.plans.end()) return it->second;
  std::size_t total = 1;
  for (int n : shape) total *= static_cast<std::size_t>(n);
  std::vector<cplx> scratch(total);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan p = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), buf, buf, sign,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (p == nullptr) throw Error("fftw: plan creation failed");
  c.plans.emplace(key, p);
  return p;
}

}  // namespace detail

// Unnormalized in-place DFT over a row-major array of the given shape.
// forward: X_k = sum_j x_j e^{-2 pi i jk/n}; backward uses e^{+2 pi i jk/n}.
inline void transform(std::span<cplx> data, const std::vector<int>& shape, bool forward) {
  std::size_t total = 1;
  for (int n : shape) total *= static_cast<std::size_t>(n);
  if (total != data.size()) throw DomainError("fft::transform: shape does not match data size");
  fftw_plan p = detail::plan_for(shape, forward ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, buf, buf);
}

inline void transform1d(std::span<cplx> data, bool forward) {
  transform(data, {static_cast<int>(data.size())}, forward);
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace gswf::fft
