#include "decolab/numerics.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace decolab {

namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans are created under a lock (the FFTW planner is not thread-safe) and executed
// through the new-array interface, which is. FFTW_ESTIMATE keeps results reproducible.
const PlanPair& plans_for(std::size_t n) {
  thread_local std::map<std::size_t, PlanPair> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_complex* buf = fftw_alloc_complex(n);
  const int len = static_cast<int>(n);
  PlanPair p;
  p.forward = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.backward = fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  if (!p.forward || !p.backward) throw Error("fft: planning failed");
  return cache.emplace(n, p).first->second;
}

}  // namespace

void fft_inplace(cplx* data, std::size_t n, bool inverse) {
  if (!is_power_of_two(n)) throw Error("fft: length must be a power of two");
  if (n == 1) return;
  const PlanPair& p = plans_for(n);
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(inverse ? p.backward : p.forward, d, d);
  if (inverse) {
    const double s = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) data[i] *= s;
  }
}

void fft(ComplexVector& v) { fft_inplace(v.data(), static_cast<std::size_t>(v.size()), false); }
void ifft(ComplexVector& v) { fft_inplace(v.data(), static_cast<std::size_t>(v.size()), true); }

}  // namespace decolab
