#include "nfsar/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "nfsar/errors.hpp"

namespace nfsar::fft {

namespace {

// FFTW planning is not thread safe; execution with new-array calls is.
// Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED so they do not depend
// on timing measurements or on the alignment of the arrays later passed in,
// which keeps results bit-reproducible.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t nx, std::size_t ny, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(nx, ny, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cplx> scratch(nx * ny);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan p = fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (p == nullptr) throw InvalidArgument("FFTW failed to create a plan");
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void run(std::span<cplx> data, std::size_t nx, std::size_t ny, int sign) {
  if (data.size() != nx * ny) throw ShapeError("FFT buffer size does not match dimensions");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(cache().get(nx, ny, sign), buf, buf);
}

}  // namespace

void forward(std::span<cplx> data, std::size_t nx, std::size_t ny) {
  run(data, nx, ny, FFTW_FORWARD);
}

void inverse(std::span<cplx> data, std::size_t nx, std::size_t ny) {
  run(data, nx, ny, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(nx * ny);
  for (auto& v : data) v *= scale;
}

}  // namespace nfsar::fft
