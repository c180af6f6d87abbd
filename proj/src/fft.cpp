#include "mrsi/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "mrsi/errors.hpp"

namespace mrsi::fft {
namespace {

enum class Kind { Forward1d, Backward1d, Forward2d, Backward2d, Real1d };

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(Kind kind, int n0, int n1) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(kind, n0, n1);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    const std::size_t total = static_cast<std::size_t>(n0) * (n1 > 0 ? n1 : 1);
    std::vector<cplx> buf(total + 1);
    auto* c = reinterpret_cast<fftw_complex*>(buf.data());
    switch (kind) {
      case Kind::Forward1d:
        plan = fftw_plan_dft_1d(n0, c, c, FFTW_FORWARD, flags);
        break;
      case Kind::Backward1d:
        plan = fftw_plan_dft_1d(n0, c, c, FFTW_BACKWARD, flags);
        break;
      case Kind::Forward2d:
        plan = fftw_plan_dft_2d(n0, n1, c, c, FFTW_FORWARD, flags);
        break;
      case Kind::Backward2d:
        plan = fftw_plan_dft_2d(n0, n1, c, c, FFTW_BACKWARD, flags);
        break;
      case Kind::Real1d: {
        std::vector<double> in(static_cast<std::size_t>(n0));
        std::vector<cplx> out(static_cast<std::size_t>(n0) / 2 + 1);
        plan = fftw_plan_dft_r2c_1d(n0, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                    flags);
        break;
      }
    }
    if (!plan) throw NumericalError("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<Kind, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

fftw_complex* as_fftw(std::span<cplx> s) { return reinterpret_cast<fftw_complex*>(s.data()); }

}  // namespace

void forward(std::span<cplx> data) {
  if (data.empty()) return;
  fftw_execute_dft(cache().get(Kind::Forward1d, static_cast<int>(data.size()), 0), as_fftw(data),
                   as_fftw(data));
}

void backward(std::span<cplx> data) {
  if (data.empty()) return;
  fftw_execute_dft(cache().get(Kind::Backward1d, static_cast<int>(data.size()), 0), as_fftw(data),
                   as_fftw(data));
}

void forward_2d(std::span<cplx> data, int rows, int cols) {
  if (data.size() != static_cast<std::size_t>(rows) * cols) {
    throw InvalidArgument("forward_2d: size mismatch");
  }
  fftw_execute_dft(cache().get(Kind::Forward2d, rows, cols), as_fftw(data), as_fftw(data));
}

void backward_2d(std::span<cplx> data, int rows, int cols) {
  if (data.size() != static_cast<std::size_t>(rows) * cols) {
    throw InvalidArgument("backward_2d: size mismatch");
  }
  fftw_execute_dft(cache().get(Kind::Backward2d, rows, cols), as_fftw(data), as_fftw(data));
}

void real_forward(std::span<const double> in, std::span<cplx> out) {
  const std::size_t n = in.size();
  if (out.size() != n / 2 + 1) throw InvalidArgument("real_forward: output must hold N/2+1 bins");
  std::vector<double> scratch(in.begin(), in.end());
  fftw_execute_dft_r2c(cache().get(Kind::Real1d, static_cast<int>(n), 0), scratch.data(),
                       as_fftw(out));
}

}  // namespace mrsi::fft
