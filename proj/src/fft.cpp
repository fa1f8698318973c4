#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <mutex>

namespace memschaos::detail {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t count) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(count, 1))));
}

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {}
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

}  // namespace

std::vector<std::complex<double>> forward_real(std::span<const double> in) {
  const std::size_t n = in.size();
  const std::size_t bins = n / 2 + 1;
  auto rbuf = fftw_buffer<double>(n);
  auto cbuf = fftw_buffer<fftw_complex>(bins);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(
        fftw_plan_dft_r2c_1d(static_cast<int>(n), rbuf.get(), cbuf.get(), FFTW_ESTIMATE));
  }
  std::copy(in.begin(), in.end(), rbuf.get());
  plan->execute();
  std::vector<std::complex<double>> out(bins);
  for (std::size_t k = 0; k < bins; ++k) out[k] = {cbuf[k][0], cbuf[k][1]};
  return out;
}

std::vector<double> inverse_real(std::span<const std::complex<double>> half, std::size_t n) {
  const std::size_t bins = n / 2 + 1;
  auto cbuf = fftw_buffer<fftw_complex>(bins);
  auto rbuf = fftw_buffer<double>(n);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(
        fftw_plan_dft_c2r_1d(static_cast<int>(n), cbuf.get(), rbuf.get(), FFTW_ESTIMATE));
  }
  // c2r overwrites its input, so the copy happens after planning.
  for (std::size_t k = 0; k < bins; ++k) {
    cbuf[k][0] = half[k].real();
    cbuf[k][1] = half[k].imag();
  }
  plan->execute();
  return std::vector<double>(rbuf.get(), rbuf.get() + n);
}

}  // namespace memschaos::detail
