#ifndef PARALAB_FFT_HPP
#define PARALAB_FFT_HPP

// Thin RAII layer over FFTW for in-place multidimensional complex transforms.

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace paralab {

enum class FftSign { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

namespace detail {
// The FFTW planner is not reentrant.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(p);
    }
};
}  // namespace detail

/// Unnormalised in-place transform of a row-major array with the given shape:
///   out[j] = sum_k in[k] exp(sign * 2 pi i k.j / shape).
inline void fft_inplace(std::vector<std::complex<double>>& data, std::span<const int> shape, FftSign sign) {
    std::size_t total = 1;
    for (int s : shape) {
        if (s <= 0) throw std::invalid_argument("fft_inplace: nonpositive extent");
        total *= static_cast<std::size_t>(s);
    }
    if (total != data.size()) throw std::invalid_argument("fft_inplace: shape does not match data");
    if (total == 1) return;
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    std::unique_ptr<fftw_plan_s, detail::PlanDeleter> plan;
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan.reset(fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), buf, buf,
                                 static_cast<int>(sign), FFTW_ESTIMATE));
    }
    if (!plan) throw std::runtime_error("fft_inplace: FFTW planning failed");
    fftw_execute(plan.get());
}

}  // namespace paralab

#endif  // PARALAB_FFT_HPP
