#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "anisofrac/core.hpp"

namespace anisofrac {

namespace detail {

/// sum_i |scale xi_i|^{2s}, summed in sorted order so permutations give identical bits.
inline double sorted_power_sum(std::span<const double> xi, double scale, double s) {
    double stack[8];
    std::vector<double> heap;
    double* buf = stack;
    if (xi.size() > 8) {
        heap.resize(xi.size());
        buf = heap.data();
    }
    for (std::size_t i = 0; i < xi.size(); ++i) buf[i] = std::abs(xi[i]);
    std::sort(buf, buf + xi.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) acc += std::pow(scale * buf[i], 2.0 * s);
    return acc;
}

}  // namespace detail

/// Fourier symbol sum_i |2 pi xi_i|^{2s}.
inline double symbol(std::span<const double> xi, double s) {
    return detail::sorted_power_sum(xi, 2.0 * std::numbers::pi, s);
}

/// Quasi-norm (sum |xi_i|^{2s})^{1/(2s)}.
inline double aniso_norm(std::span<const double> xi, double s) {
    return std::pow(detail::sorted_power_sum(xi, 1.0, s), 1.0 / (2.0 * s));
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex mu;
    return mu;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

struct PlanDeleter {
    void operator()(fftw_plan p) const {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(p);
    }
};

using PlanHandle = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

inline bool is_power_of_two(std::size_t n) { return n && !(n & (n - 1)); }

/// Workspace and plans for a real-to-complex transform pair over one grid shape.
class RealFft {
public:
    explicit RealFft(const std::vector<std::size_t>& shape) : shape_(shape) {
        if (shape.empty()) throw DomainError("fft: empty shape");
        real_size_ = 1;
        for (auto n : shape) real_size_ *= n;
        complex_size_ = real_size_ / shape.back() * (shape.back() / 2 + 1);
        real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * real_size_)));
        spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size_)));
        if (!real_ || !spec_) throw NumericalError("fft: allocation failed");
        std::vector<int> dims(shape.begin(), shape.end());
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        forward_.reset(fftw_plan_dft_r2c(static_cast<int>(dims.size()), dims.data(), real_.get(), spec_.get(),
                                         FFTW_ESTIMATE));
        backward_.reset(fftw_plan_dft_c2r(static_cast<int>(dims.size()), dims.data(), spec_.get(), real_.get(),
                                          FFTW_ESTIMATE));
        if (!forward_ || !backward_) throw NumericalError("fft: planning failed");
    }

    [[nodiscard]] std::span<double> real() { return {real_.get(), real_size_}; }
    [[nodiscard]] std::span<std::complex<double>> spectrum() {
        return {reinterpret_cast<std::complex<double>*>(spec_.get()), complex_size_};
    }
    [[nodiscard]] const std::vector<std::size_t>& shape() const { return shape_; }
    [[nodiscard]] std::size_t real_size() const { return real_size_; }

    void forward() { fftw_execute(forward_.get()); }

    /// Inverse transform including the 1/size normalization.
    void backward() {
        fftw_execute(backward_.get());
        const double scale = 1.0 / static_cast<double>(real_size_);
        for (auto& v : real()) v *= scale;
    }

    /// Signed integer frequency of spectrum entry `flat` on each axis.
    void frequency_index(std::size_t flat, std::vector<long>& k) const {
        const std::size_t d = shape_.size();
        k.resize(d);
        std::size_t rem = flat;
        const std::size_t last = shape_.back() / 2 + 1;
        k[d - 1] = static_cast<long>(rem % last);
        rem /= last;
        for (std::size_t i = d - 1; i-- > 0;) {
            const auto n = static_cast<long>(shape_[i]);
            long v = static_cast<long>(rem % shape_[i]);
            rem /= shape_[i];
            k[i] = v < (n + 1) / 2 ? v : v - n;
        }
    }

private:
    std::vector<std::size_t> shape_;
    std::size_t real_size_ = 0;
    std::size_t complex_size_ = 0;
    std::unique_ptr<double, FftwFree> real_;
    std::unique_ptr<fftw_complex, FftwFree> spec_;
    PlanHandle forward_;
    PlanHandle backward_;
};

inline void check_spectral_grid(const Grid& g) {
    for (int i = 0; i < g.dim(); ++i) {
        if (g.n(i) % 2 != 0) throw DomainError("spectral: n must be even on every axis");
    }
}

inline void warn_non_power_of_two(const Grid& g) {
    for (int i = 0; i < g.dim(); ++i) {
        if (!is_power_of_two(g.n(i))) {
            std::clog << "anisofrac: warning: FFT size " << g.n(i) << " is not a power of two\n";
            return;
        }
    }
}

/// Multiplies every spectral coefficient of f by m(xi) and transforms back.
template <class Multiplier>
Field spectral_multiply(const Field& f, Multiplier&& m) {
    const Grid& g = f.grid();
    check_spectral_grid(g);
    warn_non_power_of_two(g);
    RealFft fft(g.shape());
    std::copy(f.values().begin(), f.values().end(), fft.real().begin());
    fft.forward();
    auto spec = fft.spectrum();
    std::vector<long> k;
    std::vector<double> xi(g.dim());
    for (std::size_t q = 0; q < spec.size(); ++q) {
        fft.frequency_index(q, k);
        for (int i = 0; i < g.dim(); ++i) xi[i] = static_cast<double>(k[i]) / (2.0 * g.extent(i));
        spec[q] *= m(std::span<const double>(xi));
    }
    fft.backward();
    return Field(g, std::vector<double>(fft.real().begin(), fft.real().end()));
}

}  // namespace detail

/// Positive operator -I applied through its symbol; u is one period of a periodic function.
inline Field apply_spectral(const Field& u, double s) {
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("apply_spectral: s must lie in (0,1]");
    return detail::spectral_multiply(u, [s](std::span<const double> xi) { return symbol(xi, s); });
}

/// Zero-mean periodic solution of -I u = f; f must have zero mean.
inline Field solve_linear(const Field& f, double s) {
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("solve_linear: s must lie in (0,1]");
    double sum = 0.0;
    double sq = 0.0;
    for (double v : f.values()) {
        sum += v;
        sq += v * v;
    }
    const double n = static_cast<double>(f.size());
    const double rms = std::sqrt(sq / n);
    if (std::abs(sum / n) > 1e-12 * rms)
        throw DomainError("solve_linear: right-hand side has nonzero mean; the zero mode is not invertible");
    return detail::spectral_multiply(f, [s](std::span<const double> xi) {
        const double m = symbol(xi, s);
        return m > 0.0 ? 1.0 / m : 0.0;
    });
}

/// Torus analogue of the potential: inverse transform of 1/symbol with the zero mode removed.
/// Values are indexed like the grid, so the node at coordinate x holds G_per(x).
inline Field periodic_green(const Grid& grid, double s) {
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("periodic_green: s must lie in (0,1]");
    detail::check_spectral_grid(grid);
    detail::RealFft fft(grid.shape());
    double volume = 1.0;
    for (int i = 0; i < grid.dim(); ++i) volume *= 2.0 * grid.extent(i);
    auto spec = fft.spectrum();
    std::vector<long> k;
    std::vector<double> xi(grid.dim());
    for (std::size_t q = 0; q < spec.size(); ++q) {
        fft.frequency_index(q, k);
        for (int i = 0; i < grid.dim(); ++i) xi[i] = static_cast<double>(k[i]) / (2.0 * grid.extent(i));
        const double m = symbol(xi, s);
        spec[q] = m > 0.0 ? 1.0 / m : 0.0;
    }
    // Backward transform yields sum_k c_k e^{2 pi i k j / n} / size; rescale to Fourier-series sum / volume.
    fft.backward();
    const double scale = static_cast<double>(fft.real_size()) / volume;
    // FFT index j sits at offset j*h from the origin; reorder onto grid nodes starting at -L.
    Field out(grid);
    const int d = grid.dim();
    std::vector<std::size_t> idx(d);
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
        std::size_t rem = flat;
        std::size_t src = 0;
        for (int i = 0; i < d; ++i) {
            const std::size_t gi = rem / grid.stride(i);
            rem %= grid.stride(i);
            const std::size_t n = grid.n(i);
            src += ((gi + n / 2) % n) * grid.stride(i);
        }
        out[flat] = fft.real()[src] * scale;
    }
    return out;
}

/// <-I u, u> summed over nodes times cell volume, evaluated in frequency space.
inline double spectral_energy(const Field& u, double s) {
    const Grid& g = u.grid();
    detail::check_spectral_grid(g);
    detail::RealFft fft(g.shape());
    std::copy(u.values().begin(), u.values().end(), fft.real().begin());
    fft.forward();
    auto spec = fft.spectrum();
    std::vector<long> k;
    std::vector<double> xi(g.dim());
    const std::size_t last = g.shape().back();
    double acc = 0.0;
    for (std::size_t q = 0; q < spec.size(); ++q) {
        fft.frequency_index(q, k);
        for (int i = 0; i < g.dim(); ++i) xi[i] = static_cast<double>(k[i]) / (2.0 * g.extent(i));
        const long kl = k.back();
        const double mult = (kl == 0 || 2 * static_cast<std::size_t>(kl) == last) ? 1.0 : 2.0;
        acc += mult * symbol(xi, s) * std::norm(spec[q]);
    }
    return acc * g.cell_volume() / static_cast<double>(g.size());
}

/// Truncated Fourier series of the torus potential evaluated at an arbitrary point.
/// Nyquist modes carry half weight so the sum is real and symmetric.
inline double periodic_green_at(std::span<const double> x, double s, double extent, std::size_t n) {
    const int d = static_cast<int>(x.size());
    if (n % 2 != 0 || n < 4) throw DomainError("periodic_green_at: n must be even and >= 4");
    const double two_pi = 2.0 * std::numbers::pi;
    const long half = static_cast<long>(n / 2);
    const std::size_t per_axis = n + 1;
    std::vector<std::vector<std::complex<double>>> phase(d, std::vector<std::complex<double>>(per_axis));
    std::vector<double> freq(per_axis);
    std::vector<double> weight(per_axis, 1.0);
    for (long k = -half; k <= half; ++k) {
        const std::size_t q = static_cast<std::size_t>(k + half);
        freq[q] = static_cast<double>(k) / (2.0 * extent);
        if (k == -half || k == half) weight[q] = 0.5;
        for (int i = 0; i < d; ++i) phase[i][q] = std::polar(1.0, two_pi * freq[q] * x[i]);
    }
    std::vector<double> pw(per_axis);
    for (std::size_t q = 0; q < per_axis; ++q) pw[q] = std::pow(std::abs(two_pi * freq[q]), 2.0 * s);
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= per_axis;
    double acc = 0.0;
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        double m = 0.0;
        double w = 1.0;
        std::complex<double> ph(1.0, 0.0);
        for (int i = d - 1; i >= 0; --i) {
            const std::size_t q = rem % per_axis;
            rem /= per_axis;
            m += pw[q];
            w *= weight[q];
            ph *= phase[i][q];
        }
        if (m > 0.0) acc += w * ph.real() / m;
    }
    return acc / std::pow(2.0 * extent, d);
}

}  // namespace anisofrac
