#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <vector>

#include "anisofrac/core.hpp"

namespace anisofrac {

/// Scale c(s) such that c * dt^{1/(2s)} * X, X from the unit sampler, has generator I in the
/// probabilistic normalization. The unit sampler has E exp(i theta X) = exp(-|theta|^{2s}), which
/// is already the symbol sum |2 pi xi_i|^{2s} per unit time, so the constant is 1.
inline double analytic_scale_calibration(double /*s*/) { return 1.0; }

struct StablePathConfig {
    double s = 0.5;
    double dt = 1e-3;
    double horizon = 1e-3;
    std::size_t n_paths = 1000;
    double scale_calibration = 1.0;
    std::uint64_t seed = 1;
    bool keep_paths = false;

    void validate() const {
        if (!(s > 0.0 && s < 1.0)) throw DomainError("stable paths: s must lie in (0,1)");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("stable paths: dt must be positive");
        if (!(horizon >= dt)) throw DomainError("stable paths: horizon must be >= dt");
        if (n_paths == 0) throw DomainError("stable paths: n_paths must be >= 1");
        if (!(scale_calibration > 0.0)) throw DomainError("stable paths: scale_calibration must be positive");
    }

    [[nodiscard]] std::size_t steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }
};

/// Independent mt19937_64 stream for chunk k of a run, seeded through SplitMix64.
inline std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t chunk) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (chunk + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return std::mt19937_64(z);
}

inline constexpr std::size_t kStreamChunk = 1024;

/// Unit symmetric 2s-stable draw (Chambers-Mallows-Stuck).
template <class Rng>
double unit_stable(double s, Rng& rng) {
    const double alpha = 2.0 * s;
    const double pi = std::numbers::pi;
    std::uniform_real_distribution<double> uni(-0.5 * pi, 0.5 * pi);
    std::exponential_distribution<double> expo(1.0);
    double v = uni(rng);
    while (std::abs(v) >= 0.5 * pi) v = uni(rng);
    if (alpha == 1.0) return std::tan(v);
    double w = expo(rng);
    while (!(w > 0.0)) w = expo(rng);
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

/// Increment over dt: c * dt^{1/(2s)} times a unit draw.
template <class Rng>
double stable_increment(double s, double dt, Rng& rng, double scale_calibration = 1.0) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("stable_increment: s must lie in (0,1)");
    if (!(dt > 0.0)) throw DomainError("stable_increment: dt must be positive");
    return scale_calibration * std::pow(dt, 0.5 / s) * unit_stable(s, rng);
}

/// n draws of the unit law split over seeded chunks; identical for any worker count.
inline std::vector<double> stable_samples(double s, std::size_t n, std::uint64_t seed) {
    std::vector<double> out(n);
    const std::size_t chunks = (n + kStreamChunk - 1) / kStreamChunk;
    parallel_for(chunks, [&](std::size_t c) {
        auto rng = stream_for(seed, c);
        const std::size_t hi = std::min(n, (c + 1) * kStreamChunk);
        for (std::size_t k = c * kStreamChunk; k < hi; ++k) out[k] = unit_stable(s, rng);
    });
    return out;
}

struct PathEnsemble {
    int dim = 0;
    std::size_t n_paths = 0;
    std::size_t steps = 0;
    std::vector<double> endpoints;  ///< n_paths x dim, row-major
    std::vector<double> paths;      ///< n_paths x (steps+1) x dim when kept

    [[nodiscard]] std::span<const double> endpoint(std::size_t k) const {
        return {endpoints.data() + k * dim, static_cast<std::size_t>(dim)};
    }
};

/// Paths of the vector of independent one-dimensional stable processes started at x0.
inline PathEnsemble simulate_paths(std::span<const double> x0, const StablePathConfig& cfg) {
    cfg.validate();
    const int d = static_cast<int>(x0.size());
    if (d < 1) throw DomainError("simulate_paths: empty starting point");
    PathEnsemble ens;
    ens.dim = d;
    ens.n_paths = cfg.n_paths;
    ens.steps = cfg.steps();
    ens.endpoints.assign(cfg.n_paths * d, 0.0);
    if (cfg.keep_paths) ens.paths.assign(cfg.n_paths * (ens.steps + 1) * d, 0.0);
    const std::size_t chunks = (cfg.n_paths + kStreamChunk - 1) / kStreamChunk;
    parallel_for(chunks, [&](std::size_t c) {
        auto rng = stream_for(cfg.seed, c);
        const std::size_t hi = std::min(cfg.n_paths, (c + 1) * kStreamChunk);
        Point x(d);
        for (std::size_t k = c * kStreamChunk; k < hi; ++k) {
            std::copy(x0.begin(), x0.end(), x.begin());
            for (std::size_t step = 0; step <= ens.steps; ++step) {
                if (step > 0)
                    for (int i = 0; i < d; ++i) x[i] += stable_increment(cfg.s, cfg.dt, rng, cfg.scale_calibration);
                if (cfg.keep_paths)
                    std::copy(x.begin(), x.end(), ens.paths.begin() + static_cast<std::ptrdiff_t>((k * (ens.steps + 1) + step) * d));
            }
            std::copy(x.begin(), x.end(), ens.endpoints.begin() + static_cast<std::ptrdiff_t>(k * d));
        }
    });
    return ens;
}

struct GeneratorEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    double short_time = 0.0;  ///< plain estimate at t
    double long_time = 0.0;   ///< plain estimate at 2t
};

namespace detail {

inline void mean_and_stderr(const std::vector<double>& v, double& mean, double& se) {
    const double n = static_cast<double>(v.size());
    double m = 0.0;
    for (double x : v) m += x;
    m /= n;
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    var /= std::max(n - 1.0, 1.0);
    mean = m;
    se = std::sqrt(var / n);
}

}  // namespace detail

/// Plain estimator mean(u(x + X_t) - u(x)) / t with its standard error.
inline GeneratorEstimate empirical_generator(const ScalarFn& u, std::span<const double> x, double t, std::size_t n,
                                             double s, std::uint64_t seed, double scale_calibration = 1.0) {
    if (!(t > 0.0)) throw DomainError("empirical_generator: t must be positive");
    if (n < 2) throw DomainError("empirical_generator: need at least two samples");
    const int d = static_cast<int>(x.size());
    const double u0 = u(x);
    std::vector<double> vals(n);
    const std::size_t chunks = (n + kStreamChunk - 1) / kStreamChunk;
    parallel_for(chunks, [&](std::size_t c) {
        auto rng = stream_for(seed, c);
        Point y(d);
        const std::size_t hi = std::min(n, (c + 1) * kStreamChunk);
        for (std::size_t k = c * kStreamChunk; k < hi; ++k) {
            for (int i = 0; i < d; ++i) y[i] = x[i] + stable_increment(s, t, rng, scale_calibration);
            vals[k] = (u(y) - u0) / t;
        }
    });
    GeneratorEstimate g;
    detail::mean_and_stderr(vals, g.estimate, g.stderr_);
    g.short_time = g.estimate;
    return g;
}

/// Richardson estimate 2 D(t) - D(2t) with common random numbers: X_{2t} = X_t + X'_t.
inline GeneratorEstimate richardson_generator(const ScalarFn& u, std::span<const double> x, double t, std::size_t n,
                                              double s, std::uint64_t seed, double scale_calibration = 1.0) {
    if (!(t > 0.0)) throw DomainError("richardson_generator: t must be positive");
    if (n < 2) throw DomainError("richardson_generator: need at least two samples");
    const int d = static_cast<int>(x.size());
    const double u0 = u(x);
    std::vector<double> comb(n), d1(n), d2(n);
    const std::size_t chunks = (n + kStreamChunk - 1) / kStreamChunk;
    parallel_for(chunks, [&](std::size_t c) {
        auto rng = stream_for(seed, c);
        Point y1(d), y2(d);
        const std::size_t hi = std::min(n, (c + 1) * kStreamChunk);
        for (std::size_t k = c * kStreamChunk; k < hi; ++k) {
            for (int i = 0; i < d; ++i) {
                const double a = stable_increment(s, t, rng, scale_calibration);
                const double b = stable_increment(s, t, rng, scale_calibration);
                y1[i] = x[i] + a;
                y2[i] = x[i] + a + b;
            }
            d1[k] = (u(y1) - u0) / t;
            d2[k] = (u(y2) - u0) / (2.0 * t);
            comb[k] = 2.0 * d1[k] - d2[k];
        }
    });
    GeneratorEstimate g;
    double se = 0.0;
    detail::mean_and_stderr(comb, g.estimate, g.stderr_);
    detail::mean_and_stderr(d1, g.short_time, se);
    detail::mean_and_stderr(d2, g.long_time, se);
    return g;
}

/// Empirical scale c(s): the generator scales as c^{2s}, so c = (estimate / reference)^{1/(2s)}
/// against a reference value of I u(x) from quadrature. Serves as a check on the analytic constant.
inline double estimate_scale_calibration(const ScalarFn& u, std::span<const double> x, double reference, double t,
                                         std::size_t n, double s, std::uint64_t seed) {
    if (!(reference != 0.0)) throw DomainError("estimate_scale_calibration: reference must be nonzero");
    const GeneratorEstimate g = richardson_generator(u, x, t, n, s, seed);
    const double ratio = g.estimate / reference;
    if (!(ratio > 0.0)) throw NumericalError("estimate_scale_calibration: estimate has the wrong sign");
    return std::pow(ratio, 0.5 / s);
}

struct EnsembleSummary {
    std::vector<double> mean;    ///< per-axis mean displacement
    std::vector<double> median;  ///< per-axis median displacement
    std::vector<double> iqr;     ///< per-axis interquartile range
};

inline EnsembleSummary summarize(const PathEnsemble& ens, std::span<const double> x0) {
    EnsembleSummary out;
    std::vector<double> col(ens.n_paths);
    for (int i = 0; i < ens.dim; ++i) {
        double m = 0.0;
        for (std::size_t k = 0; k < ens.n_paths; ++k) {
            col[k] = ens.endpoints[k * ens.dim + i] - x0[i];
            m += col[k];
        }
        std::sort(col.begin(), col.end());
        auto q = [&](double f) { return col[static_cast<std::size_t>(f * static_cast<double>(col.size() - 1))]; };
        out.mean.push_back(m / static_cast<double>(ens.n_paths));
        out.median.push_back(q(0.5));
        out.iqr.push_back(q(0.75) - q(0.25));
    }
    return out;
}

/// One row per axis: axis,mean,median,iqr.
inline void write_summary_csv(const EnsembleSummary& sm, std::ostream& os) {
    os << "axis,mean,median,iqr\n";
    os.precision(17);
    for (std::size_t i = 0; i < sm.mean.size(); ++i)
        os << i << ',' << sm.mean[i] << ',' << sm.median[i] << ',' << sm.iqr[i] << '\n';
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_survival(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double acc = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        acc += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(acc, 0.0, 1.0);
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double dmax = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        dmax = std::max(dmax, std::abs(i / na - j / nb));
    }
    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    KsResult r;
    r.statistic = dmax;
    r.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * dmax);
    return r;
}

/// Compares increments over 2 dt (sums of two dt increments) with 2^{1/(2s)} times dt increments.
inline KsResult self_similarity_test(double s, double dt, std::size_t n, std::uint64_t seed) {
    std::vector<double> sums(n), scaled(n);
    const std::size_t chunks = (n + kStreamChunk - 1) / kStreamChunk;
    const double factor = std::pow(2.0, 0.5 / s);
    parallel_for(chunks, [&](std::size_t c) {
        auto rng = stream_for(seed, c);
        const std::size_t hi = std::min(n, (c + 1) * kStreamChunk);
        for (std::size_t k = c * kStreamChunk; k < hi; ++k) {
            sums[k] = stable_increment(s, dt, rng) + stable_increment(s, dt, rng);
            scaled[k] = factor * stable_increment(s, dt, rng);
        }
    });
    return ks_two_sample(std::move(sums), std::move(scaled));
}

/// Hill estimate of the tail index from the largest `fraction` of |samples|.
inline double hill_tail_index(const std::vector<double>& samples, double fraction = 0.1) {
    std::vector<double> a;
    a.reserve(samples.size());
    for (double v : samples)
        if (v != 0.0) a.push_back(std::abs(v));
    const auto k = static_cast<std::size_t>(fraction * static_cast<double>(a.size()));
    if (k < 10) throw DomainError("hill_tail_index: too few samples in the tail");
    std::nth_element(a.begin(), a.end() - static_cast<std::ptrdiff_t>(k + 1), a.end());
    const double threshold = *(a.end() - static_cast<std::ptrdiff_t>(k + 1));
    double acc = 0.0;
    for (auto it = a.end() - static_cast<std::ptrdiff_t>(k); it != a.end(); ++it) acc += std::log(*it / threshold);
    return static_cast<double>(k) / acc;
}

struct AxisConcentration {
    double fraction = 0.0;   ///< share of large steps with >= dominance of their length on one axis
    std::size_t large_steps = 0;
    double threshold = 0.0;  ///< magnitude quantile used to select large steps
};

/// Among single steps whose length exceeds the given quantile, the share dominated by one axis.
inline AxisConcentration axis_concentration(int dim, double s, std::size_t n_steps, std::uint64_t seed,
                                            double quantile = 0.999, double dominance = 0.95) {
    if (dim < 2) throw DomainError("axis_concentration: dim must be >= 2");
    std::vector<double> mag(n_steps), share(n_steps);
    const std::size_t chunks = (n_steps + kStreamChunk - 1) / kStreamChunk;
    parallel_for(chunks, [&](std::size_t c) {
        auto rng = stream_for(seed, c);
        const std::size_t hi = std::min(n_steps, (c + 1) * kStreamChunk);
        for (std::size_t k = c * kStreamChunk; k < hi; ++k) {
            double r2 = 0.0;
            double big = 0.0;
            for (int i = 0; i < dim; ++i) {
                const double v = unit_stable(s, rng);
                r2 += v * v;
                big = std::max(big, std::abs(v));
            }
            mag[k] = std::sqrt(r2);
            share[k] = mag[k] > 0.0 ? big / mag[k] : 1.0;
        }
    });
    std::vector<double> sorted = mag;
    const auto q = static_cast<std::size_t>(quantile * static_cast<double>(n_steps - 1));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q), sorted.end());
    AxisConcentration out;
    out.threshold = sorted[q];
    std::size_t dominated = 0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (mag[k] > out.threshold) {
            ++out.large_steps;
            if (share[k] >= dominance) ++dominated;
        }
    }
    out.fraction = out.large_steps ? static_cast<double>(dominated) / out.large_steps : 0.0;
    return out;
}

/// Sample correlation of the signs of two endpoint coordinates.
inline double sign_correlation(const PathEnsemble& ens, std::span<const double> x0, int i, int j) {
    const double n = static_cast<double>(ens.n_paths);
    double si = 0, sj = 0, sij = 0;
    for (std::size_t k = 0; k < ens.n_paths; ++k) {
        const auto e = ens.endpoint(k);
        const double a = e[i] > x0[i] ? 1.0 : -1.0;
        const double b = e[j] > x0[j] ? 1.0 : -1.0;
        si += a;
        sj += b;
        sij += a * b;
    }
    const double cov = sij / n - (si / n) * (sj / n);
    const double vi = 1.0 - (si / n) * (si / n);
    const double vj = 1.0 - (sj / n) * (sj / n);
    return vi > 0.0 && vj > 0.0 ? cov / std::sqrt(vi * vj) : 0.0;
}

}  // namespace anisofrac
