#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "anisofrac/core.hpp"
#include "anisofrac/quadrature.hpp"

namespace anisofrac {

enum class TrigKind { Sin, Cos };

namespace detail {

inline boost::math::quadrature::tanh_sinh<double>& tanh_sinh_integrator() {
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    return ts;
}

template <class F>
double gk_integrate(F&& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-14);
}

/// Euler transform by repeated averaging of consecutive partial sums.
inline double averaged_limit(std::vector<double> partial) {
    while (partial.size() > 1) {
        for (std::size_t k = 0; k + 1 < partial.size(); ++k) partial[k] = 0.5 * (partial[k] + partial[k + 1]);
        partial.pop_back();
    }
    return partial.front();
}

}  // namespace detail

/// Integral over [start, inf) of env(t) * trig(b t) for b > 0.
///
/// The half line is cut at the zeros of the trigonometric factor; the alternating
/// segment contributions are summed directly while the envelope is significant and
/// the remaining tail is accelerated by repeated averaging of partial sums.
/// env_scale is the length over which env changes appreciably; long leading
/// segments are subdivided geometrically on that scale. When singular_start is set
/// the first piece uses tanh-sinh to absorb endpoint non-smoothness of env.
template <class Env>
double oscillatory_integral(Env&& env, double b, TrigKind kind, double start, double env_scale,
                            bool singular_start = false) {
    if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("oscillatory_integral: frequency must be positive");
    const double pi = std::numbers::pi;
    auto f = [&](double t) {
        const double e = env(t);
        if (e == 0.0) return 0.0;
        return e * (kind == TrigKind::Cos ? std::cos(b * t) : std::sin(b * t));
    };
    const double period = pi / b;
    const double phase = kind == TrigKind::Cos ? 0.5 : 0.0;
    double k0 = std::floor(start / period - phase) + 1.0;
    if ((k0 + phase) * period <= start) k0 += 1.0;
    const double z = (k0 + phase) * period;

    // Leading piece [start, z], split geometrically on the envelope scale.
    double head = 0.0;
    {
        std::vector<double> cuts{start};
        double w = std::max(env_scale, 1e-300);
        while (cuts.back() + w < z && cuts.size() < 200) {
            cuts.push_back(cuts.back() + w);
            w *= 2.0;
        }
        cuts.push_back(z);
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            if (k == 0 && singular_start) {
                head += detail::tanh_sinh_integrator().integrate(f, cuts[0], cuts[1], 1e-14);
            } else {
                head += detail::gk_integrate(f, cuts[k], cuts[k + 1]);
            }
        }
    }

    // Alternating segment contributions.
    constexpr std::size_t kBatch = 40;
    constexpr std::size_t kMaxTerms = 20000;
    constexpr std::size_t kAveraged = 30;
    // Beyond the head each segment is one half period of a smooth envelope; a fixed rule
    // suffices once the segment is split on the local envelope scale.
    const GaussRule& rule = gauss_rule(32);
    auto segment = [&](double a, double c) {
        const double local = std::max(env_scale, 0.25 * a);
        const int pieces = static_cast<int>(std::min(64.0, std::ceil((c - a) / local)));
        double acc = 0.0;
        for (int q = 0; q < pieces; ++q)
            acc += gauss_panel(f, a + (c - a) * q / pieces, a + (c - a) * (q + 1) / pieces, rule);
        return acc;
    };
    std::vector<double> partial;
    partial.reserve(256);
    double sum = 0.0;
    double zero_index = k0;
    double previous_estimate = std::numeric_limits<double>::quiet_NaN();
    double largest_term = std::abs(head);
    while (partial.size() < kMaxTerms) {
        for (std::size_t q = 0; q < kBatch; ++q) {
            const double a = (zero_index + phase) * period;
            const double term = segment(a, (zero_index + 1.0 + phase) * period);
            zero_index += 1.0;
            sum += term;
            largest_term = std::max(largest_term, std::abs(term));
            partial.push_back(sum);
        }
        const double scale = std::max(std::abs(head + sum), 1e-300);
        const double last_term = std::abs(partial.back() - partial[partial.size() - 2]);
        if (last_term <= 1e-17 * scale) return head + sum;
        std::vector<double> tail(partial.end() - static_cast<std::ptrdiff_t>(kAveraged + 1), partial.end());
        const double estimate = head + detail::averaged_limit(std::move(tail));
        const double tol = std::max({1e-14 * std::abs(estimate), 1e-13 * largest_term, 1e-300});
        if (std::isfinite(previous_estimate) && std::abs(estimate - previous_estimate) <= tol) {
            return estimate;
        }
        previous_estimate = estimate;
    }
    throw NumericalError("oscillatory_integral: alternating tail did not settle");
}

}  // namespace anisofrac
