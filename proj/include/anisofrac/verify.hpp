#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "anisofrac/core.hpp"
#include "anisofrac/levy_sim.hpp"
#include "anisofrac/liouville.hpp"
#include "anisofrac/potential.hpp"
#include "anisofrac/singular_quadrature.hpp"
#include "anisofrac/solver.hpp"
#include "anisofrac/spectral.hpp"

namespace anisofrac::verify {

struct Outcome {
    bool passed = false;
    std::string detail;
};

struct Check {
    std::string name;
    std::string topic;
    std::function<Outcome()> run;
};

struct CheckResult {
    std::string name;
    std::string topic;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

namespace detail {

template <class... Args>
std::string cat(const Args&... args) {
    std::ostringstream os;
    os.precision(4);
    (os << ... << args);
    return os.str();
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline ScalarFn gaussian(Point center, double width = 1.0) {
    return [center = std::move(center), width](std::span<const double> x) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - center[i]) * (x[i] - center[i]);
        return std::exp(-r2 / (width * width));
    };
}

inline FractionalParams params(int dim, double s, Normalization n = Normalization::Probabilistic, double p = 3.0) {
    FractionalParams P;
    P.dim = dim;
    P.s = s;
    P.p = p;
    P.normalization = n;
    return P;
}

/// Config for integrands that grow like t^alpha along the evaluation line.
inline QuadratureConfig growing_config(double alpha) {
    QuadratureConfig c;
    c.far_field = FarField::PowerLaw;
    c.tail_decay_exponent = -alpha;
    c.tail_limit = 1e8;
    return c;
}

inline Point random_point(std::mt19937_64& rng, int dim, double lo, double hi) {
    std::uniform_real_distribution<double> U(lo, hi);
    Point x(dim);
    for (auto& v : x) v = U(rng);
    return x;
}

}  // namespace detail

// ---- operator and constants ----

inline Outcome cs_constant_closed_form() {
    double worst = 0.0;
    for (double s : {0.25, 0.5, 0.75}) {
        const double exact = std::tgamma(1.0 + 2.0 * s) * std::sin(std::numbers::pi * s) / std::numbers::pi;
        worst = std::max(worst, detail::rel(cs_constant(s), exact));
    }
    return {worst < 1e-10, detail::cat("max relative error ", worst)};
}

inline Outcome operator_constant_annihilated() {
    const ScalarFn one = [](std::span<const double>) { return 1.0; };
    double worst = 0.0;
    for (double s : {0.2, 0.5, 0.9}) {
        const Point x{0.3, -1.2};
        worst = std::max(worst, std::abs(apply_operator(one, x, detail::params(2, s), {})));
    }
    return {worst < 1e-12, detail::cat("max |I 1| ", worst)};
}

inline Outcome operator_gaussian_maximum_negative() {
    bool ok = true;
    double worst = -1e300;
    for (double s : {0.1, 0.5, 0.9}) {
        const Point x{0.0, 0.0};
        const double v = apply_operator(detail::gaussian({0.0, 0.0}), x, detail::params(2, s), {});
        ok = ok && v < 0.0;
        worst = std::max(worst, v);
    }
    return {ok, detail::cat("largest value at the maximum ", worst)};
}

/// Quadrature eigenrelation for cos(2 pi k.x); returns the largest error relative to the symbol.
inline double plane_wave_quadrature_error(double s, std::span<const int> k, std::span<const double> x) {
    const int d = static_cast<int>(k.size());
    std::vector<double> kk(k.begin(), k.end());
    const ScalarFn u = [kk](std::span<const double> y) {
        double ph = 0.0;
        for (std::size_t i = 0; i < kk.size(); ++i) ph += kk[i] * y[i];
        return std::cos(2.0 * std::numbers::pi * ph);
    };
    const double sym = symbol(kk, s);
    const double got = -apply_operator(u, x, detail::params(d, s), QuadratureConfig::periodic());
    return std::abs(got - sym * u(x)) / sym;
}

inline const std::vector<std::vector<int>>& plane_wave_modes() {
    static const std::vector<std::vector<int>> modes{{1, 0}, {0, 2}, {1, 1}, {-1, 2}, {2, 3}, {3, -3}};
    return modes;
}

inline Outcome plane_wave_quadrature() {
    double worst = 0.0;
    const Point x{0.1, 0.3};
    for (double s : {0.25, 0.5, 0.75})
        for (const auto& k : plane_wave_modes()) worst = std::max(worst, plane_wave_quadrature_error(s, k, x));
    return {worst < 1e-4, detail::cat("max error relative to symbol ", worst)};
}

inline double plane_wave_spectral_error(double s, std::span<const int> k) {
    const Grid g = make_grid(2, 16, 0.5);
    std::vector<double> kk(k.begin(), k.end());
    const Field u = sample_function(
        [kk](std::span<const double> y) { return std::cos(2.0 * std::numbers::pi * (kk[0] * y[0] + kk[1] * y[1])); }, g);
    const Field v = apply_spectral(u, s);
    const double sym = symbol(kk, s);
    double err = 0.0;
    for (std::size_t q = 0; q < u.size(); ++q) err = std::max(err, std::abs(v[q] - sym * u[q]));
    return err / sym;
}

inline Outcome plane_wave_spectral() {
    double worst = 0.0;
    for (double s : {0.25, 0.5, 0.75})
        for (const auto& k : plane_wave_modes()) worst = std::max(worst, plane_wave_spectral_error(s, k));
    return {worst < 1e-12, detail::cat("max error relative to symbol ", worst)};
}

inline Outcome scaling_law() {
    double worst = 0.0;
    const auto phi = detail::gaussian({0.2, -0.1});
    const std::vector<Point> ys{{0.3, -0.2}, {1.1, 0.4}, {-0.6, 0.9}};
    for (double s : {0.3, 0.7}) {
        const FractionalParams P = detail::params(2, s);
        for (double R : {2.0, 5.0, 10.0}) {
            const ScalarFn phi_R = [&phi, R](std::span<const double> x) {
                const Point y{x[0] / R, x[1] / R};
                return phi(y);
            };
            for (const Point& y : ys) {
                const Point x{R * y[0], R * y[1]};
                for (int i = 0; i < 2; ++i) {
                    const double lhs = apply_1d_fractional(phi_R, x, i, P, {});
                    const double rhs = std::pow(R, -2.0 * s) * apply_1d_fractional(phi, y, i, P, {});
                    worst = std::max(worst, detail::rel(lhs, rhs));
                }
            }
        }
    }
    return {worst < 1e-6, detail::cat("max relative error ", worst)};
}

inline Outcome power_inequality() {
    const ScalarFn phi = whole_space_bump();
    double worst_margin = 1e300;
    bool ok = true;
    for (double s : {0.3, 0.7}) {
        const FractionalParams P = detail::params(2, s);
        for (double m : {2.0, 3.0, 4.5}) {
            const ScalarFn phim = [&phi, m](std::span<const double> x) { return std::pow(phi(x), m); };
            for (double a = -2.2; a <= 2.21; a += 0.55) {
                for (double b = -2.2; b <= 2.21; b += 0.55) {
                    const Point x{a, b};
                    for (int i = 0; i < 2; ++i) {
                        const double lhs = apply_1d_fractional(phim, x, i, P, {});
                        const double rhs = m * std::pow(phi(x), m - 1.0) * apply_1d_fractional(phi, x, i, P, {});
                        const double slack = 1e-7 * (std::abs(lhs) + std::abs(rhs)) + 1e-10;
                        ok = ok && lhs >= rhs - slack;
                        worst_margin = std::min(worst_margin, lhs - rhs);
                    }
                }
            }
        }
    }
    return {ok, detail::cat("smallest margin I(phi^m) - m phi^{m-1} I phi = ", worst_margin)};
}

inline Outcome product_rule_identity() {
    const auto g = detail::gaussian({0.3, -0.2});
    const auto gauss_h = detail::gaussian({-0.4, 0.1}, 1.4);
    const ScalarFn h = [gauss_h](std::span<const double> x) { return (1.0 + 0.3 * x[0]) * gauss_h(x); };
    const ScalarFn gh = [g, h](std::span<const double> x) { return g(x) * h(x); };
    std::mt19937_64 rng(17);
    double worst = 0.0;
    for (double s : {0.3, 0.5, 0.8}) {
        const FractionalParams P = detail::params(2, s);
        for (int k = 0; k < 4; ++k) {
            const Point x = detail::random_point(rng, 2, -1.5, 1.5);
            const double Igh = apply_operator(gh, x, P, {});
            const double a = g(x) * apply_operator(h, x, P, {});
            const double b = h(x) * apply_operator(g, x, P, {});
            const double c = product_remainder(g, h, x, P, {});
            const double scale = std::max({std::abs(Igh), std::abs(a), std::abs(b), std::abs(c)});
            worst = std::max(worst, std::abs(Igh - a - b - c) / scale);
        }
    }
    const double constant = product_remainder([](std::span<const double>) { return 2.0; }, g, Point{0.1, 0.2},
                                              detail::params(2, 0.5), {});
    const double square = product_remainder(g, g, Point{0.3, -0.2}, detail::params(2, 0.5), {});
    const bool ok = worst < 1e-4 && std::abs(constant) < 1e-14 && square > 0.0;
    return {ok, detail::cat("identity residual ", worst, ", constant factor ", constant, ", square ", square)};
}

// ---- boundary power function ----

inline Outcome boundary_constant_signs() {
    bool ok = true;
    std::ostringstream os;
    os.precision(4);
    for (double s : {0.3, 0.5, 0.7}) {
        const double zero = c_alpha(s, s);
        const double neg = c_alpha(0.5 * s, s);
        const double pos = c_alpha(1.5 * s, s);
        ok = ok && std::abs(zero) < 1e-6 && neg < -1e-3 && pos > 1e-3;
        os << "s=" << s << ": " << zero << ' ' << neg << ' ' << pos << "; ";
    }
    return {ok, os.str()};
}

/// Largest error of the direct operator on (x_N)_+^alpha against c_alpha x_N^{alpha-2s}, relative
/// to |c_alpha(s/2, s)| x_N^{alpha - 2s} when c_alpha itself vanishes.
inline double boundary_power_error(double alpha, double s) {
    const FractionalParams P = detail::params(2, s, Normalization::Plain);
    const ScalarFn omega = boundary_power(alpha, 2);
    const double C = c_alpha(alpha, s);
    const double floor = std::abs(c_alpha(0.5 * s, s));
    double worst = 0.0;
    for (double xn : {0.5, 1.0, 2.0}) {
        const Point x{0.4, xn};
        KinkMap kinks(2);
        kinks[1] = {xn};
        const double direct = apply_1d_fractional(omega, x, 0, P, {}) +
                              apply_1d_fractional(omega, x, 1, P, detail::growing_config(alpha), kinks[1]);
        const double expect = C * std::pow(xn, alpha - 2.0 * s);
        const double scale = std::max(std::abs(C), 1e-3 * floor) * std::pow(xn, alpha - 2.0 * s);
        worst = std::max(worst, std::abs(direct - expect) / scale);
    }
    return worst;
}

inline Outcome boundary_power_quadrature() {
    double worst = 0.0;
    for (double s : {0.3, 0.5, 0.7})
        for (double f : {0.5, 1.0, 1.5}) worst = std::max(worst, boundary_power_error(f * s, s));
    return {worst < 1e-4, detail::cat("max relative error ", worst)};
}

inline Outcome boundary_cross_terms_axis_only() {
    const auto phi = detail::gaussian({0.1, 0.2, 0.6});
    double worst = 0.0;
    for (double s : {0.4, 0.7}) {
        const FractionalParams P = detail::params(3, s);
        const double alpha = 0.5 * (std::max(2.0 * s - 1.0, 0.0) + std::min(1.0, 2.0 * s));
        const ScalarFn omega = boundary_power(alpha, 3);
        const Point x{0.3, -0.5, 0.7};
        for (int i = 0; i < 2; ++i)
            worst = std::max(worst, std::abs(product_remainder_axis(omega, phi, x, i, P, {})));
    }
    return {worst < 1e-15, detail::cat("max |I_i[omega, phi]| for i < N: ", worst)};
}

/// I_N[omega_alpha, phi] at x_N = 0 by endpoint-singular quadrature of K int_0^inf t^{alpha-1-2s} (phi(x + t e_N) - phi(x)) dt.
inline double boundary_trace_value(double alpha, const ScalarFn& phi, const Point& x, const FractionalParams& P) {
    const int d = static_cast<int>(x.size());
    const double base = phi(x);
    auto f = [&](double t) {
        if (t < 1e-100) return 0.0;
        Point y = x;
        y[d - 1] += t;
        return std::pow(t, alpha - 1.0 - 2.0 * P.s) * (phi(y) - base);
    };
    const double head = anisofrac::detail::tanh_sinh_integrator().integrate(f, 0.0, 1.0, 1e-13);
    const double tail = boost::math::quadrature::exp_sinh<double>().integrate(f, 1.0, std::numeric_limits<double>::infinity(), 1e-13);
    return anisofrac::detail::prefactor(P) * (head + tail);
}

/// I_N[omega_alpha, phi] along x_N = 2^{-k}, k = 1..k_max, and its value on the boundary.
struct ContinuityTrace {
    double s = 0.0;
    double alpha = 0.0;
    std::vector<double> values;
    double boundary_value = 0.0;
    [[nodiscard]] double gap(int k) const { return std::abs(values.at(k - 1) - boundary_value); }
    /// Successive differences shrink over k = k_first..k_last.
    [[nodiscard]] bool contracting(int k_first, int k_last) const {
        for (int k = std::max(k_first, 3); k <= k_last; ++k)
            if (std::abs(values[k - 1] - values[k - 2]) > std::abs(values[k - 2] - values[k - 3]) * 1.05 + 1e-12)
                return false;
        return true;
    }
};

inline ContinuityTrace boundary_continuity_trace(double alpha, double s, int k_max = 10) {
    const FractionalParams P = detail::params(2, s);
    const auto phi = detail::gaussian({0.2, 0.3});
    const ScalarFn omega = boundary_power(alpha, 2);
    ContinuityTrace tr;
    tr.s = s;
    tr.alpha = alpha;
    for (int k = 1; k <= k_max; ++k) {
        const double xn = std::ldexp(1.0, -k);
        const Point x{0.1, xn};
        tr.values.push_back(product_remainder_axis(omega, phi, x, 1, P, detail::growing_config(alpha), {xn}));
    }
    tr.boundary_value = boundary_trace_value(alpha, phi, Point{0.1, 0.0}, P);
    return tr;
}

/// Admissible sample alpha = (2s-1)_+ + f (min(1, 2s) - (2s-1)_+).
inline double admissible_alpha(double s, double f) {
    const double lo = std::max(2.0 * s - 1.0, 0.0);
    return lo + f * (std::min(1.0, 2.0 * s) - lo);
}

inline Outcome boundary_continuity() {
    bool ok = true;
    std::ostringstream os;
    os.precision(3);
    for (double s : {0.3, 0.5, 0.7}) {
        for (double f : {0.25, 0.5, 0.75}) {
            const double alpha = admissible_alpha(s, f);
            const ContinuityTrace tr = boundary_continuity_trace(alpha, s, 60);
            const double g10 = tr.gap(10);
            const bool pass = g10 < 1e-3 && tr.contracting(7, 10);
            ok = ok && pass;
            os << "(s=" << s << ",a=" << alpha << ") gap@10 " << g10 << " gap@60 " << tr.gap(60)
               << (tr.contracting(7, 10) ? "" : " not contracting") << "; ";
        }
    }
    return {ok, os.str()};
}

inline Outcome narrow_band_bound_check() {
    bool ok = true;
    double worst_exact = 0.0;
    const double lambda = 0.3;
    for (double s : {0.25, 0.5, 0.75}) {
        for (double d : {0.1, 1.0}) {
            for (double f : {1.0, 0.75, 0.5, 0.25, 0.01}) {
                const double z1 = lambda - f * d;
                const double tail = narrow_band_tail(lambda, z1, s);
                ok = ok && tail >= narrow_band_bound(d, s) * (1.0 - 1e-12);
                worst_exact = std::max(worst_exact, detail::rel(tail, std::pow(f * d, -2.0 * s) / (2.0 * s)));
            }
        }
    }
    return {ok && worst_exact < 1e-8, detail::cat("bound respected; max error against the exact tail ", worst_exact)};
}

// ---- integration by parts ----

inline Outcome ibp_full_space() {
    const FractionalParams P = detail::params(2, 0.5);
    const auto u = detail::gaussian({0.0, 0.0});
    const auto phi = detail::gaussian({0.3, 0.0}, 0.7);
    double worst = 0.0;
    for (int axis = 0; axis < 2; ++axis) worst = std::max(worst, ibp_residual(u, phi, axis, P, {}, IbpMode::full_space()));
    const double same = ibp_residual(u, u, 0, P, {}, IbpMode::full_space());
    return {worst < 1e-5 && same == 0.0, detail::cat("residual ", worst, ", u = phi residual ", same)};
}

inline Outcome ibp_axis_line() {
    const FractionalParams P = detail::params(2, 0.4);
    const auto u = detail::gaussian({0.0, 0.0});
    const auto phi = detail::gaussian({-0.2, 0.4}, 0.8);
    IbpDomain dom;
    dom.panels_per_axis = 32;
    const double r = ibp_residual(u, phi, 0, P, {}, IbpMode::axis_line({0.0, 0.4}), dom);
    return {r < 1e-5, detail::cat("residual ", r)};
}

inline Outcome ibp_half_space_weighted() {
    const double s = 0.6;
    const FractionalParams P = detail::params(2, s);
    const ScalarFn u = lift(detail::gaussian({0.0, 0.5}), s, 2);
    const auto phi = detail::gaussian({0.2, 0.7}, 0.8);
    IbpDomain dom;
    dom.half_width = 4.0;
    double worst = 0.0;
    for (int axis = 0; axis < 2; ++axis)
        worst = std::max(worst, ibp_residual(u, phi, axis, P, {}, IbpMode::half_space(s), dom));
    return {worst < 1e-4, detail::cat("residual ", worst)};
}

inline Outcome halfspace_decomposition() {
    std::mt19937_64 rng(5);
    const auto phi = detail::gaussian({0.1, 0.6});
    double worst = 0.0;
    for (double s : {0.5, 0.75}) {
        const FractionalParams P = detail::params(2, s);
        for (double alpha : {s, 0.5 * (s + std::min(1.0, 2.0 * s))}) {
            for (int k = 0; k < 3; ++k) {
                Point x = detail::random_point(rng, 2, -1.0, 1.0);
                x[1] = 0.2 + std::abs(x[1]);
                const HalfspaceApply r = halfspace_test_decomposition(alpha, phi, x, P, {});
                worst = std::max(worst, r.gap() / std::max(1.0, std::abs(r.direct)));
            }
        }
    }
    return {worst < 1e-4, detail::cat("max direct vs decomposed gap ", worst)};
}

// ---- oscillatory integrals ----

inline Outcome oscillatory_closed_forms() {
    double worst = 0.0;
    for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}, std::pair{0.5, 3.0}, std::pair{1.0, 10.0}}) {
        worst = std::max(worst, detail::rel(stable_cosine_integral(a, b, 0.5, TrigKind::Cos), a / (a * a + b * b)));
        worst = std::max(worst, detail::rel(stable_cosine_integral(a, b, 0.5, TrigKind::Sin), b / (a * a + b * b)));
        const double gauss = std::sqrt(std::numbers::pi / (4.0 * a)) * std::exp(-b * b / (4.0 * a));
        if (gauss > 1e-6) worst = std::max(worst, detail::rel(stable_cosine_integral(a, b, 1.0, TrigKind::Cos), gauss));
    }
    return {worst < 1e-8, detail::cat("max relative error ", worst)};
}

inline Outcome oscillatory_positivity() {
    double least_sin = 1e300;
    for (double a : {0.5, 1.0, 2.0, 5.0})
        for (double s : {0.25, 0.5, 0.75, 1.0}) least_sin = std::min(least_sin, stable_cosine_integral(a, 1.0, s, TrigKind::Sin));
    double least_cos = 1e300;
    for (double s : {0.25, 0.4, 0.5})
        for (double b : {0.5, 1.0, 2.0, 5.0, 10.0}) least_cos = std::min(least_cos, stable_cosine_integral(1.0, b, s, TrigKind::Cos));
    return {least_sin > 0.0 && least_cos > 0.0, detail::cat("least sine value ", least_sin, ", least cosine value ", least_cos)};
}

// ---- spectral ----

inline Outcome symbol_symmetry() {
    std::mt19937_64 rng(3);
    bool ok = true;
    for (int k = 0; k < 200; ++k) {
        Point xi = detail::random_point(rng, 3, -4.0, 4.0);
        const double s = 0.1 + 0.8 * (k % 9) / 8.0;
        const double v = symbol(xi, s);
        Point flip = xi;
        flip[k % 3] = -flip[k % 3];
        Point swap = xi;
        std::swap(swap[0], swap[2]);
        ok = ok && v > 0.0 && symbol(flip, s) == v && symbol(swap, s) == v;
    }
    return {ok, "sign flips and transpositions leave the symbol unchanged"};
}

inline Outcome aniso_norm_sandwich() {
    std::mt19937_64 rng(4);
    bool ok = std::abs(aniso_norm(Point{1.0, 0.0, 0.0}, 0.3) - 1.0) < 1e-15 &&
              std::abs(aniso_norm(Point{1.0, 1.0}, 0.5) - 2.0) < 1e-14;
    for (int k = 0; k < 1000; ++k) {
        const int d = 2 + k % 3;
        const Point x = detail::random_point(rng, d, -3.0, 3.0);
        const double s = 0.05 + 0.9 * ((k * 7) % 100) / 100.0;
        double m = 0.0;
        for (double v : x) m = std::max(m, std::abs(v));
        const double q = aniso_norm(x, s);
        ok = ok && m <= q * (1.0 + 1e-12) && q <= std::pow(static_cast<double>(d), 0.5 / s) * m * (1.0 + 1e-12);
    }
    return {ok, "max|x_i| <= |x|_2s <= N^{1/(2s)} max|x_i| on 1000 points"};
}

inline Outcome spectral_round_trip() {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> N01;
    const Grid g = make_grid(2, 32, 1.0);
    Field f(g);
    for (auto& v : f.values()) v = N01(rng);
    double mean = 0.0;
    for (double v : f.values()) mean += v;
    mean /= static_cast<double>(f.size());
    for (auto& v : f.values()) v -= mean;
    double worst = 0.0;
    for (double s : {0.25, 0.5, 0.75}) {
        const Field back = apply_spectral(solve_linear(f, s), s);
        double err = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) err = std::max(err, std::abs(back[k] - f[k]));
        worst = std::max(worst, err / f.max_abs());
    }
    return {worst < 1e-10, detail::cat("relative round-trip error ", worst)};
}

inline Outcome spectral_energy_positive() {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> N01;
    const Grid g = make_grid(2, 16, 1.0);
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        Field u(g);
        for (auto& v : u.values()) v = N01(rng);
        for (double s : {0.2, 0.6}) {
            const double e = spectral_energy(u, s);
            const Field Au = apply_spectral(u, s);
            double direct = 0.0;
            for (std::size_t k = 0; k < u.size(); ++k) direct += Au[k] * u[k];
            direct *= g.cell_volume();
            ok = ok && e >= 0.0;
            worst = std::max(worst, detail::rel(direct, e));
        }
    }
    return {ok && worst < 1e-10, detail::cat("energy nonnegative; node-sum vs frequency-sum gap ", worst)};
}

inline Outcome laplacian_limit() {
    const Grid g = make_grid(2, 16, 0.5);
    const Field u = sample_function([](std::span<const double> x) { return std::cos(2.0 * std::numbers::pi * x[0]); }, g);
    const Field v = apply_spectral(u, 0.999);
    const double lap = 4.0 * std::numbers::pi * std::numbers::pi;
    double worst = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k)
        if (std::abs(u[k]) > 0.1) worst = std::max(worst, std::abs(v[k] / u[k] - lap) / lap);
    return {worst < 1e-2, detail::cat("relative gap to the Laplacian ", worst)};
}

/// Relative sup gap between the spectral and quadrature operators on exp(-|x|^2) at nodes in
/// [-2, 2]^2, on an n x n grid of spacing h.
inline double cross_method_gap(double s, std::size_t n, double h) {
    const auto u = detail::gaussian({0.0, 0.0});
    const Grid g = make_grid(2, n, 0.5 * h * static_cast<double>(n));
    const Field v = apply_spectral(sample_function(u, g), s);
    const FractionalParams P = detail::params(2, s);
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point x = g.point(k);
        if (std::abs(x[0]) <= 2.0 + 1e-9 && std::abs(x[1]) <= 2.0 + 1e-9) nodes.push_back(k);
    }
    std::vector<double> diff(nodes.size()), ref(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t q) {
        const Point x = g.point(nodes[q]);
        ref[q] = -apply_operator(u, x, P, {});
        diff[q] = std::abs(v[nodes[q]] - ref[q]);
    });
    double mx = 0.0, sc = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        mx = std::max(mx, diff[q]);
        sc = std::max(sc, std::abs(ref[q]));
    }
    return mx / sc;
}

inline Outcome cross_method_agreement() {
    const double g1 = cross_method_gap(0.5, 256, 0.25);
    const double g2 = cross_method_gap(0.5, 512, 0.25);
    return {g1 < 1e-3 && g2 <= 0.5 * g1, detail::cat("gap n=256 ", g1, ", n=512 ", g2)};
}

// ---- potential ----

inline Outcome green_closed_forms() {
    const double target = 1.0 / (4.0 * std::numbers::pi);
    const Point x{1.0, 1.0};
    const double closed = green_value(x, 0.5, 2, GreenMethod::ClosedHalf);
    const double nested = half_order_product_integral(x);
    double newton = 0.0;
    for (double r : {0.5, 1.0, 2.0}) {
        const Point y{r / std::sqrt(3.0), -r / std::sqrt(3.0), r / std::sqrt(3.0)};
        newton = std::max(newton, detail::rel(green_value(y, 1.0, 3, GreenMethod::ClosedNewtonian),
                                              1.0 / (4.0 * std::numbers::pi * r)));
    }
    const bool ok = detail::rel(closed, target) < 1e-10 && detail::rel(nested, target) < 1e-6 && newton < 1e-8;
    return {ok, detail::cat("closed ", detail::rel(closed, target), ", quadrature ", detail::rel(nested, target),
                            ", Newtonian ", newton)};
}

inline Outcome green_nested_vs_closed() {
    const Point x3{1.0, 0.5, 0.25};
    const double a = green_value(x3, 0.5, 3, GreenMethod::ClosedHalf);
    const double b = green_value(x3, 0.5, 3, GreenMethod::NestedQuadrature);
    double newton = 0.0;
    for (double r : {0.5, 1.0, 2.0}) {
        const Point y{0.6 * r, 0.8 * r, 1e-3};
        newton = std::max(newton, detail::rel(green_value(y, 1.0, 3, GreenMethod::NestedQuadrature),
                                              green_value(y, 1.0, 3, GreenMethod::ClosedNewtonian)));
    }
    return {detail::rel(b, a) < 1e-5 && newton < 1e-4,
            detail::cat("N=3 half-order gap ", detail::rel(b, a), ", Newtonian nested gap ", newton)};
}

inline GreenMethod exact_method(double s, int dim) {
    if (s == 0.5) return GreenMethod::ClosedHalf;
    if (s == 1.0 && dim >= 3) return GreenMethod::ClosedNewtonian;
    return GreenMethod::NestedQuadrature;
}

/// Homogeneity of the potential on `count` random points; returns the worst relative error.
inline double homogeneity_error(double s, int dim, GreenMethod m, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Point> pts(count);
    for (auto& p : pts) {
        do p = detail::random_point(rng, dim, -2.0, 2.0);
        while (anisofrac::detail::diverges_on_axes(p, s) || std::abs(*std::min_element(p.begin(), p.end(), [](double a, double b) {
                                             return std::abs(a) < std::abs(b);
                                         })) < 1e-2);
    }
    std::vector<double> err(count);
    parallel_for(count, [&](std::size_t k) {
        const double g = green_value(pts[k], s, dim, m);
        double e = 0.0;
        for (double lam : {0.5, 2.0, 3.0}) {
            Point y = pts[k];
            for (auto& v : y) v *= lam;
            e = std::max(e, detail::rel(green_value(y, s, dim, m), std::pow(lam, 2.0 * s - dim) * g));
        }
        err[k] = e;
    });
    return *std::max_element(err.begin(), err.end());
}

inline Outcome green_homogeneity(std::size_t count = 1000) {
    const double exact2 = homogeneity_error(0.5, 2, GreenMethod::ClosedHalf, count, 1);
    const double exact3 = homogeneity_error(0.5, 3, GreenMethod::ClosedHalf, count, 2);
    const double newton = homogeneity_error(1.0, 3, GreenMethod::ClosedNewtonian, count, 3);
    const double nested = homogeneity_error(0.4, 2, GreenMethod::NestedQuadrature, count, 4);
    const double nested3 = homogeneity_error(0.75, 3, GreenMethod::NestedQuadrature, count / 4, 5);
    const bool ok = exact2 < 1e-5 && exact3 < 1e-5 && newton < 1e-5 && nested < 1e-3 && nested3 < 1e-3;
    return {ok, detail::cat("closed N=2 ", exact2, ", closed N=3 ", exact3, ", Newtonian ", newton, ", nested s=0.4 ",
                            nested, ", nested N=3 s=0.75 ", nested3)};
}

/// Worst relative change of the potential under coordinate sign flips and swaps.
inline double hyperplane_symmetry_error(double s, int dim, GreenMethod m, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Point> pts(count);
    for (auto& p : pts) {
        do p = detail::random_point(rng, dim, -2.0, 2.0);
        while (anisofrac::detail::diverges_on_axes(p, s));
    }
    std::vector<double> err(count);
    parallel_for(count, [&](std::size_t k) {
        const Point& x = pts[k];
        const double g = green_value(x, s, dim, m);
        double e = 0.0;
        for (int i = 0; i < dim; ++i) {
            Point y = x;
            y[i] = -y[i];
            e = std::max(e, detail::rel(green_value(y, s, dim, m), g));
            for (int j = i + 1; j < dim; ++j) {
                Point z = x;
                std::swap(z[i], z[j]);
                e = std::max(e, detail::rel(green_value(z, s, dim, m), g));
                z[i] = -z[i];
                z[j] = -z[j];
                e = std::max(e, detail::rel(green_value(z, s, dim, m), g));
            }
        }
        err[k] = e;
    });
    return *std::max_element(err.begin(), err.end());
}

inline Outcome green_hyperplane_symmetry(std::size_t count = 1000) {
    const double a = hyperplane_symmetry_error(0.5, 2, GreenMethod::ClosedHalf, count, 11);
    const double b = hyperplane_symmetry_error(0.5, 3, GreenMethod::ClosedHalf, count, 12);
    const double c = hyperplane_symmetry_error(0.4, 3, GreenMethod::NestedQuadrature, count / 4, 13);
    return {a < 1e-12 && b < 1e-10 && c < 1e-8, detail::cat("N=2 ", a, ", N=3 ", b, ", nested s=0.4 ", c)};
}

struct BoundReport {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double min_value = 0.0;
};

/// Range of G_s(x) |x|_{2s}^{N-2s} over random points in dimension 2.
inline BoundReport two_sided_bound(double s, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Point> pts(count);
    for (auto& p : pts) p = detail::random_point(rng, 2, -3.0, 3.0);
    std::vector<double> ratio(count), value(count);
    const GreenMethod m = exact_method(s, 2);
    parallel_for(count, [&](std::size_t k) {
        value[k] = green_value(pts[k], s, 2, m);
        ratio[k] = value[k] * std::pow(aniso_norm(pts[k], s), 2.0 - 2.0 * s);
    });
    return {*std::min_element(ratio.begin(), ratio.end()), *std::max_element(ratio.begin(), ratio.end()),
            *std::min_element(value.begin(), value.end())};
}

inline Outcome green_positivity_and_bounds(std::size_t count = 1000) {
    bool ok = true;
    std::ostringstream os;
    os.precision(4);
    for (double s : {0.3, 0.4, 0.5}) {
        const BoundReport r = two_sided_bound(s, count, static_cast<std::uint64_t>(100 * s));
        ok = ok && r.min_value > 0.0 && r.min_ratio > 0.0 && std::isfinite(r.max_ratio);
        os << "s=" << s << " ratio in [" << r.min_ratio << ", " << r.max_ratio << "]; ";
    }
    return {ok, os.str()};
}

/// Fraction of random admissible triples satisfying G(x-y) > G(x^lambda-y) > 0 for one plane family.
inline double reflection_pass_rate(int dim, const Hyperplane& kind, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Point> xs(count), ys(count);
    std::vector<Hyperplane> planes;
    planes.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const Hyperplane pl = kind.with_offset(U(rng));
        do {
            xs[k] = detail::random_point(rng, dim, -3.0, 3.0);
            ys[k] = detail::random_point(rng, dim, -3.0, 3.0);
        } while (!(pl.signed_distance(xs[k]) < -1e-3 && pl.signed_distance(ys[k]) < -1e-3) ||
                 anisofrac::detail::diverges_on_axes(Point{xs[k][0] - ys[k][0], xs[k][1] - ys[k][1]}, 0.5));
        planes.push_back(pl);
    }
    std::vector<int> pass(count, 0);
    parallel_for(count, [&](std::size_t k) {
        const ReflectionGap r = kernel_reflection_gap(xs[k], ys[k], planes[k], 0.5);
        pass[k] = r.strict() ? 1 : 0;
    });
    std::size_t total = 0;
    for (int v : pass) total += static_cast<std::size_t>(v);
    return static_cast<double>(total) / static_cast<double>(count);
}

inline Outcome kernel_reflection(std::size_t count = 1000) {
    bool ok = true;
    std::ostringstream os;
    os.precision(6);
    std::uint64_t seed = 21;
    for (int dim : {2, 3}) {
        for (const Hyperplane& kind : {Hyperplane::axis(0, 0.0), Hyperplane::axis(dim - 1, 0.0),
                                       Hyperplane::diagonal(0, 1, 1, 0.0), Hyperplane::diagonal(0, 1, -1, 0.0)}) {
            const double rate = reflection_pass_rate(dim, kind, count, seed++);
            ok = ok && rate == 1.0;
            os << "N=" << dim << ' ' << kind.label() << ' ' << rate << "; ";
        }
    }
    const ReflectionGap ex = kernel_reflection_gap(Point{0.0, 0.0}, Point{-1.0, 0.0}, Hyperplane::axis(0, 1.0), 0.5);
    const bool example = detail::rel(ex.direct, 1.0 / (2.0 * std::numbers::pi)) < 1e-12 &&
                         detail::rel(ex.reflected, 1.0 / (6.0 * std::numbers::pi)) < 1e-12;
    return {ok && example, os.str()};
}

inline Outcome green_table_consistency() {
    const Grid g = make_grid(2, 16, 2.0);
    const PotentialTable t = green_table(g, 0.5, GreenMethod::ClosedHalf);
    double worst = 0.0;
    double homog = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point x = g.point(k);
        if (x[0] == 0.0 && x[1] == 0.0) continue;
        worst = std::max(worst, detail::rel(t.field[k], 1.0 / (2.0 * std::numbers::pi * (std::abs(x[0]) + std::abs(x[1])))));
        const Point y{2.0 * x[0], 2.0 * x[1]};
        if (g.contains(y, 1e-9)) {
            const double gy = t.field.interpolate(y);
            homog = std::max(homog, detail::rel(gy / t.field[k], 0.5));
        }
    }
    return {worst < 1e-12 && homog < 1e-6, detail::cat("closed-form error ", worst, ", homogeneity ", homog)};
}

// ---- solver ----

inline Outcome serrin_rejection() {
    try {
        const Grid g = make_grid(2, 16, 4.0);
        (void)solve_semilinear(detail::params(2, 0.5, Normalization::Probabilistic, 1.5), g, SolveConfig{});
    } catch (const RegimeError& e) {
        const std::string msg = e.what();
        return {msg.find("Serrin") != std::string::npos, msg};
    }
    return {false, "p = 1.5 was accepted"};
}

inline Outcome convolution_direct_sum() {
    const Grid g = make_grid(2, 8, 2.0);
    const PotentialTable K = green_table(kernel_grid_for(g), 0.5, GreenMethod::ClosedHalf);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Field u(g);
    for (auto& v : u.values()) v = U(rng);
    const double p = 2.5;
    const Field fast = convolve_power(u, p, K);
    const Grid& kg = K.grid();
    double worst = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
        const auto ia = g.unflatten(a);
        double acc = 0.0;
        for (std::size_t b = 0; b < g.size(); ++b) {
            const auto ib = g.unflatten(b);
            std::vector<std::size_t> m(2);
            for (int i = 0; i < 2; ++i)
                m[i] = static_cast<std::size_t>(static_cast<long>(ia[i]) - static_cast<long>(ib[i]) +
                                                static_cast<long>(kg.n(i) / 2));
            acc += std::pow(u[b], p) * K.field[kg.flatten(m)];
        }
        acc *= g.cell_volume();
        worst = std::max(worst, std::abs(acc - fast[a]) / std::max(std::abs(acc), 1e-300));
    }
    return {worst < 1e-12, detail::cat("max relative gap to direct summation ", worst)};
}

inline double commutation_error(const PotentialTable& kernel, const Field& u, const Hyperplane& plane, double p) {
    const Field a = convolve_power(reflect_field(u, plane), p, kernel);
    const Field b = reflect_field(convolve_power(u, p, kernel), plane);
    double err = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (!anisofrac::detail::on_first_layer(u.grid(), k)) err = std::max(err, std::abs(a[k] - b[k]));
    return err / std::max(a.max_abs(), 1e-300);
}

/// Largest commutation error of the iteration map with the axis and diagonal reflections through the centre node.
inline double iteration_commutation(const Grid& g, const PotentialTable& kernel, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Field u(g);
    for (auto& v : u.values()) v = U(rng);
    anisofrac::detail::apply_symmetric_mask(u);
    double worst = 0.0;
    for (int i = 0; i < g.dim(); ++i) worst = std::max(worst, commutation_error(kernel, u, Hyperplane::axis(i, 0.0), p));
    for (int sg : {1, -1}) worst = std::max(worst, commutation_error(kernel, u, Hyperplane::diagonal(0, 1, sg, 0.0), p));
    return worst;
}

inline Outcome iteration_commutes_with_reflections() {
    const Grid g = make_grid(2, 32, 4.0);
    const PotentialTable K = green_table(kernel_grid_for(g), 0.5, GreenMethod::ClosedHalf);
    const double e = iteration_commutation(g, K, 3.0, 6);
    return {e < 1e-12, detail::cat("max relative commutation error ", e)};
}

struct SolverStudy {
    SolveResult result;
    SymmetryReport symmetry;
    std::vector<PlaneScan> scans;
    double commutation = 0.0;
    double spectral = 0.0;
    double rescaled = 0.0;
    DecayFit decay;
    double spacing = 0.0;
};

inline SolverStudy solver_study(std::size_t n = 128, double extent = 8.0) {
    const FractionalParams P = detail::params(2, 0.5, Normalization::Probabilistic, 3.0);
    const Grid g = make_grid(2, n, extent);
    SolveConfig cfg;
    const PotentialTable K = solver_kernel(P, g, cfg);
    SolverStudy st;
    st.spacing = g.spacing(0);
    st.result = solve_semilinear(P, g, cfg, K);
    st.commutation = iteration_commutation(g, K, P.p, 7);
    const Point centre(2, 0.0);
    st.symmetry = symmetry_report(st.result.field, centre);
    for (int i = 0; i < 2; ++i) {
        const Hyperplane kind = Hyperplane::axis(i, 0.0);
        st.scans.push_back(moving_plane_scan(st.result.field, kind, scan_offsets(g, kind, 25)));
    }
    const Field scaled = scaled_solution(st.result);
    st.spectral = spectral_residual(scaled, P);
    const Field r = rescale_solution(scaled, 2.0, P);
    const PotentialTable K2 = solver_kernel(P, r.grid(), cfg);
    st.rescaled = convolution_residual(r, P.p, K2);
    st.decay = decay_fit(st.result.field, P);
    return st;
}

inline Outcome solver_convergence_and_symmetry() {
    const SolverStudy st = solver_study();
    const SolveResult& r = st.result;
    bool scans_ok = true;
    for (const auto& sc : st.scans)
        scans_ok = scans_ok && sc.critical_lambda && std::abs(*sc.critical_lambda) <= st.spacing;
    const double axis = st.symmetry.max_reflection_residual();
    const bool ok = r.converged && r.final_residual() < 1e-6 && st.commutation < 1e-12 &&
                    st.symmetry.radial_deviation > 100.0 * axis && scans_ok;
    return {ok, detail::cat("converged=", r.converged, " after ", r.iterations, " iterations, residual ",
                            r.final_residual(), ", commutation ", st.commutation, ", radial deviation ",
                            st.symmetry.radial_deviation, " vs reflection residual ", axis, ", spectral residual ",
                            st.spectral, ", rescaled residual ", st.rescaled, ", decay exponent ",
                            st.decay.exponent)};
}

inline Outcome solver_cross_formulation() {
    const SolverStudy st = solver_study();
    const double bar = 50.0 * SolveConfig{}.tol_residual;
    return {st.spectral < bar, detail::cat("spectral residual ", st.spectral, " against ", bar)};
}

inline Outcome solver_scaling_family() {
    const SolverStudy st = solver_study();
    const double bar = 10.0 * st.result.final_residual();
    return {st.rescaled <= bar, detail::cat("rescaled residual ", st.rescaled, " against ", bar)};
}

inline Outcome symmetry_report_profiles() {
    const Grid g = make_grid(2, 64, 4.0);
    const Field aniso = sample_function([](std::span<const double> x) { return std::exp(-std::abs(x[0]) - std::abs(x[1])); }, g);
    const Field radial = sample_function(detail::gaussian({0.0, 0.0}), g);
    const SymmetryReport a = symmetry_report(aniso, Point{0.0, 0.0});
    const SymmetryReport b = symmetry_report(radial, Point{0.0, 0.0});
    const Field shifted = sample_function(detail::gaussian({0.5, 0.0}), g);
    const PlaneScan sc = moving_plane_scan(shifted, Hyperplane::axis(0, 0.0), scan_offsets(g, Hyperplane::axis(0, 0.0), 33));
    const bool ok = a.max_reflection_residual() < 1e-12 && a.radial_deviation > 1e-2 && b.radial_deviation < 1e-12 &&
                    sc.critical_lambda && std::abs(*sc.critical_lambda - 0.5) <= g.spacing(0);
    return {ok, detail::cat("anisotropic radial deviation ", a.radial_deviation, ", radial ", b.radial_deviation,
                            ", shifted critical ", sc.critical_lambda.value_or(NAN))};
}

// ---- test functions ----

inline Outcome test_function_stability() {
    const FractionalParams P = detail::params(2, 0.5);
    bool ok = true;
    std::ostringstream os;
    os.precision(6);
    for (LiouvilleDomain dom : {LiouvilleDomain::WholeSpace, LiouvilleDomain::HalfSpace}) {
        const double a = test_function_bound(dom, P, 16).M;
        const double b = test_function_bound(dom, P, 32).M;
        const double change = std::abs(b - a) / std::abs(b);
        ok = ok && std::isfinite(a) && std::isfinite(b) && change < 0.1;
        os << to_string(dom) << " M " << a << " -> " << b << " (" << change << "); ";
    }
    return {ok, os.str()};
}

// ---- stable processes ----

inline Outcome stable_self_similarity() {
    double least = 1.0;
    for (double s : {0.3, 0.5, 0.8}) least = std::min(least, self_similarity_test(s, 1e-3, 200000, 31).p_value);
    return {least > 0.01, detail::cat("smallest KS p-value ", least)};
}

inline Outcome stable_tail_and_symmetry() {
    const auto v = stable_samples(0.5, 1000000, 41);
    const double hill = hill_tail_index(v);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(v.size());
    const double median = sorted[sorted.size() / 2];
    const double iqr = sorted[3 * sorted.size() / 4] - sorted[sorted.size() / 4];
    const bool ok = std::abs(hill - 1.0) < 0.15 && std::abs(median) < 3.0 * iqr / std::sqrt(n);
    return {ok, detail::cat("tail index ", hill, ", median ", median)};
}

inline Outcome stable_axis_geometry() {
    const AxisConcentration ac = axis_concentration(2, 0.5, 1000000, 43);
    StablePathConfig cfg;
    cfg.n_paths = 100000;
    cfg.horizon = 1e-2;
    cfg.dt = 1e-3;
    cfg.seed = 44;
    const Point x0{0.0, 0.0};
    const PathEnsemble e = simulate_paths(x0, cfg);
    const double corr = sign_correlation(e, x0, 0, 1);
    const bool ok = ac.fraction > 0.95 && std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(cfg.n_paths));
    return {ok, detail::cat("axis-dominated share of large steps ", ac.fraction, ", sign correlation ", corr)};
}

/// Richardson estimates at two step sizes against quadrature; returns the largest |z| score.
inline double generator_z_score(const ScalarFn& u, const Point& x, double s, std::size_t n, std::uint64_t seed,
                                std::span<const double> ts) {
    const double ref = apply_operator(u, x, detail::params(static_cast<int>(x.size()), s), {});
    double worst = 0.0;
    for (double t : ts) {
        const GeneratorEstimate g = richardson_generator(u, x, t, n, s, seed);
        worst = std::max(worst, std::abs(g.estimate - ref) / g.stderr_);
    }
    return worst;
}

inline Outcome stable_generator() {
    const std::vector<double> ts{1e-3, 2e-3};
    const double z = generator_z_score(detail::gaussian({0.0, 0.0}), Point{0.0, 0.0}, 0.5, 1000000, 51, ts);
    return {z < 3.0, detail::cat("largest |estimate - quadrature| / stderr ", z)};
}

inline Outcome stable_generator_family() {
    const std::vector<ScalarFn> fns{
        detail::gaussian({0.0, 0.0}), detail::gaussian({0.4, -0.3}, 0.7),
        [](std::span<const double> x) { return 1.0 / (1.0 + x[0] * x[0] + x[1] * x[1]); },
        [](std::span<const double> x) { return std::exp(-x[0] * x[0]) * std::cos(x[1]) / (1.0 + x[1] * x[1]); },
        whole_space_bump()};
    const std::vector<double> ts{2e-3};
    double worst = 0.0;
    std::uint64_t seed = 60;
    for (double s : {0.4, 0.5, 0.6})
        for (const auto& f : fns) worst = std::max(worst, generator_z_score(f, Point{0.2, -0.1}, s, 200000, seed++, ts));
    // Fifteen comparisons: a 4 sigma bar keeps the family-wise false alarm rate near 1e-3.
    return {worst < 4.0, detail::cat("largest |z| over 15 cases ", worst)};
}

inline Outcome stable_reproducibility() {
    StablePathConfig cfg;
    cfg.n_paths = 5000;
    cfg.horizon = 5e-3;
    cfg.seed = 99;
    const Point x0{0.5, -0.5, 0.0};
    const PathEnsemble a = simulate_paths(x0, cfg);
    const unsigned saved = thread_count();
    set_thread_count(1);
    const PathEnsemble b = simulate_paths(x0, cfg);
    set_thread_count(saved);
    return {a.endpoints == b.endpoints, "same seed, different worker counts"};
}

// ---- registry ----

inline std::vector<Check> all_checks() {
    return {
        {"constants.cs_closed_form", "normalization constant", cs_constant_closed_form},
        {"operator.constant_annihilated", "operator on constants", operator_constant_annihilated},
        {"operator.negative_at_maximum", "operator sign at a strict maximum", operator_gaussian_maximum_negative},
        {"operator.plane_wave_quadrature", "plane-wave eigenrelation", plane_wave_quadrature},
        {"operator.plane_wave_spectral", "plane-wave eigenrelation", plane_wave_spectral},
        {"operator.scaling_law", "dilation scaling law", scaling_law},
        {"operator.power_inequality", "power inequality", power_inequality},
        {"operator.product_rule", "product rule remainder", product_rule_identity},
        {"boundary.constant_signs", "boundary power constant", boundary_constant_signs},
        {"boundary.power_function", "boundary power function", boundary_power_quadrature},
        {"boundary.axis_only_cross_terms", "boundary continuity", boundary_cross_terms_axis_only},
        {"boundary.continuity", "boundary continuity", boundary_continuity},
        {"maximum_principle.narrow_band_tail", "narrow band tail bound", narrow_band_bound_check},
        {"ibp.full_space", "integration by parts", ibp_full_space},
        {"ibp.axis_line", "integration by parts", ibp_axis_line},
        {"ibp.half_space_weighted", "integration by parts", ibp_half_space_weighted},
        {"halfspace.decomposition", "half-space test function", halfspace_decomposition},
        {"oscillatory.closed_forms", "exponential-trigonometric integrals", oscillatory_closed_forms},
        {"oscillatory.positivity", "exponential-trigonometric integrals", oscillatory_positivity},
        {"spectral.symbol_symmetry", "Fourier symbol", symbol_symmetry},
        {"spectral.aniso_norm", "Fourier symbol", aniso_norm_sandwich},
        {"spectral.round_trip", "spectral inversion", spectral_round_trip},
        {"spectral.energy", "spectral inversion", spectral_energy_positive},
        {"spectral.laplacian_limit", "limiting operator", laplacian_limit},
        {"spectral.cross_method", "spectral versus quadrature", cross_method_agreement},
        {"potential.closed_forms", "potential closed forms", green_closed_forms},
        {"potential.nested_reduction", "potential closed forms", green_nested_vs_closed},
        {"potential.homogeneity", "potential homogeneity", [] { return green_homogeneity(); }},
        {"potential.hyperplane_symmetry", "potential symmetry", [] { return green_hyperplane_symmetry(); }},
        {"potential.positivity_bounds", "potential positivity", [] { return green_positivity_and_bounds(); }},
        {"potential.kernel_reflection", "kernel reflection inequality", [] { return kernel_reflection(); }},
        {"potential.table", "potential table", green_table_consistency},
        {"solver.serrin_rejection", "nonexistence range", serrin_rejection},
        {"solver.direct_sum", "free-space convolution", convolution_direct_sum},
        {"solver.commutation", "symmetry of solutions", iteration_commutes_with_reflections},
        {"solver.symmetry_diagnostics", "symmetry of solutions", symmetry_report_profiles},
        {"solver.convergence_symmetry", "symmetry of solutions", solver_convergence_and_symmetry},
        {"solver.cross_formulation", "convolution versus differential form", solver_cross_formulation},
        {"solver.scaling_family", "scaling family", solver_scaling_family},
        {"liouville.test_function_bound", "test-function bound", test_function_stability},
        {"levy.self_similarity", "stable increments", stable_self_similarity},
        {"levy.tail_and_symmetry", "stable increments", stable_tail_and_symmetry},
        {"levy.axis_geometry", "axis-aligned jumps", stable_axis_geometry},
        {"levy.generator", "process generator", stable_generator},
        {"levy.generator_family", "process generator", stable_generator_family},
        {"levy.reproducibility", "process generator", stable_reproducibility},
    };
}

/// Case-sensitive substring match on the check name or topic; an empty pattern selects everything.
inline bool selected(const Check& c, std::string_view pattern) {
    return pattern.empty() || c.name.find(pattern) != std::string::npos || c.topic.find(pattern) != std::string::npos;
}

/// Runs one check, converting exceptions into failures.
inline CheckResult run_check(const Check& c) {
    CheckResult r{c.name, c.topic, false, "", 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Outcome o = c.run();
        r.passed = o.passed;
        r.detail = o.detail;
    } catch (const std::exception& e) {
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline std::vector<CheckResult> run_checks(std::string_view pattern,
                                           const std::function<void(const CheckResult&)>& on_result = {}) {
    std::vector<CheckResult> out;
    for (const Check& c : all_checks()) {
        if (!selected(c, pattern)) continue;
        out.push_back(run_check(c));
        if (on_result) on_result(out.back());
    }
    return out;
}

}  // namespace anisofrac::verify
