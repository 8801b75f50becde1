#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "anisofrac/core.hpp"
#include "anisofrac/oscillatory.hpp"
#include "anisofrac/quadrature.hpp"

namespace anisofrac {

/// Model for u(x +- t e_i) beyond the truncation radius T.
enum class FarField {
    PowerLaw,  ///< u(x +- t) ~ u(x +- T) (T/t)^beta with beta = tail_decay_exponent
    PeriodicMean,  ///< periodic far field replaced by its mean over one period ending at T
};

struct QuadratureConfig {
    double inner_cutoff = 0.05;
    double tail_limit = 1.0e4;
    int nodes_core = 16;
    int nodes_tail = 16;
    double tail_decay_exponent = 0.0;
    FarField far_field = FarField::PowerLaw;
    /// Panel width cap near the evaluation point.
    double max_panel_width = 0.25;
    /// Additional panel width allowed per unit distance (0 keeps panels uniform).
    double panel_growth = 0.25;
    /// Smallest panel next to a kink, relative to the kink offset.
    double kink_resolution = 1e-12;
    /// Period of the far field under FarField::PeriodicMean.
    double far_field_period = 1.0;

    void validate() const {
        if (!(inner_cutoff > 0.0) || !(tail_limit > inner_cutoff))
            throw DomainError("quadrature config: need 0 < inner_cutoff < tail_limit");
        if (nodes_core < 8 || nodes_tail < 8) throw DomainError("quadrature config: node counts must be >= 8");
        if (!(max_panel_width > 0.0) || panel_growth < 0.0) throw DomainError("quadrature config: bad panel widths");
        if (!(kink_resolution > 0.0) || kink_resolution >= 0.5) throw DomainError("quadrature config: bad kink resolution");
        if (far_field == FarField::PeriodicMean && !(far_field_period > 0.0 && far_field_period < tail_limit))
            throw DomainError("quadrature config: far_field_period must lie in (0, tail_limit)");
    }

    /// Settings for inputs periodic along every axis with the given period.
    static QuadratureConfig periodic(double period = 1.0, double tail = 20.0) {
        QuadratureConfig c;
        c.tail_limit = tail;
        c.far_field = FarField::PeriodicMean;
        c.far_field_period = period;
        c.panel_growth = 0.0;
        c.max_panel_width = 0.125;
        return c;
    }
};

/// Offsets t > 0 along each axis where u(x +- t e_i) is not smooth.
using KinkMap = std::vector<std::vector<double>>;

namespace detail {

inline void check_s(double s) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("s must lie in (0,1)");
}

/// Integral over (0, T] of e(t) / t^{1+2s} for an even second-difference-type e(t) = O(t^2).
template <class E>
double integrate_even(E&& e, double s, const QuadratureConfig& cfg, const std::vector<double>& kinks) {
    double core = cfg.inner_cutoff;
    for (double k : kinks) {
        if (k <= 0.0) throw DomainError("kink offsets must be positive");
        core = std::min(core, 0.5 * k);
    }
    const double q = 2.0 - 2.0 * s;
    // Core: substitution v = t^q turns t^{1-2s} dt into dv / q. Below t0 rounding in e(t) swamps the
    // quotient e(t)/t^2, so it is replaced there by A + B t^2 fitted at t0 and 2 t0.
    const double t0 = 1e-2 * core;
    const double v0 = std::pow(t0, q);
    const double v1 = std::pow(core, q);
    const GaussRule& rc = gauss_rule(cfg.nodes_core);
    double core_sum = 0.0;
    for (std::size_t k = 0; k < rc.nodes.size(); ++k) {
        const double v = v0 + 0.5 * (rc.nodes[k] + 1.0) * (v1 - v0);
        const double t = std::pow(v, 1.0 / q);
        core_sum += 0.5 * rc.weights[k] * e(t) / (t * t);
    }
    const double q0 = e(t0) / (t0 * t0);
    const double B = (e(2.0 * t0) / (4.0 * t0 * t0) - q0) / (3.0 * t0 * t0);
    const double A = q0 - B * t0 * t0;
    core_sum = (core_sum * (v1 - v0) + A * v0) / q + B * v0 * t0 * t0 / (q + 2.0);

    std::vector<GradePoint> grades{{core, core}};
    for (double k : kinks) grades.push_back({k, std::max(k * cfg.kink_resolution, 1e-300)});
    const PanelLayout layout = graded_panels(core, cfg.tail_limit, grades, cfg.max_panel_width, cfg.panel_growth);
    const GaussRule& rt = gauss_rule(cfg.nodes_tail);
    const double middle =
        composite_gauss([&](double t) { return e(t) / std::pow(t, 1.0 + 2.0 * s); }, layout, rt);
    return core_sum + middle;
}

/// Contribution beyond T. c_loc is the constant part of e(t); the rest of e is
/// modeled by the configured far field.
template <class E>
double even_tail(double c_loc, E&& e, double s, const QuadratureConfig& cfg) {
    const double T = cfg.tail_limit;
    const double kernel_mass = 1.0 / (2.0 * s * std::pow(T, 2.0 * s));
    if (cfg.far_field == FarField::PeriodicMean) {
        const double P = cfg.far_field_period;
        const GaussRule& r = gauss_rule(cfg.nodes_tail);
        const double mean = gauss_panel([&](double t) { return e(t) - c_loc; }, T - P, T, r) / P;
        return (c_loc + mean) * kernel_mass;
    }
    const double beta = cfg.tail_decay_exponent;
    if (!(beta + 2.0 * s > 0.0)) throw DomainError("tail_decay_exponent must exceed -2s");
    return c_loc * kernel_mass + (e(T) - c_loc) * std::pow(T, -2.0 * s) / (beta + 2.0 * s);
}

inline const std::vector<double>& kinks_for(const KinkMap& kinks, int axis) {
    static const std::vector<double> none;
    return axis < static_cast<int>(kinks.size()) ? kinks[axis] : none;
}

}  // namespace detail

/// Reciprocal of the integral of (1 - cos x)/|x|^{1+2s} over R.
inline double cs_constant(double s) {
    detail::check_s(s);
    // [0,1]: termwise integration of the cosine series.
    double head = 0.0;
    double fact = 1.0;
    for (int k = 1; k < 40; ++k) {
        fact *= (2.0 * k - 1.0) * (2.0 * k);
        const double term = 1.0 / (fact * (2.0 * k - 2.0 * s));
        head += (k % 2 == 1) ? term : -term;
        if (term < 1e-20) break;
    }
    // [1,inf): algebraic part exactly, cosine part by the alternating-segment integrator.
    const double osc = oscillatory_integral([s](double t) { return std::pow(t, -1.0 - 2.0 * s); }, 1.0,
                                            TrigKind::Cos, 1.0, 1.0);
    const double half_line = head + 1.0 / (2.0 * s) - osc;
    return 1.0 / (2.0 * half_line);
}

/// Prefactor K such that I_i u = K * int_0^inf (u(x+t)+u(x-t)-2u(x))/t^{1+2s} dt.
inline double kernel_prefactor(double s, Normalization n) {
    return n == Normalization::Probabilistic ? cs_constant(s) : 2.0;
}

namespace detail {

/// Caches the prefactor for a parameter set so inner loops avoid recomputing C_s.
struct Prefactor {
    double s = -1.0;
    Normalization n = Normalization::Plain;
    double value = 0.0;

    double get(double s_in, Normalization n_in) {
        if (s_in != s || n_in != n) {
            value = kernel_prefactor(s_in, n_in);
            s = s_in;
            n = n_in;
        }
        return value;
    }
};

inline double prefactor(const FractionalParams& params) {
    thread_local Prefactor cache;
    return cache.get(params.s, params.normalization);
}

}  // namespace detail

/// Signed one-axis operator I_i u(x); the positive operator (-d_ii)^s u equals its negative.
inline double apply_1d_fractional(const ScalarFn& u, std::span<const double> x, int axis,
                                  const FractionalParams& params, const QuadratureConfig& cfg,
                                  const std::vector<double>& kinks = {}) {
    detail::check_s(params.s);
    cfg.validate();
    if (axis < 0 || axis >= static_cast<int>(x.size())) throw DomainError("axis index out of range");
    const double u0 = u(x);
    if (!std::isfinite(u0)) throw NumericalError("apply_1d_fractional: non-finite u(x)");
    Point y(x.begin(), x.end());
    const double xi = x[axis];
    auto e = [&](double t) {
        y[axis] = xi + t;
        const double up = u(y);
        y[axis] = xi - t;
        const double um = u(y);
        return up + um - 2.0 * u0;
    };
    const double body = detail::integrate_even(e, params.s, cfg, kinks);
    const double tail = detail::even_tail(-2.0 * u0, e, params.s, cfg);
    const double out = detail::prefactor(params) * (body + tail);
    if (!std::isfinite(out)) throw NumericalError("apply_1d_fractional: non-finite result");
    return out;
}

/// Sum over axes of apply_1d_fractional.
inline double apply_operator(const ScalarFn& u, std::span<const double> x, const FractionalParams& params,
                             const QuadratureConfig& cfg, const KinkMap& kinks = {}) {
    double acc = 0.0;
    for (int i = 0; i < static_cast<int>(x.size()); ++i)
        acc += apply_1d_fractional(u, x, i, params, cfg, detail::kinks_for(kinks, i));
    return acc;
}

namespace detail {

/// The field along the line through x parallel to `axis`: Catmull-Rom cubic between nodes inside the
/// box, the decay model outside. The C^1 profile keeps the second difference O(t^2) at nodes, where
/// multilinear interpolation would leave an O(|t|) kink.
inline ScalarFn axis_line_function(const Field& f, std::span<const double> x, int axis, double decay_exponent) {
    const Grid& g = f.grid();
    const ScalarFn outside = field_function(f, decay_exponent);
    const std::size_t n = g.n(axis);
    std::vector<double> v(n + 3);
    Point y(x.begin(), x.end());
    for (std::size_t k = 0; k < n; ++k) {
        y[axis] = g.coord(axis, k);
        v[k + 1] = outside(y);
    }
    v[0] = 2.0 * v[1] - v[2];
    v[n + 1] = 2.0 * v[n] - v[n - 1];
    v[n + 2] = 2.0 * v[n + 1] - v[n];
    const double lo = -g.extent(axis);
    const double hi = g.upper(axis);
    const double h = g.spacing(axis);
    return [v = std::move(v), outside, axis, lo, hi, h, n](std::span<const double> p) {
        const double c = p[axis];
        if (c < lo || c > hi) return outside(p);
        const double u = (c - lo) / h;
        auto k = static_cast<std::size_t>(u);
        if (k > n - 2) k = n - 2;
        const double t = u - static_cast<double>(k);
        const double a = v[k], b = v[k + 1], d = v[k + 2], e = v[k + 3];
        return 0.5 * (2.0 * b + (d - a) * t + (2.0 * a - 5.0 * b + 4.0 * d - e) * t * t +
                      (3.0 * b - a - 3.0 * d + e) * t * t * t);
    };
}

}  // namespace detail

/// Operator applied to a sampled field, interpolated by cubics along axis lines and
/// extended beyond the box by the configured decay exponent.
inline double apply_operator(const Field& u, std::span<const double> x, const FractionalParams& params,
                             const QuadratureConfig& cfg) {
    if (static_cast<int>(x.size()) != u.grid().dim()) throw DomainError("apply_operator: point dimension differs from field");
    double acc = 0.0;
    for (int i = 0; i < static_cast<int>(x.size()); ++i)
        acc += apply_1d_fractional(detail::axis_line_function(u, x, i, cfg.tail_decay_exponent), x, i, params, cfg);
    return acc;
}

/// One-axis product remainder I_i[g,h](x).
inline double product_remainder_axis(const ScalarFn& g, const ScalarFn& h, std::span<const double> x, int axis,
                                     const FractionalParams& params, const QuadratureConfig& cfg,
                                     const std::vector<double>& kinks = {}) {
    detail::check_s(params.s);
    cfg.validate();
    const double g0 = g(x);
    const double h0 = h(x);
    Point y(x.begin(), x.end());
    const double xi = x[axis];
    auto e = [&](double t) {
        y[axis] = xi + t;
        const double ap = (g(y) - g0) * (h(y) - h0);
        y[axis] = xi - t;
        const double am = (g(y) - g0) * (h(y) - h0);
        return ap + am;
    };
    const double body = detail::integrate_even(e, params.s, cfg, kinks);
    const double tail = detail::even_tail(2.0 * g0 * h0, e, params.s, cfg);
    return detail::prefactor(params) * (body + tail);
}

/// Remainder I[g,h] in I(gh) = g I h + h I g + I[g,h].
inline double product_remainder(const ScalarFn& g, const ScalarFn& h, std::span<const double> x,
                                const FractionalParams& params, const QuadratureConfig& cfg,
                                const KinkMap& kinks = {}) {
    double acc = 0.0;
    for (int i = 0; i < static_cast<int>(x.size()); ++i)
        acc += product_remainder_axis(g, h, x, i, params, cfg, detail::kinks_for(kinks, i));
    return acc;
}

/// Boundary constant: int_R ((1+r)_+^a + (1-r)_+^a - 2)/|r|^{1+2s} dr, no normalization factor.
inline double c_alpha(double alpha, double s) {
    detail::check_s(s);
    if (!(alpha > 0.0 && alpha < 2.0 * s)) throw DomainError("c_alpha: alpha must lie in (0, 2s)");
    QuadratureConfig cfg;
    cfg.tail_limit = 4.0;
    cfg.inner_cutoff = 0.25;
    cfg.nodes_core = 24;
    cfg.nodes_tail = 24;
    cfg.max_panel_width = 0.25;
    cfg.panel_growth = 0.0;
    auto e = [alpha](double r) {
        const double lo = r < 1.0 ? std::pow(1.0 - r, alpha) : 0.0;
        return std::pow(1.0 + r, alpha) + lo - 2.0;
    };
    const double body = detail::integrate_even(e, s, cfg, {1.0});
    // Beyond R: binomial expansion of (1+r)^a = sum_k C(a,k) r^{a-k}, integrated termwise.
    const double R = cfg.tail_limit;
    double tail = -2.0 / (2.0 * s * std::pow(R, 2.0 * s));
    double binom = 1.0;
    for (int k = 0; k < 200; ++k) {
        if (k > 0) binom *= (alpha - (k - 1)) / k;
        const double term = binom * std::pow(R, alpha - k - 2.0 * s) / (2.0 * s + k - alpha);
        tail += term;
        if (std::abs(term) < 1e-20) break;
    }
    return 2.0 * (body + tail);
}

/// Integral over [0, inf) of t^m exp(-a t^{2s}) trig(b t).
inline double stable_moment_integral(double a, double b, double s, TrigKind kind, int m = 0) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("stable_cosine_integral: a must be positive");
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("stable_cosine_integral: s must lie in (0,1]");
    if (m < 0) throw DomainError("stable_moment_integral: negative moment");
    if (b == 0.0) {
        if (kind == TrigKind::Sin) return 0.0;
        const double e = (m + 1.0) / (2.0 * s);
        return std::tgamma(e) / (2.0 * s) * std::pow(a, -e);
    }
    const double sign = (kind == TrigKind::Sin && b < 0.0) ? -1.0 : 1.0;
    const double babs = std::abs(b);
    const double scale = std::pow(a, -1.0 / (2.0 * s));
    auto env = [a, s, m](double t) { return (m == 0 ? 1.0 : std::pow(t, m)) * std::exp(-a * std::pow(t, 2.0 * s)); };
    return sign * oscillatory_integral(env, babs, kind, 0.0, scale, true);
}

/// Integral over [0, inf) of exp(-a t^{2s}) sin(b t) or cos(b t).
inline double stable_cosine_integral(double a, double b, double s, TrigKind kind) {
    return stable_moment_integral(a, b, s, kind, 0);
}

/// Numerical value of int_lambda^inf dt / |t - z1|^{1+2s} for z1 < lambda.
inline double narrow_band_tail(double lambda, double z1, double s) {
    detail::check_s(s);
    if (!(z1 < lambda)) throw DomainError("narrow_band_tail: need z1 < lambda");
    const double d0 = lambda - z1;
    const double T = 1e6 * std::max(d0, 1.0);
    const std::vector<GradePoint> grades{{lambda, 0.05 * d0}};
    const PanelLayout layout = graded_panels(lambda, lambda + T, grades, d0, 0.5);
    const double body = composite_gauss([&](double t) { return std::pow(t - z1, -1.0 - 2.0 * s); }, layout,
                                        gauss_rule(16));
    // Beyond lambda + T the integrand is a pure power; its integral is elementary.
    const double far = std::pow(lambda + T - z1, -2.0 * s) / (2.0 * s);
    return body + far;
}

/// Lower bound 1/(2s d^{2s}) for the narrow-band tail when lambda - z1 <= d.
inline double narrow_band_bound(double d, double s) { return 1.0 / (2.0 * s * std::pow(d, 2.0 * s)); }

/// Integration domain for the integration-by-parts residuals.
struct IbpDomain {
    double half_width = 5.0;
    int panels_per_axis = 16;
    int order = 8;
};

struct IbpMode {
    enum class Kind { FullSpace, AxisLine, HalfSpaceWeighted };
    Kind kind = Kind::FullSpace;
    Point x_perp;
    double alpha = 0.0;

    static IbpMode full_space() { return {}; }
    static IbpMode axis_line(Point x_perp) { return {Kind::AxisLine, std::move(x_perp), 0.0}; }
    static IbpMode half_space(double alpha) { return {Kind::HalfSpaceWeighted, {}, alpha}; }
};

/// Both sides of the symmetric pairing: int u I_i(test) and int (test) I_i u.
struct IbpSides {
    double u_of_test = 0.0;
    double test_of_u = 0.0;
    [[nodiscard]] double residual() const { return std::abs(u_of_test - test_of_u); }
};

inline IbpSides ibp_sides(const ScalarFn& u, const ScalarFn& phi, int axis, const FractionalParams& params,
                          const QuadratureConfig& cfg, const IbpMode& mode, const IbpDomain& dom = {}) {
    const int d = params.dim;
    if (axis < 0 || axis >= d) throw DomainError("ibp: axis out of range");
    const double W = dom.half_width;
    ScalarFn test = phi;
    std::vector<AxisNodes> axes;
    const bool half = mode.kind == IbpMode::Kind::HalfSpaceWeighted;
    if (half) {
        const double lo = std::max(2.0 * params.s - 1.0, 0.0);
        if (!(mode.alpha > lo && mode.alpha < 2.0 * params.s))
            throw DomainError("ibp: weighted mode needs (2s-1)_+ < alpha < 2s");
        const double alpha = mode.alpha;
        test = [phi, alpha, d](std::span<const double> y) {
            const double yn = y[d - 1];
            return yn > 0.0 ? std::pow(yn, alpha) * phi(y) : 0.0;
        };
    }
    if (mode.kind == IbpMode::Kind::AxisLine) {
        if (static_cast<int>(mode.x_perp.size()) != d) throw DomainError("ibp: x_perp must have dim entries");
        axes.push_back(uniform_axis_nodes(-W, W, dom.panels_per_axis, dom.order));
    } else {
        for (int i = 0; i < d; ++i) {
            if (half && i == d - 1) {
                const std::vector<GradePoint> grades{{0.0, 1e-6}};
                axes.push_back(axis_nodes(graded_panels(0.0, W, grades, 2.0 * W / dom.panels_per_axis, 0.0),
                                          gauss_rule(dom.order)));
            } else {
                axes.push_back(uniform_axis_nodes(-W, W, dom.panels_per_axis, dom.order));
            }
        }
    }
    auto embed = [&](std::span<const double> q) {
        if (mode.kind != IbpMode::Kind::AxisLine) return Point(q.begin(), q.end());
        Point x = mode.x_perp;
        x[axis] = q[0];
        return x;
    };
    auto kinks_at = [&](std::span<const double> x) {
        std::vector<double> k;
        if (half && axis == d - 1 && x[d - 1] > 0.0) k.push_back(x[d - 1]);
        return k;
    };
    IbpSides out;
    out.u_of_test = tensor_integrate(axes, [&](std::span<const double> q) {
        const Point x = embed(q);
        const double uv = u(x);
        if (uv == 0.0) return 0.0;
        return uv * apply_1d_fractional(test, x, axis, params, cfg, kinks_at(x));
    });
    out.test_of_u = tensor_integrate(axes, [&](std::span<const double> q) {
        const Point x = embed(q);
        const double tv = test(x);
        if (tv == 0.0) return 0.0;
        return tv * apply_1d_fractional(u, x, axis, params, cfg, kinks_at(x));
    });
    return out;
}

/// |int u I_i(test) - int (test) I_i u| over the truncated domain.
inline double ibp_residual(const ScalarFn& u, const ScalarFn& phi, int axis, const FractionalParams& params,
                           const QuadratureConfig& cfg, const IbpMode& mode, const IbpDomain& dom = {}) {
    return ibp_sides(u, phi, axis, params, cfg, mode, dom).residual();
}

/// Lifted test function (x_N)_+^alpha phi(x).
inline ScalarFn lift(const ScalarFn& phi, double alpha, int dim) {
    return [phi, alpha, dim](std::span<const double> y) {
        const double yn = y[dim - 1];
        return yn > 0.0 ? std::pow(yn, alpha) * phi(y) : 0.0;
    };
}

/// Boundary power function (x_N)_+^alpha.
inline ScalarFn boundary_power(double alpha, int dim) {
    return [alpha, dim](std::span<const double> y) {
        const double yn = y[dim - 1];
        return yn > 0.0 ? std::pow(yn, alpha) : 0.0;
    };
}

/// Operator of (x_N)_+^alpha phi evaluated directly and through the product decomposition.
struct HalfspaceApply {
    double direct = 0.0;
    double decomposed = 0.0;
    double boundary_term = 0.0;
    double interior_term = 0.0;
    double cross_term = 0.0;
    [[nodiscard]] double gap() const { return std::abs(direct - decomposed); }
};

inline HalfspaceApply halfspace_test_decomposition(double alpha, const ScalarFn& phi, std::span<const double> x,
                                                   const FractionalParams& params, const QuadratureConfig& cfg) {
    const double s = params.s;
    const int d = static_cast<int>(x.size());
    if (!(alpha >= s && alpha < std::min(1.0, 2.0 * s))) throw DomainError("halfspace test: need s <= alpha < min(1,2s)");
    const double xn = x[d - 1];
    if (!(xn > 0.0)) throw DomainError("halfspace test: x must lie in the open upper half-space");
    KinkMap kinks(d);
    kinks[d - 1] = {xn};
    const ScalarFn phi_a = lift(phi, alpha, d);
    const ScalarFn omega = boundary_power(alpha, d);
    HalfspaceApply r;
    r.direct = apply_operator(phi_a, x, params, cfg, kinks);
    const double half_k = 0.5 * detail::prefactor(params);
    r.boundary_term = half_k * c_alpha(alpha, s) * phi(x) * std::pow(xn, alpha - 2.0 * s);
    r.interior_term = std::pow(xn, alpha) * apply_operator(phi, x, params, cfg);
    // The remainder inherits the growth t^alpha of the boundary power far from x.
    QuadratureConfig growing = cfg;
    growing.far_field = FarField::PowerLaw;
    growing.tail_decay_exponent = -alpha;
    growing.tail_limit = std::max(cfg.tail_limit, 1e8);
    r.cross_term = product_remainder_axis(omega, phi, x, d - 1, params, growing, {xn});
    r.decomposed = r.boundary_term + r.interior_term + r.cross_term;
    return r;
}

/// Direct value of the operator on (x_N)_+^alpha phi, checked against the decomposition.
inline double halfspace_test_apply(double alpha, const ScalarFn& phi, std::span<const double> x,
                                   const FractionalParams& params, const QuadratureConfig& cfg,
                                   double tolerance = 1e-4) {
    const HalfspaceApply r = halfspace_test_decomposition(alpha, phi, x, params, cfg);
    if (r.gap() > tolerance * std::max(1.0, std::abs(r.direct)))
        throw NumericalError("halfspace test: direct and decomposed evaluations disagree by " + std::to_string(r.gap()));
    return r.direct;
}

}  // namespace anisofrac
