#pragma once

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "anisofrac/core.hpp"
#include "anisofrac/quadrature.hpp"
#include "anisofrac/singular_quadrature.hpp"
#include "anisofrac/spectral.hpp"

namespace anisofrac {

enum class GreenMethod { ClosedHalf, ClosedNewtonian, NestedQuadrature, SpectralInverse };
enum class CellPolicy { AnalyticCellAverage, RadialRegularize };

inline const char* to_string(GreenMethod m) {
    switch (m) {
        case GreenMethod::ClosedHalf: return "closed_half";
        case GreenMethod::ClosedNewtonian: return "closed_newtonian";
        case GreenMethod::NestedQuadrature: return "nested_quadrature";
        case GreenMethod::SpectralInverse: return "spectral_inverse";
    }
    return "unknown";
}

inline const char* to_string(CellPolicy p) {
    return p == CellPolicy::AnalyticCellAverage ? "analytic_cell_average" : "radial_regularize";
}

inline GreenMethod parse_green_method(const std::string& s) {
    if (s == "closed_half") return GreenMethod::ClosedHalf;
    if (s == "closed_newtonian") return GreenMethod::ClosedNewtonian;
    if (s == "nested_quadrature") return GreenMethod::NestedQuadrature;
    if (s == "spectral_inverse") return GreenMethod::SpectralInverse;
    throw ConfigError("unknown green method: " + s);
}

inline CellPolicy parse_cell_policy(const std::string& s) {
    if (s == "analytic_cell_average") return CellPolicy::AnalyticCellAverage;
    if (s == "radial_regularize") return CellPolicy::RadialRegularize;
    throw ConfigError("unknown singular cell policy: " + s);
}

/// Profile F_s(b) = int_0^inf exp(-t^{2s}) cos(b t) dt.
inline double f_profile(double b, double s) { return stable_cosine_integral(1.0, b, s, TrigKind::Cos); }

/// Large-b expansion sum_k (-1)^{k+1} Gamma(2sk+1)/k! sin(pi s k) b^{-2sk-1},
/// truncated at its smallest term.
inline double f_profile_asymptotic(double b, double s) {
    double acc = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    double kfact = 1.0;
    for (int k = 1; k <= 40; ++k) {
        kfact *= k;
        const double mag = std::exp(std::lgamma(2.0 * s * k + 1.0) - std::log(kfact) - (2.0 * s * k + 1.0) * std::log(b));
        if (mag > prev) break;
        prev = mag;
        const double term = mag * std::sin(std::numbers::pi * s * k);
        acc += (k % 2 == 1) ? term : -term;
        if (mag < 1e-18 * std::abs(acc)) break;
    }
    return acc;
}

/// Cubic-Hermite table of F_s on a log(1+b) grid with the asymptotic expansion beyond b_max.
class FProfileTable {
public:
    FProfileTable(double s, double b_max = 64.0, std::size_t points = 257) : s_(s), b_max_(b_max) {
        if (!(s > 0.0 && s <= 1.0)) throw DomainError("f_profile table: s must lie in (0,1]");
        z_max_ = std::log1p(b_max);
        dz_ = z_max_ / static_cast<double>(points - 1);
        f_.resize(points);
        dfdz_.resize(points);
        parallel_for(points, [&](std::size_t k) {
            const double b = std::expm1(dz_ * static_cast<double>(k));
            f_[k] = f_profile(b, s);
            const double dfdb = -stable_moment_integral(1.0, b, s, TrigKind::Sin, 1);
            dfdz_[k] = dfdb * (1.0 + b);
        });
        // Decay exponent measured from the tabulated values over [b_max/2, b_max].
        const double f_hi = f_.back();
        const double f_mid = eval_table(std::log1p(0.5 * b_max));
        if (f_hi > 0.0 && f_mid > 0.0 && f_hi > 1e-14) {
            fitted_exponent_ = -std::log(f_hi / f_mid) / std::log(b_max / (0.5 * b_max));
        }
        tail_offset_ = f_.back() - f_profile_asymptotic(b_max, s);
    }

    [[nodiscard]] double operator()(double b) const {
        b = std::abs(b);
        if (b >= b_max_) {
            if (s_ >= 1.0) return 0.0;
            return f_profile_asymptotic(b, s_);
        }
        return eval_table(std::log1p(b));
    }

    [[nodiscard]] double s() const { return s_; }
    [[nodiscard]] double b_max() const { return b_max_; }
    /// Power-law decay exponent fitted from the table (NaN when the tail is negligible).
    [[nodiscard]] double fitted_exponent() const { return fitted_exponent_; }
    /// Mismatch between table and asymptotic expansion at b_max.
    [[nodiscard]] double tail_offset() const { return tail_offset_; }

private:
    [[nodiscard]] double eval_table(double z) const {
        const auto last = f_.size() - 1;
        double u = z / dz_;
        auto k = static_cast<std::size_t>(u);
        if (k >= last) k = last - 1;
        const double t = u - static_cast<double>(k);
        const double t2 = t * t;
        const double t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1;
        const double h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2;
        const double h11 = t3 - t2;
        return h00 * f_[k] + h10 * dz_ * dfdz_[k] + h01 * f_[k + 1] + h11 * dz_ * dfdz_[k + 1];
    }

    double s_;
    double b_max_;
    double z_max_ = 0.0;
    double dz_ = 0.0;
    std::vector<double> f_;
    std::vector<double> dfdz_;
    double fitted_exponent_ = std::numeric_limits<double>::quiet_NaN();
    double tail_offset_ = 0.0;
};

/// Shared read-only table per s.
inline std::shared_ptr<const FProfileTable> f_profile_table(double s) {
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const FProfileTable>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(s);
        if (it != cache.end()) return it->second;
    }
    auto table = std::make_shared<const FProfileTable>(s);
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(s, std::move(table)).first->second;
}

namespace detail {

inline void check_potential_params(std::span<const double> x, double s, int dim) {
    if (dim < 2) throw DomainError("potential: dim must be >= 2");
    if (static_cast<int>(x.size()) != dim) throw DomainError("potential: point dimension mismatch");
    if (!(s > 0.0 && s <= 1.0)) throw DomainError("potential: s must lie in (0,1]");
    if (!(2.0 * s < dim)) throw DomainError("potential: requires 2s < N");
    bool zero = true;
    for (double v : x) zero = zero && v == 0.0;
    if (zero) throw DomainError("potential: x must be nonzero");
}

/// Whether the outer integral diverges at y -> 0 because too many coordinates vanish.
inline bool diverges_on_axes(std::span<const double> x, double s) {
    const int n = static_cast<int>(x.size());
    int k = 0;
    for (double v : x) k += v == 0.0;
    return n - k - k / (2.0 * s) <= -1.0;
}

/// pi^{-N} int_0^inf prod_i kernel(y, |x_i|) dy via y = c tan(theta).
template <class Factor>
double outer_integral(std::span<const double> x, double s, Factor&& factor) {
    const int n = static_cast<int>(x.size());
    double c = 0.0;
    for (double v : x) c += std::pow(std::abs(v), 2.0 * s);
    auto integrand = [&](double theta) {
        const double y = c * std::tan(theta);
        // Below 1e-150 c the factors over- and underflow; the integrable piece dropped there is negligible.
        if (!(y > 1e-150 * c) || !std::isfinite(y)) return 0.0;
        double prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= factor(y, std::abs(x[i]));
        const double sec = 1.0 / std::cos(theta);
        return prod * c * sec * sec;
    };
    const double v = tanh_sinh_integrator().integrate(integrand, 0.0, std::numbers::pi / 2.0, 1e-13);
    return v / std::pow(std::numbers::pi, n);
}

}  // namespace detail

/// Point estimate of the potential from truncated torus series at two box sizes.
struct SpectralGreenEstimate {
    double value = 0.0;      ///< periodization-corrected estimate
    double raw_small = 0.0;  ///< torus value at extent L
    double raw_large = 0.0;  ///< torus value at extent 2L
    double periodization_estimate = 0.0;  ///< |value - raw_large|, size of the applied correction
};

struct SpectralGreenOptions {
    double spacing = 0.0;  ///< 0 selects max|x_i| / 4
    std::size_t n = 0;     ///< nodes per axis at the smaller extent; 0 selects a size by dimension
};

inline SpectralGreenEstimate spectral_green_value(std::span<const double> x, double s,
                                                  const SpectralGreenOptions& opt = {}) {
    const int d = static_cast<int>(x.size());
    double xmax = 0.0;
    for (double v : x) xmax = std::max(xmax, std::abs(v));
    const double h = opt.spacing > 0.0 ? opt.spacing : xmax / 4.0;
    std::size_t n = opt.n;
    if (n == 0) n = d == 2 ? 512 : d == 3 ? 64 : 16;
    const double L = 0.5 * h * static_cast<double>(n);
    SpectralGreenEstimate e;
    e.raw_small = periodic_green_at(x, s, L, n);
    e.raw_large = periodic_green_at(x, s, 2.0 * L, 2 * n);
    // The torus offset scales like L^{2s-N}; eliminate it between the two extents.
    const double r = std::pow(2.0, d - 2.0 * s);
    e.value = (r * e.raw_large - e.raw_small) / (r - 1.0);
    e.periodization_estimate = std::abs(e.value - e.raw_large);
    return e;
}

/// Half-order potential by one-dimensional quadrature of pi^{-N} prod_i y / (y^2 + x_i^2) over y > 0.
inline double half_order_product_integral(std::span<const double> x) {
    detail::check_potential_params(x, 0.5, static_cast<int>(x.size()));
    if (detail::diverges_on_axes(x, 0.5)) return std::numeric_limits<double>::infinity();
    return detail::outer_integral(x, 0.5, [](double y, double a) { return y / (y * y + a * a); });
}

/// Green potential G_s(x) for the symbol sum |2 pi xi_i|^{2s}. Returns +inf on
/// coordinate subspaces where the defining integral diverges.
inline double green_value(std::span<const double> x, double s, int dim, GreenMethod method) {
    detail::check_potential_params(x, s, dim);
    const double pi = std::numbers::pi;
    switch (method) {
        case GreenMethod::ClosedHalf: {
            if (s != 0.5) throw DomainError("closed_half method requires s = 1/2");
            if (detail::diverges_on_axes(x, s)) return std::numeric_limits<double>::infinity();
            if (dim == 2) return 1.0 / (2.0 * pi * (std::abs(x[0]) + std::abs(x[1])));
            return half_order_product_integral(x);
        }
        case GreenMethod::ClosedNewtonian: {
            if (s != 1.0 || dim < 3) throw DomainError("closed_newtonian method requires s = 1 and N >= 3");
            double r2 = 0.0;
            for (double v : x) r2 += v * v;
            return std::tgamma(dim / 2.0 - 1.0) / (4.0 * std::pow(pi, dim / 2.0)) * std::pow(r2, 1.0 - dim / 2.0);
        }
        case GreenMethod::NestedQuadrature: {
            if (detail::diverges_on_axes(x, s)) return std::numeric_limits<double>::infinity();
            const auto table = f_profile_table(s);
            const double inv = 1.0 / (2.0 * s);
            return detail::outer_integral(x, s, [&](double y, double a) {
                const double scale = std::pow(y, -inv);
                if (!std::isfinite(scale)) return a > 0.0 ? 0.0 : scale;
                return scale * (*table)(a * scale);
            });
        }
        case GreenMethod::SpectralInverse:
            return spectral_green_value(x, s).value;
    }
    throw DomainError("unknown green method");
}

/// Default exact or quadrature method for (s, dim).
inline GreenMethod default_green_method(double s, int dim) {
    if (s == 0.5) return GreenMethod::ClosedHalf;
    if (s == 1.0 && dim >= 3) return GreenMethod::ClosedNewtonian;
    return GreenMethod::NestedQuadrature;
}

/// Tabulated potential on a grid with a finite origin-cell value.
struct PotentialTable {
    Field field;
    CellPolicy singular_cell_policy = CellPolicy::AnalyticCellAverage;
    double s = 0.5;
    GreenMethod method = GreenMethod::ClosedHalf;

    [[nodiscard]] const Grid& grid() const { return field.grid(); }
};

namespace detail {

/// Integral of |x|_q^{d} over the box prod [-a_i, a_i], q-quasi-norm (q = 2s or 2), using
/// div(x f) = (N + d) f for a degree-d homogeneous f.
inline double homogeneous_box_integral(std::span<const double> a, double q, double degree) {
    const int n = static_cast<int>(a.size());
    auto profile = [q, degree](std::span<const double> y) {
        double acc = 0.0;
        for (double v : y) acc += std::pow(std::abs(v), q);
        return std::pow(acc, degree / q);
    };
    double flux = 0.0;
    for (int i = 0; i < n; ++i) {
        std::vector<AxisNodes> axes;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const std::vector<GradePoint> grades{{0.0, 1e-6 * a[j]}};
            axes.push_back(axis_nodes(graded_panels(-a[j], a[j], grades, a[j], 0.0), gauss_rule(16)));
        }
        const double face = tensor_integrate(axes, [&](std::span<const double> y) {
            Point x(n);
            int k = 0;
            for (int j = 0; j < n; ++j) x[j] = (j == i) ? a[i] : y[k++];
            return profile(x);
        });
        flux += 2.0 * a[i] * face;
    }
    return flux / (n + degree);
}

}  // namespace detail

inline PotentialTable green_table(const Grid& grid, double s, GreenMethod method,
                                  CellPolicy policy = CellPolicy::AnalyticCellAverage) {
    const int d = grid.dim();
    if (d < 2) throw DomainError("green_table: dim must be >= 2");
    for (int i = 0; i < d; ++i)
        if (grid.n(i) % 2 != 0) throw DomainError("green_table: n must be even so the origin is a node");
    PotentialTable t;
    t.field = Field(grid);
    t.s = s;
    t.method = method;
    t.singular_cell_policy = policy;
    std::vector<std::size_t> origin_idx(d);
    for (int i = 0; i < d; ++i) origin_idx[i] = grid.n(i) / 2;
    const std::size_t origin = grid.flatten(origin_idx);
    if (method == GreenMethod::NestedQuadrature) (void)f_profile_table(s);
    auto values = t.field.values();
    parallel_for(grid.size(), [&](std::size_t k) {
        if (k == origin) return;
        const Point x = grid.point(k);
        values[k] = green_value(x, s, d, method);
    });
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (k != origin && !std::isfinite(values[k]))
            throw NumericalError("green_table: potential is infinite on coordinate axes for this (s, N)");
    }
    // Origin cell: fitted constant times the exact cell average of the homogeneous model.
    const double q = policy == CellPolicy::AnalyticCellAverage ? 2.0 * s : 2.0;
    const double degree = 2.0 * s - d;
    double c = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int sgn : {-1, 1}) {
            std::vector<std::size_t> idx = origin_idx;
            idx[i] = static_cast<std::size_t>(static_cast<long>(idx[i]) + sgn);
            const double r = grid.spacing(i);
            c += values[grid.flatten(idx)] * std::pow(r, -degree);
        }
    }
    c /= 2.0 * d;
    std::vector<double> half(d);
    double volume = 1.0;
    for (int i = 0; i < d; ++i) {
        half[i] = 0.5 * grid.spacing(i);
        volume *= grid.spacing(i);
    }
    values[origin] = c * detail::homogeneous_box_integral(half, q, degree) / volume;
    return t;
}

inline void save_potential_table(const PotentialTable& t, const std::string& path) {
    write_field(path, t.field);
    nlohmann::json meta{{"s", t.s},
                        {"method", to_string(t.method)},
                        {"singular_cell_policy", to_string(t.singular_cell_policy)}};
    std::ofstream os(path + ".json");
    if (!os) throw ConfigError("cannot open for writing: " + path + ".json");
    os << meta.dump(2) << '\n';
}

inline PotentialTable load_potential_table(const std::string& path) {
    PotentialTable t;
    t.field = read_field(path);
    std::ifstream is(path + ".json");
    if (!is) throw ConfigError("missing sidecar: " + path + ".json");
    nlohmann::json meta;
    try {
        is >> meta;
        t.s = meta.at("s").get<double>();
        t.method = parse_green_method(meta.at("method").get<std::string>());
        t.singular_cell_policy = parse_cell_policy(meta.at("singular_cell_policy").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad potential sidecar: ") + e.what());
    }
    return t;
}

/// Kernel values at x - y and at reflect(x) - y.
struct ReflectionGap {
    double direct = 0.0;
    double reflected = 0.0;
    [[nodiscard]] bool strict() const { return direct > reflected && reflected > 0.0; }
};

inline ReflectionGap kernel_reflection_gap(std::span<const double> x, std::span<const double> y,
                                           const Hyperplane& plane, double s) {
    if (x.size() != y.size()) throw DomainError("reflection gap: dimension mismatch");
    if (!(plane.signed_distance(x) < 0.0) || !(plane.signed_distance(y) < 0.0))
        throw DomainError("reflection gap: x and y must lie strictly on the negative side of the plane");
    const int d = static_cast<int>(x.size());
    Point diff(d);
    bool same = true;
    for (int i = 0; i < d; ++i) {
        diff[i] = x[i] - y[i];
        same = same && diff[i] == 0.0;
    }
    if (same) throw DomainError("reflection gap: x must differ from y");
    const Point xr = reflect_point(x, plane);
    Point rdiff(d);
    for (int i = 0; i < d; ++i) rdiff[i] = xr[i] - y[i];
    const GreenMethod m = default_green_method(s, d);
    return {green_value(diff, s, d, m), green_value(rdiff, s, d, m)};
}

}  // namespace anisofrac
