#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "anisofrac/core.hpp"
#include "anisofrac/potential.hpp"
#include "anisofrac/spectral.hpp"

namespace anisofrac {

/// Zero-padded linear convolution h^N sum_j f_j K(x_i - x_j) with a fixed tabulated kernel.
///
/// The kernel table must share the field spacing and cover offsets up to (n-1)h on every axis.
class PowerConvolver {
public:
    PowerConvolver(const Grid& field_grid, const PotentialTable& kernel) : grid_(field_grid) {
        const Grid& kg = kernel.grid();
        const int d = grid_.dim();
        if (kg.dim() != d) throw DomainError("convolve_power: kernel dimension differs from field");
        std::vector<std::size_t> padded(d);
        for (int i = 0; i < d; ++i) {
            if (std::abs(kg.spacing(i) - grid_.spacing(i)) > 1e-12 * grid_.spacing(i))
                throw DomainError("convolve_power: kernel spacing differs from field spacing");
            if (kg.n(i) % 2 != 0 || kg.n(i) / 2 < grid_.n(i))
                throw DomainError("convolve_power: kernel table must cover twice the field extent");
            padded[i] = 2 * grid_.n(i);
        }
        fft_ = std::make_unique<detail::RealFft>(padded);
        // Kernel offset m (|m| < n) goes to padded index m mod 2n.
        auto real = fft_->real();
        std::fill(real.begin(), real.end(), 0.0);
        std::size_t total = fft_->real_size();
        std::vector<long> m(d);
        std::vector<std::size_t> kidx(d);
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat;
            bool inside = true;
            for (int i = d - 1; i >= 0; --i) {
                const auto p = static_cast<long>(padded[i]);
                const long q = static_cast<long>(rem % padded[i]);
                rem /= padded[i];
                m[i] = q < p / 2 ? q : q - p;
                const auto n = static_cast<long>(grid_.n(i));
                if (m[i] <= -n || m[i] >= n) inside = false;
                kidx[i] = static_cast<std::size_t>(m[i] + static_cast<long>(kg.n(i) / 2));
            }
            if (inside) real[flat] = kernel.field[kg.flatten(kidx)];
        }
        fft_->forward();
        auto spec = fft_->spectrum();
        kernel_spectrum_.assign(spec.begin(), spec.end());
        cell_ = grid_.cell_volume();
    }

    /// Convolution of (u_+)^p with the kernel; small negative entries from roundoff are clipped.
    [[nodiscard]] Field apply(const Field& u, double p) {
        const int d = grid_.dim();
        if (u.grid().shape() != grid_.shape()) throw DomainError("convolve_power: field grid mismatch");
        for (double v : u.values())
            if (v < -1e-12 || !std::isfinite(v)) throw DomainError("convolve_power: u must be nonnegative and finite");
        auto real = fft_->real();
        std::fill(real.begin(), real.end(), 0.0);
        const auto& padded = fft_->shape();
        for (std::size_t flat = 0; flat < grid_.size(); ++flat) {
            std::size_t rem = flat;
            std::size_t dst = 0;
            std::size_t stride = 1;
            for (int i = d - 1; i >= 0; --i) {
                const std::size_t k = rem % grid_.n(i);
                rem /= grid_.n(i);
                dst += k * stride;
                stride *= padded[i];
            }
            const double v = std::max(u[flat], 0.0);
            real[dst] = p == 1.0 ? v : std::pow(v, p);
        }
        fft_->forward();
        auto spec = fft_->spectrum();
        for (std::size_t q = 0; q < spec.size(); ++q) spec[q] *= kernel_spectrum_[q];
        fft_->backward();
        Field out(grid_);
        for (std::size_t flat = 0; flat < grid_.size(); ++flat) {
            std::size_t rem = flat;
            std::size_t src = 0;
            std::size_t stride = 1;
            for (int i = d - 1; i >= 0; --i) {
                const std::size_t k = rem % grid_.n(i);
                rem /= grid_.n(i);
                src += k * stride;
                stride *= padded[i];
            }
            out[flat] = real[src] * cell_;
        }
        return out;
    }

private:
    Grid grid_;
    std::unique_ptr<detail::RealFft> fft_;
    std::vector<std::complex<double>> kernel_spectrum_;
    double cell_ = 1.0;
};

inline Field convolve_power(const Field& u, double p, const PotentialTable& kernel) {
    PowerConvolver conv(u.grid(), kernel);
    return conv.apply(u, p);
}

/// Kernel grid matching a field grid for linear convolution: twice the nodes and twice the extent.
inline Grid kernel_grid_for(const Grid& g) {
    std::vector<std::size_t> n(g.dim());
    std::vector<double> e(g.dim());
    for (int i = 0; i < g.dim(); ++i) {
        n[i] = 2 * g.n(i);
        e[i] = 2.0 * g.extent(i);
    }
    return Grid(n, e);
}

enum class SolveNormalization { SupToOne, L2ToOne };
enum class InitKind { GaussianBump, AnisotropicBump, FromFile };

struct SolveConfig {
    int max_iters = 500;
    double tol_residual = 1e-6;
    double damping = 0.5;
    SolveNormalization normalization = SolveNormalization::SupToOne;
    InitKind init = InitKind::GaussianBump;
    std::vector<double> axis_weights;  ///< AnisotropicBump: exp(-sum w_i x_i^2)
    double init_width = 1.0;           ///< GaussianBump: exp(-|x|^2 / width^2)
    std::optional<Field> init_field;   ///< FromFile
    double burn_in_residual = 1e-3;    ///< monotonicity is required once the residual first drops below this
    double divergence_factor = 10.0;
    int divergence_window = 50;
    CellPolicy cell_policy = CellPolicy::AnalyticCellAverage;
    std::optional<GreenMethod> method;

    void validate() const {
        if (max_iters < 0) throw ConfigError("max_iters must be >= 0");
        if (!(tol_residual > 0.0)) throw ConfigError("tol_residual must be > 0");
        if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("damping must lie in (0,1]");
        if (!(burn_in_residual > 0.0)) throw ConfigError("burn_in_residual must be > 0");
        if (init == InitKind::FromFile && !init_field) throw ConfigError("init from file requires a field");
        if (!(init_width > 0.0)) throw ConfigError("init_width must be > 0");
    }
};

struct SolveResult {
    Field field;                          ///< normalized profile
    std::vector<double> residual_history;
    double scale_factor = 1.0;            ///< amplitude c: c * field solves u = u^p * G
    double length_scale = 1.0;            ///< lambda with c = lambda^{2s/(p-1)}
    bool converged = false;
    bool monotone_after_burn_in = true;
    int iterations = 0;

    [[nodiscard]] double final_residual() const {
        return residual_history.empty() ? std::numeric_limits<double>::infinity() : residual_history.back();
    }
};

namespace detail {

inline double norm_value(const Field& u, SolveNormalization n) {
    if (n == SolveNormalization::SupToOne) return u.max_abs();
    double acc = 0.0;
    for (double v : u.values()) acc += v * v;
    return std::sqrt(acc * u.grid().cell_volume());
}

inline bool on_first_layer(const Grid& g, std::size_t flat) {
    for (int i = 0; i < g.dim(); ++i) {
        if (flat / g.stride(i) == 0) return true;
        flat %= g.stride(i);
    }
    return false;
}

/// Zeroes the first node layer on every axis so the support is symmetric about the centre node.
inline void apply_symmetric_mask(Field& u) {
    for (std::size_t flat = 0; flat < u.size(); ++flat)
        if (on_first_layer(u.grid(), flat)) u[flat] = 0.0;
}

inline Field initial_field(const Grid& g, const SolveConfig& cfg) {
    Field u(g);
    switch (cfg.init) {
        case InitKind::GaussianBump: {
            const double w2 = cfg.init_width * cfg.init_width;
            u = sample_function(
                [w2](std::span<const double> x) {
                    double r2 = 0.0;
                    for (double v : x) r2 += v * v;
                    return std::exp(-r2 / w2);
                },
                g);
            break;
        }
        case InitKind::AnisotropicBump: {
            if (static_cast<int>(cfg.axis_weights.size()) != g.dim())
                throw ConfigError("axis_weights must have one entry per axis");
            for (double w : cfg.axis_weights)
                if (!(w > 0.0)) throw ConfigError("axis_weights must be positive");
            const auto w = cfg.axis_weights;
            u = sample_function(
                [w](std::span<const double> x) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x[i] * x[i];
                    return std::exp(-acc);
                },
                g);
            break;
        }
        case InitKind::FromFile: {
            if (cfg.init_field->grid().shape() != g.shape()) throw ConfigError("init field grid does not match");
            u = *cfg.init_field;
            for (double v : u.values())
                if (v < 0.0 || !std::isfinite(v)) throw DomainError("init field must be nonnegative and finite");
            break;
        }
    }
    return u;
}

inline void check_regime(const FractionalParams& params) {
    params.validate();
    if (params.dim < 2) throw DomainError("solver: dim must be >= 2");
    const double serrin = params.serrin_exponent();
    if (!(params.p > serrin)) {
        std::ostringstream os;
        os << "p = " << params.p << " lies in the nonexistence range 1 < p <= N/(N-2s) = " << serrin
           << " (Serrin exponent); only the trivial solution u = 0 exists there";
        throw RegimeError(os.str());
    }
}

}  // namespace detail

inline PotentialTable solver_kernel(const FractionalParams& params, const Grid& grid, const SolveConfig& cfg) {
    const GreenMethod m = cfg.method.value_or(default_green_method(params.s, params.dim));
    return green_table(kernel_grid_for(grid), params.s, m, cfg.cell_policy);
}

/// Damped normalized fixed-point iteration for u = u^p * G_s.
///
/// The first node layer on every axis is held at zero so the active region is symmetric
/// about the centre node and the iteration commutes with the grid reflections.
inline SolveResult solve_semilinear(const FractionalParams& params, const Grid& grid, const SolveConfig& cfg,
                                    const PotentialTable& kernel) {
    detail::check_regime(params);
    cfg.validate();
    if (grid.dim() != params.dim) throw DomainError("solver: grid dimension differs from params.dim");
    PowerConvolver conv(grid, kernel);
    Field u = detail::initial_field(grid, cfg);
    detail::apply_symmetric_mask(u);
    const double n0 = detail::norm_value(u, cfg.normalization);
    if (!(n0 > 0.0)) throw DomainError("solver: initial field is identically zero");
    for (auto& v : u.values()) v /= n0;

    SolveResult res;
    double kappa = 1.0;
    for (int it = 0;; ++it) {
        Field t = conv.apply(u, params.p);
        const double nt = detail::norm_value(t, cfg.normalization);
        if (!(nt > 0.0) || !std::isfinite(nt)) throw NumericalError("solver: iterate collapsed or overflowed");
        kappa = nt / detail::norm_value(u, cfg.normalization);
        double diff = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            if (!detail::on_first_layer(grid, k)) diff = std::max(diff, std::abs(u[k] - t[k] / kappa));
        }
        const double r = diff / u.max_abs();
        res.residual_history.push_back(r);
        res.iterations = it;
        if (!std::isfinite(r)) throw NumericalError("solver: residual is not finite");
        if (r < cfg.tol_residual) {
            res.converged = true;
            break;
        }
        const auto w = static_cast<std::size_t>(cfg.divergence_window);
        const auto& h = res.residual_history;
        if (h.size() > w && r > cfg.divergence_factor * h[h.size() - 1 - w])
            throw NumericalError("solver: residual grew by more than " + std::to_string(cfg.divergence_factor) +
                                 "x over " + std::to_string(cfg.divergence_window) + " iterations");
        if (it >= cfg.max_iters) break;
        for (std::size_t k = 0; k < u.size(); ++k) u[k] = (1.0 - cfg.damping) * u[k] + cfg.damping * t[k] / kappa;
        detail::apply_symmetric_mask(u);
        const double nu = detail::norm_value(u, cfg.normalization);
        for (auto& v : u.values()) v /= nu;
    }
    const auto& h = res.residual_history;
    bool settled = false;
    for (std::size_t k = 1; k < h.size(); ++k) {
        if (settled && h[k] > h[k - 1] * (1.0 + 1e-2) + 1e-14) res.monotone_after_burn_in = false;
        settled = settled || h[k] < cfg.burn_in_residual;
    }
    res.converged = res.converged && res.monotone_after_burn_in;
    res.field = std::move(u);
    res.scale_factor = std::pow(kappa, -1.0 / (params.p - 1.0));
    res.length_scale = std::pow(res.scale_factor, 1.0 / params.scaling_exponent());
    return res;
}

inline SolveResult solve_semilinear(const FractionalParams& params, const Grid& grid, const SolveConfig& cfg) {
    detail::check_regime(params);
    return solve_semilinear(params, grid, cfg, solver_kernel(params, grid, cfg));
}

/// scale_factor * field, the actual solution of u = u^p * G.
inline Field scaled_solution(const SolveResult& r) {
    Field out = r.field;
    for (auto& v : out.values()) v *= r.scale_factor;
    return out;
}

/// Relative sup-norm of u - u^p * G over the nodes the solver updates (first layer excluded).
inline double convolution_residual(const Field& u, double p, const PotentialTable& kernel) {
    const Field t = convolve_power(u, p, kernel);
    double diff = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k)
        if (!detail::on_first_layer(u.grid(), k)) diff = std::max(diff, std::abs(u[k] - t[k]));
    return diff / u.max_abs();
}

/// Relative sup-norm of (-I u) - u^p over nodes with |x_i| <= L/2, spectral operator on the box torus.
inline double spectral_residual(const Field& u, const FractionalParams& params) {
    const Grid& g = u.grid();
    if (u.max_abs() == 0.0) return 0.0;
    const Field a = apply_spectral(u, params.s);
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const Point x = g.point(k);
        bool interior = true;
        for (int i = 0; i < g.dim(); ++i) interior = interior && std::abs(x[i]) <= 0.5 * g.extent(i);
        if (!interior) continue;
        const double up = std::pow(std::max(u[k], 0.0), params.p);
        diff = std::max(diff, std::abs(a[k] - up));
        scale = std::max(scale, std::abs(up));
    }
    return scale > 0.0 ? diff / scale : diff;
}

/// lambda^{2s/(p-1)} u(lambda x) on the grid with extents divided by lambda.
inline Field rescale_solution(const Field& u, double lambda, const FractionalParams& params) {
    if (!(lambda > 0.0)) throw DomainError("rescale_solution: lambda must be positive");
    std::vector<double> e(u.grid().extents());
    for (auto& v : e) v /= lambda;
    const double amp = std::pow(lambda, params.scaling_exponent());
    std::vector<double> vals(u.values().begin(), u.values().end());
    for (auto& v : vals) v *= amp;
    return Field(Grid(u.grid().shape(), e), std::move(vals));
}

struct DiagonalResidual {
    int i = 0;
    int j = 1;
    int sign = 1;
    double residual = 0.0;
};

struct SymmetryReport {
    Point center;
    std::vector<double> axis_residuals;
    std::vector<DiagonalResidual> diagonal_residuals;
    double radial_deviation = 0.0;

    [[nodiscard]] double max_reflection_residual() const {
        double m = 0.0;
        for (double v : axis_residuals) m = std::max(m, v);
        for (const auto& d : diagonal_residuals) m = std::max(m, d.residual);
        return m;
    }
};

namespace detail {

/// sup |u(x) - u(reflect x)| / sup|u| over nodes whose reflection stays in the box.
inline double reflection_residual(const Field& u, const Hyperplane& plane) {
    const Grid& g = u.grid();
    const double scale = u.max_abs();
    if (scale == 0.0) return 0.0;
    std::vector<double> part(g.size(), 0.0);
    parallel_for(g.size(), [&](std::size_t k) {
        Point x = g.point(k);
        reflect_in_place(x, plane);
        if (!g.contains(x, 1e-9 * g.spacing(0))) return;
        part[k] = std::abs(u[k] - u.interpolate(x));
    });
    return *std::max_element(part.begin(), part.end()) / scale;
}

}  // namespace detail

/// Reflection residuals through the centre and the spread of u over equal-distance node shells.
inline SymmetryReport symmetry_report(const Field& u, std::optional<Point> center = std::nullopt) {
    const Grid& g = u.grid();
    const int d = g.dim();
    SymmetryReport rep;
    rep.center = center ? *center : g.point(u.argmax());
    if (static_cast<int>(rep.center.size()) != d) throw DomainError("symmetry_report: centre dimension mismatch");
    if (!g.contains(rep.center)) throw DomainError("symmetry_report: centre outside the grid box");
    for (int i = 0; i < d; ++i) {
        const Hyperplane pl = Hyperplane::axis(i, 0.0);
        rep.axis_residuals.push_back(detail::reflection_residual(u, pl.with_offset(pl.offset_through(rep.center))));
    }
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            for (int sg : {1, -1}) {
                const Hyperplane pl = Hyperplane::diagonal(i, j, sg, 0.0);
                const double r = detail::reflection_residual(u, pl.with_offset(pl.offset_through(rep.center)));
                rep.diagonal_residuals.push_back({i, j, sg, r});
            }
        }
    }
    // Shells keyed by squared distance in units of the smallest spacing, rounded to absorb roundoff.
    double hmin = g.spacing(0);
    double inscribed = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
        hmin = std::min(hmin, g.spacing(i));
        inscribed = std::min({inscribed, rep.center[i] + g.extent(i), g.upper(i) - rep.center[i]});
    }
    std::map<long long, std::vector<double>> shells;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point x = g.point(k);
        double r2 = 0.0;
        for (int i = 0; i < d; ++i) r2 += (x[i] - rep.center[i]) * (x[i] - rep.center[i]);
        if (std::sqrt(r2) > inscribed) continue;
        shells[std::llround(r2 / (hmin * hmin) * 1e6)].push_back(u[k]);
    }
    const double scale = u.max_abs();
    for (const auto& [key, vals] : shells) {
        if (vals.size() < 2) continue;
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / static_cast<double>(vals.size()));
        rep.radial_deviation = std::max(rep.radial_deviation, scale > 0.0 ? sd / scale : 0.0);
    }
    return rep;
}

struct PlaneScanOptions {
    double band = -1.0;              ///< excluded distance to the plane; negative selects half a spacing
    double tolerance = 1e-10;        ///< w >= -tolerance * sup u counts as nonnegative
    int bisection_steps = 40;
};

struct PlaneScan {
    Hyperplane direction;
    std::vector<double> lambdas;
    std::vector<double> min_w;
    std::optional<double> critical_lambda;
};

namespace detail {

/// min over the negative side of the plane of u(reflect x) - u(x); +inf when the region is empty.
inline double plane_min_w(const Field& u, const Hyperplane& plane, double band) {
    const Grid& g = u.grid();
    std::vector<double> part(g.size(), std::numeric_limits<double>::infinity());
    parallel_for(g.size(), [&](std::size_t k) {
        const Point x = g.point(k);
        if (!(plane.signed_distance(x) < -band)) return;
        const Point xr = reflect_point(x, plane);
        if (!g.contains(xr, 1e-9 * g.spacing(0))) return;
        part[k] = u.interpolate(xr) - u[k];
    });
    return *std::min_element(part.begin(), part.end());
}

}  // namespace detail

/// Sweeps the plane family and locates the last offset where w_lambda stays nonnegative.
inline PlaneScan moving_plane_scan(const Field& u, const Hyperplane& kind, const std::vector<double>& lambdas,
                                   const PlaneScanOptions& opt = {}) {
    if (lambdas.empty()) throw DomainError("moving_plane_scan: empty lambda list");
    if (!u.all_finite()) throw DomainError("moving_plane_scan: field is not finite");
    const Grid& g = u.grid();
    double h = g.spacing(0);
    for (int i = 0; i < g.dim(); ++i) h = std::min(h, g.spacing(i));
    const double band = opt.band >= 0.0 ? opt.band : 0.5 * h;
    const double tol = opt.tolerance * u.max_abs();
    PlaneScan scan;
    scan.direction = kind;
    scan.lambdas = lambdas;
    std::sort(scan.lambdas.begin(), scan.lambdas.end());
    auto ok = [&](double lam) { return detail::plane_min_w(u, kind.with_offset(lam), band) >= -tol; };
    for (double lam : scan.lambdas) scan.min_w.push_back(detail::plane_min_w(u, kind.with_offset(lam), band));
    for (std::size_t k = 0; k + 1 < scan.lambdas.size(); ++k) {
        if (scan.min_w[k] >= -tol && !(scan.min_w[k + 1] >= -tol)) {
            double lo = scan.lambdas[k];
            double hi = scan.lambdas[k + 1];
            for (int b = 0; b < opt.bisection_steps && hi - lo > 1e-6 * h; ++b) {
                const double mid = 0.5 * (lo + hi);
                (ok(mid) ? lo : hi) = mid;
            }
            scan.critical_lambda = lo;
            break;
        }
    }
    return scan;
}

/// Evenly spaced offsets covering the box along a plane family, excluding the outer quarter.
inline std::vector<double> scan_offsets(const Grid& g, const Hyperplane& kind, std::size_t count) {
    double lo = -g.extent(kind.i) * 0.75;
    double hi = g.extent(kind.i) * 0.75;
    if (kind.kind == Hyperplane::Kind::Diagonal) {
        lo = -0.75 * (g.extent(kind.i) + g.extent(kind.j));
        hi = -lo;
    }
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = lo + (hi - lo) * static_cast<double>(k) / (count - 1.0);
    return out;
}

struct DecayFit {
    double exponent = 0.0;   ///< beta in u ~ |x|^{-beta}
    double threshold = 0.0;  ///< 2s/(p-1)
    std::size_t nodes = 0;
};

/// Least-squares slope of log u against log |x| over the annulus [0.75 R, R], R the inscribed box radius.
inline DecayFit decay_fit(const Field& u, const FractionalParams& params) {
    const Grid& g = u.grid();
    double R = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.dim(); ++i) R = std::min(R, g.extent(i) - g.spacing(i));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point x = g.point(k);
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        const double r = std::sqrt(r2);
        if (r < 0.75 * R || r > R || !(u[k] > 0.0)) continue;
        const double lx = std::log(r);
        const double ly = std::log(u[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 16) throw DomainError("decay_fit: fewer than 16 positive nodes in the fit annulus");
    const double nn = static_cast<double>(n);
    const double denom = nn * sxx - sx * sx;
    DecayFit f;
    f.exponent = denom != 0.0 ? -(nn * sxy - sx * sy) / denom : 0.0;
    f.threshold = params.scaling_exponent();
    f.nodes = n;
    return f;
}

/// Field reflected through a hyperplane by node permutation where possible, interpolation otherwise;
/// nodes whose image leaves the box are set to zero.
inline Field reflect_field(const Field& u, const Hyperplane& plane) {
    const Grid& g = u.grid();
    Field out(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        Point x = g.point(k);
        reflect_in_place(x, plane);
        out[k] = g.contains(x, 1e-9 * g.spacing(0)) ? u.interpolate(x) : 0.0;
    }
    return out;
}

}  // namespace anisofrac
