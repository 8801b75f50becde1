#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "anisofrac/core.hpp"
#include "anisofrac/quadrature.hpp"
#include "anisofrac/singular_quadrature.hpp"

namespace anisofrac {

/// C-infinity step: 1 for t <= 0, 0 for t >= 1.
inline double smooth_step(double t) {
    auto f = [](double v) { return v > 0.0 ? std::exp(-1.0 / v) : 0.0; };
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double a = f(1.0 - t);
    return a / (a + f(t));
}

/// Whole-space test function: 1 on the unit ball, 0 outside the ball of radius 2.
inline ScalarFn whole_space_bump() {
    return [](std::span<const double> x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return smooth_step(std::sqrt(r2) - 1.0);
    };
}

/// Half-space test function: 1 on the ball of radius 1/2 about e_N/2, 0 outside the unit ball about e_N/2.
inline ScalarFn half_space_bump() {
    return [](std::span<const double> x) {
        double r2 = 0.0;
        const std::size_t d = x.size();
        for (std::size_t i = 0; i < d; ++i) {
            const double c = i + 1 == d ? 0.5 : 0.0;
            r2 += (x[i] - c) * (x[i] - c);
        }
        return smooth_step(2.0 * std::sqrt(r2) - 1.0);
    };
}

/// Weight exponent alpha_0 = 0.75 min(1, 2s) + 0.25 s used with the half-space pair.
inline double half_space_alpha0(double s) { return 0.75 * std::min(1.0, 2.0 * s) + 0.25 * s; }

enum class LiouvilleDomain { WholeSpace, HalfSpace };

inline const char* to_string(LiouvilleDomain d) { return d == LiouvilleDomain::WholeSpace ? "whole_space" : "half_space"; }

struct TestFunctionBound {
    double M = 0.0;
    std::size_t nodes = 0;
    Point argmax;
};

/// sup over grid nodes with phi > 0 of (-I phi)/phi (whole space) or
/// (-I phi_{alpha0} - I phi_s)/phi_s (half space), n nodes per axis.
inline TestFunctionBound test_function_bound(LiouvilleDomain domain, const FractionalParams& params, std::size_t n,
                                             const QuadratureConfig& cfg = {}) {
    params.validate();
    const int d = params.dim;
    TestFunctionBound out;
    out.M = -std::numeric_limits<double>::infinity();
    std::vector<Point> nodes;
    if (domain == LiouvilleDomain::WholeSpace) {
        const Grid g = make_grid(d, n, 2.5);
        const ScalarFn phi = whole_space_bump();
        for (std::size_t k = 0; k < g.size(); ++k) {
            Point x = g.point(k);
            if (phi(x) > 0.0) nodes.push_back(std::move(x));
        }
        std::vector<double> ratio(nodes.size());
        parallel_for(nodes.size(), [&](std::size_t k) {
            ratio[k] = -apply_operator(phi, nodes[k], params, cfg) / phi(nodes[k]);
        });
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (ratio[k] > out.M) {
                out.M = ratio[k];
                out.argmax = nodes[k];
            }
        }
    } else {
        const Grid g = make_grid(d, n, 1.25);
        const ScalarFn phi = half_space_bump();
        const double s = params.s;
        const double a0 = half_space_alpha0(s);
        const ScalarFn phi_s = lift(phi, s, d);
        const ScalarFn phi_a = lift(phi, a0, d);
        for (std::size_t k = 0; k < g.size(); ++k) {
            Point x = g.point(k);
            x[d - 1] += 0.5;
            if (x[d - 1] > 0.0 && phi(x) > 0.0) nodes.push_back(std::move(x));
        }
        std::vector<double> ratio(nodes.size());
        parallel_for(nodes.size(), [&](std::size_t k) {
            const Point& x = nodes[k];
            KinkMap kinks(d);
            kinks[d - 1] = {x[d - 1]};
            const double num = -apply_operator(phi_a, x, params, cfg, kinks) - apply_operator(phi_s, x, params, cfg, kinks);
            ratio[k] = num / phi_s(x);
        });
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (ratio[k] > out.M) {
                out.M = ratio[k];
                out.argmax = nodes[k];
            }
        }
    }
    out.nodes = nodes.size();
    if (!std::isfinite(out.M)) throw NumericalError("test_function_bound: supremum is not finite");
    return out;
}

struct LiouvilleRow {
    double R = 0.0;
    double mass = 0.0;  ///< int u^p phi_R
    double rate = 0.0;  ///< R^{N - 2sp/(p-1)} (whole space) or R^{N + s - 2sp/(p-1)} (half space)
    double ratio = 0.0;
    bool flagged = false;  ///< test-function support leaves the trusted box
};

struct LiouvilleScan {
    LiouvilleDomain domain = LiouvilleDomain::WholeSpace;
    TestFunctionBound coarse;
    TestFunctionBound fine;
    std::vector<LiouvilleRow> rows;

    [[nodiscard]] double relative_change() const {
        return std::abs(fine.M - coarse.M) / std::max(std::abs(fine.M), 1e-300);
    }
};

struct LiouvilleOptions {
    double box_extent = 50.0;  ///< half-width of the region where u is trusted
    std::size_t n_coarse = 16;
    std::size_t n_fine = 32;
    int panels_per_axis = 24;
    int order = 8;
};

/// Test-function constant M on two grids and the mass/rate table across radii.
inline LiouvilleScan liouville_bound_scan(const ScalarFn& u, const FractionalParams& params,
                                          const std::vector<double>& radii, LiouvilleDomain domain,
                                          const LiouvilleOptions& opt = {}) {
    params.validate();
    const int d = params.dim;
    LiouvilleScan scan;
    scan.domain = domain;
    scan.coarse = test_function_bound(domain, params, opt.n_coarse);
    scan.fine = test_function_bound(domain, params, opt.n_fine);
    const double s = params.s;
    const double p = params.p;
    const double base = d - 2.0 * s * p / (p - 1.0);
    const ScalarFn phi = domain == LiouvilleDomain::WholeSpace ? whole_space_bump() : half_space_bump();
    for (double R : radii) {
        if (!(R > 0.0)) throw DomainError("liouville_bound_scan: radii must be positive");
        LiouvilleRow row;
        row.R = R;
        std::vector<AxisNodes> axes;
        const double reach = domain == LiouvilleDomain::WholeSpace ? 2.0 * R : 1.5 * R;
        row.flagged = reach > opt.box_extent;
        const double max_w = 4.0 * R / opt.panels_per_axis;
        for (int i = 0; i < d; ++i) {
            double lo = -2.0 * R;
            double hi = 2.0 * R;
            if (domain == LiouvilleDomain::HalfSpace) {
                lo = i + 1 == d ? 0.0 : -R;
                hi = i + 1 == d ? 1.5 * R : R;
            }
            const std::vector<GradePoint> grades{{0.0, std::min(0.05, 0.05 * R)}};
            axes.push_back(axis_nodes(graded_panels(lo, hi, grades, max_w, 0.0), gauss_rule(opt.order)));
        }
        row.mass = tensor_integrate(axes, [&](std::span<const double> x) {
            Point y(x.begin(), x.end());
            for (auto& v : y) v /= R;
            const double w = phi(y);
            if (w == 0.0) return 0.0;
            const double weight = domain == LiouvilleDomain::HalfSpace ? std::pow(std::max(x[d - 1], 0.0), s) : 1.0;
            return std::pow(std::max(u(x), 0.0), p) * w * weight;
        });
        row.rate = std::pow(R, domain == LiouvilleDomain::WholeSpace ? base : base + s);
        row.ratio = row.mass / row.rate;
        scan.rows.push_back(row);
    }
    return scan;
}

}  // namespace anisofrac
