#pragma once

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "anisofrac/core.hpp"

namespace anisofrac {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

inline GaussRule build_gauss_rule(int n) {
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int half = (n + 1) / 2;
    // Boost returns the nonnegative zeros in increasing order.
    const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
    for (int k = 0; k < half; ++k) {
        const double x = zeros[k];
        const double dp = boost::math::legendre_p_prime<double>(n, x);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const int lo = half - 1 - k;
        const int hi = n - half + k;
        r.nodes[lo] = -x;
        r.weights[lo] = w;
        r.nodes[hi] = x;
        r.weights[hi] = w;
    }
    return r;
}

}  // namespace detail

inline const GaussRule& gauss_rule(int n) {
    if (n < 1 || n > 512) throw DomainError("gauss_rule: node count must lie in [1, 512]");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussRule>(detail::build_gauss_rule(n));
    return *slot;
}

/// Integral of f over [a, b] with an n-point rule.
template <class F>
double gauss_panel(F&& f, double a, double b, const GaussRule& rule) {
    const double c = 0.5 * (a + b);
    const double r = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) acc += rule.weights[k] * f(c + r * rule.nodes[k]);
    return acc * r;
}

/// Ordered panel breakpoints.
struct PanelLayout {
    std::vector<double> breaks;

    [[nodiscard]] std::size_t panels() const { return breaks.empty() ? 0 : breaks.size() - 1; }
};

/// Point toward which panels shrink geometrically (ratio 2) down to min_width.
struct GradePoint {
    double at;
    double min_width;
};

/// Breaks on [a, b], graded toward each GradePoint and otherwise capped by
/// max_width + relative * |t| so that far panels widen with distance.
inline PanelLayout graded_panels(double a, double b, const std::vector<GradePoint>& grades, double max_width,
                                 double relative) {
    if (!(b > a)) return PanelLayout{{a}};
    auto cap = [&](double t) { return max_width + relative * std::abs(t); };
    std::vector<GradePoint> anchors;
    double wa = cap(a);
    double wb = cap(b);
    for (const auto& g : grades) {
        if (g.at > a && g.at < b) anchors.push_back(g);
        if (g.at == a) wa = std::min(wa, g.min_width);
        if (g.at == b) wb = std::min(wb, g.min_width);
    }
    std::sort(anchors.begin(), anchors.end(), [](const GradePoint& l, const GradePoint& r) { return l.at < r.at; });
    std::vector<GradePoint> chain;
    chain.push_back({a, wa});
    for (const auto& g : anchors) {
        if (g.at > chain.back().at) chain.push_back(g);
    }
    if (b > chain.back().at) chain.push_back({b, wb});

    PanelLayout out;
    out.breaks.push_back(a);
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        std::vector<double> left{chain[k].at};
        std::vector<double> right{chain[k + 1].at};
        double wl = chain[k].min_width;
        double wr = chain[k + 1].min_width;
        while (true) {
            const double l = left.back();
            const double r = right.back();
            const double gap = r - l;
            const double step_l = std::min(wl, cap(l));
            const double step_r = std::min(wr, cap(r));
            if (step_l + step_r >= gap) {
                if (gap > std::max(step_l, step_r)) left.push_back(l + gap * step_l / (step_l + step_r));
                break;
            }
            if (step_l <= step_r) {
                left.push_back(l + step_l);
                wl *= 2.0;
            } else {
                right.push_back(r - step_r);
                wr *= 2.0;
            }
        }
        for (std::size_t q = 1; q < left.size(); ++q) out.breaks.push_back(left[q]);
        for (std::size_t q = right.size(); q-- > 0;) out.breaks.push_back(right[q]);
    }
    out.breaks.erase(std::unique(out.breaks.begin(), out.breaks.end()), out.breaks.end());
    return out;
}

template <class F>
double composite_gauss(F&& f, const PanelLayout& layout, const GaussRule& rule) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < layout.breaks.size(); ++k)
        acc += gauss_panel(f, layout.breaks[k], layout.breaks[k + 1], rule);
    return acc;
}

/// Tensor-product composite nodes and weights for one axis.
struct AxisNodes {
    std::vector<double> x;
    std::vector<double> w;
};

inline AxisNodes axis_nodes(const PanelLayout& layout, const GaussRule& rule) {
    AxisNodes out;
    for (std::size_t k = 0; k + 1 < layout.breaks.size(); ++k) {
        const double a = layout.breaks[k];
        const double b = layout.breaks[k + 1];
        const double c = 0.5 * (a + b);
        const double r = 0.5 * (b - a);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            out.x.push_back(c + r * rule.nodes[q]);
            out.w.push_back(r * rule.weights[q]);
        }
    }
    return out;
}

inline AxisNodes uniform_axis_nodes(double a, double b, int panels, int order) {
    PanelLayout layout;
    for (int k = 0; k <= panels; ++k) layout.breaks.push_back(a + (b - a) * k / panels);
    return axis_nodes(layout, gauss_rule(order));
}

/// Sum of f(x) * prod(w) over the tensor product of per-axis node sets.
template <class F>
double tensor_integrate(const std::vector<AxisNodes>& axes, F&& f) {
    const std::size_t d = axes.size();
    std::vector<std::size_t> sizes(d);
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) {
        sizes[i] = axes[i].x.size();
        total *= sizes[i];
    }
    std::vector<double> partial(total, 0.0);
    parallel_for(total, [&](std::size_t flat) {
        Point x(d);
        double w = 1.0;
        std::size_t rem = flat;
        for (std::size_t i = d; i-- > 0;) {
            const std::size_t k = rem % sizes[i];
            rem /= sizes[i];
            x[i] = axes[i].x[k];
            w *= axes[i].w[k];
        }
        partial[flat] = w * f(x);
    });
    double acc = 0.0;
    for (double v : partial) acc += v;
    return acc;
}

}  // namespace anisofrac
