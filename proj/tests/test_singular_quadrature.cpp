#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "anisofrac/singular_quadrature.hpp"
#include "anisofrac/verify.hpp"

using namespace anisofrac;
namespace vd = anisofrac::verify::detail;

namespace {

constexpr double kPi = std::numbers::pi;

/// 1 / int_R (1 - cos x)/|x|^{1+2s} dx from int_0^inf (1 - cos x) x^{-1-a} dx = -Gamma(-a) cos(pi a / 2).
double cs_reference(double s) {
    return 1.0 / (-2.0 * boost::math::tgamma(-2.0 * s) * std::cos(kPi * s));
}

/// Brute-force c_alpha: 2 int_0^inf ((1+r)^a + (1-r)_+^a - 2) / r^{1+2s} dr split at r = 1.
double c_alpha_reference(double a, double s) {
    auto inner = [=](double r) {
        if (r <= 0.0) return 0.0;
        // Two-term Taylor expansion where the numerator cancels.
        if (r < 1e-3) return a * (a - 1.0) * std::pow(r, 1.0 - 2.0 * s) * (1.0 + (a - 2.0) * (a - 3.0) / 12.0 * r * r);
        return (std::pow(1.0 + r, a) + std::pow(1.0 - r, a) - 2.0) / std::pow(r, 1.0 + 2.0 * s);
    };
    auto outer = [=](double r) { return (std::pow(1.0 + r, a) - 2.0) / std::pow(r, 1.0 + 2.0 * s); };
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    return 2.0 * (ts.integrate(inner, 0.0, 1.0, 1e-13) + es.integrate(outer, 1.0, std::numeric_limits<double>::infinity(), 1e-13));
}

/// int_0^inf exp(-a x^{2s}) sin(x) dx by Gauss-Kronrod on each period until the envelope is negligible.
double sine_reference(double a, double s) {
    double acc = 0.0;
    for (int k = 0; k < 4000; ++k) {
        const double lo = k * kPi;
        if (std::exp(-a * std::pow(lo, 2.0 * s)) < 1e-18) break;
        acc += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [=](double x) { return std::exp(-a * std::pow(x, 2.0 * s)) * std::sin(x); }, lo, lo + kPi, 0, 1e-15);
    }
    return acc;
}

}  // namespace

TEST(CsConstant, HalfIsOneOverPi) { EXPECT_NEAR(cs_constant(0.5), 1.0 / kPi, 1e-10); }

TEST(CsConstant, MatchesGammaClosedForm) {
    for (double s : {0.1, 0.25, 0.4, 0.6, 0.75, 0.9}) {
        EXPECT_NEAR(cs_constant(s), cs_reference(s), 1e-10) << "s=" << s;
        EXPECT_GT(cs_constant(s), 0.0);
    }
}

TEST(CsConstant, RejectsOutOfRange) {
    EXPECT_THROW(cs_constant(0.0), DomainError);
    EXPECT_THROW(cs_constant(1.0), DomainError);
}

TEST(Apply1d, ConstantIsAnnihilated) {
    const ScalarFn one = [](std::span<const double>) { return 3.0; };
    for (double s : {0.2, 0.5, 0.9})
        for (int i = 0; i < 2; ++i) EXPECT_NEAR(apply_1d_fractional(one, Point{0.3, -1.0}, i, vd::params(2, s), {}), 0.0, 1e-14);
}

TEST(Apply1d, PlaneWaveAlongAxis) {
    const ScalarFn u = [](std::span<const double> x) { return std::cos(2.0 * kPi * x[0]); };
    const auto cfg = QuadratureConfig::periodic();
    const auto P = vd::params(2, 0.5);
    for (double x0 : {0.0, 0.1, 0.37}) {
        const Point x{x0, 0.4};
        EXPECT_NEAR(apply_1d_fractional(u, x, 0, P, cfg), -2.0 * kPi * std::cos(2.0 * kPi * x0), 1e-4 * 2.0 * kPi);
        EXPECT_NEAR(apply_1d_fractional(u, x, 1, P, cfg), 0.0, 1e-14);
    }
}

TEST(Apply1d, PlainNormalizationScalesByTwoOverCs) {
    const auto g = vd::gaussian({0.1, 0.0});
    const Point x{0.3, 0.2};
    for (double s : {0.3, 0.7}) {
        const double prob = apply_1d_fractional(g, x, 0, vd::params(2, s), {});
        const double plain = apply_1d_fractional(g, x, 0, vd::params(2, s, Normalization::Plain), {});
        EXPECT_NEAR(plain, prob * 2.0 / cs_constant(s), 1e-12 * std::abs(plain));
    }
}

TEST(Apply1d, RejectsNaNInput) {
    const ScalarFn bad = [](std::span<const double>) { return std::nan(""); };
    EXPECT_THROW(apply_1d_fractional(bad, Point{0.0}, 0, vd::params(1, 0.5), {}), NumericalError);
}

TEST(Apply1d, RejectsInvalidConfig) {
    QuadratureConfig cfg;
    cfg.nodes_core = 4;
    EXPECT_THROW(apply_1d_fractional(vd::gaussian({0.0}), Point{0.0}, 0, vd::params(1, 0.5), cfg), DomainError);
}

TEST(ApplyOperator, GaussianMaximumIsNegative) {
    const auto g = vd::gaussian({0.0, 0.0});
    for (double s : {0.1, 0.5, 0.9}) EXPECT_LT(apply_operator(g, Point{0.0, 0.0}, vd::params(2, s), {}), 0.0);
}

TEST(ApplyOperator, ProductOfCosines) {
    const ScalarFn u = [](std::span<const double> x) { return std::cos(2.0 * kPi * x[0]) * std::cos(2.0 * kPi * x[1]); };
    const Point x{0.1, 0.05};
    const double v = apply_operator(u, x, vd::params(2, 0.5), QuadratureConfig::periodic());
    EXPECT_NEAR(v, -4.0 * kPi * u(x), 1e-4 * 4.0 * kPi);
}

TEST(ApplyOperator, ConstantIsZero) {
    const ScalarFn one = [](std::span<const double>) { return 1.0; };
    EXPECT_EQ(apply_operator(one, Point{0.5, 0.5, 0.5}, vd::params(3, 0.4), {}), 0.0);
}

TEST(ApplyOperator, FieldInputMatchesFunction) {
    const Grid g = make_grid(1, 512, 8.0);
    const auto f = vd::gaussian({0.0});
    const Field u = sample_function(f, g);
    QuadratureConfig cfg;
    cfg.tail_decay_exponent = 4.0;
    const double from_field = apply_operator(u, Point{0.25}, vd::params(1, 0.5), cfg);
    const double from_fn = apply_operator(f, Point{0.25}, vd::params(1, 0.5), {});
    EXPECT_NEAR(from_field, from_fn, 2e-3 * std::abs(from_fn));
}

TEST(CAlpha, SignCases) {
    for (double s : {0.3, 0.5, 0.7}) {
        EXPECT_LT(std::abs(c_alpha(s, s)), 1e-6) << s;
        EXPECT_LT(c_alpha(0.5 * s, s), 0.0) << s;
        EXPECT_GT(c_alpha(1.5 * s, s), 0.0) << s;
    }
}

TEST(CAlpha, MatchesBruteForceQuadrature) {
    for (double s : {0.3, 0.5, 0.7})
        for (double f : {0.3, 0.5, 1.2, 1.7}) {
            const double a = f * s;
            EXPECT_NEAR(c_alpha(a, s), c_alpha_reference(a, s), 1e-8 * std::max(1.0, std::abs(c_alpha_reference(a, s))))
                << "s=" << s << " alpha=" << a;
        }
}

TEST(CAlpha, RejectsOutOfRange) {
    EXPECT_THROW(c_alpha(0.0, 0.5), DomainError);
    EXPECT_THROW(c_alpha(1.0, 0.5), DomainError);
}

TEST(StableCosine, ClosedForms) {
    EXPECT_NEAR(stable_cosine_integral(1.0, 1.0, 0.5, TrigKind::Cos), 0.5, 1e-10);
    EXPECT_NEAR(stable_cosine_integral(1.0, 1.0, 1.0, TrigKind::Cos), std::sqrt(kPi / 4.0) * std::exp(-0.25), 1e-10);
    EXPECT_NEAR(stable_cosine_integral(1.0, 1.0, 1.0, TrigKind::Cos), 0.690194, 1e-6);
}

TEST(StableCosine, SineMatchesIndependentQuadrature) {
    const double v = stable_cosine_integral(2.0, 1.0, 0.4, TrigKind::Sin);
    EXPECT_GT(v, 0.0);
    EXPECT_NEAR(v, sine_reference(2.0, 0.4), 1e-9);
    for (double a : {0.5, 5.0})
        for (double s : {0.25, 0.75}) EXPECT_NEAR(stable_cosine_integral(a, 1.0, s, TrigKind::Sin), sine_reference(a, s), 1e-8);
}

TEST(StableCosine, RejectsNonPositiveA) { EXPECT_THROW(stable_cosine_integral(0.0, 1.0, 0.5, TrigKind::Cos), DomainError); }

TEST(ProductRemainder, ConstantFactorVanishes) {
    const ScalarFn c = [](std::span<const double>) { return 2.0; };
    EXPECT_EQ(product_remainder(c, vd::gaussian({0.0, 0.0}), Point{0.1, 0.2}, vd::params(2, 0.5), {}), 0.0);
}

TEST(ProductRemainder, SquareIsPositive) {
    const auto g = vd::gaussian({0.0, 0.0});
    EXPECT_GT(product_remainder(g, g, Point{0.0, 0.0}, vd::params(2, 0.5), {}), 0.0);
}

TEST(ProductRemainder, ProductRuleIdentity) { EXPECT_TRUE(verify::product_rule_identity().passed); }

TEST(Lemmas, ScalingLaw) {
    const auto r = verify::scaling_law();
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Lemmas, PowerInequality) {
    const auto r = verify::power_inequality();
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(BoundaryPower, MatchesConstantTimesPower) {
    for (double s : {0.3, 0.7})
        for (double f : {0.5, 1.5}) EXPECT_LT(verify::boundary_power_error(f * s, s), 1e-4) << s << ' ' << f;
}

TEST(BoundaryPower, CrossTermsVanishOffNormalAxis) {
    const auto r = verify::boundary_cross_terms_axis_only();
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(BoundaryContinuity, BoundaryOracleAgreesWithLibraryForLargeExponent) {
    // With 1 + alpha - 2s close to 1 the inner cutoff alone resolves x_N = 0.
    const auto P = vd::params(2, 0.5);
    const auto phi = vd::gaussian({0.2, 0.3});
    const double alpha = 0.9;
    QuadratureConfig edge = vd::growing_config(alpha);
    edge.inner_cutoff = 1e-8;
    const double lib = product_remainder_axis(boundary_power(alpha, 2), phi, Point{0.1, 0.0}, 1, P, edge);
    EXPECT_NEAR(lib, verify::boundary_trace_value(alpha, phi, Point{0.1, 0.0}, P), 1e-6);
}

TEST(BoundaryContinuity, SequenceReachesBoundaryValue) {
    for (auto [s, alpha] : {std::pair{0.5, 0.6}, std::pair{0.3, 0.3}}) {
        const auto tr = verify::boundary_continuity_trace(alpha, s, 60);
        EXPECT_LT(tr.gap(60), 1e-3) << "s=" << s;
        EXPECT_LT(tr.gap(60), tr.gap(40));
        EXPECT_LT(tr.gap(40), tr.gap(20));
        // Beyond k = 40 the differences reach the quadrature noise floor near 1e-10.
        EXPECT_TRUE(tr.contracting(20, 40));
    }
}

TEST(NarrowBand, TailRespectsBound) {
    const auto r = verify::narrow_band_bound_check();
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(IntegrationByParts, FullSpaceGaussians) {
    const auto P = vd::params(2, 0.5);
    const auto u = vd::gaussian({0.0, 0.0});
    const auto phi = vd::gaussian({0.3, 0.0}, 0.7);
    EXPECT_LT(ibp_residual(u, phi, 0, P, {}, IbpMode::full_space()), 1e-5);
    EXPECT_EQ(ibp_residual(u, u, 1, P, {}, IbpMode::full_space()), 0.0);
}

TEST(IntegrationByParts, AxisLine) {
    const auto r = verify::ibp_axis_line();
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(IntegrationByParts, WeightedRejectsBadExponent) {
    const auto P = vd::params(2, 0.6);
    const auto g = vd::gaussian({0.0, 0.5});
    EXPECT_THROW(ibp_residual(g, g, 0, P, {}, IbpMode::half_space(0.1)), DomainError);
    EXPECT_THROW(ibp_residual(g, g, 0, P, {}, IbpMode::half_space(1.3)), DomainError);
}

TEST(HalfSpace, DecompositionAgrees) {
    const auto r = verify::halfspace_decomposition();
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(HalfSpace, AlphaEqualSDropsConstantTerm) {
    const double s = 0.5;
    const auto phi = vd::gaussian({0.1, 0.6});
    const Point x{0.2, 0.7};
    const auto r = halfspace_test_decomposition(s, phi, x, vd::params(2, s), {});
    EXPECT_LT(std::abs(r.boundary_term), 1e-6);
    EXPECT_LT(r.gap(), 1e-4);
}

TEST(HalfSpace, RejectsBadInput) {
    const auto phi = vd::gaussian({0.0, 0.5});
    EXPECT_THROW(halfspace_test_apply(0.5, phi, Point{0.0, -0.1}, vd::params(2, 0.5), {}), DomainError);
    EXPECT_THROW(halfspace_test_apply(0.2, phi, Point{0.0, 0.5}, vd::params(2, 0.5), {}), DomainError);
}
