#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "anisofrac/potential.hpp"
#include "anisofrac/verify.hpp"

using namespace anisofrac;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(FProfile, ClosedForms) {
    EXPECT_NEAR(f_profile(0.0, 0.5), 1.0, 1e-12);
    EXPECT_NEAR(f_profile(2.0, 0.5), 0.2, 1e-12);
    EXPECT_NEAR(f_profile(0.0, 1.0), std::sqrt(kPi) / 2.0, 1e-12);
}

TEST(GreenValue, HalfOrderPlane) {
    EXPECT_NEAR(green_value(Point{1.0, 1.0}, 0.5, 2, GreenMethod::ClosedHalf), 1.0 / (4.0 * kPi), 1e-15);
    EXPECT_NEAR(half_order_product_integral(Point{1.0, 1.0}), 1.0 / (4.0 * kPi), 1e-6 / (4.0 * kPi));
    EXPECT_NEAR(green_value(Point{0.3, -2.0}, 0.5, 2, GreenMethod::ClosedHalf), 1.0 / (2.0 * kPi * 2.3), 1e-15);
}

TEST(GreenValue, Newtonian) {
    EXPECT_NEAR(green_value(Point{0.0, 0.0, 2.0}, 1.0, 3, GreenMethod::ClosedNewtonian), 1.0 / (8.0 * kPi), 1e-15);
    EXPECT_NEAR(green_value(Point{0.0, 0.0, 2.0}, 1.0, 3, GreenMethod::ClosedNewtonian), 0.0397887358, 1e-10);
    for (double r : {0.5, 1.0, 2.0}) {
        const Point y{0.6 * r, 0.8 * r, 1e-3};
        const double norm = std::sqrt(r * r + 1e-6);
        EXPECT_NEAR(green_value(y, 1.0, 3, GreenMethod::NestedQuadrature) * 4.0 * kPi * norm, 1.0, 1e-4);
    }
}

TEST(GreenValue, NestedAgreesWithHalfOrderQuadrature) {
    const Point x{1.0, 0.5, 0.25};
    const double a = green_value(x, 0.5, 3, GreenMethod::ClosedHalf);
    const double b = green_value(x, 0.5, 3, GreenMethod::NestedQuadrature);
    EXPECT_NEAR(b / a, 1.0, 1e-5);
}

TEST(GreenValue, HalfOrderDivergesOnCoordinateAxesInThreeDimensions) {
    EXPECT_TRUE(std::isinf(green_value(Point{1.0, 0.0, 0.0}, 0.5, 3, GreenMethod::ClosedHalf)));
}

TEST(GreenValue, Errors) {
    EXPECT_THROW(green_value(Point{0.0, 0.0}, 0.5, 2, GreenMethod::ClosedHalf), DomainError);
    EXPECT_THROW(green_value(Point{1.0}, 0.5, 1, GreenMethod::NestedQuadrature), DomainError);
    EXPECT_THROW(green_value(Point{1.0, 1.0}, 0.4, 2, GreenMethod::ClosedHalf), DomainError);
    EXPECT_THROW(green_value(Point{1.0, 1.0}, 1.0, 2, GreenMethod::ClosedNewtonian), DomainError);
    EXPECT_THROW(green_value(Point{1.0, 1.0, 1.0}, 0.5, 2, GreenMethod::ClosedHalf), DomainError);
}

TEST(GreenValue, DefaultMethod) {
    EXPECT_EQ(default_green_method(0.5, 2), GreenMethod::ClosedHalf);
    EXPECT_EQ(default_green_method(1.0, 3), GreenMethod::ClosedNewtonian);
    EXPECT_EQ(default_green_method(0.3, 2), GreenMethod::NestedQuadrature);
}

TEST(GreenValue, HomogeneityAndSymmetrySampled) {
    EXPECT_LT(verify::homogeneity_error(0.5, 2, GreenMethod::ClosedHalf, 100, 1), 1e-5);
    EXPECT_LT(verify::homogeneity_error(0.4, 2, GreenMethod::NestedQuadrature, 30, 2), 1e-3);
    EXPECT_LT(verify::hyperplane_symmetry_error(0.5, 3, GreenMethod::ClosedHalf, 50, 3), 1e-10);
    EXPECT_LT(verify::hyperplane_symmetry_error(0.4, 2, GreenMethod::NestedQuadrature, 30, 4), 1e-6);
}

TEST(GreenValue, PositiveForSmallOrders) {
    for (double s : {0.3, 0.4, 0.5}) {
        const auto b = verify::two_sided_bound(s, 50, 9);
        EXPECT_GT(b.min_value, 0.0) << s;
        EXPECT_GT(b.min_ratio, 0.0);
        EXPECT_LT(b.max_ratio / b.min_ratio, 1e3);
    }
}

TEST(GreenValue, SpectralInverseNearClosedForm) {
    const auto est = spectral_green_value(Point{1.0, 1.0}, 0.5);
    EXPECT_NEAR(est.value * 4.0 * kPi, 1.0, 0.05);
}

TEST(GreenTable, HalfOrderTableMatchesClosedForm) {
    const Grid g = make_grid(2, 16, 4.0);
    const PotentialTable t = green_table(g, 0.5, GreenMethod::ClosedHalf);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point x = g.point(k);
        if (x[0] == 0.0 && x[1] == 0.0) {
            EXPECT_TRUE(std::isfinite(t.field[k]));
            EXPECT_GT(t.field[k], green_value(Point{g.spacing(0), 0.0}, 0.5, 2, GreenMethod::ClosedHalf));
            continue;
        }
        EXPECT_DOUBLE_EQ(t.field[k], 1.0 / (2.0 * kPi * (std::abs(x[0]) + std::abs(x[1]))));
    }
}

TEST(GreenTable, HomogeneityAcrossNodes) {
    const Grid g = make_grid(2, 16, 4.0);
    const PotentialTable t = green_table(g, 0.4, GreenMethod::NestedQuadrature);
    const std::size_t c = 8;
    for (std::size_t a = 1; a <= 3; ++a) {
        for (std::size_t b = 0; b <= 3; ++b) {
            const double v1 = t.field[(c + a) * 16 + (c + b)];
            const double v2 = t.field[(c + 2 * a) * 16 + (c + 2 * b)];
            EXPECT_NEAR(v2 / v1, std::pow(2.0, 0.8 - 2.0), 1e-6);
        }
    }
}

TEST(GreenTable, AxisSwapExact) {
    const Grid g = make_grid(2, 16, 4.0);
    const PotentialTable t = green_table(g, 0.5, GreenMethod::ClosedHalf);
    for (std::size_t a = 1; a < 16; ++a)
        for (std::size_t b = 1; b < 16; ++b) EXPECT_EQ(t.field[a * 16 + b], t.field[b * 16 + a]);
}

TEST(GreenTable, SaveLoadRoundTrip) {
    const Grid g = make_grid(2, 8, 2.0);
    const PotentialTable t = green_table(g, 0.5, GreenMethod::ClosedHalf, CellPolicy::RadialRegularize);
    const auto dir = std::filesystem::temp_directory_path() / "anisofrac_potential_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "g.aflt").string();
    save_potential_table(t, path);
    const PotentialTable back = load_potential_table(path);
    EXPECT_EQ(back.s, 0.5);
    EXPECT_EQ(back.method, GreenMethod::ClosedHalf);
    EXPECT_EQ(back.singular_cell_policy, CellPolicy::RadialRegularize);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(back.field[k], t.field[k]);
    std::filesystem::remove_all(dir);
}

TEST(KernelReflection, AxisExample) {
    const auto r = kernel_reflection_gap(Point{0.0, 0.0}, Point{-1.0, 0.0}, Hyperplane::axis(0, 1.0), 0.5);
    EXPECT_NEAR(r.direct, 1.0 / (2.0 * kPi), 1e-15);
    EXPECT_NEAR(r.reflected, 1.0 / (6.0 * kPi), 1e-15);
    EXPECT_TRUE(r.strict());
}

TEST(KernelReflection, Preconditions) {
    EXPECT_THROW(kernel_reflection_gap(Point{1.0, 0.0}, Point{-1.0, 0.0}, Hyperplane::axis(0, 1.0), 0.5), DomainError);
    EXPECT_THROW(kernel_reflection_gap(Point{0.0, 0.0}, Point{0.0, 0.0}, Hyperplane::axis(0, 1.0), 0.5), DomainError);
}

TEST(KernelReflection, AxisPlanesStrictOnRandomTriples) {
    for (int dim : {2, 3})
        for (int axis = 0; axis < dim; ++axis)
            EXPECT_EQ(verify::reflection_pass_rate(dim, Hyperplane::axis(axis, 0.0), 300, 40 + axis), 1.0);
}

TEST(KernelReflection, DiagonalDifferenceFactorization) {
    // With p = lambda - x1 - x2, q = lambda - y1 - y2, a = x1 - y1, b = x2 - y2, c = lambda - x2 - y1,
    // d = lambda - x1 - y2: (z^2 + c^2)(z^2 + d^2) - (z^2 + a^2)(z^2 + b^2) = p q (2 z^2 + p q + 2 a b).
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        const double x1 = U(rng), x2 = U(rng), y1 = U(rng), y2 = U(rng), lam = U(rng), z = U(rng);
        const double p = lam - x1 - x2, q = lam - y1 - y2, a = x1 - y1, b = x2 - y2;
        const double c = lam - x2 - y1, d = lam - x1 - y2;
        const double z2 = z * z;
        const double lhs = (z2 + c * c) * (z2 + d * d) - (z2 + a * a) * (z2 + b * b);
        EXPECT_NEAR(lhs, p * q * (2.0 * z2 + p * q + 2.0 * a * b), 1e-9 * (1.0 + std::abs(lhs)));
    }
}

TEST(KernelReflection, DiagonalPlaneTiesInTwoDimensions) {
    // With c = lambda - x2 - y1 and d = lambda - x1 - y2 of opposite signs, |x^lambda - y|_1 = |a - b| = |x - y|_1.
    const Hyperplane pl = Hyperplane::diagonal(0, 1, 1, 0.0);
    const auto r = kernel_reflection_gap(Point{-1.0, 0.0}, Point{0.5, -3.0}, pl, 0.5);
    EXPECT_DOUBLE_EQ(r.direct, r.reflected);
    EXPECT_FALSE(r.strict());
}

TEST(KernelReflection, DiagonalPlaneCanReverseInThreeDimensions) {
    const Point x{1.10679, -2.07234, -2.16203};
    const Point y{-1.92522, -0.658278, -2.18359};
    const auto r = kernel_reflection_gap(x, y, Hyperplane::diagonal(0, 1, 1, 0.447773), 0.5);
    EXPECT_LT(r.direct, r.reflected);
    EXPECT_GT(r.reflected, 0.0);
}
