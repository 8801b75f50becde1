#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "anisofrac/core.hpp"

using namespace anisofrac;

TEST(Grid, SpacingAndNodes) {
    const Grid g = make_grid(2, 8, 4.0);
    EXPECT_EQ(g.size(), 64u);
    EXPECT_DOUBLE_EQ(g.spacing(0), 1.0);
    EXPECT_DOUBLE_EQ(g.coord(0, 0), -4.0);
    EXPECT_DOUBLE_EQ(g.upper(1), 3.0);

    const Grid line = make_grid(1, 4, 1.0);
    const std::vector<double> expect{-1.0, -0.5, 0.0, 0.5};
    for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(line.point(k)[0], expect[k]);

    const Grid cube = make_grid(3, 64, 10.0);
    EXPECT_EQ(cube.size(), 64u * 64u * 64u);
    EXPECT_DOUBLE_EQ(cube.spacing(2), 0.3125);
}

TEST(Grid, RejectsBadInput) {
    EXPECT_THROW(make_grid(2, 3, 1.0), DomainError);
    EXPECT_THROW(make_grid(2, 8, 0.0), DomainError);
    EXPECT_THROW(make_grid(2, 8, std::numeric_limits<double>::infinity()), DomainError);
}

TEST(Grid, FlattenRoundTrip) {
    const Grid g({4, 6, 8}, {1.0, 2.0, 3.0});
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(g.flatten(g.unflatten(k)), k);
    // Axis 1 is slowest.
    EXPECT_EQ(g.stride(0), 48u);
    EXPECT_EQ(g.stride(2), 1u);
}

TEST(Field, SampleFunction) {
    const Grid g = make_grid(2, 8, 2.0);
    const Field zero = sample_function([](std::span<const double>) { return 0.0; }, g);
    EXPECT_EQ(zero.max_abs(), 0.0);

    const Field gauss = sample_function(
        [](std::span<const double> x) { return std::exp(-(x[0] * x[0] + x[1] * x[1])); }, g);
    EXPECT_GT(gauss.max(), 0.0);
    EXPECT_LE(gauss.max(), 1.0);
    const Point at = g.point(gauss.argmax());
    EXPECT_EQ(at[0], 0.0);
    EXPECT_EQ(at[1], 0.0);

    const Grid half = make_grid(1, 8, 0.5);
    const Field wave = sample_function([](std::span<const double> x) { return std::cos(2.0 * std::numbers::pi * x[0]); }, half);
    double mean = 0.0;
    for (double v : wave.values()) mean += v;
    EXPECT_NEAR(mean / 8.0, 0.0, 1e-15);
    EXPECT_NEAR(wave[0], -1.0, 1e-15);
    EXPECT_NEAR(wave[4], 1.0, 1e-15);
}

TEST(Field, RejectsNonFiniteSamples) {
    const Grid g = make_grid(1, 4, 1.0);
    EXPECT_THROW(sample_function([](std::span<const double>) { return std::nan(""); }, g), NumericalError);
}

TEST(Field, InterpolationReproducesLinearFunctions) {
    const Grid g = make_grid(2, 16, 2.0);
    const Field f = sample_function([](std::span<const double> x) { return 1.0 + 2.0 * x[0] - 0.5 * x[1]; }, g);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-2.0, g.upper(0));
    for (int k = 0; k < 100; ++k) {
        const Point x{U(rng), U(rng)};
        EXPECT_NEAR(f.interpolate(x), 1.0 + 2.0 * x[0] - 0.5 * x[1], 1e-12);
    }
}

TEST(Reflection, Examples) {
    EXPECT_EQ(reflect_point(Point{1.0, 2.0}, Hyperplane::axis(0, 0.0)), (Point{-1.0, 2.0}));
    EXPECT_EQ(reflect_point(Point{1.0, 2.0}, Hyperplane::diagonal(0, 1, 1, 0.0)), (Point{-2.0, -1.0}));
    EXPECT_EQ(reflect_point(Point{1.0, 2.0}, Hyperplane::axis(0, 1.0)), (Point{1.0, 2.0}));
}

TEST(Reflection, InvolutionOnRandomPoints) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    for (int k = 0; k < 2000; ++k) {
        const Point x{U(rng), U(rng), U(rng)};
        const double lam = U(rng);
        for (const Hyperplane& p : {Hyperplane::axis(k % 3, lam), Hyperplane::diagonal(0, 2, 1, lam),
                                    Hyperplane::diagonal(1, 2, -1, lam)}) {
            const Point twice = reflect_point(reflect_point(x, p), p);
            for (int i = 0; i < 3; ++i) EXPECT_NEAR(twice[i], x[i], 1e-14 * (1.0 + std::abs(x[i])));
        }
    }
}

TEST(Reflection, AxisPlaneThroughPointFixesIt) {
    const Point x{0.3, -1.7};
    EXPECT_EQ(reflect_point(x, Hyperplane::axis(1, x[1])), x);
}

TEST(Reflection, DiagonalMinusSwapsAcrossPlane) {
    // Plane x1 - x2 = 1: the reflection preserves x1 + x2 and maps x1 - x2 to 2 - (x1 - x2).
    const Point x{3.0, 0.5};
    const Point r = reflect_point(x, Hyperplane::diagonal(0, 1, -1, 1.0));
    EXPECT_DOUBLE_EQ(r[0] + r[1], x[0] + x[1]);
    EXPECT_DOUBLE_EQ(r[0] - r[1], 2.0 - (x[0] - x[1]));
}

TEST(Reflection, EvenFieldHasZeroResidual) {
    const Grid g = make_grid(2, 16, 2.0);
    const Field f = sample_function([](std::span<const double> x) { return std::exp(-x[0] * x[0]) * (1.0 + x[1]); }, g);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point x = g.point(k);
        const Point r = reflect_point(x, Hyperplane::axis(0, 0.0));
        if (!g.contains(r)) continue;
        worst = std::max(worst, std::abs(f[k] - f.interpolate(r)));
    }
    EXPECT_EQ(worst, 0.0);
}

TEST(Params, Validation) {
    FractionalParams P;
    EXPECT_NO_THROW(P.validate());
    P.s = 1.0;
    EXPECT_THROW(P.validate(), DomainError);
    P.s = 0.5;
    P.p = 1.0;
    EXPECT_THROW(P.validate(), DomainError);
    P.p = 3.0;
    P.dim = 2;
    EXPECT_DOUBLE_EQ(P.serrin_exponent(), 2.0);
    EXPECT_DOUBLE_EQ(P.scaling_exponent(), 0.5);
    P.dim = 1;
    EXPECT_TRUE(std::isinf(P.serrin_exponent()));
}

TEST(FieldFormat, RoundTrip) {
    const Grid g({4, 8}, {1.0, 2.5});
    Field f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::sin(0.1 * static_cast<double>(k));
    std::stringstream ss;
    write_field(ss, f);
    const std::string bytes = ss.str();
    ASSERT_EQ(bytes.substr(0, 4), "AFLT");
    EXPECT_EQ(bytes.size(), 4u + 4u + 4u + 2u * 12u + 8u * f.size());
    const Field back = read_field(ss);
    EXPECT_TRUE(back.grid() == g);
    for (std::size_t k = 0; k < f.size(); ++k) EXPECT_EQ(back[k], f[k]);
}

TEST(FieldFormat, RejectsBadMagic) {
    std::stringstream ss("XXXX0000");
    try {
        read_field(ss);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_STREQ(e.what(), "bad magic");
    }
}

TEST(FieldFormat, CsvHeaderAndRows) {
    const Grid g = make_grid(2, 4, 1.0);
    const Field f(g);
    std::ostringstream os;
    write_csv(os, f);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "x1,x2,value");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, g.size());
}

TEST(Parallel, ResultIndependentOfWorkerCount) {
    std::vector<double> a(1000), b(1000);
    set_thread_count(1);
    parallel_for(a.size(), [&](std::size_t k) { a[k] = std::sqrt(static_cast<double>(k)); });
    set_thread_count(7);
    parallel_for(b.size(), [&](std::size_t k) { b[k] = std::sqrt(static_cast<double>(k)); });
    set_thread_count(0);
    EXPECT_EQ(a, b);
}

TEST(Parallel, PropagatesExceptions) {
    set_thread_count(4);
    EXPECT_THROW(parallel_for(100, [](std::size_t k) {
                     if (k == 57) throw NumericalError("boom");
                 }),
                 NumericalError);
    set_thread_count(0);
}
