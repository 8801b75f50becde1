#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "anisofrac/levy_sim.hpp"
#include "anisofrac/verify.hpp"

using namespace anisofrac;

TEST(UnitStable, HalfOrderIsStandardCauchy) {
    auto v = stable_samples(0.5, 400000, 3);
    std::sort(v.begin(), v.end());
    EXPECT_NEAR(v[v.size() / 2], 0.0, 0.01);
    EXPECT_NEAR(v[v.size() / 4], -1.0, 0.02);
    EXPECT_NEAR(v[3 * v.size() / 4], 1.0, 0.02);
}

TEST(UnitStable, CharacteristicFunction) {
    for (double s : {0.3, 0.6, 0.85}) {
        const auto v = stable_samples(s, 400000, 17);
        for (double theta : {0.5, 1.0, 2.0}) {
            double acc = 0.0;
            for (double x : v) acc += std::cos(theta * x);
            acc /= static_cast<double>(v.size());
            // Each cos term has variance below 1/2.
            EXPECT_NEAR(acc, std::exp(-std::pow(theta, 2.0 * s)), 4.0 * std::sqrt(0.5 / v.size())) << s << ' ' << theta;
        }
    }
}

TEST(UnitStable, TailIndex) {
    for (double s : {0.4, 0.5, 0.7}) {
        const double hill = hill_tail_index(stable_samples(s, 1000000, 5), 0.01);
        EXPECT_NEAR(hill, 2.0 * s, 0.1 * 2.0 * s) << s;
    }
    const auto r = verify::stable_tail_and_symmetry();
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Increment, Validation) {
    std::mt19937_64 rng(1);
    EXPECT_THROW(stable_increment(1.0, 0.1, rng), DomainError);
    EXPECT_THROW(stable_increment(0.5, 0.0, rng), DomainError);
    StablePathConfig cfg;
    cfg.horizon = 0.5 * cfg.dt;
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg = StablePathConfig{};
    cfg.n_paths = 0;
    EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(SelfSimilarity, KolmogorovSmirnov) {
    for (double s : {0.3, 0.5, 0.8}) {
        const KsResult r = self_similarity_test(s, 1e-3, 100000, 7);
        EXPECT_GT(r.p_value, 0.01) << s;
    }
    const KsResult same = ks_two_sample({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
    EXPECT_EQ(same.statistic, 0.0);
    const KsResult apart = ks_two_sample({0.0, 0.1, 0.2, 0.3}, {5.0, 5.1, 5.2, 5.3});
    EXPECT_DOUBLE_EQ(apart.statistic, 1.0);
    EXPECT_NEAR(kolmogorov_survival(1.36), 0.0494, 1e-3);
}

TEST(Paths, EndpointsAndSummary) {
    StablePathConfig cfg;
    cfg.n_paths = 20000;
    cfg.dt = 1e-3;
    cfg.horizon = 4e-3;
    cfg.keep_paths = true;
    cfg.seed = 12;
    const Point x0{1.0, -2.0};
    const PathEnsemble e = simulate_paths(x0, cfg);
    EXPECT_EQ(e.steps, 4u);
    EXPECT_EQ(e.endpoints.size(), 2u * cfg.n_paths);
    EXPECT_EQ(e.paths[0], 1.0);
    EXPECT_EQ(e.paths[1], -2.0);
    EXPECT_EQ(e.paths[(4) * 2], e.endpoints[0]);
    const EnsembleSummary sm = summarize(e, x0);
    // Cauchy law with scale horizon: quartiles at +-horizon.
    for (int i = 0; i < 2; ++i) {
        EXPECT_NEAR(sm.median[i], 0.0, 3e-4);
        EXPECT_NEAR(sm.iqr[i], 2.0 * cfg.horizon, 3e-4);
    }
    std::ostringstream os;
    write_summary_csv(sm, os);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "axis,mean,median,iqr");
}

TEST(Paths, ReproducibleAcrossThreadCounts) {
    const auto r = verify::stable_reproducibility();
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Geometry, LargeJumpsAlongAxesAndIndependentSigns) {
    const AxisConcentration ac = axis_concentration(3, 0.5, 400000, 21);
    EXPECT_GT(ac.fraction, 0.95);
    EXPECT_GT(ac.large_steps, 300u);
    const auto r = verify::stable_axis_geometry();
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Generator, ConstantGivesZero) {
    const ScalarFn one = [](std::span<const double>) { return 3.0; };
    const GeneratorEstimate g = richardson_generator(one, Point{0.1, 0.2}, 1e-3, 1000, 0.5, 1);
    EXPECT_EQ(g.estimate, 0.0);
    EXPECT_EQ(g.stderr_, 0.0);
}

TEST(Generator, LinearInTheFunction) {
    const ScalarFn f = verify::detail::gaussian({0.0, 0.0});
    const ScalarFn h = verify::detail::gaussian({0.5, 0.5}, 0.5);
    const ScalarFn mix = [&](std::span<const double> x) { return 2.0 * f(x) - 0.5 * h(x); };
    const Point x{0.1, 0.0};
    const double a = empirical_generator(f, x, 1e-3, 5000, 0.6, 9).estimate;
    const double b = empirical_generator(h, x, 1e-3, 5000, 0.6, 9).estimate;
    const double c = empirical_generator(mix, x, 1e-3, 5000, 0.6, 9).estimate;
    EXPECT_NEAR(c, 2.0 * a - 0.5 * b, 1e-9 * (std::abs(a) + std::abs(b)));
}

TEST(Generator, MatchesQuadratureOnGaussian) {
    const std::vector<double> ts{2e-3};
    const double z = verify::generator_z_score(verify::detail::gaussian({0.0, 0.0}), Point{0.0, 0.0}, 0.5, 200000, 77, ts);
    EXPECT_LT(z, 3.0);
}

TEST(Generator, CalibrationNearAnalyticConstant) {
    const ScalarFn f = verify::detail::gaussian({0.0, 0.0});
    const Point x{0.0, 0.0};
    const double ref = apply_operator(f, x, verify::detail::params(2, 0.5), {});
    const double c = estimate_scale_calibration(f, x, ref, 2e-3, 400000, 0.5, 4);
    EXPECT_NEAR(c, analytic_scale_calibration(0.5), 0.05);
}

TEST(Generator, Validation) {
    const ScalarFn f = verify::detail::gaussian({0.0, 0.0});
    EXPECT_THROW(richardson_generator(f, Point{0.0}, 0.0, 10, 0.5, 1), DomainError);
    EXPECT_THROW(empirical_generator(f, Point{0.0}, 1e-3, 1, 0.5, 1), DomainError);
    EXPECT_THROW(estimate_scale_calibration(f, Point{0.0}, 0.0, 1e-3, 10, 0.5, 1), DomainError);
}
