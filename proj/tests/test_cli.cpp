#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "anisofrac/cli.hpp"

namespace fs = std::filesystem;
using anisofrac::cli::json;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("anisofrac_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string config(const json& j, const std::string& name = "config.json") {
        const fs::path p = dir_ / name;
        std::ofstream(p) << j.dump();
        return p.string();
    }

    int run(std::vector<std::string> args) {
        out_.str("");
        err_.str("");
        std::vector<const char*> argv{"anisofrac"};
        for (const auto& a : args) argv.push_back(a.c_str());
        return anisofrac::cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    json summary(const std::string& sub = "out") {
        std::ifstream is(dir_ / sub / "summary.json");
        return json::parse(is);
    }

    std::string out_dir(const std::string& sub = "out") const { return (dir_ / sub).string(); }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

}  // namespace

TEST_F(Cli, ApplyBothMethods) {
    const json cfg{{"dim", 2}, {"s", 0.5}, {"method", "both"}, {"function", "gaussian"},
                   {"grid", {{"n", 32}, {"extent", 6.0}}}, {"tail_decay_exponent", 0.0}};
    ASSERT_EQ(run({"apply", "--config", config(cfg), "--output", out_dir()}), 0) << err_.str();
    const json s = summary();
    EXPECT_EQ(s["command"], "apply");
    EXPECT_LT(s["cross_method_gap"].get<double>(), 0.05);
    const anisofrac::Field f = anisofrac::read_field((dir_ / "out" / "apply.aflt").string());
    EXPECT_EQ(f.size(), 32u * 32u);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "apply_spectral.aflt"));
}

TEST_F(Cli, MissingFieldIsConfigError) {
    const json cfg{{"dim", 2}, {"function", "gaussian"}, {"grid", {{"n", 8}, {"extent", 2.0}}}};
    EXPECT_EQ(run({"apply", "--config", config(cfg), "--output", out_dir()}), 2);
    EXPECT_NE(err_.str().find("missing field: s"), std::string::npos) << err_.str();
}

TEST_F(Cli, UnknownFieldIsConfigError) {
    const json cfg{{"s", 0.5}, {"mode", "self_similarity"}, {"n", 100}, {"bogus", 1}};
    EXPECT_EQ(run({"simulate", "--config", config(cfg), "--output", out_dir()}), 2);
    EXPECT_NE(err_.str().find("unknown field: bogus"), std::string::npos) << err_.str();
}

TEST_F(Cli, BadFieldFileIsConfigError) {
    const fs::path bad = dir_ / "bad.aflt";
    std::ofstream(bad) << "NOPE and some bytes";
    const json cfg{{"dim", 2}, {"s", 0.5}, {"input", bad.string()}};
    EXPECT_EQ(run({"apply", "--config", config(cfg), "--output", out_dir()}), 2);
    EXPECT_NE(err_.str().find("bad magic"), std::string::npos) << err_.str();
}

TEST_F(Cli, OutOfRangeOrderIsConfigError) {
    const json cfg{{"s", 1.2}, {"mode", "self_similarity"}};
    EXPECT_EQ(run({"simulate", "--config", config(cfg), "--output", out_dir()}), 2);
    EXPECT_EQ(run({"frobnicate"}), 2);
    EXPECT_EQ(run({"apply", "--config", (dir_ / "absent.json").string()}), 2);
}

TEST_F(Cli, GreenClosedFormAndHomogeneity) {
    const json cfg{{"dim", 2}, {"s", 0.5}, {"grid", {{"n", 16}, {"extent", 4.0}}}};
    ASSERT_EQ(run({"green", "--config", config(cfg), "--output", out_dir()}), 0) << err_.str();
    const json s = summary();
    EXPECT_LT(s["closed_form_check"]["relative_error"].get<double>(), 1e-10);
    EXPECT_LT(s["homogeneity"]["max_relative_error"].get<double>(), 1e-10);
    const auto t = anisofrac::load_potential_table((dir_ / "out" / "green.aflt").string());
    EXPECT_EQ(t.s, 0.5);
    const json low{{"dim", 1}, {"s", 0.5}, {"grid", {{"n", 16}, {"extent", 4.0}}}};
    EXPECT_EQ(run({"green", "--config", config(low, "low.json"), "--output", out_dir()}), 2);
}

TEST_F(Cli, SolveSerrinRangeRejected) {
    const json cfg{{"dim", 2}, {"s", 0.5}, {"p", 2.0}, {"grid", {{"n", 16}, {"extent", 4.0}}}};
    EXPECT_EQ(run({"solve", "--config", config(cfg), "--output", out_dir()}), 4);
    EXPECT_NE(err_.str().find("nonexistence range"), std::string::npos) << err_.str();
    EXPECT_NE(err_.str().find("Serrin exponent"), std::string::npos);
}

TEST_F(Cli, SolveNotConvergedIsNumericalFailure) {
    const json cfg{{"dim", 2}, {"s", 0.5}, {"p", 3.0}, {"max_iters", 2}, {"grid", {{"n", 32}, {"extent", 4.0}}}};
    EXPECT_EQ(run({"solve", "--config", config(cfg), "--output", out_dir()}), 3);
    EXPECT_FALSE(summary()["converged"].get<bool>());
}

TEST_F(Cli, SolveDeterministic) {
    const json cfg{{"dim", 2}, {"s", 0.5}, {"p", 3.0}, {"grid", {{"n", 32}, {"extent", 4.0}}}};
    const std::string path = config(cfg);
    ASSERT_EQ(run({"solve", "--config", path, "--output", out_dir("a"), "--threads", "1"}), 0) << err_.str();
    ASSERT_EQ(run({"solve", "--config", path, "--output", out_dir("b"), "--threads", "3"}), 0) << err_.str();
    const json a = summary("a");
    const json b = summary("b");
    EXPECT_EQ(a["residual_history"], b["residual_history"]);
    EXPECT_EQ(a["scale_factor"], b["scale_factor"]);
    for (const auto& row : a["moving_planes"]) {
        ASSERT_FALSE(row["critical_lambda"].is_null());
        EXPECT_LE(std::abs(row["critical_lambda"].get<double>()), a["grid"]["spacing"].get<double>());
    }
    std::ifstream csv(dir_ / "a" / "solution.csv");
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "x1,x2,value");
}

TEST_F(Cli, SimulateDeterministicWithSeedOverride) {
    const json cfg{{"s", 0.5}, {"mode", "paths"}, {"dim", 2}, {"n_paths", 3000}, {"horizon", 2e-3}, {"seed", 4}};
    const std::string path = config(cfg);
    ASSERT_EQ(run({"simulate", "--config", path, "--output", out_dir("a")}), 0) << err_.str();
    ASSERT_EQ(run({"simulate", "--config", path, "--output", out_dir("b"), "--threads", "2"}), 0);
    ASSERT_EQ(run({"simulate", "--config", path, "--output", out_dir("c"), "--seed", "5"}), 0);
    EXPECT_EQ(summary("a")["median"], summary("b")["median"]);
    EXPECT_NE(summary("a")["median"], summary("c")["median"]);
    EXPECT_EQ(summary("c")["seed"], 5);
    EXPECT_TRUE(fs::exists(dir_ / "a" / "paths_summary.csv"));
}

TEST_F(Cli, SimulateGenerator) {
    const json cfg{{"s", 0.5}, {"dim", 2}, {"n", 100000}, {"t", 2e-3}, {"seed", 3}};
    ASSERT_EQ(run({"simulate", "--config", config(cfg), "--output", out_dir()}), 0) << err_.str();
    EXPECT_LT(std::abs(summary()["z_score"].get<double>()), 4.0);
}

TEST_F(Cli, VerifyPassingAndFailingSelections) {
    EXPECT_EQ(run({"verify", "--only", "constants", "--output", out_dir()}), 0) << err_.str();
    EXPECT_TRUE(summary()["passed"].get<bool>());
    EXPECT_EQ(run({"verify", "--only", "potential.kernel_reflection", "--output", out_dir()}), 1);
    EXPECT_FALSE(summary()["passed"].get<bool>());
    EXPECT_EQ(run({"verify", "--only", "no-such-check", "--output", out_dir()}), 2);
}
