#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "anisofrac/core.hpp"
#include "anisofrac/levy_sim.hpp"
#include "anisofrac/potential.hpp"
#include "anisofrac/singular_quadrature.hpp"
#include "anisofrac/solver.hpp"
#include "anisofrac/spectral.hpp"
#include "anisofrac/verify.hpp"

namespace anisofrac::cli {

using json = nlohmann::json;

enum ExitCode : int {
    kSuccess = 0,
    kVerificationFailed = 1,
    kConfigError = 2,
    kNumericalFailure = 3,
    kRegimeRejected = 4,
};

/// Flags shared by every subcommand.
struct CommonOptions {
    std::string config_path;
    std::string output_dir = "anisofrac_out";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string only;
};

/// Typed access to one JSON object that records which keys were read, so leftovers can be rejected.
class ConfigReader {
public:
    ConfigReader(const json& doc, std::string prefix = "") : doc_(doc), prefix_(std::move(prefix)) {
        if (!doc_.is_object()) throw ConfigError(prefix_.empty() ? "config must be a JSON object" : "field " + prefix_ + ": expected an object");
    }

    [[nodiscard]] bool has(const std::string& key) const { return doc_.contains(key); }

    template <class T>
    T required(const std::string& key) {
        seen_.insert(key);
        if (!doc_.contains(key)) throw ConfigError("missing field: " + name(key));
        return convert<T>(key);
    }

    template <class T>
    T optional(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!doc_.contains(key)) return fallback;
        return convert<T>(key);
    }

    template <class T>
    std::optional<T> maybe(const std::string& key) {
        seen_.insert(key);
        if (!doc_.contains(key)) return std::nullopt;
        return convert<T>(key);
    }

    ConfigReader child(const std::string& key) {
        seen_.insert(key);
        if (!doc_.contains(key)) throw ConfigError("missing field: " + name(key));
        return ConfigReader(doc_.at(key), name(key));
    }

    /// Marks keys that are accepted but not used by this subcommand.
    void allow(std::initializer_list<const char*> keys) {
        for (const char* k : keys) seen_.insert(k);
    }

    /// Throws on any key that was never requested.
    void finish() const {
        for (const auto& [k, v] : doc_.items())
            if (!seen_.count(k)) throw ConfigError("unknown field: " + name(k));
    }

private:
    [[nodiscard]] std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    template <class T>
    T convert(const std::string& key) const {
        const json& v = doc_.at(key);
        auto bad = [&](const char* what) { return ConfigError("field " + name(key) + ": expected " + what); };
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw bad("a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw bad("an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.get<long long>() < 0) throw bad("a nonnegative integer");
            }
            return v.get<T>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw bad("a number");
            return v.get<T>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw bad("a string");
            return v.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!v.is_array()) throw bad("an array of numbers");
            for (const auto& e : v)
                if (!e.is_number()) throw bad("an array of numbers");
            return v.get<std::vector<double>>();
        } else {
            static_assert(std::is_same_v<T, std::vector<int>>);
            if (!v.is_array()) throw bad("an array of integers");
            for (const auto& e : v)
                if (!e.is_number_integer()) throw bad("an array of integers");
            return v.get<std::vector<int>>();
        }
    }

    const json& doc_;
    std::string prefix_;
    std::set<std::string> seen_;
};

namespace detail {

inline json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path);
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

inline std::filesystem::path output_dir(const CommonOptions& opt) {
    std::filesystem::path dir(opt.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path.string());
    os << std::setw(2) << j << '\n';
}

inline double read_s(ConfigReader& r) {
    const double s = r.required<double>("s");
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("field s: must lie in (0,1)");
    return s;
}

inline int read_dim(ConfigReader& r, int lo) {
    const int d = r.required<int>("dim");
    if (d < lo || d > 8) throw ConfigError("field dim: must lie in [" + std::to_string(lo) + ", 8]");
    return d;
}

inline Normalization read_normalization(ConfigReader& r) {
    const std::string n = r.optional<std::string>("normalization", "probabilistic");
    if (n == "probabilistic") return Normalization::Probabilistic;
    if (n == "plain") return Normalization::Plain;
    throw ConfigError("field normalization: expected \"probabilistic\" or \"plain\"");
}

inline Grid read_grid(ConfigReader& r, int dim) {
    ConfigReader g = r.child("grid");
    const int n = g.required<int>("n");
    const double extent = g.required<double>("extent");
    g.finish();
    if (n < 4) throw ConfigError("field grid.n: must be >= 4");
    if (!(extent > 0.0) || !std::isfinite(extent)) throw ConfigError("field grid.extent: must be positive");
    return make_grid(dim, static_cast<std::size_t>(n), extent);
}

inline std::uint64_t read_seed(ConfigReader& r, const CommonOptions& opt) {
    const auto from_file = r.maybe<std::uint64_t>("seed");
    return opt.seed.value_or(from_file.value_or(1));
}

inline json params_json(const FractionalParams& P) {
    return {{"dim", P.dim}, {"s", P.s}, {"p", P.p}, {"normalization", to_string(P.normalization)}};
}

inline json grid_json(const Grid& g) {
    return {{"n", g.n(0)}, {"extent", g.extent(0)}, {"spacing", g.spacing(0)}};
}

/// Builtin test functions: exp(-|x - c|^2 / w^2), the smooth unit bump, or cos(2 pi k.x).
inline ScalarFn builtin_function(ConfigReader& r, int dim, const std::string& name) {
    if (name == "gaussian") {
        std::vector<double> c = r.optional<std::vector<double>>("center", std::vector<double>(dim, 0.0));
        const double w = r.optional<double>("width", 1.0);
        if (static_cast<int>(c.size()) != dim) throw ConfigError("field center: length must equal dim");
        if (!(w > 0.0)) throw ConfigError("field width: must be positive");
        return verify::detail::gaussian(c, w);
    }
    if (name == "bump") return whole_space_bump();
    if (name == "plane_wave") {
        const std::vector<int> k = r.required<std::vector<int>>("wavevector");
        if (static_cast<int>(k.size()) != dim) throw ConfigError("field wavevector: length must equal dim");
        return [k](std::span<const double> x) {
            double phase = 0.0;
            for (std::size_t i = 0; i < k.size(); ++i) phase += k[i] * x[i];
            return std::cos(2.0 * std::numbers::pi * phase);
        };
    }
    throw ConfigError("field function: expected \"gaussian\", \"bump\" or \"plane_wave\"");
}

inline void apply_threads(const CommonOptions& opt) {
    if (opt.threads) {
        set_thread_count(*opt.threads);
        return;
    }
    if (const char* env = std::getenv("ANISOFRAC_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0') throw ConfigError("ANISOFRAC_THREADS must be a nonnegative integer");
        set_thread_count(static_cast<unsigned>(v));
    }
}

}  // namespace detail

/// Applies the operator to a builtin function or a field file; writes the result field and a JSON summary.
inline int cmd_apply(const json& doc, const CommonOptions& opt, std::ostream& out) {
    ConfigReader r(doc);
    FractionalParams P;
    P.dim = detail::read_dim(r, 1);
    P.s = detail::read_s(r);
    P.normalization = detail::read_normalization(r);
    const std::string method = r.optional<std::string>("method", "quadrature");
    if (method != "quadrature" && method != "spectral" && method != "both")
        throw ConfigError("field method: expected \"quadrature\", \"spectral\" or \"both\"");
    const auto input = r.maybe<std::string>("input");
    const auto function = r.maybe<std::string>("function");
    if (input.has_value() == function.has_value()) throw ConfigError("exactly one of the fields function and input is required");

    Field u;
    ScalarFn f;
    QuadratureConfig qcfg;
    qcfg.tail_decay_exponent = r.optional<double>("tail_decay_exponent", 0.0);
    if (input) {
        r.allow({"grid"});
        u = read_field(*input);
        if (u.grid().dim() != P.dim) throw ConfigError("field input: file dimension differs from dim");
        if (!u.all_finite()) throw ConfigError("field input: values must be finite");
    } else {
        const Grid g = detail::read_grid(r, P.dim);
        f = detail::builtin_function(r, P.dim, *function);
        u = sample_function(f, g);
    }
    r.allow({"seed", "center", "width", "wavevector"});
    r.finish();
    P.validate();
    qcfg.validate();

    const Grid& g = u.grid();
    std::optional<Field> quad;
    std::optional<Field> spec;
    if (method != "spectral") {
        Field q(g);
        parallel_for(g.size(), [&](std::size_t k) {
            q[k] = input ? apply_operator(u, g.point(k), P, qcfg) : apply_operator(f, g.point(k), P, qcfg);
        });
        if (!q.all_finite()) throw NumericalError("apply: quadrature produced non-finite values");
        quad = std::move(q);
    }
    if (method != "quadrature") {
        Field sp = apply_spectral(u, P.s);
        const double factor = P.normalization == Normalization::Plain ? -2.0 / cs_constant(P.s) : -1.0;
        for (auto& v : sp.values()) v *= factor;
        spec = std::move(sp);
    }

    const auto dir = detail::output_dir(opt);
    const Field& primary = quad ? *quad : *spec;
    write_field((dir / "apply.aflt").string(), primary);
    json summary{{"command", "apply"},
                 {"method", method},
                 {"params", detail::params_json(P)},
                 {"grid", detail::grid_json(g)},
                 {"source", input ? *input : *function},
                 {"max_abs", primary.max_abs()}};
    if (quad && spec) {
        double gap = 0.0;
        double scale = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const Point x = g.point(k);
            bool interior = true;
            for (int i = 0; i < g.dim(); ++i) interior = interior && std::abs(x[i]) <= 0.5 * g.extent(i);
            if (!interior) continue;
            gap = std::max(gap, std::abs((*quad)[k] - (*spec)[k]));
            scale = std::max(scale, std::abs((*quad)[k]));
        }
        summary["cross_method_gap"] = gap / std::max(scale, 1e-300);
        write_field((dir / "apply_spectral.aflt").string(), *spec);
    }
    detail::write_json(dir / "summary.json", summary);
    out << std::setw(2) << summary << '\n';
    return kSuccess;
}

/// Tabulates the potential on a grid and reports closed-form and homogeneity checks.
inline int cmd_green(const json& doc, const CommonOptions& opt, std::ostream& out) {
    ConfigReader r(doc);
    const int dim = detail::read_dim(r, 1);
    const double s = r.required<double>("s");
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("field s: must lie in (0,1]");
    if (!(2.0 * s < dim)) throw ConfigError("field s: the potential requires 2s < dim");
    const auto method_name = r.maybe<std::string>("method");
    const CellPolicy policy = parse_cell_policy(r.optional<std::string>("cell_policy", "analytic_cell_average"));
    const Grid g = detail::read_grid(r, dim);
    r.allow({"seed"});
    r.finish();
    const GreenMethod method = method_name ? parse_green_method(*method_name) : default_green_method(s, dim);

    const PotentialTable table = green_table(g, s, method, policy);
    if (!table.field.all_finite()) throw NumericalError("green: table contains non-finite values");
    const auto dir = detail::output_dir(opt);
    save_potential_table(table, (dir / "green.aflt").string());

    json summary{{"command", "green"},
                 {"method", to_string(method)},
                 {"cell_policy", to_string(policy)},
                 {"params", {{"dim", dim}, {"s", s}}},
                 {"grid", detail::grid_json(g)},
                 {"max_abs", table.field.max_abs()}};
    if (dim == 2 && s == 0.5) {
        const Point x{1.0, 1.0};
        const double v = green_value(x, s, dim, method);
        const double expect = 1.0 / (4.0 * std::numbers::pi);
        summary["closed_form_check"] = {{"point", x}, {"value", v}, {"expected", expect},
                                        {"relative_error", std::abs(v - expect) / expect}};
    }
    std::vector<Point> pts;
    for (int k = 0; k < 3; ++k) {
        Point x(dim);
        for (int i = 0; i < dim; ++i) x[i] = 0.3 + 0.45 * ((k + 2 * i) % 4) + 0.1 * k;
        pts.push_back(std::move(x));
    }
    double worst = 0.0;
    const std::vector<double> lambdas{0.5, 2.0, 3.0};
    for (const Point& x : pts) {
        const double base = green_value(x, s, dim, method);
        for (double lam : lambdas) {
            Point y = x;
            for (auto& v : y) v *= lam;
            const double expect = std::pow(lam, 2.0 * s - dim) * base;
            worst = std::max(worst, std::abs(green_value(y, s, dim, method) - expect) / std::abs(expect));
        }
    }
    summary["homogeneity"] = {{"degree", 2.0 * s - dim}, {"lambdas", lambdas}, {"points", pts},
                              {"max_relative_error", worst}};
    detail::write_json(dir / "summary.json", summary);
    out << std::setw(2) << summary << '\n';
    return kSuccess;
}

/// Runs the fixed-point solver and writes the solution bundle with symmetry, plane and decay diagnostics.
inline int cmd_solve(const json& doc, const CommonOptions& opt, std::ostream& out) {
    ConfigReader r(doc);
    FractionalParams P;
    P.dim = detail::read_dim(r, 2);
    P.s = detail::read_s(r);
    P.p = r.required<double>("p");
    if (!(P.p > 1.0) || !std::isfinite(P.p)) throw ConfigError("field p: must be > 1");
    const Grid g = detail::read_grid(r, P.dim);
    SolveConfig sc;
    sc.max_iters = r.optional<int>("max_iters", sc.max_iters);
    sc.tol_residual = r.optional<double>("tol_residual", sc.tol_residual);
    sc.damping = r.optional<double>("damping", sc.damping);
    sc.init_width = r.optional<double>("init_width", sc.init_width);
    const std::string init = r.optional<std::string>("init", "gaussian");
    if (init == "gaussian") {
        sc.init = InitKind::GaussianBump;
    } else if (init == "anisotropic") {
        sc.init = InitKind::AnisotropicBump;
        sc.axis_weights = r.required<std::vector<double>>("axis_weights");
    } else {
        throw ConfigError("field init: expected \"gaussian\" or \"anisotropic\"");
    }
    if (const auto m = r.maybe<std::string>("method")) sc.method = parse_green_method(*m);
    r.allow({"seed", "normalization", "axis_weights"});
    r.finish();
    try {
        sc.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("solver settings: ") + e.what());
    }

    const SolveResult res = solve_semilinear(P, g, sc);
    const SymmetryReport sym = symmetry_report(res.field, Point(P.dim, 0.0));
    const DecayFit decay = decay_fit(res.field, P);
    json planes = json::array();
    for (int i = 0; i < P.dim; ++i) {
        const Hyperplane kind = Hyperplane::axis(i, 0.0);
        const PlaneScan scan = moving_plane_scan(res.field, kind, scan_offsets(g, kind, 41));
        json row{{"axis", i + 1}};
        row["critical_lambda"] = scan.critical_lambda ? json(*scan.critical_lambda) : json(nullptr);
        planes.push_back(row);
    }
    json diag = json::array();
    for (const auto& d : sym.diagonal_residuals)
        diag.push_back({{"i", d.i + 1}, {"j", d.j + 1}, {"sign", d.sign}, {"residual", d.residual}});

    const auto dir = detail::output_dir(opt);
    write_field((dir / "solution.aflt").string(), res.field);
    write_csv((dir / "solution.csv").string(), res.field);
    json summary{{"command", "solve"},
                 {"params", detail::params_json(P)},
                 {"grid", detail::grid_json(g)},
                 {"converged", res.converged},
                 {"iterations", res.iterations},
                 {"final_residual", res.final_residual()},
                 {"monotone_after_burn_in", res.monotone_after_burn_in},
                 {"scale_factor", res.scale_factor},
                 {"length_scale", res.length_scale},
                 {"residual_history", res.residual_history},
                 {"symmetry",
                  {{"axis_residuals", sym.axis_residuals},
                   {"diagonal_residuals", diag},
                   {"radial_deviation", sym.radial_deviation}}},
                 {"moving_planes", planes},
                 {"decay", {{"exponent", decay.exponent}, {"threshold", decay.threshold}, {"nodes", decay.nodes}}}};
    detail::write_json(dir / "summary.json", summary);
    out << "converged=" << (res.converged ? "true" : "false") << " iterations=" << res.iterations
        << " residual=" << res.final_residual() << " radial_deviation=" << sym.radial_deviation << '\n';
    return res.converged ? kSuccess : kNumericalFailure;
}

/// Runs the property checks whose name or topic contains the filter; prints one row per check.
inline int cmd_verify(const json& doc, const CommonOptions& opt, std::ostream& out) {
    ConfigReader r(doc);
    const std::string only = opt.only.empty() ? r.optional<std::string>("only", "") : opt.only;
    r.allow({"seed"});
    r.finish();
    json rows = json::array();
    bool all_passed = true;
    std::size_t count = 0;
    verify::run_checks(only, [&](const verify::CheckResult& c) {
        ++count;
        all_passed = all_passed && c.passed;
        out << std::left << std::setw(40) << c.name << (c.passed ? "PASS" : "FAIL") << "  " << std::right
            << std::fixed << std::setprecision(2) << std::setw(7) << c.seconds << "s  " << c.detail << '\n'
            << std::defaultfloat;
        out.flush();
        rows.push_back({{"name", c.name}, {"topic", c.topic}, {"passed", c.passed}, {"seconds", c.seconds},
                        {"detail", c.detail}});
    });
    if (count == 0) throw ConfigError("no check matches --only \"" + only + "\"");
    const auto dir = detail::output_dir(opt);
    json summary{{"command", "verify"}, {"filter", only}, {"checks", rows}, {"passed", all_passed}};
    detail::write_json(dir / "summary.json", summary);
    out << count << " checks, " << (all_passed ? "all passed" : "failures present") << '\n';
    return all_passed ? kSuccess : kVerificationFailed;
}

/// Monte Carlo workflows of the stable process: generator estimate, path ensembles, self-similarity.
inline int cmd_simulate(const json& doc, const CommonOptions& opt, std::ostream& out) {
    ConfigReader r(doc);
    const double s = detail::read_s(r);
    const std::string mode = r.optional<std::string>("mode", "generator");
    const std::uint64_t seed = detail::read_seed(r, opt);
    json summary{{"command", "simulate"}, {"mode", mode}, {"s", s}, {"seed", seed}};

    if (mode == "generator") {
        const int dim = detail::read_dim(r, 1);
        const Point x = r.optional<std::vector<double>>("point", Point(dim, 0.0));
        if (static_cast<int>(x.size()) != dim) throw ConfigError("field point: length must equal dim");
        const double t = r.optional<double>("t", 1e-3);
        const auto n = r.optional<std::uint64_t>("n", 1000000);
        if (!(t > 0.0)) throw ConfigError("field t: must be positive");
        if (n < 2) throw ConfigError("field n: must be >= 2");
        const ScalarFn u = detail::builtin_function(r, dim, r.optional<std::string>("function", "gaussian"));
        r.allow({"center", "width", "wavevector"});
        r.finish();
        FractionalParams P;
        P.dim = dim;
        P.s = s;
        const GeneratorEstimate est = richardson_generator(u, x, t, n, s, seed);
        const double quad = apply_operator(u, x, P, {});
        summary["dim"] = dim;
        summary["point"] = x;
        summary["t"] = {t, 2.0 * t};
        summary["n"] = n;
        summary["estimate"] = est.estimate;
        summary["stderr"] = est.stderr_;
        summary["quadrature"] = quad;
        summary["z_score"] = (est.estimate - quad) / est.stderr_;
    } else if (mode == "paths") {
        const int dim = detail::read_dim(r, 1);
        StablePathConfig pc;
        pc.s = s;
        pc.seed = seed;
        pc.dt = r.optional<double>("dt", pc.dt);
        pc.horizon = r.optional<double>("horizon", pc.horizon);
        pc.n_paths = r.optional<std::uint64_t>("n_paths", pc.n_paths);
        const Point x0 = r.optional<std::vector<double>>("x0", Point(dim, 0.0));
        if (static_cast<int>(x0.size()) != dim) throw ConfigError("field x0: length must equal dim");
        r.finish();
        try {
            pc.validate();
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
        const PathEnsemble ens = simulate_paths(x0, pc);
        const EnsembleSummary sm = summarize(ens, x0);
        const auto dir = detail::output_dir(opt);
        std::ofstream csv(dir / "paths_summary.csv");
        if (!csv) throw ConfigError("cannot write paths_summary.csv");
        write_summary_csv(sm, csv);
        summary["dim"] = dim;
        summary["n_paths"] = pc.n_paths;
        summary["steps"] = pc.steps();
        summary["mean"] = sm.mean;
        summary["median"] = sm.median;
        summary["iqr"] = sm.iqr;
    } else if (mode == "self_similarity") {
        const double dt = r.optional<double>("dt", 1e-3);
        const auto n = r.optional<std::uint64_t>("n", 20000);
        r.allow({"dim"});
        r.finish();
        const KsResult ks = self_similarity_test(s, dt, n, seed);
        summary["n"] = n;
        summary["ks_statistic"] = ks.statistic;
        summary["p_value"] = ks.p_value;
    } else {
        throw ConfigError("field mode: expected \"generator\", \"paths\" or \"self_similarity\"");
    }
    detail::write_json(detail::output_dir(opt) / "summary.json", summary);
    out << std::setw(2) << summary << '\n';
    return kSuccess;
}

/// Parses argv, dispatches and maps library errors to exit codes.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Anisotropic fractional Laplacian toolkit"};
    app.require_subcommand(1);
    CommonOptions opt;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON run configuration");
        sub->add_option("--output", opt.output_dir, "Directory for output files");
        sub->add_option("--seed", seed, "Random seed (overrides the config)");
        sub->add_option("--threads", threads, "Worker cap (0 = hardware); falls back to ANISOFRAC_THREADS");
    };
    struct Entry {
        const char* name;
        const char* help;
        int (*fn)(const json&, const CommonOptions&, std::ostream&);
    };
    const Entry entries[] = {
        {"apply", "Apply the operator to a builtin function or field file", cmd_apply},
        {"green", "Tabulate the potential on a grid", cmd_green},
        {"solve", "Solve the semilinear equation and report symmetry diagnostics", cmd_solve},
        {"verify", "Run the property checks", cmd_verify},
        {"simulate", "Stable-process Monte Carlo workflows", cmd_simulate},
    };
    std::vector<CLI::App*> subs;
    for (const Entry& e : entries) {
        CLI::App* sub = app.add_subcommand(e.name, e.help);
        add_common(sub);
        if (std::string_view(e.name) == "verify") sub->add_option("--only", opt.only, "Substring filter on check names and topics");
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }
    for (std::size_t k = 0; k < subs.size(); ++k) {
        if (!subs[k]->parsed()) continue;
        if (subs[k]->count("--seed")) opt.seed = seed;
        if (subs[k]->count("--threads")) opt.threads = threads;
        try {
            detail::apply_threads(opt);
            const json doc = detail::load_config(opt.config_path);
            return entries[k].fn(doc, opt, out);
        } catch (const ConfigError& e) {
            err << "config error: " << e.what() << '\n';
            return kConfigError;
        } catch (const RegimeError& e) {
            err << "rejected: " << e.what() << '\n';
            return kRegimeRejected;
        } catch (const DomainError& e) {
            err << "config error: " << e.what() << '\n';
            return kConfigError;
        } catch (const NumericalError& e) {
            err << "numerical failure: " << e.what() << '\n';
            return kNumericalFailure;
        } catch (const std::exception& e) {
            err << "numerical failure: " << e.what() << '\n';
            return kNumericalFailure;
        }
    }
    return kConfigError;
}

}  // namespace anisofrac::cli
