// hjnash: command-line driver for the two-player HJ game tools.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "hjnash/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hjnash;

namespace {

struct Args {
    std::string spec_path;
    std::string out_dir;
    std::string solution_path;
    double nu_max = 256.0;
    double tol = -1.0;
    double horizon = 40.0;
    std::size_t grid_n = 0;
    std::uint64_t seed = 0;
    std::vector<double> kappa;
    double alpha = 0.5;
    double L = 5.0;
    std::vector<double> p0;
    std::vector<double> ys;
};

class Run {
public:
    Run(std::string command, const Args& a) : a_(a) {
        m_.command = std::move(command);
        m_.seed = a.seed;
    }

    void param(const std::string& k, const std::string& v) { m_.params[k] = v; }
    void param(const std::string& k, double v) { m_.params[k] = format_double(v); }

    void set_spec(const GameSpec& spec) { m_.spec_hash = spec_hash(spec); }

    void emit(const std::string& name, const std::string& contents) {
        if (a_.out_dir.empty()) return;
        fs::create_directories(a_.out_dir);
        write_file((fs::path(a_.out_dir) / name).string(), contents);
        m_.outputs.push_back(name);
    }

    void finish() {
        if (a_.out_dir.empty()) return;
        m_.outputs.push_back("manifest.json");
        write_file((fs::path(a_.out_dir) / "manifest.json").string(), to_json(m_).dump(2) + "\n");
    }

private:
    const Args& a_;
    RunManifest m_;
};

GameSpec require_spec(const Args& a) {
    if (a.spec_path.empty()) throw InputError("--spec is required");
    return load_game_spec(a.spec_path);
}

// Assumption violations stop the pipeline with exit code 2.
void require_valid(const GameSpec& spec) {
    const auto rep = validate_game(spec);
    if (!rep.ok()) {
        const auto& v = rep.violations.front();
        std::ostringstream os;
        os << rep.violations.size() << " assumption violation(s); first: player " << v.player + 1 << " " << v.quantity
           << " at x = " << v.x << " (" << v.value << " vs " << v.bound << ")";
        throw DomainError(os.str());
    }
}

PiecewiseSolution solve_or_load(const Args& a, const GameSpec& spec) {
    if (!a.solution_path.empty()) {
        auto sol = solution_from_json(json::parse(read_file(a.solution_path)));
        sol.audit = audit(sol, spec);
        return sol;
    }
    require_valid(spec);
    ConstructOptions opt;
    opt.nu_max = a.nu_max;
    if (a.tol > 0.0) opt.tol = a.tol;
    return construct_admissible(spec, opt);
}

void print_audit(const std::string& label, const AdmissibilityReport& rep) {
    std::string reasons;
    for (const auto& f : rep.failures) reasons += (reasons.empty() ? "" : ",") + f;
    std::printf("%s: audit %s%s%s\n", label.c_str(), rep.pass ? "PASS" : "FAIL", reasons.empty() ? "" : " ",
                reasons.c_str());
}

SlopeSource slopes_for(const Args& a, std::optional<GameSpec>& storage) {
    if (a.kappa.size() == 2) return SlopeSource::frozen({a.kappa[0], a.kappa[1]});
    storage = require_spec(a);
    return SlopeSource::from_game(*storage);
}

int cmd_validate(const Args& a) {
    const GameSpec spec = require_spec(a);
    Run run("validate", a);
    run.set_spec(spec);
    const auto rep = validate_game(spec);
    json out = to_json(rep);
    if (spec.players == 2) out["regime"] = to_json(classify_regime(spec));
    std::cout << out.dump(2) << "\n";
    run.emit("validation.json", out.dump(2) + "\n");
    run.finish();
    return rep.ok() ? 0 : 2;
}

int cmd_solve(const Args& a) {
    const GameSpec spec = require_spec(a);
    Run run("solve", a);
    run.set_spec(spec);
    run.param("nu_max", a.nu_max);
    if (a.tol > 0.0) run.param("tol", a.tol);
    const auto sol = solve_or_load(a, spec);
    std::printf("method %s, nu %g, %zu grid points\n", sol.method.c_str(), sol.nu, sol.grid.size());
    if (sol.audit) print_audit("solution", *sol.audit);
    run.emit("solution.json", to_json(sol).dump(2) + "\n");
    run.emit("solution.csv", solution_csv(sol));
    run.finish();
    return 0;
}

int cmd_portrait(const Args& a) {
    std::optional<GameSpec> spec;
    const SlopeSource src = slopes_for(a, spec);
    Run run("portrait", a);
    if (spec) run.set_spec(*spec);
    PortraitOptions opt;
    opt.seed = a.seed;
    if (a.grid_n > 0) opt.n1 = opt.n2 = a.grid_n;
    run.param("grid_n", std::to_string(opt.n1));
    const auto pts = portrait(src, opt);
    std::map<std::string, int> counts;
    for (const auto& pt : pts) ++counts[to_string(pt.forward.kind) + "/" + to_string(pt.backward.kind)];
    for (const auto& [k, v] : counts) std::printf("%-28s %d\n", k.c_str(), v);
    run.emit("portrait.csv", portrait_csv(pts));
    run.finish();
    return 0;
}

int cmd_orbit(const Args& a) {
    if (a.p0.size() != 2) throw InputError("--p0 needs two values");
    std::optional<GameSpec> spec;
    const SlopeSource src = slopes_for(a, spec);
    Run run("orbit", a);
    if (spec) run.set_spec(*spec);
    run.param("p0", format_double(a.p0[0]) + "," + format_double(a.p0[1]));
    const Orbit orbit = integrate_orbit(src, {a.p0[0], a.p0[1]});
    const XWindow w = x_window(orbit);
    json out = {{"forward", to_json(orbit.forward)},
                {"backward", to_json(orbit.backward)},
                {"x_window", {{"x_min", w.x_min}, {"x_max", w.x_max}, {"min_end", to_string(w.min_end)},
                              {"max_end", to_string(w.max_end)}}}};
    std::cout << out.dump(2) << "\n";
    run.emit("orbit.json", out.dump(2) + "\n");
    run.emit("orbit.csv", orbit_csv(orbit));
    run.finish();
    return 0;
}

int cmd_simulate(const Args& a) {
    if (a.ys.size() != 1) throw InputError("--y needs one initial state");
    const GameSpec spec = require_spec(a);
    Run run("simulate", a);
    run.set_spec(spec);
    run.param("y", a.ys[0]);
    run.param("horizon", a.horizon);
    const auto sol = solve_or_load(a, spec);
    SimulateOptions so;
    so.truncate_on_exit = true;
    const Trajectory tr = simulate(sol, spec, a.ys[0], a.horizon, so);
    const CostBreakdown cost = evaluate_cost(spec, tr, sol);
    const Vec2 u = sol.u_at(a.ys[0]);
    json out = {{"trajectory", to_json(tr)}, {"cost", to_json(cost)}, {"u", {u[0], u[1]}}};
    std::cout << out.dump(2) << "\n";
    run.emit("trajectory.csv", trajectory_csv(spec, tr));
    run.emit("cost.json", out.dump(2) + "\n");
    run.finish();
    return 0;
}

int cmd_verify(const Args& a) {
    const GameSpec spec = require_spec(a);
    Run run("verify", a);
    run.set_spec(spec);
    const double tol = a.tol > 0.0 ? a.tol : 1e-2;
    run.param("tol", tol);
    const auto sol = solve_or_load(a, spec);
    std::vector<double> ys = a.ys;
    if (ys.empty()) {
        std::mt19937_64 rng(a.seed);
        const double r = std::min(2.0, 0.4 * sol.x_max());
        std::uniform_real_distribution<double> dist(-r, r);
        for (int i = 0; i < 10; ++i) ys.push_back(dist(rng));
    }
    DpOptions dp;
    if (a.grid_n > 0) dp.grid_n = a.grid_n;
    run.param("grid_n", std::to_string(dp.grid_n));
    const NashReport rep = check_nash(spec, sol, ys, tol, dp);
    std::printf("nash check %s (max gap %.3g, error estimate %.3g / %.3g)\n", rep.pass ? "PASS" : "FAIL",
                [&] {
                    double g = 0.0;
                    for (const auto& p : rep.points) g = std::max(g, std::abs(p.gap));
                    return g;
                }(),
                rep.error_estimate[0], rep.error_estimate[1]);
    run.emit("nash_report.json", to_json(rep).dump(2) + "\n");
    run.emit("nash_report.csv", nash_csv(rep));
    run.finish();
    return 0;
}

int cmd_example2(const Args& a) {
    if (a.kappa.size() != 1) throw InputError("--kappa needs one value");
    Run run("example2", a);
    run.param("kappa", a.kappa[0]);
    run.param("alpha", a.alpha);
    run.param("L", a.L);
    const GameSpec spec = linear_example_game(a.kappa[0], a.L);
    run.set_spec(spec);
    const auto sol = periodic_solution(a.kappa[0], a.alpha, a.L);
    std::printf("period %.12g, closure error %.3g\n", sol.period, sol.closure_error);
    if (sol.audit) print_audit("periodic solution", *sol.audit);
    run.emit("solution.json", to_json(sol).dump(2) + "\n");
    run.emit("solution.csv", solution_csv(sol));
    run.finish();
    return 0;
}

int cmd_counterexamples(const Args& a) {
    Run run("counterexamples", a);
    json out = json::array();
    for (const auto& c : rejected_candidates()) {
        print_audit(c.name, *c.solution.audit);
        out.push_back({{"name", c.name}, {"expected", c.expected_failure}, {"audit", to_json(*c.solution.audit)}});
    }
    run.emit("counterexamples.json", out.dump(2) + "\n");
    run.finish();
    return 0;
}

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Input: return 1;
        case ErrorCategory::Assumption: return 2;
        case ErrorCategory::Numerical: return 3;
    }
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nash equilibria of two-player scalar differential games via the HJ system"};
    app.require_subcommand(1);
    Args a;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--spec", a.spec_path, "game description (JSON)");
        sub->add_option("--out", a.out_dir, "output directory");
        sub->add_option("--seed", a.seed, "random seed");
    };
    auto* validate = app.add_subcommand("validate", "check the standing assumptions");
    common(validate);
    auto* solve = app.add_subcommand("solve", "construct the admissible solution");
    common(solve);
    solve->add_option("--nu-max", a.nu_max, "largest truncation radius");
    solve->add_option("--tol", a.tol, "convergence tolerance in nu");
    auto* portrait_cmd = app.add_subcommand("portrait", "terminations over a grid of starting gradients");
    common(portrait_cmd);
    portrait_cmd->add_option("--kappa", a.kappa, "frozen slopes k1 k2")->expected(2);
    portrait_cmd->add_option("--grid-n", a.grid_n, "points per axis");
    auto* orbit = app.add_subcommand("orbit", "integrate one orbit of the rescaled field");
    common(orbit);
    orbit->add_option("--kappa", a.kappa, "frozen slopes k1 k2")->expected(2);
    orbit->add_option("--p0", a.p0, "starting gradient")->expected(2)->required();
    auto* sim = app.add_subcommand("simulate", "closed-loop trajectory and costs");
    common(sim);
    sim->add_option("--solution", a.solution_path, "solution JSON (default: solve)");
    sim->add_option("--y", a.ys, "initial state")->expected(1)->required();
    sim->add_option("--horizon", a.horizon, "time horizon");
    sim->add_option("--nu-max", a.nu_max, "largest truncation radius");
    auto* verify = app.add_subcommand("verify", "dynamic-programming Nash check");
    common(verify);
    verify->add_option("--solution", a.solution_path, "solution JSON (default: solve)");
    verify->add_option("--tol", a.tol, "DP tolerance");
    verify->add_option("--grid-n", a.grid_n, "DP grid points");
    verify->add_option("--y", a.ys, "sample states (default: 10 seeded draws)");
    verify->add_option("--nu-max", a.nu_max, "largest truncation radius");
    auto* ex2 = app.add_subcommand("example2", "periodic solution of the linear example");
    common(ex2);
    ex2->add_option("--kappa", a.kappa, "slope kappa")->expected(1)->required();
    ex2->add_option("--alpha", a.alpha, "orbit parameter in (0, kappa)");
    ex2->add_option("--L", a.L, "half-width of the window");
    auto* cex = app.add_subcommand("counterexamples", "audit the two rejected candidates");
    common(cex);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (validate->parsed()) return cmd_validate(a);
        if (solve->parsed()) return cmd_solve(a);
        if (portrait_cmd->parsed()) return cmd_portrait(a);
        if (orbit->parsed()) return cmd_orbit(a);
        if (sim->parsed()) return cmd_simulate(a);
        if (verify->parsed()) return cmd_verify(a);
        if (ex2->parsed()) return cmd_example2(a);
        if (cex->parsed()) return cmd_counterexamples(a);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e.category());
    } catch (const json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 1;
}
