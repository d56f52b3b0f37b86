// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hjnash/io.hpp"

using namespace hjnash;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// Independent residual: u_i - [(p_i / 2 - (p_1 + p_2)) p_i + h_i] for unit weights.
double unit_residual(const GameSpec& spec, double x, const Vec2& u, const Vec2& p) {
    double r = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        r = std::max(r, std::abs(u[i] - ((0.5 * p[i] - (p[0] + p[1])) * p[i] + spec.h[i].value(x))));
    return r;
}

GameSpec perturbed_game(double k1, double k2, double eps, double C, double L) {
    return two_player_game(SmoothPerturbedCost{k1, eps, PerturbationShape::Sin, 1.0},
                           SmoothPerturbedCost{k2, eps, PerturbationShape::Sin, 1.0}, C, L);
}

Outcome criterion1() {
    double worst_p = 0.0, worst_r = 0.0, worst_t = 0.0;
    for (const Vec2 k : {Vec2{1, 2}, Vec2{2, 1}, Vec2{-1, 2}}) {
        const auto t0 = Clock::now();
        const GameSpec spec = two_player_game(CostFunction::linear(k[0]), CostFunction::linear(k[1]), 2.0, 5.0);
        const PiecewiseSolution sol = construct_admissible(spec);
        worst_t = std::max(worst_t, seconds_since(t0));
        for (std::size_t i = 0; i < sol.grid.size(); ++i) {
            worst_p = std::max(worst_p, sup_norm(sol.p[i] - k));
            worst_r = std::max(worst_r, unit_residual(spec, sol.grid[i], sol.u[i], sol.p[i]));
        }
        for (int j = 0; j <= 997; ++j) {
            const double x = -5.0 + 10.0 * j / 997.0;
            worst_p = std::max(worst_p, sup_norm(sol.p_at(x) - k));
        }
    }
    return {worst_p <= 1e-8 && worst_r <= 1e-10 && worst_t < 5.0,
            fmt("max |p - kappa| %.2e, max residual %.2e, slowest %.2fs", worst_p, worst_r, worst_t)};
}

Outcome criterion2() {
    const auto cands = rejected_candidates();
    bool ok = cands.size() == 2;
    std::string detail;
    for (const auto& c : cands) {
        const auto& a = *c.solution.audit;
        const bool exact = !a.pass && a.failures.size() == 1 && a.failures[0] == c.expected_failure;
        ok = ok && exact;
        detail += c.name + ":" + (a.failures.empty() ? std::string("none") : a.failures[0]) + " ";
    }
    // The first candidate must fail at x = 0 through the drift ordering.
    const auto& jumps = cands[0].solution.audit->jumps;
    ok = ok && jumps.size() == 1 && jumps[0].y == 0.0 && !jumps[0].admissible &&
         jumps[0].violated.find("drift ordering") != std::string::npos;
    return {ok, detail + "(expected tent:A3 quadratic:A2)"};
}

Outcome criterion3() {
    const auto t0 = Clock::now();
    std::vector<PiecewiseSolution> sols;
    double worst_closure = 0.0, worst_res = 0.0;
    bool audits = true;
    for (double a : {0.25, 0.5, 0.75}) {
        sols.push_back(periodic_solution(1.0, a, 5.0));
        const auto& s = sols.back();
        worst_closure = std::max(worst_closure, s.closure_error);
        const GameSpec spec = linear_example_game(1.0, 5.0);
        for (std::size_t i = 0; i < s.grid.size(); ++i)
            worst_res = std::max(worst_res, unit_residual(spec, s.grid[i], s.u[i], s.p[i]));
        audits = audits && s.audit && s.audit->pass;
    }
    double min_dist = INFINITY;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) {
            double d = 0.0;
            for (std::size_t m = 0; m < sols[i].grid.size(); ++m) d = std::max(d, sup_norm(sols[i].p[m] - sols[j].p[m]));
            min_dist = std::min(min_dist, d);
        }
    const double t = seconds_since(t0);
    return {audits && worst_closure < 1e-6 && worst_res < 1e-6 && min_dist > 0.1 && t < 10.0,
            fmt("closure %.2e, residual %.2e, min pairwise distance %.3f, %.2fs", worst_closure, worst_res, min_dist,
                t)};
}

Outcome criterion4() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> r(-1e3, 1e3);
    int bad = 0;
    for (int i = 0; i < 100000; ++i) {
        const Vec2 p{r(rng), r(rng)};
        const double n2 = p[0] * p[0] + p[1] * p[1];
        const double d = delta(p);
        if (!(0.5 * n2 <= d && d <= 2.0 * n2)) ++bad;
    }
    return {bad == 0, fmt("%g violations in 1e5 samples", bad)};
}

// True when every sample of the forward orbit stays in the region inflated by 1e-6.
bool stays_inside(const InvariantRegion& region, const SlopeSource& src, const Vec2& p0, double s_end) {
    OrbitOptions o;
    o.backward = false;
    o.s_hi = s_end;
    const Orbit orb = integrate_orbit(src, p0, o);
    for (const auto& p : orb.p)
        if (!region.contains(p, 1e-6)) return false;
    return true;
}

Outcome criterion5() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int bad_gamma = 0, bad_ball = 0;

    const double C = 2.0;
    const GameSpec coop = two_player_game(CostFunction::linear(1.0), CostFunction::linear(1.5), C, 5.0);
    const InvariantRegion gamma = invariant_region(coop);
    for (int n = 0; n < 100;) {
        const Vec2 p{2.0 * C * u01(rng), 2.0 * C * u01(rng)};
        if (p[0] + p[1] < 1.0 / (2.0 * C)) continue;
        const Vec2 slopes{1.0 / C + (C - 1.0 / C) * u01(rng), 1.0 / C + (C - 1.0 / C) * u01(rng)};
        if (!stays_inside(gamma, SlopeSource::frozen(slopes), p, 50.0)) ++bad_gamma;
        ++n;
    }

    const GameSpec conf = perturbed_game(-1.0, 2.0, 0.05, 2.5, 5.0);
    const InvariantRegion ball = invariant_region(conf);
    for (int n = 0; n < 100; ++n) {
        const double r = ball.radius * std::sqrt(u01(rng)), th = 2.0 * M_PI * u01(rng);
        const Vec2 p{ball.center[0] + r * std::cos(th), ball.center[1] + r * std::sin(th)};
        if (!stays_inside(ball, SlopeSource::from_game(conf), p, 50.0)) ++bad_ball;
    }
    return {bad_gamma == 0 && bad_ball == 0 && ball.shape == InvariantRegion::Shape::Ball,
            fmt("escapes: Gamma %g/100, ball %g/100 (R = %.4f)", bad_gamma, bad_ball, ball.radius)};
}

Outcome criterion6() {
    std::mt19937_64 rng(6);
    const double C = 2.0;
    std::uniform_real_distribution<double> coop(1.0 / C, C), pos(1.0 / C, C);
    int bad_coop = 0, bad_conf = 0;
    for (int n = 0; n < 100; ++n) {
        const double k1 = coop(rng), k2 = coop(rng);
        const auto lin = linearize(k1, k2, {0.0, 0.0});
        for (const auto& l : lin.eigenvalues) {
            const double m = std::abs(l);
            if (!(std::sqrt(3.0 / (4.0 * C * C)) <= m && m <= std::sqrt(2.0 * C * C - 1.0 / (C * C)))) ++bad_coop;
        }
    }
    for (int n = 0; n < 100;) {
        const double k1 = -pos(rng), k2 = pos(rng);
        if (std::abs(k1 + k2) < 1e-3) continue;
        const auto lin = linearize(k1, k2, {0.0, 0.0});
        for (const auto& l : lin.eigenvalues) {
            const double m = std::abs(l), w = k2 - k1;
            if (!(std::sqrt(0.5) * w <= m * (1.0 + 1e-12) && m <= w * (1.0 + 1e-12))) ++bad_conf;
        }
        ++n;
    }
    return {bad_coop == 0 && bad_conf == 0, fmt("violations: cooperative %g, conflicting %g", bad_coop, bad_conf)};
}

Outcome criterion7() {
    const GameSpec spec = perturbed_game(-1.0, 2.0, 0.02, 2.5, 5.0);
    const InvariantRegion ball = invariant_region(spec);
    const Vec2 a = ball.center + Vec2{0.6 * ball.radius, -0.3 * ball.radius};
    const Vec2 b = ball.center + Vec2{-0.4 * ball.radius, 0.5 * ball.radius};
    const ContractionProbe pr = contraction_probe(spec, a, b, 20.0);
    return {pr.rate > 0.0 && pr.final_gap < 1e-6 && ball.contains(a) && ball.contains(b),
            fmt("fitted K %.4f, gap %.2e -> %.2e", pr.rate, pr.gap.front(), pr.final_gap)};
}

struct TaxonomyCase {
    const char* name;
    RegimeTag regime;
    Vec2 kappa;
    std::vector<RegionTag> tags;
    bool forward;
};

Outcome criterion8() {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> box(-4.0, 4.0);
    const TaxonomyCase cases[] = {
        {"A", RegimeTag::CooperativeIncreasing, {1, 2}, {RegionTag::A}, true},
        {"B", RegimeTag::CooperativeIncreasing, {1, 2}, {RegionTag::B}, false},
        {"C", RegimeTag::CooperativeIncreasing, {1, 2}, {RegionTag::C1, RegionTag::C2}, false},
        {"Xi1", RegimeTag::Conflicting, {-1, 2}, {RegionTag::Xi1}, true},
        {"Q++", RegimeTag::Conflicting, {-1, 2}, {RegionTag::QuadrantPP}, false},
    };
    int total = 0, good = 0;
    double e_lo = INFINITY, e_hi = -INFINITY;
    std::string failed;
    for (const auto& c : cases) {
        const SlopeSource src = SlopeSource::frozen(c.kappa);
        for (int n = 0; n < 20;) {
            const Vec2 p{box(rng), box(rng)};
            if (norm(p) < 1e-3) continue;
            const RegionLabel lab = classify_point(c.regime, c.kappa[0], c.kappa[1], p);
            if (std::find(c.tags.begin(), c.tags.end(), lab.tag) == c.tags.end()) continue;
            ++n;
            ++total;
            OrbitOptions o;
            o.forward = c.forward;
            o.backward = !c.forward;
            const Orbit orb = integrate_orbit(src, p, o);
            const OrbitSide& side = c.forward ? orb.forward : orb.backward;
            const XWindow w = x_window(orb);
            const EndKind end = c.forward ? w.max_end : w.min_end;
            const bool ok = side.kind == Termination::BlowUp && side.exponent >= -1.2 && side.exponent <= -0.8 &&
                            end == EndKind::Infinite;
            if (side.kind == Termination::BlowUp) {
                e_lo = std::min(e_lo, side.exponent);
                e_hi = std::max(e_hi, side.exponent);
            }
            if (ok) ++good;
            else if (failed.size() < 200) failed += std::string(" ") + c.name;
        }
    }
    return {good == total, fmt("%g/%g blow-ups with infinite x end, exponents in [%.4f, %.4f]", good, total, e_lo, e_hi) +
                               (failed.empty() ? "" : ", failed:" + failed)};
}

struct Solved {
    std::string name;
    GameSpec spec;
    PiecewiseSolution sol;
};

Outcome criterion9() {
    // Windows wide enough to hold every trajectory up to T = 40; y is drawn from [-2.5, 2.5].
    std::vector<Solved> games;
    ConstructOptions wide;
    wide.points_per_unit = 20.0;
    auto add = [&](const std::string& name, const GameSpec& spec, const ConstructOptions& o) {
        games.push_back({name, spec, construct_admissible(spec, o)});
    };
    add("constant(1,2)", two_player_game(CostFunction::linear(1), CostFunction::linear(2), 2.0, 130.0), wide);
    add("constant(2,1)", two_player_game(CostFunction::linear(2), CostFunction::linear(1), 2.0, 130.0), wide);
    add("constant(-1,2)", two_player_game(CostFunction::linear(-1), CostFunction::linear(2), 2.0, 50.0), wide);
    add("cooperative", perturbed_game(1.0, 2.0, 0.05, 2.5, 130.0), wide);
    add("conflicting", perturbed_game(-1.0, 2.0, 0.02, 2.5, 50.0), wide);
    games.push_back({"periodic", linear_example_game(1.0, 5.0), periodic_solution(1.0, 0.5, 5.0)});

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ys(-2.5, 2.5);
    double worst = 0.0;
    std::string worst_game;
    int bad = 0;
    for (const auto& g : games) {
        for (int n = 0; n < 20; ++n) {
            const double y = ys(rng);
            const Trajectory tr = simulate(g.sol, g.spec, y, 40.0);
            const CostBreakdown cost = evaluate_cost(g.spec, tr, g.sol);
            const Vec2 u = g.sol.u_at(y);
            for (std::size_t i = 0; i < 2; ++i) {
                const double err = std::abs(cost.player[i].total - u[i]);
                if (err > 1e-4 + cost.player[i].tail_bound || tr.truncated) ++bad;
                if (err > worst) worst = err, worst_game = g.name;
            }
        }
    }
    return {bad == 0, fmt("%g failures over 6 games x 20 states, worst error %.2e", bad, worst) + " (" + worst_game + ")"};
}

Outcome criterion10() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::vector<double> ys;
    for (int i = 0; i < 10; ++i) ys.push_back(dist(rng));
    DpOptions dp;
    dp.grid_n = 801;
    dp.control_n = 81;
    dp.dt = 0.01;

    const GameSpec coop = two_player_game(CostFunction::linear(1), CostFunction::linear(2), 2.0, 5.0);
    const NashReport r1 = check_nash(coop, construct_admissible(coop), ys, 1e-2, dp);
    const GameSpec conf = perturbed_game(-1.0, 2.0, 0.02, 2.5, 5.0);
    const NashReport r2 = check_nash(conf, construct_admissible(conf), ys, 1e-2, dp);
    double gap = 0.0;
    for (const auto* r : {&r1, &r2})
        for (const auto& p : r->points) gap = std::max(gap, std::abs(p.gap));
    const double t = seconds_since(t0);
    return {r1.pass && r2.pass && t < 120.0,
            fmt("max |gap| %.2e, error estimates %.1e / %.1e, %.1fs", gap,
                std::max(r1.error_estimate[0], r1.error_estimate[1]),
                std::max(r2.error_estimate[0], r2.error_estimate[1]), t)};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"constant-game exactness", criterion1},
        {"rejected candidates", criterion2},
        {"periodic non-uniqueness", criterion3},
        {"Delta sandwich", criterion4},
        {"invariant regions", criterion5},
        {"eigenvalue bounds", criterion6},
        {"contraction probe", criterion7},
        {"blow-up taxonomy", criterion8},
        {"value consistency", criterion9},
        {"Nash certification", criterion10},
    };
    int failed = 0, idx = 0;
    for (const auto& [name, run] : criteria) {
        ++idx;
        Outcome o{false, ""};
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("[%s] %2d %-26s %s\n", o.pass ? "PASS" : "FAIL", idx, name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/10 criteria passed\n", 10 - failed);
    return failed == 0 ? 0 : 1;
}
