#include <doctest.h>

#include <cmath>
#include <random>

#include "hjnash/equilibrium_solver.hpp"
#include "hjnash/io.hpp"
#include "hjnash/phase_plane.hpp"

using namespace hjnash;

namespace {

GameSpec constant_game(double k1, double k2, double C = 2.0, double L = 5.0) {
    return two_player_game(CostFunction::linear(k1), CostFunction::linear(k2), C, L);
}

GameSpec sin_game(double k1, double k2, double eps, double C = 2.5, double L = 5.0) {
    return two_player_game(SmoothPerturbedCost{k1, eps, PerturbationShape::Sin, 1.0},
                           SmoothPerturbedCost{k2, eps, PerturbationShape::Sin, 1.0}, C, L);
}

double max_residual(const GameSpec& g, const PiecewiseSolution& s) {
    double r = 0.0;
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        for (double v : hj_residual(g, s.grid[i], {s.u[i][0], s.u[i][1]}, {s.p[i][0], s.p[i][1]}))
            r = std::max(r, std::abs(v));
    return r;
}

}  // namespace

TEST_CASE("constant solutions by substitution") {
    const GameSpec zero = two_player_game(CostFunction::constant(0.0), CostFunction::constant(0.0), 1.0, 5.0);
    const auto z = constant_solution(zero, 0.0, 0.0);
    for (const auto& u : z.u) CHECK(sup_norm(u) == 0.0);

    const GameSpec g = constant_game(1.0, 2.0);
    const auto s = constant_solution(g, 1.0, 2.0);
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        const double x = s.grid[i];
        CHECK(s.u[i][0] == doctest::Approx(x - 2.0 - 0.5).epsilon(1e-14));
        CHECK(s.u[i][1] == doctest::Approx(2.0 * x - 2.0 - 2.0).epsilon(1e-14));
    }
    REQUIRE(s.audit);
    CHECK(s.audit->pass);
    CHECK(s.audit->max_residual == 0.0);

    const GameSpec c = constant_game(-1.0, 2.0);
    const auto sc = constant_solution(c, -1.0, 2.0);
    CHECK(max_residual(c, sc) == 0.0);
    CHECK_THROWS_AS(constant_solution(c, 1.0, 2.0), DomainError);
}

TEST_CASE("invariant region of the cooperative regime") {
    const auto r = invariant_region(constant_game(1.0, 1.5, 2.0));
    CHECK(r.shape == InvariantRegion::Shape::Polygon);
    CHECK(r.orientation == 1);
    CHECK(r.contains({4.0, 4.0}));
    CHECK(r.contains({0.2, 0.1}));
    CHECK_FALSE(r.contains({0.1, 0.1}));
    CHECK_FALSE(r.contains({4.1, 1.0}));
    CHECK(r.contains({4.1, 1.0}, 0.2));

    const auto d = invariant_region(constant_game(-1.0, -1.5, 2.0));
    CHECK(d.orientation == -1);
    CHECK(d.contains({-1.0, -1.0}));
    CHECK_FALSE(d.contains({1.0, 1.0}));
}

TEST_CASE("invariant ball of the conflicting regime") {
    const auto b = invariant_region(constant_game(-1.0, 2.0, 2.0));
    CHECK(b.shape == InvariantRegion::Shape::Ball);
    CHECK(b.center[0] == -1.0);
    CHECK(b.center[1] == 2.0);
    CHECK(b.radius > 0.0);
    CHECK(b.radius <= 0.9 * std::sqrt(0.5) * 1.0 + 1e-12);
    CHECK(b.orientation == 1);
    CHECK_THROWS_AS(invariant_region(constant_game(-1.0, 1.0, 2.0)), UnsupportedError);
}

TEST_CASE("nu-limit matches the constant solution") {
    const GameSpec g = constant_game(1.0, 2.0);
    const auto s = construct_admissible(g);
    const auto ref = constant_solution(g, 1.0, 2.0);
    double err = 0.0;
    for (std::size_t i = 0; i < s.grid.size(); ++i) err = std::max(err, sup_norm(s.p[i] - ref.p[i]));
    CHECK(err < 1e-8);
    CHECK(s.audit->pass);
}

TEST_CASE("conflicting perturbation stays near kappa") {
    const GameSpec g = sin_game(-1.0, 2.0, 0.02);
    const auto s = construct_admissible(g);
    double dev = 0.0;
    for (const auto& p : s.p) dev = std::max(dev, norm(p - Vec2{-1.0, 2.0}));
    CHECK(dev <= 0.1);
    CHECK(max_residual(g, s) <= 1e-6);
    CHECK(s.audit->pass);
    CHECK(s.x_min() == doctest::Approx(-5.0));
    CHECK(s.x_max() == doctest::Approx(5.0));
}

TEST_CASE("zero game gives the zero solution") {
    const GameSpec zero = two_player_game(CostFunction::constant(0.0), CostFunction::constant(0.0), 1.0, 5.0);
    const auto s = construct_admissible(zero);
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        CHECK(sup_norm(s.p[i]) == 0.0);
        CHECK(sup_norm(s.u[i]) == 0.0);
    }
}

TEST_CASE("every constructed solution passes its own audit") {
    const GameSpec games[] = {
        constant_game(1.0, 2.0), constant_game(2.0, 1.0), constant_game(-1.0, 2.0), constant_game(-1.0, -2.0),
        sin_game(1.0, 2.0, 0.05),  sin_game(-1.0, 2.0, 0.02), sin_game(-2.0, 1.0, 0.02),
        two_player_game(SmoothPerturbedCost{-1.5, 0.1, PerturbationShape::Tanh, 1.0},
                        SmoothPerturbedCost{-0.8, 0.1, PerturbationShape::GaussianBump, 1.0}, 2.0, 5.0),
    };
    for (const auto& g : games) {
        const auto s = construct_admissible(g);
        REQUIRE(s.audit);
        CHECK(s.audit->pass);
        CHECK(audit(s, g).pass);
    }
}

TEST_CASE("periodic solutions of the linear example") {
    const auto s = periodic_solution(1.0, 0.5, 5.0);
    CHECK(s.period > 0.0);
    CHECK(s.closure_error < 1e-6);
    REQUIRE(s.audit);
    CHECK(s.audit->pass);
    CHECK(s.audit->growth_slope <= s.audit->growth_threshold);

    // Periodicity at 50 probe points.
    double worst = 0.0;
    for (int j = 0; j < 50; ++j) {
        const double x = -5.0 + (10.0 - s.period) * j / 49.0;
        worst = std::max(worst, sup_norm(s.p_at(x + s.period) - s.p_at(x)));
    }
    CHECK(worst < 1e-6);

    // The loops shrink onto the stationary point (-1, 1) as alpha approaches 1.
    double prev = INFINITY;
    for (double a : {0.8, 0.9, 0.97}) {
        const auto sa = periodic_solution(1.0, a, 5.0);
        double d = 0.0;
        for (const auto& p : sa.p) d = std::max(d, norm(p - Vec2{-1.0, 1.0}));
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 0.1);
    CHECK_THROWS_AS(periodic_solution(1.0, 1.5, 5.0), DomainError);
}

TEST_CASE("audit rejects the two candidates for the stated reasons") {
    const auto c = rejected_candidates();
    REQUIRE(c.size() == 2);
    const auto& tent = *c[0].solution.audit;
    CHECK_FALSE(tent.pass);
    REQUIRE(tent.failures.size() == 1);
    CHECK(tent.failures[0] == "A3");
    REQUIRE(tent.jumps.size() == 1);
    CHECK(tent.jumps[0].y == 0.0);
    CHECK(tent.jumps[0].p_minus[0] == -1.0);
    CHECK(tent.jumps[0].p_plus[0] == 1.0);
    CHECK(tent.a1);
    CHECK(tent.a2);

    const auto& quad = *c[1].solution.audit;
    CHECK_FALSE(quad.pass);
    REQUIRE(quad.failures.size() == 1);
    CHECK(quad.failures[0] == "A2");
    CHECK(quad.growth_slope > quad.growth_threshold);
}

TEST_CASE("audit flags an incoherent value sample") {
    const GameSpec g = constant_game(1.0, 2.0);
    auto s = constant_solution(g, 1.0, 2.0);
    s.u[s.u.size() / 2][0] += 1e-3;
    const auto rep = audit(s, g);
    CHECK_FALSE(rep.a1);
    CHECK(rep.failures.front() == "A1");
}

TEST_CASE("forward orbits from the invariant regions stay inside") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double C = 2.0;
    const auto gamma = invariant_region(constant_game(1.0, 1.5, C));
    for (int n = 0; n < 30;) {
        const Vec2 p{2.0 * C * u01(rng), 2.0 * C * u01(rng)};
        if (p[0] + p[1] < 1.0 / (2.0 * C)) continue;
        ++n;
        const Vec2 sl{1.0 / C + (C - 1.0 / C) * u01(rng), 1.0 / C + (C - 1.0 / C) * u01(rng)};
        OrbitOptions o;
        o.backward = false;
        o.s_hi = 50.0;
        for (const auto& q : integrate_orbit(SlopeSource::frozen(sl), p, o).p) CHECK(gamma.contains(q, 1e-6));
    }
    // Ball with slopes frozen at random values within delta of kappa.
    const GameSpec g = sin_game(-1.0, 2.0, 0.05);
    const auto ball = invariant_region(g);
    for (int n = 0; n < 30; ++n) {
        const double r = ball.radius * std::sqrt(u01(rng)), th = 2.0 * M_PI * u01(rng);
        const Vec2 p = ball.center + Vec2{r * std::cos(th), r * std::sin(th)};
        const Vec2 sl{-1.0 + 0.1 * (u01(rng) - 0.5), 2.0 + 0.1 * (u01(rng) - 0.5)};
        OrbitOptions o;
        o.backward = false;
        o.s_hi = 50.0;
        for (const auto& q : integrate_orbit(SlopeSource::frozen(sl), p, o).p) CHECK(ball.contains(q, 1e-6));
    }
}

TEST_CASE("two in-ball solutions contract") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (double eps : {0.0, 0.02, 0.05}) {
        const GameSpec g = sin_game(-1.0, 2.0, eps);
        const auto ball = invariant_region(g);
        for (int n = 0; n < 5; ++n) {
            auto pick = [&] {
                const double r = 0.9 * ball.radius * std::sqrt(u01(rng)), th = 2.0 * M_PI * u01(rng);
                return ball.center + Vec2{r * std::cos(th), r * std::sin(th)};
            };
            const auto pr = contraction_probe(g, pick(), pick(), 20.0);
            CHECK(pr.rate > 0.0);
            CHECK(pr.final_gap <= pr.gap.front() * std::exp(-0.5 * 20.0));
        }
    }
}

TEST_CASE("samples with a jump off the grid are rejected") {
    const GameSpec g = constant_game(1.0, 1.0);
    std::vector<double> grid{-1.0, 0.0, 1.0};
    std::vector<Vec2> p(3, Vec2{1.0, 1.0});
    CHECK_THROWS_AS(solution_from_samples(g, grid, p, {}, {make_jump(0.5, {1, 1}, {-1, -1})}, "x"), InputError);
    const auto s = solution_from_samples(g, grid, p, {}, {make_jump(0.0, {2, 2}, {1, 1})}, "x");
    CHECK(s.p_left(0.0)[0] == 2.0);
    CHECK(s.p_at(0.0)[0] == 1.0);
}
