#include <doctest.h>

#include <cmath>
#include <random>

#include "hjnash/game_model.hpp"

using namespace hjnash;

namespace {

std::vector<CostFunction> sample_costs() {
    std::vector<double> tx, ty;
    for (int i = 0; i <= 40; ++i) {
        const double x = -5.0 + 0.25 * i;
        tx.push_back(x);
        ty.push_back(std::sin(x) + 0.1 * x * x);
    }
    return {
        CostFunction::linear(1.5, -0.3),
        SmoothPerturbedCost{1.0, 0.4, PerturbationShape::Tanh, 0.7},
        SmoothPerturbedCost{-1.0, 0.05, PerturbationShape::Sin, 1.3},
        SmoothPerturbedCost{0.5, 0.2, PerturbationShape::GaussianBump, 2.0},
        make_tabulated(tx, ty),
    };
}

}  // namespace

TEST_CASE("analytic slopes match central differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> xs(-5.0, 5.0);
    const double eps = 1e-4;
    for (const auto& f : sample_costs()) {
        for (int n = 0; n < 100; ++n) {
            const double x = xs(rng);
            const double fd = (f.value(x + eps) - f.value(x - eps)) / (2.0 * eps);
            const double d = f.slope(x);
            CHECK(std::abs(fd - d) <= 1e-6 * std::max(1.0, std::abs(d)));
        }
    }
}

TEST_CASE("smooth perturbed families evaluate in closed form") {
    const CostFunction th = SmoothPerturbedCost{1.0, 0.5, PerturbationShape::Tanh, 2.0};
    CHECK(th.value(1.0) == doctest::Approx(1.0 + 0.5 * std::tanh(0.5)).epsilon(1e-15));
    CHECK(th.slope(1.0) == doctest::Approx(1.0 + 0.25 / std::pow(std::cosh(0.5), 2)).epsilon(1e-15));
    const CostFunction gb = SmoothPerturbedCost{0.0, 1.0, PerturbationShape::GaussianBump, 1.0};
    CHECK(gb.value(0.0) == doctest::Approx(1.0));
    CHECK(gb.slope(1.0) == doctest::Approx(-2.0 * std::exp(-1.0)));
}

TEST_CASE("tabulated costs interpolate nodes and continue linearly") {
    const CostFunction f = make_tabulated({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 0.0, 1.0});
    CHECK(f.value(1.0) == doctest::Approx(1.0));
    CHECK(f.value(2.0) == doctest::Approx(0.0));
    const double s = f.slope(3.0);
    CHECK(f.value(5.0) == doctest::Approx(1.0 + 2.0 * s));
    CHECK(f.slope(7.0) == doctest::Approx(s));
    CHECK_THROWS_AS(make_tabulated({0.0, 0.0}, {1.0, 2.0}), InputError);
    CHECK_THROWS_AS(make_tabulated({0.0}, {1.0}), InputError);
}

TEST_CASE("validation: bounded game gives an empty report") {
    const GameSpec g = two_player_game(CostFunction::linear(1.0), CostFunction::linear(1.0), 2.0, 5.0);
    const auto rep = validate_game(g);
    CHECK(rep.ok());
    CHECK(rep.grid_points > 0);
}

TEST_CASE("validation: small weight is reported at every sample") {
    GameSpec g = two_player_game(CostFunction::linear(1.0), CostFunction::linear(1.0), 2.0, 5.0);
    g.k[0] = CostFunction::constant(0.1);
    const auto rep = validate_game(g);
    std::size_t k_low = 0;
    for (const auto& v : rep.violations)
        if (v.player == 0 && v.quantity == "k below 1/C") ++k_low;
    CHECK(k_low == rep.grid_points);
}

TEST_CASE("validation: steep tanh bump is found where the scan finds it") {
    const GameSpec g =
        two_player_game(SmoothPerturbedCost{1.0, 5.0, PerturbationShape::Tanh, 1.0}, CostFunction::linear(1.0), 2.0, 5.0);
    const SampleGrid grid;
    const auto rep = validate_game(g, grid);
    REQUIRE_FALSE(rep.ok());
    // Oracle: h' = 1 + 5 sech^2(x); first sampled x with h' > 2.
    double first = NAN;
    for (double x : grid.points(g.L)) {
        const double d = 1.0 + 5.0 / std::pow(std::cosh(x), 2);
        if (d > 2.0) {
            first = x;
            break;
        }
    }
    double reported = NAN;
    for (const auto& v : rep.violations)
        if (v.quantity == "|h'| above C") {
            reported = v.x;
            break;
        }
    CHECK(std::abs(first) <= 3.0);
    CHECK(reported == doctest::Approx(first));
}

TEST_CASE("regime classification") {
    const GameSpec coop = two_player_game(CostFunction::linear(1.0), CostFunction::linear(2.0), 2.0, 5.0);
    CHECK(classify_regime(coop).tag == RegimeTag::CooperativeIncreasing);

    const GameSpec lin = linear_example_game(1.0, 5.0);
    const Regime r = classify_regime(lin);
    CHECK(r.tag == RegimeTag::LinearExample);
    CHECK(r.kappa2 == doctest::Approx(1.0));

    const GameSpec dec = two_player_game(CostFunction::linear(-1.0), CostFunction::linear(-2.0), 2.0, 5.0);
    CHECK(classify_regime(dec).tag == RegimeTag::CooperativeDecreasing);

    const GameSpec conf = two_player_game(SmoothPerturbedCost{-1.0, 0.05, PerturbationShape::Sin, 1.0},
                                          SmoothPerturbedCost{2.0, 0.05, PerturbationShape::Sin, 1.0}, 2.5, 5.0);
    const SampleGrid grid;
    const Regime c = classify_regime(conf, grid);
    CHECK(c.tag == RegimeTag::Conflicting);
    // Oracle: grid extremes of h_i' = kappa_i + 0.05 cos x.
    double lo = INFINITY, hi = -INFINITY;
    for (double x : grid.points(conf.L)) {
        lo = std::min(lo, -1.0 + 0.05 * std::cos(x));
        hi = std::max(hi, -1.0 + 0.05 * std::cos(x));
    }
    CHECK(c.slope_min[0] == doctest::Approx(lo).epsilon(1e-12));
    CHECK(c.slope_max[0] == doctest::Approx(hi).epsilon(1e-12));
    CHECK(c.kappa1 == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(c.kappa2 == doctest::Approx(2.0).epsilon(0.05));
    CHECK(c.delta <= 0.1);

    const GameSpec zero_sum = two_player_game(CostFunction::linear(-1.0), CostFunction::linear(1.0 + 1e-3), 2.0, 5.0);
    CHECK(classify_regime(zero_sum).tag != RegimeTag::LinearExample);
}

TEST_CASE("regime tags are stable when the sample grid is refined") {
    const GameSpec games[] = {
        two_player_game(SmoothPerturbedCost{1.0, 0.1, PerturbationShape::Tanh, 1.0}, CostFunction::linear(1.5), 2.0, 5.0),
        linear_example_game(1.0, 5.0),
        two_player_game(SmoothPerturbedCost{-1.0, 0.05, PerturbationShape::Sin, 1.0},
                        SmoothPerturbedCost{2.0, 0.05, PerturbationShape::Sin, 1.0}, 2.5, 5.0),
    };
    for (const auto& g : games) {
        SampleGrid fine;
        fine.points_per_unit *= 2.0;
        CHECK(classify_regime(g).tag == classify_regime(g, fine).tag);
    }
}

TEST_CASE("malformed games are rejected") {
    GameSpec g = two_player_game(CostFunction::linear(1.0), CostFunction::linear(1.0), 2.0, 5.0);
    g.C = -1.0;
    CHECK_THROWS_AS(g.check_well_formed(), InputError);
    GameSpec three = two_player_game(CostFunction::linear(1.0), CostFunction::linear(1.0), 2.0, 5.0);
    three.players = 3;
    three.h.push_back(CostFunction::linear(0.5));
    three.k.push_back(CostFunction::constant(1.0));
    CHECK_NOTHROW(three.check_well_formed());
    CHECK_THROWS_AS(classify_regime(three), UnsupportedError);
}
