#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "hjnash/common.hpp"

namespace hjnash {

/// h(x) = slope * x + offset.
struct LinearCost {
    double slope = 0.0;
    double offset = 0.0;
};

enum class PerturbationShape { Tanh, Sin, GaussianBump };

/// h(x) = slope * x + amplitude * phi(x / length_scale), with phi one of
/// tanh, sin or exp(-t^2). The derivative is slope + (amplitude / length_scale) * phi'.
struct SmoothPerturbedCost {
    double slope = 0.0;
    double amplitude = 0.0;
    PerturbationShape shape = PerturbationShape::Tanh;
    double length_scale = 1.0;
};

/// Natural cubic spline through (x, y); linear continuation outside the table.
struct TabulatedCost {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> second;  // spline second derivatives, filled by make_tabulated
};

TabulatedCost make_tabulated(std::vector<double> x, std::vector<double> y);

struct ValueAndSlope {
    double value;
    double slope;
};

class CostFunction {
public:
    using Kind = std::variant<LinearCost, SmoothPerturbedCost, TabulatedCost>;

    CostFunction() : kind_(LinearCost{}) {}
    CostFunction(LinearCost c) : kind_(c) {}
    CostFunction(SmoothPerturbedCost c) : kind_(c) {}
    CostFunction(TabulatedCost c) : kind_(std::move(c)) {}

    static CostFunction constant(double c) { return LinearCost{0.0, c}; }
    static CostFunction linear(double slope, double offset = 0.0) { return LinearCost{slope, offset}; }

    ValueAndSlope eval(double x) const;
    double value(double x) const { return eval(x).value; }
    double slope(double x) const { return eval(x).slope; }

    const Kind& kind() const { return kind_; }
    bool is_constant(double c) const;

private:
    Kind kind_;
};

/// A two-or-more player game with dynamics xdot = sum of controls, unit
/// discount, running costs h_i and control weights k_i.
struct GameSpec {
    std::size_t players = 2;
    std::vector<CostFunction> h;
    std::vector<CostFunction> k;
    double C = 1.0;  // bound of the standing assumptions
    double L = 1.0;  // half-width of the working interval [-L, L]

    void check_well_formed() const;  // throws InputError
    bool has_unit_weights() const;
};

/// Convenience constructor for two players with k == 1.
GameSpec two_player_game(CostFunction h1, CostFunction h2, double C, double L);

/// h1 = -kappa x, h2 = kappa x, unit weights, C = max(1, kappa).
GameSpec linear_example_game(double kappa, double L);

struct Violation {
    double x;
    std::size_t player;
    std::string quantity;  // "k below 1/C", "k above C", "|h'| above C"
    double value;
    double bound;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::size_t grid_points = 0;
    bool ok() const { return violations.empty(); }
};

struct SampleGrid {
    double half_width_factor = 10.0;  // grid covers [-factor * L, factor * L]
    double points_per_unit = 64.0;

    std::vector<double> points(double L) const;
};

/// Checks the assumptions 1/C <= k_i <= C and |h_i'| <= C on a dense grid.
/// Throws NonFiniteError when a cost evaluates to a non-finite number.
ValidationReport validate_game(const GameSpec& spec, const SampleGrid& grid = {});

enum class RegimeTag {
    CooperativeIncreasing,
    CooperativeDecreasing,
    Conflicting,
    LinearExample,
    General,
};

std::string to_string(RegimeTag tag);

struct Regime {
    RegimeTag tag = RegimeTag::General;
    double kappa1 = 0.0;  // grid means of h_i'
    double kappa2 = 0.0;
    double delta = 0.0;   // max deviation of h_i' from kappa_i
    Vec2 slope_min{};
    Vec2 slope_max{};
};

/// Classifies a two-player game from grid statistics of h_i'.
Regime classify_regime(const GameSpec& spec, const SampleGrid& grid = {});

}  // namespace hjnash
