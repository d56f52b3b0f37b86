#pragma once

#include <string>
#include <vector>

#include "hjnash/common.hpp"
#include "hjnash/equilibrium_solver.hpp"
#include "hjnash/game_model.hpp"

namespace hjnash {

/// Linear interpolation on a uniform grid with constant continuation outside.
struct UniformSamples {
    double x0 = 0.0;
    double dx = 1.0;
    std::vector<double> v;

    double at(double x) const;
};

struct DeviationProblem {
    std::size_t player = 0;
    UniformSamples opponent_drift;  // frozen sum of the other players' feedback controls
    CostFunction h;
    CostFunction k;
    double half_width = 1.0;  // state window [-half_width, half_width]
    double a_max = 1.0;       // control box [-a_max, a_max]
};

/// Player i against the frozen feedback of the other player(s) in `sol`.
/// The window is [-1.5 L, 1.5 L] with L the half-width of the solution grid.
DeviationProblem make_deviation_problem(const GameSpec& spec, const PiecewiseSolution& sol, std::size_t player);

struct DpOptions {
    std::size_t grid_n = 801;
    std::size_t control_n = 81;
    double dt = 0.01;
    double tol = 1e-9;
    std::size_t max_iterations = 200000;
};

struct DpResult {
    std::vector<double> x;
    std::vector<double> value;
    std::vector<double> policy;  // minimizing control at each grid node
    std::size_t iterations = 0;
    double last_change = 0.0;

    double value_at(double y) const;
    double policy_at(double y) const;
};

/// Fixed point of the semi-Lagrangian operator
///   V(x) = min_a (1 - e^{-dt}) [h + k a^2 / 2](x + tau b) + e^{-dt} V(x + dt b),
/// with b the midpoint drift and tau the discount-weighted mean time of the step.
/// Throws WindowTooSmall when a foot point leaves twice the window.
DpResult dp_value(const DeviationProblem& problem, const DpOptions& opt = {});

/// Cost of following the DP policy from y for time T (fixed-step RK4, trapezoid quadrature).
double rollout_policy(const DeviationProblem& problem, const DpResult& dp, double y, double T = 40.0,
                      double dt = 1e-3);

struct NashPoint {
    std::size_t player = 0;
    double y = 0.0;
    double claimed = 0.0;  // u_i(y)
    double dp = 0.0;       // V_i(y)
    double gap = 0.0;      // V_i(y) - u_i(y)
    bool pass = false;
};

struct NashReport {
    std::vector<NashPoint> points;
    double tol = 1e-2;
    double error_estimate[2] = {0.0, 0.0};  // Richardson-style difference against a coarser run
    bool resolved = false;                  // both estimates within tol
    bool pass = false;
    std::vector<std::string> caveats;
};

NashReport check_nash(const GameSpec& spec, const PiecewiseSolution& sol, const std::vector<double>& ys,
                      double tol = 1e-2, const DpOptions& opt = {});

}  // namespace hjnash
