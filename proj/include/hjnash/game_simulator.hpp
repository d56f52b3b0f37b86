#pragma once

#include <string>
#include <vector>

#include "hjnash/common.hpp"
#include "hjnash/equilibrium_solver.hpp"
#include "hjnash/game_model.hpp"

namespace hjnash {

/// The trajectory left the window on which the solution is sampled.
class WindowExceeded : public Error {
public:
    WindowExceeded(double t, double x, const std::string& what)
        : Error(ErrorCategory::Numerical, what), t(t), x(x) {}
    double t;
    double x;
};

enum class EventKind { HitJumpPoint, ReachedEquilibrium, Truncated };

std::string to_string(EventKind k);

struct TrajectoryEvent {
    double t = 0.0;
    double x = 0.0;
    EventKind kind = EventKind::ReachedEquilibrium;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<Vec2> alpha;
    std::vector<TrajectoryEvent> events;
    std::vector<std::string> notes;  // branch ambiguities at discontinuity points
    double horizon = 0.0;            // horizon actually covered
    bool truncated = false;
};

struct SimulateOptions {
    double h_max = 0.01;
    double rtol = 1e-10;
    double atol = 1e-12;
    double equilibrium_tol = 1e-10;
    bool truncate_on_exit = false;  // log Truncated instead of throwing WindowExceeded
};

/// Closed-loop drift g(x) = -sum_i p_i(x) / k_i(x), right-continuous.
double closed_loop_drift(const PiecewiseSolution& sol, const GameSpec& spec, double x);

/// Zeros of g (by bisection on the solution grid) and jump locations, sorted.
std::vector<double> drift_barriers(const PiecewiseSolution& sol, const GameSpec& spec);

Trajectory simulate(const PiecewiseSolution& sol, const GameSpec& spec, double y, double T,
                    const SimulateOptions& opt = {});

struct PlayerCost {
    double running = 0.0;
    double control = 0.0;
    double total = 0.0;
    double tail_bound = 0.0;
};

struct CostBreakdown {
    PlayerCost player[2];
    bool truncated = false;
};

/// Discounted costs along the trajectory (composite Simpson on the trajectory mesh).
CostBreakdown evaluate_cost(const GameSpec& spec, const Trajectory& traj, const PiecewiseSolution& sol);

}  // namespace hjnash
