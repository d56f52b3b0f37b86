#pragma once

#include <string>
#include <vector>

#include "hjnash/common.hpp"
#include "hjnash/game_model.hpp"

namespace hjnash {

inline constexpr double kSingularDelta = 1e-12;
inline constexpr double kJumpIdentityTol = 1e-9;

struct GradientState {
    double x = 0.0;
    std::vector<double> p;
};

/// alpha_i = -p_i / k_i(x).
std::vector<double> optimal_feedback(const GameSpec& spec, const GradientState& state);

/// r_i = u_i - [(p_i / (2 k_i) - sum_j p_j / k_j) p_i + h_i(x)], any number of players.
std::vector<double> hj_residual(const GameSpec& spec, double x, const std::vector<double>& u,
                                const std::vector<double>& p);

/// The values that make hj_residual vanish at (x, p).
std::vector<double> reconstruct_values(const GameSpec& spec, double x, const std::vector<double>& p);

// Two-player, unit-weight gradient system. `slopes` are (h1'(x), h2'(x)).

inline double delta(const Vec2& p) { return p[0] * p[0] + p[1] * p[1] + p[0] * p[1]; }

/// Numerators of the gradient ODE: dp/ds with dx/ds = Delta(p).
inline Vec2 rescaled_field(const Vec2& p, const Vec2& slopes) {
    const double a = slopes[0], b = slopes[1];
    return {-p[0] * p[0] + (a - b) * p[0] + a * p[1], -p[1] * p[1] + (b - a) * p[1] + b * p[0]};
}

/// Jacobian of rescaled_field with respect to p, row-major.
inline std::array<double, 4> rescaled_jacobian(const Vec2& p, const Vec2& slopes) {
    const double a = slopes[0], b = slopes[1];
    return {-2.0 * p[0] + a - b, a, b, -2.0 * p[1] + b - a};
}

/// dp/dx = rescaled_field / Delta; throws SingularError when Delta <= eps_sing.
Vec2 gradient_field(const Vec2& p, const Vec2& slopes, double eps_sing = kSingularDelta);

Vec2 slopes_at(const GameSpec& spec, double x);

Vec2 gradient_ode_rhs(const GameSpec& spec, double x, const Vec2& p, double eps_sing = kSingularDelta);
Vec2 rescaled_rhs(const GameSpec& spec, double x, const Vec2& p);

/// Unit weights: u_i = h_i - p1 p2 - p_i^2 / 2.
Vec2 values_from_gradient(const GameSpec& spec, double x, const Vec2& p);

struct JumpRecord {
    double y = 0.0;
    std::vector<double> p_minus;
    std::vector<double> p_plus;
    bool admissible = false;
    double identities_residual = 0.0;
    std::string violated;  // empty when admissible
};

JumpRecord make_jump(double y, const Vec2& p_minus, const Vec2& p_plus);

/// Fills admissible, identities_residual and violated for a candidate jump.
JumpRecord jump_admissible(const GameSpec& spec, JumpRecord record, double tol = kJumpIdentityTol);

}  // namespace hjnash
