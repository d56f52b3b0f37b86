#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hjnash/common.hpp"
#include "hjnash/game_model.hpp"
#include "hjnash/hj_system.hpp"
#include "hjnash/ode.hpp"

namespace hjnash {

struct InvariantRegion {
    enum class Shape { Polygon, Ball };

    Shape shape = Shape::Polygon;
    RegimeTag regime = RegimeTag::General;
    std::vector<Vec2> vertices;  // counterclockwise, polygons only
    Vec2 center{};
    double radius = 0.0;
    // +1: invariant forward in s (solutions are built left to right in x);
    // -1: invariant backward in s (built right to left).
    int orientation = 1;

    /// True when p lies in the region inflated by `margin`.
    bool contains(const Vec2& p, double margin = 0.0) const;
};

struct AdmissibilityReport {
    // A1: the HJ system holds pointwise and u' = p in the integrated sense.
    double max_residual = 0.0;
    double derivative_mismatch = 0.0;
    double derivative_bound = 0.0;
    bool a1 = false;
    // A2: sublinear growth; C' is the smallest constant with |u| <= C'(1 + |x|) on the grid.
    double growth_constant = 0.0;
    double growth_slope = 0.0;
    double growth_threshold = 0.0;
    bool a2 = false;
    // A3: jump conditions.
    std::vector<JumpRecord> jumps;
    bool a3 = false;

    bool pass = false;
    std::vector<std::string> failures;  // reason codes "A1", "A2", "A3"
};

struct PiecewiseSolution {
    std::vector<double> grid;
    std::vector<Vec2> p;   // right limits at jump points
    std::vector<Vec2> u;
    std::vector<Vec2> dp;  // dp/dx at grid points when known (smooth constructions), else empty
    std::vector<JumpRecord> jumps;

    std::string method;
    double nu = 0.0;
    double period = 0.0;          // x-period of periodic solutions
    double closure_error = 0.0;   // return-map residual of periodic solutions
    std::optional<AdmissibilityReport> audit;

    double x_min() const { return grid.front(); }
    double x_max() const { return grid.back(); }
    /// Right-continuous gradient; Hermite interpolation when dp is available.
    Vec2 p_at(double x) const;
    /// Left limit of the gradient.
    Vec2 p_left(double x) const;
    /// Value interpolation, cubic Hermite with slopes p.
    Vec2 u_at(double x) const;

private:
    std::size_t cell(double x) const;
    const JumpRecord* jump_at_index(std::size_t i) const;
};

/// Uniform grid with n + 1 points on [-L, L], n = ceil(2 L points_per_unit).
std::vector<double> uniform_grid(double L, double points_per_unit);

/// p = (kappa1, kappa2) with the values obtained by substitution; requires h' == kappa.
PiecewiseSolution constant_solution(const GameSpec& spec, double kappa1, double kappa2,
                                    double points_per_unit = 100.0);

struct RegionOptions {
    double safety = 0.9;
    double shrink = 0.9;
    int max_shrinks = 20;
    int angles = 720;
    std::size_t max_slope_samples = 512;
};

InvariantRegion invariant_region(const GameSpec& spec, const RegionOptions& opt = {});

struct ConstructOptions {
    std::vector<double> nu_schedule;  // empty: 2, 4, 8, ... up to max(nu_max, 4 L)
    double nu_max = 256.0;
    double tol = 1e-8;
    double points_per_unit = 100.0;
    double region_margin = 1e-6;
    double s_switch_delta = 1e-6;  // below this Delta the integration continues in s
    ode::Options ode{};
};

PiecewiseSolution construct_admissible(const GameSpec& spec, const ConstructOptions& opt = {});

struct PeriodicOptions {
    double points_per_unit = 100.0;
    double closure_tol = 1e-6;
    double s_max = 1e4;
    ode::Options ode{};
};

/// Periodic solution of the linear example from the closed orbit through (-alpha, alpha).
PiecewiseSolution periodic_solution(double kappa, double alpha, double L, const PeriodicOptions& opt = {});

struct AuditOptions {
    double residual_tol = 1e-6;
    double outer_fraction = 0.2;
    double growth_tol = -1.0;  // negative selects C
};

AdmissibilityReport audit(const PiecewiseSolution& sol, const GameSpec& spec, const AuditOptions& opt = {});

/// Two solutions of the gradient ODE started at a and b at x = x0, integrated in x
/// until the clock s = int dx / Delta(p_a) reaches s_end.
struct ContractionProbe {
    std::vector<double> s;
    std::vector<double> gap;
    double rate = 0.0;  // least-squares K in |w(s)| ~ |w(0)| exp(-K s)
    double final_gap = 0.0;
};

ContractionProbe contraction_probe(const GameSpec& spec, const Vec2& a, const Vec2& b, double s_end,
                                   double x0 = 0.0);

/// Builds a solution from explicit samples; u is recomputed only when `values` is empty.
PiecewiseSolution solution_from_samples(const GameSpec& spec, std::vector<double> grid, std::vector<Vec2> p,
                                        std::vector<Vec2> values, std::vector<JumpRecord> jumps,
                                        std::string method);

}  // namespace hjnash
