#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hjnash/common.hpp"
#include "hjnash/game_model.hpp"

namespace hjnash {

/// Real equilibria of the rescaled field with h' frozen at kappa.
std::vector<Vec2> find_equilibria(double kappa1, double kappa2);

struct Linearization {
    std::array<double, 4> jacobian{};  // row-major
    std::array<std::complex<double>, 2> eigenvalues{};
    bool real = false;
    std::array<Vec2, 2> eigenvectors{};  // unit length, only when real
    std::array<double, 2> angles{};      // atan2 of the eigenvectors, radians
    std::array<double, 2> tan_alpha{};   // (lambda_i + k2 - k1) / k1 when real and k1 != 0
};

/// Throws DomainError when `point` is not an equilibrium.
Linearization linearize(double kappa1, double kappa2, const Vec2& point, double tol = 1e-8);

enum class RegionTag {
    A, B, C1, C2, D, E, F,
    Xi1, Xi2, QuadrantPP, QuadrantMM, QuadrantMP,
    S1, S2, S3, S4,
};

std::string to_string(RegionTag tag);

struct RegionLabel {
    RegionTag tag = RegionTag::A;
    bool swapped = false;      // cooperative labels computed after exchanging the players (kappa1 > kappa2)
    bool approximate = false;  // frozen analysis applied to perturbed slopes
    double delta = 0.0;
};

struct SectorOptions {
    double radius = -1.0;      // neighbourhood of the origin; negative: 0.1 * min(|kappa1|, |kappa2|)
    double half_angle = 0.15;  // radians around each eigenvector
};

/// Region of the gradient plane containing p.
/// `regime` must be CooperativeIncreasing or Conflicting (constant slopes kappa).
RegionLabel classify_point(RegimeTag regime, double kappa1, double kappa2, const Vec2& p, double delta = 0.0,
                           const SectorOptions& sectors = {});

/// Slopes along an orbit: frozen constants, or h'(x(s)) from a game.
class SlopeSource {
public:
    static SlopeSource frozen(const Vec2& slopes) { return SlopeSource(slopes, nullptr); }
    static SlopeSource from_game(const GameSpec& spec) { return SlopeSource({}, &spec); }
    Vec2 at(double x) const;
    bool is_frozen() const { return spec_ == nullptr; }

private:
    SlopeSource(const Vec2& s, const GameSpec* spec) : slopes_(s), spec_(spec) {}
    Vec2 slopes_;
    const GameSpec* spec_;
};

enum class Termination { Converged, BlowUp, LeftWindow, ClosedOrbit, NotIntegrated };

std::string to_string(Termination t);

struct OrbitSide {
    Termination kind = Termination::NotIntegrated;
    double s_end = 0.0;
    Vec2 limit{};                 // Converged
    double s0 = 0.0;              // BlowUp: estimated blow-up time
    double eta = 0.0;             // BlowUp: |p| ~ eta / |s - s0|
    double exponent = 0.0;        // BlowUp: fitted exponent of |p| against |s - s0|
    double delta_exponent = 0.0;  // BlowUp: fitted exponent of Delta against |s - s0|
    double period = 0.0;          // ClosedOrbit: period in s
    double x_period = 0.0;        // ClosedOrbit: advance of x per loop
    bool at_origin = false;       // Converged to (0, 0)
};

struct Orbit {
    Vec2 p0{};
    double x0 = 0.0;
    std::vector<double> s;  // increasing
    std::vector<Vec2> p;
    std::vector<double> x;  // x0 + int Delta ds
    OrbitSide forward;
    OrbitSide backward;
};

struct OrbitOptions {
    double s_lo = -50.0;
    double s_hi = 50.0;
    bool forward = true;
    bool backward = true;
    double x0 = 0.0;
    double blowup_threshold = 1e6;
    double converge_tol = 1e-9;  // |N| threshold for an equilibrium
    double origin_radius = 1e-4;
    double origin_alignment = 0.05;  // transverse component allowed on the origin's invariant manifold
    double closure_tol = 1e-6;
    double rtol = 1e-10;
    double atol = 1e-12;
};

Orbit integrate_orbit(const SlopeSource& slopes, const Vec2& p0, const OrbitOptions& opt = {});

enum class EndKind { Finite, Infinite, Undetermined };

std::string to_string(EndKind k);

struct XWindow {
    double x_min = 0.0;
    double x_max = 0.0;
    EndKind min_end = EndKind::Undetermined;  // backward side
    EndKind max_end = EndKind::Undetermined;  // forward side
};

XWindow x_window(const Orbit& orbit);

struct PortraitPoint {
    Vec2 p0{};
    OrbitSide forward;
    OrbitSide backward;
};

struct PortraitOptions {
    Vec2 lo{-3.0, -3.0};
    Vec2 hi{3.0, 3.0};
    std::size_t n1 = 12;
    std::size_t n2 = 12;
    std::uint64_t seed = 0;
    unsigned workers = 0;  // 0: hardware concurrency
    OrbitOptions orbit{};
};

/// Jittered grid of starting points, integrated in parallel; output order is the grid order.
std::vector<PortraitPoint> portrait(const SlopeSource& slopes, const PortraitOptions& opt = {});

}  // namespace hjnash
