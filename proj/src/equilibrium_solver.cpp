#include "hjnash/equilibrium_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hjnash {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

void hermite(double t, double h, double& h00, double& h10, double& h01, double& h11) {
    const double t2 = t * t, t3 = t2 * t;
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    h10 = (t3 - 2.0 * t2 + t) * h;
    h01 = -2.0 * t3 + 3.0 * t2;
    h11 = (t3 - t2) * h;
}

void require_planar(const GameSpec& spec) {
    spec.check_well_formed();
    if (spec.players != 2) throw UnsupportedError("the planar solver handles two players only");
    if (!spec.has_unit_weights()) throw UnsupportedError("the planar solver requires k_1 = k_2 = 1");
}

bool has_constant_slopes(const GameSpec& spec, Vec2& kappa) {
    for (std::size_t i = 0; i < 2; ++i) {
        const auto* lin = std::get_if<LinearCost>(&spec.h[i].kind());
        if (lin == nullptr) return false;
        kappa[i] = lin->slope;
    }
    return true;
}

std::vector<Vec2> values_on_grid(const GameSpec& spec, const std::vector<double>& grid, const std::vector<Vec2>& p) {
    std::vector<Vec2> u(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto v = reconstruct_values(spec, grid[i], {p[i][0], p[i][1]});
        u[i] = {v[0], v[1]};
    }
    return u;
}

std::vector<Vec2> slopes_of_gradient(const GameSpec& spec, const std::vector<double>& grid,
                                     const std::vector<Vec2>& p) {
    std::vector<Vec2> dp(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) dp[i] = gradient_field(p[i], slopes_at(spec, grid[i]));
    return dp;
}

struct SwitchToS {};

// Integrates the gradient ODE in x between two abscissae, falling back to the
// rescaled (s-time) system when Delta gets small.
class XIntegrator {
public:
    XIntegrator(const GameSpec& spec, const InvariantRegion* region, double margin, double s_switch,
                const ode::Options& opt)
        : spec_(spec), region_(region), margin_(margin), s_switch_(s_switch), opt_(opt) {}

    Vec2 advance(double x0, const Vec2& p0, double x1) const {
        if (x0 == x1) return p0;
        double xa = x0;
        Vec2 pa = p0;
        auto rhs = [this](double x, const ode::State<2>& p) -> ode::State<2> {
            const double d = delta(p);
            if (d < s_switch_) throw SwitchToS{};
            const Vec2 n = rescaled_field(p, slopes_at(spec_, x));
            return {n[0] / d, n[1] / d};
        };
        const auto stepper = ode::make_dopri5<2>(rhs);
        try {
            const auto res = stepper.integrate(x0, p0, x1, opt_, [&](double, const auto&, double x, const auto& y) {
                check(x, y);
                xa = x;
                pa = y;
                return true;
            });
            if (res.status != ode::Status::Completed)
                throw NumericalBreakdown(res.t, res.y, "gradient ODE integration in x failed");
            return res.y;
        } catch (const SwitchToS&) {
            return advance_in_s(xa, pa, x1);
        }
    }

private:
    void check(double x, const Vec2& p) const {
        if (region_ != nullptr && !region_->contains(p, margin_)) {
            std::ostringstream os;
            os << "iterate left the invariant region at x = " << x << ", p = (" << p[0] << ", " << p[1] << ")";
            throw InvariantViolation(x, p, os.str());
        }
    }

    Vec2 advance_in_s(double x0, const Vec2& p0, double x1) const {
        const double dir = x1 > x0 ? 1.0 : -1.0;
        auto rhs = [this](double, const ode::State<3>& y) -> ode::State<3> {
            const Vec2 p{y[0], y[1]};
            const Vec2 n = rescaled_field(p, slopes_at(spec_, y[2]));
            return {n[0], n[1], delta(p)};
        };
        const auto stepper = ode::make_dopri5<3>(rhs);
        double t_prev = 0.0, h = 0.0;
        ode::State<3> y_prev{};
        bool crossed = false;
        const ode::State<3> y0{p0[0], p0[1], x0};
        const auto res = stepper.integrate(0.0, y0, dir * 1e7, opt_, [&](double tp, const auto& yp, double t, const auto& y) {
            check(y[2], {y[0], y[1]});
            if ((y[2] - x1) * dir >= 0.0) {
                t_prev = tp;
                y_prev = yp;
                h = t - tp;
                crossed = true;
                return false;
            }
            return true;
        });
        if (!crossed)
            throw NumericalBreakdown(res.t, {res.y[0], res.y[1]}, "rescaled integration stalled before reaching x");
        const double theta =
            ode::locate_event(stepper, t_prev, y_prev, h, [x1](const ode::State<3>& y) { return y[2] - x1; });
        const auto y = stepper.advance(t_prev, y_prev, theta * h);
        return {y[0], y[1]};
    }

    const GameSpec& spec_;
    const InvariantRegion* region_;
    double margin_;
    double s_switch_;
    ode::Options opt_;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    LineFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    return f;
}

}  // namespace

// ---------------------------------------------------------------------------

bool InvariantRegion::contains(const Vec2& p, double margin) const {
    if (shape == Shape::Ball) return norm(p - center) <= radius + margin;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = vertices[i];
        const Vec2& b = vertices[(i + 1) % n];
        const Vec2 e = b - a;
        if (cross(e, p - a) < -margin * norm(e)) return false;
    }
    return true;
}

std::size_t PiecewiseSolution::cell(double x) const {
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    return std::min(i, grid.size() - 2);
}

const JumpRecord* PiecewiseSolution::jump_at_index(std::size_t i) const {
    for (const auto& j : jumps)
        if (std::abs(j.y - grid[i]) <= 1e-12 * std::max(1.0, std::abs(j.y))) return &j;
    return nullptr;
}

Vec2 PiecewiseSolution::p_at(double x) const {
    if (x <= grid.front()) return p.front();
    if (x >= grid.back()) return p.back();
    const std::size_t i = cell(x);
    if (x == grid[i]) return p[i];
    const double h = grid[i + 1] - grid[i];
    const double t = (x - grid[i]) / h;
    const JumpRecord* jr = jump_at_index(i + 1);
    const Vec2 b = jr ? Vec2{jr->p_minus[0], jr->p_minus[1]} : p[i + 1];
    if (!dp.empty() && jr == nullptr) {
        double h00, h10, h01, h11;
        hermite(t, h, h00, h10, h01, h11);
        return {h00 * p[i][0] + h10 * dp[i][0] + h01 * b[0] + h11 * dp[i + 1][0],
                h00 * p[i][1] + h10 * dp[i][1] + h01 * b[1] + h11 * dp[i + 1][1]};
    }
    return {(1.0 - t) * p[i][0] + t * b[0], (1.0 - t) * p[i][1] + t * b[1]};
}

Vec2 PiecewiseSolution::p_left(double x) const {
    if (x > grid.front() && x <= grid.back()) {
        const auto it = std::lower_bound(grid.begin(), grid.end(), x);
        if (it != grid.end() && *it == x) {
            const auto j = static_cast<std::size_t>(it - grid.begin());
            if (const JumpRecord* jr = jump_at_index(j)) return {jr->p_minus[0], jr->p_minus[1]};
            return p[j];
        }
    }
    return p_at(x);
}

Vec2 PiecewiseSolution::u_at(double x) const {
    if (x <= grid.front()) return u.front() + (x - grid.front()) * p.front();
    if (x >= grid.back()) return u.back() + (x - grid.back()) * p.back();
    const std::size_t i = cell(x);
    const double h = grid[i + 1] - grid[i];
    const double t = (x - grid[i]) / h;
    const Vec2 ml = p[i];
    const Vec2 mr = p_left(grid[i + 1]);
    double h00, h10, h01, h11;
    hermite(t, h, h00, h10, h01, h11);
    return {h00 * u[i][0] + h10 * ml[0] + h01 * u[i + 1][0] + h11 * mr[0],
            h00 * u[i][1] + h10 * ml[1] + h01 * u[i + 1][1] + h11 * mr[1]};
}

std::vector<double> uniform_grid(double L, double points_per_unit) {
    const auto n = static_cast<std::size_t>(std::max(2.0, std::ceil(2.0 * L * points_per_unit)));
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g[i] = -L + 2.0 * L * static_cast<double>(i) / static_cast<double>(n);
    g.front() = -L;
    g.back() = L;
    return g;
}

PiecewiseSolution constant_solution(const GameSpec& spec, double kappa1, double kappa2, double points_per_unit) {
    spec.check_well_formed();
    if (spec.players != 2) throw UnsupportedError("constant_solution is defined for two players");
    PiecewiseSolution sol;
    sol.grid = uniform_grid(spec.L, points_per_unit);
    for (double x : sol.grid) {
        const Vec2 s = slopes_at(spec, x);
        if (std::abs(s[0] - kappa1) > 1e-12 || std::abs(s[1] - kappa2) > 1e-12)
            throw DomainError("constant_solution needs h' identically equal to kappa");
    }
    sol.p.assign(sol.grid.size(), Vec2{kappa1, kappa2});
    sol.dp.assign(sol.grid.size(), Vec2{0.0, 0.0});
    sol.u = values_on_grid(spec, sol.grid, sol.p);
    sol.method = "constant";
    sol.audit = audit(sol, spec);
    return sol;
}

InvariantRegion invariant_region(const GameSpec& spec, const RegionOptions& opt) {
    require_planar(spec);
    const Regime r = classify_regime(spec);
    InvariantRegion reg;
    reg.regime = r.tag;
    const double C = spec.C;
    switch (r.tag) {
        case RegimeTag::CooperativeIncreasing:
        case RegimeTag::CooperativeDecreasing: {
            const double lo = 1.0 / (2.0 * C), hi = 2.0 * C;
            reg.shape = InvariantRegion::Shape::Polygon;
            reg.vertices = {{lo, 0.0}, {hi, 0.0}, {hi, hi}, {0.0, hi}, {0.0, lo}};
            if (r.tag == RegimeTag::CooperativeDecreasing) {
                for (auto& v : reg.vertices) v = -1.0 * v;
                reg.orientation = -1;
            }
            return reg;
        }
        case RegimeTag::Conflicting: break;
        default:
            throw UnsupportedError("no invariant region is known for regime " + to_string(r.tag));
    }

    const double sum = r.kappa1 + r.kappa2;
    if (std::abs(sum) < 1e-12) throw UnsupportedError("conflicting regime with kappa1 + kappa2 = 0");
    reg.shape = InvariantRegion::Shape::Ball;
    reg.center = {r.kappa1, r.kappa2};
    reg.orientation = sum > 0.0 ? 1 : -1;

    // Slope pairs actually attained by h' on the validation grid; the field is
    // affine in h', so inwardness on these pairs covers their convex hull.
    const auto xs = SampleGrid{}.points(spec.L);
    const std::size_t stride = std::max<std::size_t>(1, xs.size() / opt.max_slope_samples);
    std::vector<Vec2> slopes;
    for (std::size_t i = 0; i < xs.size(); i += stride) slopes.push_back(slopes_at(spec, xs[i]));
    slopes.push_back(slopes_at(spec, xs.back()));

    double R = opt.safety * kSqrtHalf * std::abs(sum);
    for (int attempt = 0; attempt <= opt.max_shrinks; ++attempt, R *= opt.shrink) {
        bool inward = true;
        for (int k = 0; k < opt.angles && inward; ++k) {
            const double th = 2.0 * M_PI * k / opt.angles;
            const Vec2 q{R * std::cos(th), R * std::sin(th)};
            const Vec2 p = reg.center + q;
            for (const Vec2& s : slopes) {
                if (reg.orientation * dot(q, rescaled_field(p, s)) >= 0.0) {
                    inward = false;
                    break;
                }
            }
        }
        if (inward) {
            reg.radius = R;
            return reg;
        }
    }
    throw UnsupportedError("no ball around kappa is invariant under the perturbed field; delta too large");
}

PiecewiseSolution construct_admissible(const GameSpec& spec, const ConstructOptions& opt) {
    require_planar(spec);
    const Regime r = classify_regime(spec);
    if (r.tag == RegimeTag::General || r.tag == RegimeTag::LinearExample) {
        Vec2 kappa{};
        if (has_constant_slopes(spec, kappa)) {
            auto sol = constant_solution(spec, kappa[0], kappa[1], opt.points_per_unit);
            sol.method = "constant_slopes";
            return sol;
        }
        throw UnsupportedError("construct_admissible does not handle regime " + to_string(r.tag));
    }
    const InvariantRegion region = invariant_region(spec);
    Vec2 anchor{1.0, 1.0};
    if (r.tag == RegimeTag::CooperativeDecreasing) anchor = {-1.0, -1.0};
    if (r.tag == RegimeTag::Conflicting) anchor = {r.kappa1, r.kappa2};
    if (!region.contains(anchor)) throw UnsupportedError("anchor point lies outside the invariant region");
    const int dir = region.orientation;

    std::vector<double> schedule = opt.nu_schedule;
    // Radii below L are skipped, so the default schedule reaches at least 4 L.
    if (schedule.empty())
        for (double nu = 2.0; nu <= std::max(opt.nu_max, 4.0 * spec.L); nu *= 2.0) schedule.push_back(nu);

    const auto grid = uniform_grid(spec.L, opt.points_per_unit);
    const std::size_t n = grid.size();
    const XIntegrator integ(spec, &region, opt.region_margin, opt.s_switch_delta, opt.ode);

    std::vector<Vec2> prev;
    double last_diff = INFINITY;
    double used_nu = 0.0;
    for (double nu : schedule) {
        if (nu < spec.L) continue;
        std::vector<Vec2> cur(n);
        double x = dir > 0 ? -nu : nu;
        Vec2 p = anchor;
        for (std::size_t step = 0; step < n; ++step) {
            const std::size_t k = dir > 0 ? step : n - 1 - step;
            p = integ.advance(x, p, grid[k]);
            x = grid[k];
            cur[k] = p;
        }
        if (!prev.empty()) {
            last_diff = 0.0;
            for (std::size_t k = 0; k < n; ++k) last_diff = std::max(last_diff, sup_norm(cur[k] - prev[k]));
        }
        prev = std::move(cur);
        used_nu = nu;
        if (last_diff < opt.tol) break;
    }
    if (!(last_diff < opt.tol)) {
        std::ostringstream os;
        os << "nu-limit did not converge by nu = " << used_nu << "; last sup difference " << last_diff;
        throw NoConvergence(last_diff, os.str());
    }

    PiecewiseSolution sol;
    sol.grid = grid;
    sol.p = std::move(prev);
    sol.dp = slopes_of_gradient(spec, sol.grid, sol.p);
    sol.u = values_on_grid(spec, sol.grid, sol.p);
    sol.method = "nu_limit";
    sol.nu = used_nu;
    sol.audit = audit(sol, spec);
    return sol;
}

PiecewiseSolution periodic_solution(double kappa, double alpha, double L, const PeriodicOptions& opt) {
    if (!(kappa > 0.0)) throw DomainError("the linear example needs kappa > 0");
    if (!(alpha > 0.0 && alpha < kappa)) throw DomainError("closed orbits exist only for 0 < alpha < kappa");
    const GameSpec spec = linear_example_game(kappa, L);
    const Vec2 slopes{-kappa, kappa};
    const Vec2 p0{-alpha, alpha};

    // (p1, p2, x) in s-time; return map on the line p1 + p2 = 0, crossed upwards.
    auto rhs = [slopes](double, const ode::State<3>& y) -> ode::State<3> {
        const Vec2 p{y[0], y[1]};
        const Vec2 n = rescaled_field(p, slopes);
        return {n[0], n[1], delta(p)};
    };
    const auto stepper = ode::make_dopri5<3>(rhs);
    bool found = false;
    double t_prev = 0.0, h = 0.0;
    ode::State<3> y_prev{};
    stepper.integrate(0.0, ode::State<3>{p0[0], p0[1], 0.0}, opt.s_max, opt.ode,
                      [&](double tp, const auto& yp, double t, const auto& y) {
                          if (yp[0] + yp[1] < 0.0 && y[0] + y[1] >= 0.0) {
                              t_prev = tp;
                              y_prev = yp;
                              h = t - tp;
                              found = true;
                              return false;
                          }
                          return true;
                      });
    if (!found) throw OrbitNotClosed(INFINITY, "orbit did not return to the line p1 + p2 = 0");
    const double theta = ode::locate_event(stepper, t_prev, y_prev, h,
                                           [](const ode::State<3>& y) { return y[0] + y[1]; });
    const auto y_ret = stepper.advance(t_prev, y_prev, theta * h);
    const double closure = norm(Vec2{y_ret[0], y_ret[1]} - p0);
    if (!(closure <= opt.closure_tol)) {
        std::ostringstream os;
        os << "return map residual " << closure << " exceeds " << opt.closure_tol;
        throw OrbitNotClosed(closure, os.str());
    }
    const double ell = y_ret[2];

    PiecewiseSolution sol;
    sol.grid = uniform_grid(L, opt.points_per_unit);
    const std::size_t n = sol.grid.size();
    std::vector<std::pair<double, std::size_t>> phases(n);
    for (std::size_t i = 0; i < n; ++i) {
        double ph = std::fmod(sol.grid[i], ell);
        if (ph < 0.0) ph += ell;
        phases[i] = {ph, i};
    }
    std::sort(phases.begin(), phases.end());
    const XIntegrator integ(spec, nullptr, 0.0, 0.0, opt.ode);
    sol.p.resize(n);
    double x = 0.0;
    Vec2 p = p0;
    for (const auto& [ph, i] : phases) {
        p = integ.advance(x, p, ph);
        x = ph;
        sol.p[i] = p;
    }
    sol.dp = slopes_of_gradient(spec, sol.grid, sol.p);
    sol.u = values_on_grid(spec, sol.grid, sol.p);
    sol.method = "periodic";
    sol.period = ell;
    sol.closure_error = closure;
    sol.audit = audit(sol, spec);
    return sol;
}

AdmissibilityReport audit(const PiecewiseSolution& sol, const GameSpec& spec, const AuditOptions& opt) {
    AdmissibilityReport rep;
    const auto& g = sol.grid;
    const std::size_t n = g.size();
    if (n < 2 || sol.p.size() != n || sol.u.size() != n) throw InputError("solution samples are inconsistent");

    auto is_jump = [&](std::size_t i) {
        return std::any_of(sol.jumps.begin(), sol.jumps.end(), [&](const JumpRecord& j) {
            return std::abs(j.y - g[i]) <= 1e-12 * std::max(1.0, std::abs(j.y));
        });
    };

    // A1
    double umax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (const Vec2& pp : {sol.p[i], sol.p_left(g[i])}) {
            const auto r = hj_residual(spec, g[i], {sol.u[i][0], sol.u[i][1]}, {pp[0], pp[1]});
            for (double v : r) rep.max_residual = std::max(rep.max_residual, std::abs(v));
        }
        umax = std::max(umax, sup_norm(sol.u[i]));
    }
    double curv = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (is_jump(i - 1) || is_jump(i) || is_jump(i + 1)) continue;
        const double h = 0.5 * (g[i + 1] - g[i - 1]);
        curv = std::max(curv, sup_norm(sol.p[i + 1] - 2.0 * sol.p[i] + sol.p[i - 1]) / (h * h));
    }
    double bound = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = g[i + 1] - g[i];
        const Vec2 pr = sol.p[i];
        const Vec2 pl = sol.p_left(g[i + 1]);
        const Vec2 trap = (0.5 * h) * (pr + pl);
        rep.derivative_mismatch = std::max(rep.derivative_mismatch, sup_norm(sol.u[i + 1] - sol.u[i] - trap));
        bound = std::max(bound, h * h * h / 12.0 * curv);
    }
    rep.derivative_bound = 2.0 * bound + 1e-9 * (1.0 + umax);
    rep.a1 = rep.max_residual <= opt.residual_tol && rep.derivative_mismatch <= rep.derivative_bound;

    // A2
    for (std::size_t i = 0; i < n; ++i)
        rep.growth_constant = std::max(rep.growth_constant, sup_norm(sol.u[i]) / (1.0 + std::abs(g[i])));
    const double reach = std::max(std::abs(g.front()), std::abs(g.back()));
    const double cut = (1.0 - opt.outer_fraction) * reach;
    for (int side : {-1, 1}) {
        for (std::size_t j = 0; j < 2; ++j) {
            std::vector<double> ax, au;
            for (std::size_t i = 0; i < n; ++i) {
                if (side * g[i] >= cut) {
                    ax.push_back(std::abs(g[i]));
                    au.push_back(std::abs(sol.u[i][j]));
                }
            }
            if (ax.size() >= 2) rep.growth_slope = std::max(rep.growth_slope, fit_line(ax, au).slope);
        }
    }
    const double tol = opt.growth_tol >= 0.0 ? opt.growth_tol : spec.C;
    rep.growth_threshold = spec.C + tol;
    rep.a2 = rep.growth_slope <= rep.growth_threshold;

    // A3
    rep.a3 = true;
    for (const auto& j : sol.jumps) {
        rep.jumps.push_back(jump_admissible(spec, j));
        rep.a3 = rep.a3 && rep.jumps.back().admissible;
    }

    if (!rep.a1) rep.failures.push_back("A1");
    if (!rep.a2) rep.failures.push_back("A2");
    if (!rep.a3) rep.failures.push_back("A3");
    rep.pass = rep.failures.empty();
    return rep;
}

ContractionProbe contraction_probe(const GameSpec& spec, const Vec2& a, const Vec2& b, double s_end, double x0) {
    require_planar(spec);
    const Regime r = classify_regime(spec);
    double dir = 1.0;
    if (r.tag == RegimeTag::CooperativeDecreasing) dir = -1.0;
    if (r.tag == RegimeTag::Conflicting && r.kappa1 + r.kappa2 < 0.0) dir = -1.0;

    // (pa, pb, s) as functions of x; ds/dx = 1 / Delta(pa).
    auto rhs = [&spec](double x, const ode::State<5>& y) -> ode::State<5> {
        const Vec2 sl = slopes_at(spec, x);
        const Vec2 pa{y[0], y[1]}, pb{y[2], y[3]};
        const Vec2 fa = gradient_field(pa, sl);
        const Vec2 fb = gradient_field(pb, sl);
        return {fa[0], fa[1], fb[0], fb[1], 1.0 / delta(pa)};
    };
    const auto stepper = ode::make_dopri5<5>(rhs);
    ContractionProbe out;
    out.s.push_back(0.0);
    out.gap.push_back(norm(a - b));
    double t_prev = 0.0, h = 0.0;
    ode::State<5> y_prev{};
    bool done = false;
    ode::Options o;
    o.rtol = 1e-12;
    o.atol = 1e-14;
    const ode::State<5> y0{a[0], a[1], b[0], b[1], 0.0};
    stepper.integrate(x0, y0, x0 + dir * 1e7, o, [&](double tp, const auto& yp, double t, const auto& y) {
        if (y[4] >= s_end) {
            t_prev = tp;
            y_prev = yp;
            h = t - tp;
            done = true;
            return false;
        }
        out.s.push_back(y[4]);
        out.gap.push_back(std::hypot(y[0] - y[2], y[1] - y[3]));
        return true;
    });
    if (!done) throw NumericalBreakdown(out.s.back(), a, "contraction probe did not reach the requested s");
    const double theta =
        ode::locate_event(stepper, t_prev, y_prev, h, [s_end](const ode::State<5>& y) { return y[4] - s_end; });
    const auto y = stepper.advance(t_prev, y_prev, theta * h);
    out.s.push_back(y[4]);
    out.gap.push_back(std::hypot(y[0] - y[2], y[1] - y[3]));
    out.final_gap = out.gap.back();

    std::vector<double> ss, lg;
    for (std::size_t i = 0; i < out.s.size(); ++i) {
        if (out.gap[i] > 0.0) {
            ss.push_back(out.s[i]);
            lg.push_back(std::log(out.gap[i]));
        }
    }
    out.rate = ss.size() >= 2 ? -fit_line(ss, lg).slope : 0.0;
    return out;
}

PiecewiseSolution solution_from_samples(const GameSpec& spec, std::vector<double> grid, std::vector<Vec2> p,
                                        std::vector<Vec2> values, std::vector<JumpRecord> jumps,
                                        std::string method) {
    if (grid.size() < 2 || p.size() != grid.size()) throw InputError("grid and gradient samples differ in length");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw InputError("solution grid must be strictly increasing");
    if (!values.empty() && values.size() != grid.size()) throw InputError("value samples differ in length");
    for (const auto& j : jumps) {
        const bool on_grid = std::any_of(grid.begin(), grid.end(), [&](double x) {
            return std::abs(x - j.y) <= 1e-12 * std::max(1.0, std::abs(x));
        });
        if (!on_grid) throw InputError("jump locations must be grid points");
    }
    PiecewiseSolution sol;
    sol.grid = std::move(grid);
    sol.p = std::move(p);
    sol.u = values.empty() ? values_on_grid(spec, sol.grid, sol.p) : std::move(values);
    sol.jumps = std::move(jumps);
    sol.method = std::move(method);
    return sol;
}

}  // namespace hjnash
