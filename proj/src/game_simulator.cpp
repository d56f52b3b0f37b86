#include "hjnash/game_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hjnash/ode.hpp"

namespace hjnash {

namespace {

double drift_from(const Vec2& p, const GameSpec& spec, double x) {
    return -(p[0] / spec.k[0].value(x) + p[1] / spec.k[1].value(x));
}

Vec2 controls(const PiecewiseSolution& sol, const GameSpec& spec, double x) {
    const Vec2 p = sol.p_at(x);
    return {-p[0] / spec.k[0].value(x), -p[1] / spec.k[1].value(x)};
}

bool is_jump_point(const PiecewiseSolution& sol, double x) {
    return std::any_of(sol.jumps.begin(), sol.jumps.end(),
                       [x](const JumpRecord& j) { return std::abs(j.y - x) <= 1e-12 * std::max(1.0, std::abs(x)); });
}

void push_sample(Trajectory& tr, const PiecewiseSolution& sol, const GameSpec& spec, double t, double x) {
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.alpha.push_back(controls(sol, spec, x));
}

void hold(Trajectory& tr, const PiecewiseSolution& sol, const GameSpec& spec, double t0, double x, double T,
          double h) {
    const auto n = static_cast<std::size_t>(std::ceil((T - t0) / h));
    for (std::size_t i = 1; i <= n; ++i) push_sample(tr, sol, spec, std::min(T, t0 + static_cast<double>(i) * h), x);
}

}  // namespace

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::HitJumpPoint: return "HitJumpPoint";
        case EventKind::ReachedEquilibrium: return "ReachedEquilibrium";
        case EventKind::Truncated: return "Truncated";
    }
    return "?";
}

double closed_loop_drift(const PiecewiseSolution& sol, const GameSpec& spec, double x) {
    return drift_from(sol.p_at(x), spec, x);
}

std::vector<double> drift_barriers(const PiecewiseSolution& sol, const GameSpec& spec) {
    std::vector<double> out;
    const auto& g = sol.grid;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double a = g[i], b = g[i + 1];
        const double ga = closed_loop_drift(sol, spec, a);
        const double gb = drift_from(sol.p_left(b), spec, b);
        if (ga == 0.0) {
            out.push_back(a);
            continue;
        }
        if ((ga > 0.0) == (gb > 0.0) || gb == 0.0) continue;
        double lo = a, hi = b;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double gm = closed_loop_drift(sol, spec, mid);
            if ((gm > 0.0) == (ga > 0.0) && gm != 0.0) lo = mid;
            else hi = mid;
        }
        out.push_back(0.5 * (lo + hi));
    }
    if (closed_loop_drift(sol, spec, g.back()) == 0.0) out.push_back(g.back());
    for (const auto& j : sol.jumps) out.push_back(j.y);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Trajectory simulate(const PiecewiseSolution& sol, const GameSpec& spec, double y, double T,
                    const SimulateOptions& opt) {
    if (!(T > 0.0)) throw InputError("simulation horizon must be positive");
    if (y < sol.x_min() || y > sol.x_max()) {
        std::ostringstream os;
        os << "initial state " << y << " lies outside the solution window";
        throw WindowExceeded(0.0, y, os.str());
    }
    Trajectory tr;
    tr.horizon = T;
    push_sample(tr, sol, spec, 0.0, y);

    const double g0 = closed_loop_drift(sol, spec, y);
    if (is_jump_point(sol, y)) {
        const double gl = drift_from(sol.p_left(y), spec, y);
        if (gl < 0.0 && g0 > 0.0)
            tr.notes.push_back("both one-sided branches leave the jump point; the right-continuous branch is followed");
    }
    if (g0 == 0.0) {
        tr.events.push_back({0.0, y, EventKind::ReachedEquilibrium});
        hold(tr, sol, spec, 0.0, y, T, opt.h_max);
        return tr;
    }
    const double dir = g0 > 0.0 ? 1.0 : -1.0;
    const auto barriers = drift_barriers(sol, spec);
    double barrier = dir > 0.0 ? INFINITY : -INFINITY;
    for (double b : barriers) {
        if (dir > 0.0 && b > y) {
            barrier = b;
            break;
        }
        if (dir < 0.0 && b < y) barrier = b;
    }
    const bool barrier_is_jump = std::isfinite(barrier) && is_jump_point(sol, barrier);

    // Freeze beyond the barrier so trial stages cannot cross a sign change of g.
    auto rhs = [&](double, const ode::State<1>& s) -> ode::State<1> {
        if (dir * (s[0] - barrier) >= 0.0) return {0.0};
        return {closed_loop_drift(sol, spec, s[0])};
    };
    const auto stepper = ode::make_dopri5<1>(rhs);
    ode::Options o;
    o.rtol = opt.rtol;
    o.atol = opt.atol;
    o.h_max = opt.h_max;

    enum class Stop { None, Equilibrium, Exit } stop = Stop::None;
    double t_stop = T, x_stop = y;
    const auto res = stepper.integrate(0.0, ode::State<1>{y}, T, o, [&](double tp, const auto& yp, double t, const auto& s) {
        double x = s[0];
        if (std::isfinite(barrier) && (std::abs(x - barrier) <= opt.equilibrium_tol || dir * (x - barrier) >= 0.0)) {
            x = barrier;
            push_sample(tr, sol, spec, t, x);
            stop = Stop::Equilibrium;
            t_stop = t;
            x_stop = x;
            return false;
        }
        if (x < sol.x_min() || x > sol.x_max()) {
            const double edge = x > sol.x_max() ? sol.x_max() : sol.x_min();
            const double h = t - tp;
            const double theta =
                ode::locate_event(stepper, tp, yp, h, [&](const ode::State<1>& z) { return dir * (z[0] - edge); });
            stop = Stop::Exit;
            t_stop = tp + theta * h;
            x_stop = edge;
            push_sample(tr, sol, spec, t_stop, edge);
            return false;
        }
        push_sample(tr, sol, spec, t, x);
        return true;
    });
    if (res.status == ode::Status::StepUnderflow || res.status == ode::Status::MaxSteps)
        throw NumericalBreakdown(res.t, {res.y[0], 0.0}, "trajectory integration failed");

    if (stop == Stop::Equilibrium) {
        tr.events.push_back({t_stop, x_stop, barrier_is_jump ? EventKind::HitJumpPoint : EventKind::ReachedEquilibrium});
        if (barrier_is_jump) tr.notes.push_back("trajectory reached a jump point and is held there");
        hold(tr, sol, spec, t_stop, x_stop, T, opt.h_max);
    } else if (stop == Stop::Exit) {
        std::ostringstream os;
        os << "trajectory left the solution window [" << sol.x_min() << ", " << sol.x_max() << "] at t = " << t_stop;
        if (!opt.truncate_on_exit) throw WindowExceeded(t_stop, x_stop, os.str());
        tr.events.push_back({t_stop, x_stop, EventKind::Truncated});
        tr.truncated = true;
        tr.horizon = tr.t.back();
    }
    return tr;
}

CostBreakdown evaluate_cost(const GameSpec& spec, const Trajectory& traj, const PiecewiseSolution& sol) {
    CostBreakdown out;
    out.truncated = traj.truncated;
    const std::size_t n = traj.t.size();
    std::vector<double> run[2], ctl[2];
    double v_max = 0.0, p_max = 0.0;
    for (std::size_t m = 0; m < 2; ++m) {
        run[m].resize(n);
        ctl[m].resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double x = traj.x[i], w = std::exp(-traj.t[i]);
        for (std::size_t m = 0; m < 2; ++m) {
            const double k = spec.k[m].value(x);
            run[m][i] = w * spec.h[m].value(x);
            ctl[m][i] = w * 0.5 * k * traj.alpha[i][m] * traj.alpha[i][m];
        }
        v_max = std::max(v_max, std::abs(traj.alpha[i][0] + traj.alpha[i][1]));
    }
    for (const auto& p : sol.p) p_max = std::max(p_max, sup_norm(p));

    // Composite Simpson on pairs of (possibly unequal) intervals. Badly
    // graded pairs and a trailing odd interval use the trapezoid rule.
    auto integrate = [&](const std::vector<double>& f) {
        double acc = 0.0;
        std::size_t i = 0;
        for (; i + 2 < n; i += 2) {
            const double h0 = traj.t[i + 1] - traj.t[i], h1 = traj.t[i + 2] - traj.t[i + 1];
            if (h0 <= 0.0 || h1 <= 0.0 || h1 > 5.0 * h0 || h0 > 5.0 * h1) {
                acc += 0.5 * h0 * (f[i] + f[i + 1]) + 0.5 * h1 * (f[i + 1] + f[i + 2]);
                continue;
            }
            const double hs = h0 + h1;
            acc += hs / 6.0 * ((2.0 - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
        }
        if (i + 1 < n) acc += 0.5 * (traj.t[i + 1] - traj.t[i]) * (f[i] + f[i + 1]);
        return acc;
    };
    const double T = traj.t.back();
    const double xT = traj.x.back();
    for (std::size_t m = 0; m < 2; ++m) {
        auto& pc = out.player[m];
        pc.running = integrate(run[m]);
        pc.control = integrate(ctl[m]);
        pc.total = pc.running + pc.control;
        pc.tail_bound =
            std::exp(-T) * (std::abs(spec.h[m].value(xT)) + spec.C * v_max + 0.5 * spec.C * p_max * p_max);
    }
    return out;
}

}  // namespace hjnash
