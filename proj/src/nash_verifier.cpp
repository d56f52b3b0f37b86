#include "hjnash/nash_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>
#include <tuple>

namespace hjnash {

namespace {

constexpr double kGolden = 0.6180339887498949;
constexpr int kGoldenIterations = 30;
constexpr int kEvaluationSweeps = 30;
constexpr std::size_t kFullScanEvery = 25;

double lerp_uniform(const std::vector<double>& v, double x0, double dx, double x) {
    // Linear interpolation, linear extrapolation beyond the ends.
    const double t = (x - x0) / dx;
    const auto last = static_cast<double>(v.size() - 1);
    double cell = std::floor(t);
    cell = std::clamp(cell, 0.0, last - 1.0);
    const auto i = static_cast<std::size_t>(cell);
    const double w = t - cell;
    return (1.0 - w) * v[i] + w * v[i + 1];
}

struct Foot {
    std::size_t i = 0;
    double w = 0.0;
};

class Bellman {
public:
    Bellman(const DeviationProblem& pb, const DpOptions& opt)
        : pb_(pb), n_(opt.grid_n), dt_(opt.dt) {
        x0_ = -pb.half_width;
        dx_ = 2.0 * pb.half_width / static_cast<double>(n_ - 1);
        gamma_ = std::exp(-dt_);
        weight_ = -std::expm1(-dt_);
        tau_ = (1.0 - gamma_ * (1.0 + dt_)) / weight_;
        xs_.resize(n_);
        drift_.resize(n_);
        for (std::size_t m = 0; m < n_; ++m) {
            xs_[m] = x0_ + static_cast<double>(m) * dx_;
            drift_[m] = pb.opponent_drift.at(xs_[m]);
        }
    }

    const std::vector<double>& xs() const { return xs_; }
    double gamma() const { return gamma_; }

    struct Step {
        double running;  // weighted running cost of the step
        double foot;
    };

    Step step(std::size_t m, double a) const {
        const double x = xs_[m];
        const double xm = x + 0.5 * dt_ * (a + drift_[m]);
        const double b = a + pb_.opponent_drift.at(xm);
        const double xbar = x + tau_ * b;
        const double k = pb_.k.value(xbar);
        return {weight_ * (pb_.h.value(xbar) + 0.5 * k * a * a), x + dt_ * b};
    }

    Foot locate(double z) const {
        if (std::abs(z) > 2.0 * pb_.half_width) {
            std::ostringstream os;
            os << "DP foot point " << z << " leaves twice the state window " << pb_.half_width;
            throw WindowTooSmall(os.str());
        }
        const double t = (z - x0_) / dx_;
        double cell = std::clamp(std::floor(t), 0.0, static_cast<double>(n_ - 2));
        return {static_cast<std::size_t>(cell), t - cell};
    }

    double q(std::size_t m, double a, const std::vector<double>& v) const {
        const Step s = step(m, a);
        const Foot f = locate(s.foot);
        return s.running + gamma_ * ((1.0 - f.w) * v[f.i] + f.w * v[f.i + 1]);
    }

private:
    const DeviationProblem& pb_;
    std::size_t n_;
    double dt_;
    double x0_ = 0.0, dx_ = 1.0;
    double gamma_ = 1.0, weight_ = 0.0, tau_ = 0.0;
    std::vector<double> xs_, drift_;
};

// Golden-section minimum of f on [lo, hi]; returns the argmin and the value.
template <class F>
std::pair<double, double> golden(F&& f, double lo, double hi, double a_best, double f_best) {
    double c = hi - kGolden * (hi - lo), d = lo + kGolden * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < kGoldenIterations; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - kGolden * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + kGolden * (hi - lo);
            fd = f(d);
        }
    }
    if (fc < f_best) a_best = c, f_best = fc;
    if (fd < f_best) a_best = d, f_best = fd;
    return {a_best, f_best};
}

}  // namespace

double UniformSamples::at(double x) const {
    if (v.empty()) return 0.0;
    if (v.size() == 1) return v.front();
    const double t = (x - x0) / dx;
    if (t <= 0.0) return v.front();
    const auto last = static_cast<double>(v.size() - 1);
    if (t >= last) return v.back();
    const double cell = std::floor(t);
    const auto i = static_cast<std::size_t>(cell);
    const double w = t - cell;
    return (1.0 - w) * v[i] + w * v[i + 1];
}

DeviationProblem make_deviation_problem(const GameSpec& spec, const PiecewiseSolution& sol, std::size_t player) {
    if (player >= spec.players) throw InputError("player index out of range");
    if (sol.grid.size() < 2) throw InputError("solution grid has fewer than two points");
    DeviationProblem pb;
    pb.player = player;
    pb.h = spec.h[player];
    pb.k = spec.k[player];

    const double lo = sol.x_min(), hi = sol.x_max();
    const std::size_t n = sol.grid.size();
    auto& d = pb.opponent_drift;
    d.x0 = lo;
    d.dx = (hi - lo) / static_cast<double>(n - 1);
    d.v.resize(n);
    double p_max = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double x = lo + static_cast<double>(m) * d.dx;
        const Vec2 p = sol.p_at(x);
        double drift = 0.0;
        for (std::size_t j = 0; j < 2; ++j)
            if (j != player) drift -= p[j] / spec.k[j].value(x);
        d.v[m] = drift;
    }
    for (const auto& p : sol.p) p_max = std::max(p_max, sup_norm(p));
    pb.half_width = 1.5 * std::max(std::abs(lo), std::abs(hi));
    pb.a_max = 2.0 * spec.C * (1.0 + p_max);
    return pb;
}

double DpResult::value_at(double y) const {
    return lerp_uniform(value, x.front(), x[1] - x[0], y);
}

double DpResult::policy_at(double y) const {
    const double dx = x[1] - x[0];
    const double t = std::clamp((y - x.front()) / dx, 0.0, static_cast<double>(x.size() - 1));
    return lerp_uniform(policy, x.front(), dx, x.front() + t * dx);
}

DpResult dp_value(const DeviationProblem& problem, const DpOptions& opt) {
    if (problem.player >= 2) throw UnsupportedError("deviation problems are implemented for two players");
    if (opt.grid_n < 3 || opt.control_n < 3) throw InputError("DP grids need at least three points");
    if (!(opt.dt > 0.0)) throw InputError("DP time step must be positive");

    const Bellman bm(problem, opt);
    const std::size_t n = opt.grid_n;
    DpResult res;
    res.x = bm.xs();
    res.value.resize(n);
    res.policy.assign(n, 0.0);
    for (std::size_t m = 0; m < n; ++m) res.value[m] = problem.h.value(res.x[m]);

    const double a_max = problem.a_max;
    const double da = 2.0 * a_max / static_cast<double>(opt.control_n - 1);
    std::vector<double> next(n), running(n);
    std::vector<Foot> feet(n);

    auto improve = [&](bool full) {
        double change = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            auto f = [&](double a) { return bm.q(m, a, res.value); };
            double a_best = res.policy[m], f_best = f(a_best);
            double lo, hi;
            if (full) {
                for (std::size_t j = 0; j < opt.control_n; ++j) {
                    const double a = -a_max + static_cast<double>(j) * da;
                    const double fa = f(a);
                    if (fa < f_best) a_best = a, f_best = fa;
                }
            }
            lo = std::max(-a_max, a_best - da);
            hi = std::min(a_max, a_best + da);
            std::tie(a_best, f_best) = golden(f, lo, hi, a_best, f_best);
            next[m] = f_best;
            res.policy[m] = a_best;
            const auto s = bm.step(m, a_best);
            running[m] = s.running;
            feet[m] = bm.locate(s.foot);
            change = std::max(change, std::abs(f_best - res.value[m]));
        }
        res.value.swap(next);
        return change;
    };

    // Modified policy iteration: cheap evaluation sweeps with the policy frozen.
    auto evaluate = [&]() {
        for (int sweep = 0; sweep < kEvaluationSweeps; ++sweep) {
            for (std::size_t m = 0; m < n; ++m) {
                const Foot& f = feet[m];
                next[m] = running[m] + bm.gamma() * ((1.0 - f.w) * res.value[f.i] + f.w * res.value[f.i + 1]);
            }
            res.value.swap(next);
        }
    };

    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        const bool full = it % kFullScanEvery == 0;
        const double change = improve(full);
        res.iterations = it + 1;
        res.last_change = change;
        if (!std::isfinite(change)) throw NoConvergence(change, "DP iteration diverged");
        if (change < opt.tol) {
            if (full) return res;
            // Confirm with a full control scan before stopping.
            const double confirm = improve(true);
            res.last_change = confirm;
            ++res.iterations;
            if (confirm < opt.tol) return res;
        }
        evaluate();
    }
    throw NoConvergence(res.last_change, "DP iteration did not reach its tolerance");
}

double rollout_policy(const DeviationProblem& problem, const DpResult& dp, double y, double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw InputError("rollout horizon and step must be positive");
    auto rhs = [&](double t, double x) -> std::pair<double, double> {
        const double a = dp.policy_at(x);
        const double c = problem.h.value(x) + 0.5 * problem.k.value(x) * a * a;
        return {a + problem.opponent_drift.at(x), std::exp(-t) * c};
    };
    const auto steps = static_cast<std::size_t>(std::ceil(T / dt));
    const double h = T / static_cast<double>(steps);
    double x = y, J = 0.0, t = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        const auto k1 = rhs(t, x);
        const auto k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1.first);
        const auto k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2.first);
        const auto k4 = rhs(t + h, x + h * k3.first);
        x += h / 6.0 * (k1.first + 2.0 * k2.first + 2.0 * k3.first + k4.first);
        J += h / 6.0 * (k1.second + 2.0 * k2.second + 2.0 * k3.second + k4.second);
        t += h;
    }
    return J;
}

NashReport check_nash(const GameSpec& spec, const PiecewiseSolution& sol, const std::vector<double>& ys, double tol,
                      const DpOptions& opt) {
    if (spec.players != 2) throw UnsupportedError("the Nash check is implemented for two players");
    if (!(tol > 0.0)) throw InputError("Nash tolerance must be positive");
    NashReport rep;
    rep.tol = tol;

    DpOptions coarse = opt;
    coarse.grid_n = (opt.grid_n - 1) / 2 + 1;
    coarse.dt = 2.0 * opt.dt;

    const DeviationProblem problems[2] = {make_deviation_problem(spec, sol, 0), make_deviation_problem(spec, sol, 1)};
    DpResult results[4];
    std::exception_ptr errors[4];
    {
        std::vector<std::thread> workers;
        for (std::size_t job = 0; job < 4; ++job) {
            workers.emplace_back([&, job] {
                try {
                    results[job] = dp_value(problems[job % 2], job < 2 ? opt : coarse);
                } catch (...) {
                    errors[job] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    bool all = true;
    for (std::size_t i = 0; i < 2; ++i) {
        double est = 0.0;
        for (double y : ys) {
            NashPoint pt;
            pt.player = i;
            pt.y = y;
            pt.claimed = sol.u_at(y)[i];
            pt.dp = results[i].value_at(y);
            pt.gap = pt.dp - pt.claimed;
            pt.pass = std::abs(pt.gap) <= tol;
            all = all && pt.pass;
            est = std::max(est, std::abs(pt.dp - results[i + 2].value_at(y)));
            rep.points.push_back(pt);
        }
        rep.error_estimate[i] = est;
    }
    rep.resolved = rep.error_estimate[0] <= tol && rep.error_estimate[1] <= tol;
    rep.pass = all && rep.resolved;
    rep.caveats.push_back("opponent feedback is held constant beyond the solution window");
    auto drift = [&](double x) {
        const Vec2 p = sol.p_at(x);
        return -(p[0] / spec.k[0].value(x) + p[1] / spec.k[1].value(x));
    };
    if (drift(sol.x_min()) < 0.0 || drift(sol.x_max()) > 0.0)
        rep.caveats.push_back(
            "the closed-loop drift points out of the solution window; values near the edges depend on the "
            "constant continuation of the opponent feedback");
    if (!rep.resolved)
        rep.caveats.push_back("discretization estimate exceeds the tolerance; the verdict is not certified");
    return rep;
}

}  // namespace hjnash
