#pragma once

// Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.
//
// The driver reports every accepted step to an observer, which may stop the
// integration. Event location is done by the caller through `advance`, which
// re-takes a single step of arbitrary size from the start of the last step.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

namespace hjnash::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;  // 0 selects a starting step automatically
    double h_max = std::numeric_limits<double>::infinity();
    double h_min_rel = 1e-14;  // underflow when |h| < h_min_rel * max(1, |t|)
    std::size_t max_steps = 20'000'000;
};

enum class Status { Completed, Stopped, StepUnderflow, MaxSteps };

template <std::size_t N>
struct Result {
    Status status = Status::Completed;
    double t = 0.0;
    State<N> y{};
    std::size_t steps = 0;
    double last_h = 0.0;
};

namespace detail {
// Dormand-Prince tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
// b - b_hat (error weights); b_hat uses the FSAL stage.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace detail

template <std::size_t N, class Rhs>
class Dopri5 {
public:
    explicit Dopri5(Rhs rhs) : rhs_(std::move(rhs)) {}

    struct Trial {
        State<N> y;
        State<N> dydt;  // derivative at the end point (FSAL)
        double err;     // scaled error norm, accept when <= 1
    };

    Trial attempt(double t, const State<N>& y, const State<N>& k1, double h,
                  const Options& opt) const {
        using namespace detail;
        State<N> tmp, k2, k3, k4, k5, k6, k7;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        k2 = rhs_(t + c2 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = rhs_(t + c3 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs_(t + c4 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs_(t + c5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                 a65 * k5[i]);
        k6 = rhs_(t + h, tmp);
        Trial out;
        for (std::size_t i = 0; i < N; ++i)
            out.y[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = rhs_(t + h, out.y);
        out.dydt = k7;
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                  e7 * k7[i]);
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(out.y[i]));
            acc += (e / sc) * (e / sc);
        }
        out.err = std::sqrt(acc / static_cast<double>(N));
        if (!std::isfinite(out.err)) out.err = std::numeric_limits<double>::infinity();
        return out;
    }

    /// One unchecked step of signed size h; used to refine event locations.
    State<N> advance(double t, const State<N>& y, double h) const {
        if (h == 0.0) return y;
        return attempt(t, y, rhs_(t, y), h, Options{}).y;
    }

    State<N> derivative(double t, const State<N>& y) const { return rhs_(t, y); }

    /// Integrates from t0 towards t1 (either direction). The observer is
    /// called as obs(t_prev, y_prev, t, y) after every accepted step and
    /// returns false to stop.
    template <class Observer>
    Result<N> integrate(double t0, const State<N>& y0, double t1, const Options& opt,
                        Observer&& obs) const {
        Result<N> res;
        res.t = t0;
        res.y = y0;
        if (t1 == t0) return res;
        const double dir = t1 > t0 ? 1.0 : -1.0;
        State<N> k1 = rhs_(t0, y0);
        double h = opt.h_init > 0.0 ? opt.h_init : initial_step(y0, k1, opt);
        h = std::min({h, opt.h_max, std::abs(t1 - t0)});
        double t = t0;
        State<N> y = y0;
        while (true) {
            if (res.steps >= opt.max_steps) {
                res.status = Status::MaxSteps;
                break;
            }
            if (h < opt.h_min_rel * std::max(1.0, std::abs(t))) {
                res.status = Status::StepUnderflow;
                break;
            }
            bool last = false;
            double hs = h;
            if (hs >= std::abs(t1 - t)) {
                hs = std::abs(t1 - t);
                last = true;
            }
            const Trial tr = attempt(t, y, k1, dir * hs, opt);
            if (tr.err <= 1.0) {
                const double t_prev = t;
                const State<N> y_prev = y;
                t = last ? t1 : t + dir * hs;
                y = tr.y;
                k1 = tr.dydt;
                ++res.steps;
                res.last_h = hs;
                const bool go_on = obs(t_prev, y_prev, t, y);
                if (!go_on) {
                    res.status = Status::Stopped;
                    break;
                }
                if (last) {
                    res.status = Status::Completed;
                    break;
                }
                const double fac =
                    tr.err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(tr.err, -0.2), 0.2, 5.0);
                h = std::min(hs * fac, opt.h_max);
            } else {
                const double fac = std::isfinite(tr.err)
                                       ? std::clamp(0.9 * std::pow(tr.err, -0.2), 0.1, 0.9)
                                       : 0.1;
                h = hs * fac;
            }
        }
        res.t = t;
        res.y = y;
        return res;
    }

    template <class Observer>
    Result<N> integrate(double t0, const State<N>& y0, double t1, Observer&& obs) const {
        return integrate(t0, y0, t1, Options{}, std::forward<Observer>(obs));
    }

private:
    double initial_step(const State<N>& y0, const State<N>& f0, const Options& opt) const {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opt.atol + opt.rtol * std::abs(y0[i]);
            d0 += (y0[i] / sc) * (y0[i] / sc);
            d1 += (f0[i] / sc) * (f0[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::clamp(h0, 1e-10, 0.1);
    }

    Rhs rhs_;
};

template <std::size_t N, class Rhs>
Dopri5<N, Rhs> make_dopri5(Rhs rhs) {
    return Dopri5<N, Rhs>(std::move(rhs));
}

/// Locates the fraction theta in (0, 1] of a step [t_prev, t_prev + h] at
/// which `g` changes sign, by bisection on re-taken sub-steps.
template <std::size_t N, class Rhs, class EventFn>
double locate_event(const Dopri5<N, Rhs>& stepper, double t_prev, const State<N>& y_prev,
                    double h, EventFn&& g, int iterations = 60) {
    double lo = 0.0, hi = 1.0;
    const double g_lo = g(y_prev);
    for (int it = 0; it < iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(stepper.advance(t_prev, y_prev, mid * h));
        if ((gm > 0.0) == (g_lo > 0.0) && gm != 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15) break;
    }
    return hi;
}

}  // namespace hjnash::ode
