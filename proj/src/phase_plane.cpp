#include "hjnash/phase_plane.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "hjnash/hj_system.hpp"
#include "hjnash/ode.hpp"

namespace hjnash {

namespace {

Vec2 newton_polish(Vec2 p, const Vec2& kappa) {
    for (int it = 0; it < 8; ++it) {
        const Vec2 n = rescaled_field(p, kappa);
        const auto j = rescaled_jacobian(p, kappa);
        const double det = j[0] * j[3] - j[1] * j[2];
        if (std::abs(det) < 1e-300) break;
        const Vec2 step{(j[3] * n[0] - j[1] * n[1]) / det, (-j[2] * n[0] + j[0] * n[1]) / det};
        p = p - step;
        if (sup_norm(step) < 1e-16 * (1.0 + sup_norm(p))) break;
    }
    return p;
}

void add_unique(std::vector<Vec2>& pts, const Vec2& p) {
    for (const auto& q : pts)
        if (sup_norm(q - p) < 1e-9 * (1.0 + sup_norm(p))) return;
    pts.push_back(p);
}

// Saddle eigenbasis of the rescaled field at the origin; false unless the eigenvalues are real.
bool origin_basis(const Vec2& slopes, double& lam_u, double& lam_s, Vec2& v_u, Vec2& v_s) {
    const auto j = rescaled_jacobian({0.0, 0.0}, slopes);
    const double tr = j[0] + j[3], det = j[0] * j[3] - j[1] * j[2];
    const double disc = 0.25 * tr * tr - det;
    if (disc < 0.0) return false;
    const double r = std::sqrt(disc);
    lam_u = 0.5 * tr + r;
    lam_s = 0.5 * tr - r;
    auto vec = [&](double lam) {
        Vec2 a{j[1], lam - j[0]}, b{lam - j[3], j[2]};
        Vec2 v = norm(a) >= norm(b) ? a : b;
        const double nv = norm(v);
        if (nv == 0.0) return Vec2{1.0, 0.0};
        return (1.0 / nv) * v;
    };
    v_u = vec(lam_u);
    v_s = vec(lam_s);
    return true;
}

struct TailFit {
    double s0 = 0.0, eta = 0.0, exponent = 0.0, delta_exponent = 0.0;
};

// Fits log|p| = log(eta) + e log|s - s0| over the last decade of |p|.
TailFit fit_blowup(const std::vector<double>& s, const std::vector<Vec2>& p, double dir, double threshold) {
    std::size_t first = s.size();
    while (first > 0 && norm(p[first - 1]) >= threshold / 10.0) --first;
    if (s.size() - first < 6) first = s.size() >= 8 ? s.size() - 8 : 0;
    std::vector<double> ss(s.begin() + static_cast<long>(first), s.end());
    std::vector<double> lp, ld;
    for (std::size_t i = first; i < s.size(); ++i) {
        lp.push_back(std::log(norm(p[i])));
        ld.push_back(std::log(delta(p[i])));
    }
    const double s_last = ss.back();
    const double scale = 1.0 / norm(p.back());

    auto regress = [&](double s0, const std::vector<double>& ys, double& slope, double& icpt) {
        const double n = static_cast<double>(ss.size());
        double mx = 0.0, my = 0.0;
        std::vector<double> lx(ss.size());
        for (std::size_t i = 0; i < ss.size(); ++i) {
            lx[i] = std::log(std::abs(s0 - ss[i]));
            mx += lx[i];
            my += ys[i];
        }
        mx /= n;
        my /= n;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < ss.size(); ++i) {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            sxy += (lx[i] - mx) * (ys[i] - my);
        }
        slope = sxx > 0.0 ? sxy / sxx : 0.0;
        icpt = my - slope * mx;
        double res = 0.0;
        for (std::size_t i = 0; i < ss.size(); ++i) {
            const double e = ys[i] - icpt - slope * lx[i];
            res += e * e;
        }
        return res;
    };
    auto cost = [&](double z) {
        double sl, ic;
        return regress(s_last + dir * scale * std::exp(z), lp, sl, ic);
    };
    // Coarse scan, then golden refinement around the best bracket.
    const double z_lo = std::log(1e-4), z_hi = std::log(1e4);
    const int scan = 80;
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= scan; ++k) {
        const double v = cost(z_lo + (z_hi - z_lo) * k / scan);
        if (v < best_val) {
            best_val = v;
            best = k;
        }
    }
    const double dz = (z_hi - z_lo) / scan;
    double a = z_lo + dz * std::max(0, best - 1), b = z_lo + dz * std::min(scan, best + 1);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = cost(c), fd = cost(d);
    for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = cost(d);
        }
    }
    TailFit f;
    f.s0 = s_last + dir * scale * std::exp(0.5 * (a + b));
    double ic = 0.0, icd = 0.0;
    regress(f.s0, lp, f.exponent, ic);
    regress(f.s0, ld, f.delta_exponent, icd);
    f.eta = std::exp(ic);
    return f;
}

struct SideSamples {
    std::vector<double> s;
    std::vector<Vec2> p;
    std::vector<double> x;
};

OrbitSide run_side(const SlopeSource& slopes, const Vec2& p0, double x0, double dir, double s_end,
                   const OrbitOptions& opt, SideSamples& out) {
    OrbitSide side;
    auto rhs = [&slopes](double, const ode::State<3>& y) -> ode::State<3> {
        const Vec2 p{y[0], y[1]};
        const Vec2 n = rescaled_field(p, slopes.at(y[2]));
        return {n[0], n[1], delta(p)};
    };
    const auto stepper = ode::make_dopri5<3>(rhs);
    ode::Options o;
    o.rtol = opt.rtol;
    o.atol = opt.atol;

    const Vec2 n0 = rescaled_field(p0, slopes.at(x0));
    const Vec2 motion = dir * n0;
    const bool closable = slopes.is_frozen() && norm(n0) > 0.0;
    auto section = [&](const Vec2& p) { return dot(p - p0, motion); };
    bool was_behind = false;
    double travelled = 0.0;

    double t_prev = 0.0, h = 0.0;
    ode::State<3> y_prev{};
    bool closed_event = false;

    const ode::State<3> y0{p0[0], p0[1], x0};
    const auto res = stepper.integrate(0.0, y0, s_end, o, [&](double tp, const auto& yp, double t, const auto& y) {
        const Vec2 p{y[0], y[1]};
        out.s.push_back(t);
        out.p.push_back(p);
        out.x.push_back(y[2]);
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || norm(p) > opt.blowup_threshold) {
            side.kind = Termination::BlowUp;
            return false;
        }
        const Vec2 sl = slopes.at(y[2]);
        const Vec2 n = rescaled_field(p, sl);
        if (norm(n) < opt.converge_tol) {
            side.kind = Termination::Converged;
            side.limit = p;
            side.at_origin = norm(p) < opt.origin_radius;
            return false;
        }
        const double r = norm(p);
        if (r < opt.origin_radius) {
            double lu, ls;
            Vec2 vu, vs;
            if (origin_basis(sl, lu, ls, vu, vs)) {
                const double det = vs[0] * vu[1] - vs[1] * vu[0];
                if (lu > 0.0 && ls < 0.0 && std::abs(det) > 1e-12) {
                    const double c_s = (p[0] * vu[1] - p[1] * vu[0]) / det;
                    const double c_u = (vs[0] * p[1] - vs[1] * p[0]) / det;
                    const double transverse = dir > 0.0 ? std::abs(c_u) : std::abs(c_s);
                    if (transverse <= opt.origin_alignment * r) {
                        side.kind = Termination::Converged;
                        side.at_origin = true;
                        return false;
                    }
                } else if ((dir > 0.0 && lu < 0.0) || (dir < 0.0 && ls > 0.0)) {
                    side.kind = Termination::Converged;
                    side.at_origin = true;
                    return false;
                }
            }
        }
        if (closable) {
            travelled = std::max(travelled, norm(p - p0));
            const double g_prev = section({yp[0], yp[1]});
            const double g = section(p);
            if (g < 0.0 && travelled > 10.0 * opt.closure_tol) was_behind = true;
            if (was_behind && g_prev < 0.0 && g >= 0.0) {
                t_prev = tp;
                y_prev = yp;
                h = t - tp;
                const double theta = ode::locate_event(stepper, t_prev, y_prev, h,
                                                       [&](const ode::State<3>& z) { return section({z[0], z[1]}); });
                const auto z = stepper.advance(t_prev, y_prev, theta * h);
                if (norm(Vec2{z[0], z[1]} - p0) <= opt.closure_tol) {
                    side.kind = Termination::ClosedOrbit;
                    side.period = std::abs(t_prev + theta * h);
                    side.x_period = std::abs(z[2] - x0);
                    closed_event = true;
                    return false;
                }
                was_behind = false;
            }
        }
        return true;
    });
    side.s_end = res.t;
    if (res.status == ode::Status::StepUnderflow || res.status == ode::Status::MaxSteps) {
        if (side.kind == Termination::NotIntegrated) {
            std::ostringstream os;
            os << "orbit integration broke down at s = " << res.t;
            throw NumericalBreakdown(res.t, {res.y[0], res.y[1]}, os.str());
        }
    }
    if (res.status == ode::Status::Completed) side.kind = Termination::LeftWindow;
    if (closed_event) side.s_end = dir * side.period;
    if (side.kind == Termination::BlowUp) {
        const auto f = fit_blowup(out.s, out.p, dir, opt.blowup_threshold);
        side.s0 = f.s0;
        side.eta = f.eta;
        side.exponent = f.exponent;
        side.delta_exponent = f.delta_exponent;
    }
    return side;
}

}  // namespace

std::vector<Vec2> find_equilibria(double kappa1, double kappa2) {
    const double a = kappa1, b = kappa2;
    const Vec2 kappa{a, b};
    std::vector<Vec2> raw{{0.0, 0.0}};
    if (a != 0.0) {
        // p2 = p1 (p1 - a + b) / a; the resultant in p1 is p1 (p1 - a) q(p1) with
        // q(t) = t^2 + (2c + a) t + (c^2 + a c + a^2), c = b - a.
        raw.push_back({a, b});
        const double c = b - a;
        const double qb = 2.0 * c + a, qc = c * c + a * c + a * a;
        const double disc = qb * qb - 4.0 * qc;
        if (disc >= 0.0) {
            for (double sgn : {-1.0, 1.0}) {
                const double t = 0.5 * (-qb + sgn * std::sqrt(disc));
                raw.push_back({t, t * (t - a + b) / a});
            }
        }
    } else {
        // N1 = -p1 (p1 + b).
        for (double p1 : {0.0, -b}) {
            const double disc = b * b + 4.0 * b * p1;
            if (disc < 0.0) continue;
            for (double sgn : {-1.0, 1.0}) raw.push_back({p1, 0.5 * (b + sgn * std::sqrt(disc))});
        }
    }
    std::vector<Vec2> out;
    for (const auto& p : raw) add_unique(out, sup_norm(p) == 0.0 ? p : newton_polish(p, kappa));
    return out;
}

Linearization linearize(double kappa1, double kappa2, const Vec2& point, double tol) {
    const Vec2 kappa{kappa1, kappa2};
    const Vec2 n = rescaled_field(point, kappa);
    if (norm(n) > tol * (1.0 + dot(point, point))) {
        std::ostringstream os;
        os << "(" << point[0] << ", " << point[1] << ") is not an equilibrium, |N| = " << norm(n);
        throw DomainError(os.str());
    }
    Linearization lin;
    lin.jacobian = rescaled_jacobian(point, kappa);
    const auto& j = lin.jacobian;
    const double tr = j[0] + j[3], det = j[0] * j[3] - j[1] * j[2];
    const double disc = 0.25 * tr * tr - det;
    if (disc >= 0.0) {
        lin.real = true;
        const double r = std::sqrt(disc);
        const double lam[2] = {0.5 * tr + r, 0.5 * tr - r};
        for (int i = 0; i < 2; ++i) {
            lin.eigenvalues[i] = lam[i];
            Vec2 a{j[1], lam[i] - j[0]}, b{lam[i] - j[3], j[2]};
            Vec2 v = norm(a) >= norm(b) ? a : b;
            if (norm(v) == 0.0) v = i == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
            lin.eigenvectors[i] = (1.0 / norm(v)) * v;
            lin.angles[i] = std::atan2(lin.eigenvectors[i][1], lin.eigenvectors[i][0]);
            lin.tan_alpha[i] = j[1] != 0.0 ? (lam[i] - j[0]) / j[1] : std::numeric_limits<double>::infinity();
        }
    } else {
        const double im = std::sqrt(-disc);
        lin.eigenvalues[0] = {0.5 * tr, im};
        lin.eigenvalues[1] = {0.5 * tr, -im};
        lin.angles = {std::nan(""), std::nan("")};
        lin.tan_alpha = {std::nan(""), std::nan("")};
    }
    return lin;
}

std::string to_string(RegionTag tag) {
    switch (tag) {
        case RegionTag::A: return "A";
        case RegionTag::B: return "B";
        case RegionTag::C1: return "C1";
        case RegionTag::C2: return "C2";
        case RegionTag::D: return "D";
        case RegionTag::E: return "E";
        case RegionTag::F: return "F";
        case RegionTag::Xi1: return "Xi1";
        case RegionTag::Xi2: return "Xi2";
        case RegionTag::QuadrantPP: return "Quadrant++";
        case RegionTag::QuadrantMM: return "Quadrant--";
        case RegionTag::QuadrantMP: return "Quadrant-+";
        case RegionTag::S1: return "S1";
        case RegionTag::S2: return "S2";
        case RegionTag::S3: return "S3";
        case RegionTag::S4: return "S4";
    }
    return "?";
}

RegionLabel classify_point(RegimeTag regime, double kappa1, double kappa2, const Vec2& p, double delta,
                           const SectorOptions& sectors) {
    if (p[0] == 0.0 && p[1] == 0.0) throw DomainError("the origin belongs to no region");
    RegionLabel lab;
    lab.delta = delta;
    lab.approximate = delta > 0.0;

    if (regime == RegimeTag::CooperativeIncreasing) {
        double a = kappa1, b = kappa2;
        Vec2 q = p;
        if (a > b) {
            std::swap(a, b);
            q = {p[1], p[0]};
            lab.swapped = true;
        }
        if (q[0] <= 0.0 && q[1] <= 0.0) lab.tag = RegionTag::A;
        else if (q[0] > 0.0 && q[1] < 0.0) lab.tag = RegionTag::B;
        else if (q[0] < 0.0 && q[1] > 0.0) lab.tag = q[1] > b - a ? RegionTag::C1 : RegionTag::C2;
        else {
            const double s = q[0] + q[1];
            if (s <= 2.0 * a) lab.tag = RegionTag::E;
            else if (s >= 2.0 * b) lab.tag = RegionTag::D;
            else lab.tag = RegionTag::F;
        }
        return lab;
    }
    if (regime != RegimeTag::Conflicting && regime != RegimeTag::LinearExample)
        throw UnsupportedError("classify_point needs a cooperative or conflicting regime");

    const double radius =
        sectors.radius >= 0.0 ? sectors.radius : 0.1 * std::min(std::abs(kappa1), std::abs(kappa2));
    if (norm(p) <= radius) {
        double lu, ls;
        Vec2 vu, vs;
        if (origin_basis({kappa1, kappa2}, lu, ls, vu, vs)) {
            auto upper = [](Vec2 v) { return (v[1] < 0.0 || (v[1] == 0.0 && v[0] < 0.0)) ? -1.0 * v : v; };
            vs = upper(vs);
            vu = upper(vu);
            const double th = std::atan2(p[1], p[0]);
            auto near = [&](const Vec2& v) {
                double d = std::abs(th - std::atan2(v[1], v[0]));
                d = std::min(d, 2.0 * M_PI - d);
                return d <= sectors.half_angle;
            };
            if (near(vs)) { lab.tag = RegionTag::S1; return lab; }
            if (near(-1.0 * vs)) { lab.tag = RegionTag::S3; return lab; }
            if (near(vu)) { lab.tag = RegionTag::S2; return lab; }
            if (near(-1.0 * vu)) { lab.tag = RegionTag::S4; return lab; }
        }
    }
    if (p[0] >= 0.0 && p[1] <= 0.0) lab.tag = p[0] + p[1] <= 0.0 ? RegionTag::Xi1 : RegionTag::Xi2;
    else if (p[0] > 0.0 && p[1] > 0.0) lab.tag = RegionTag::QuadrantPP;
    else if (p[0] < 0.0 && p[1] < 0.0) lab.tag = RegionTag::QuadrantMM;
    else lab.tag = RegionTag::QuadrantMP;
    return lab;
}

Vec2 SlopeSource::at(double x) const { return spec_ == nullptr ? slopes_ : slopes_at(*spec_, x); }

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Converged: return "Converged";
        case Termination::BlowUp: return "BlowUp";
        case Termination::LeftWindow: return "LeftWindow";
        case Termination::ClosedOrbit: return "ClosedOrbit";
        case Termination::NotIntegrated: return "NotIntegrated";
    }
    return "?";
}

std::string to_string(EndKind k) {
    switch (k) {
        case EndKind::Finite: return "finite";
        case EndKind::Infinite: return "infinite";
        case EndKind::Undetermined: return "undetermined";
    }
    return "?";
}

Orbit integrate_orbit(const SlopeSource& slopes, const Vec2& p0, const OrbitOptions& opt) {
    if (!std::isfinite(p0[0]) || !std::isfinite(p0[1])) throw InputError("orbit start must be finite");
    Orbit orb;
    orb.p0 = p0;
    orb.x0 = opt.x0;
    SideSamples fwd, bwd;
    if (opt.forward && opt.s_hi > 0.0) orb.forward = run_side(slopes, p0, opt.x0, 1.0, opt.s_hi, opt, fwd);
    if (orb.forward.kind == Termination::ClosedOrbit) {
        orb.backward = orb.forward;
        orb.backward.s_end = -orb.forward.period;
    } else if (opt.backward && opt.s_lo < 0.0) {
        orb.backward = run_side(slopes, p0, opt.x0, -1.0, opt.s_lo, opt, bwd);
    }
    for (std::size_t i = bwd.s.size(); i-- > 0;) {
        orb.s.push_back(bwd.s[i]);
        orb.p.push_back(bwd.p[i]);
        orb.x.push_back(bwd.x[i]);
    }
    orb.s.push_back(0.0);
    orb.p.push_back(p0);
    orb.x.push_back(opt.x0);
    orb.s.insert(orb.s.end(), fwd.s.begin(), fwd.s.end());
    orb.p.insert(orb.p.end(), fwd.p.begin(), fwd.p.end());
    orb.x.insert(orb.x.end(), fwd.x.begin(), fwd.x.end());
    return orb;
}

XWindow x_window(const Orbit& orbit) {
    XWindow w;
    const auto [lo, hi] = std::minmax_element(orbit.x.begin(), orbit.x.end());
    w.x_min = *lo;
    w.x_max = *hi;
    auto end_kind = [](const OrbitSide& s) {
        switch (s.kind) {
            case Termination::BlowUp:
                // Delta ~ |s - s0|^e with e <= -1 has a divergent integral.
                return s.delta_exponent <= -1.0 ? EndKind::Infinite : EndKind::Undetermined;
            case Termination::Converged:
                return (s.at_origin || delta(s.limit) == 0.0) ? EndKind::Finite : EndKind::Infinite;
            case Termination::ClosedOrbit: return EndKind::Infinite;
            default: return EndKind::Undetermined;
        }
    };
    w.max_end = end_kind(orbit.forward);
    w.min_end = end_kind(orbit.backward);
    return w;
}

std::vector<PortraitPoint> portrait(const SlopeSource& slopes, const PortraitOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> jitter(-0.4, 0.4);
    const double d1 = (opt.hi[0] - opt.lo[0]) / static_cast<double>(opt.n1);
    const double d2 = (opt.hi[1] - opt.lo[1]) / static_cast<double>(opt.n2);
    std::vector<PortraitPoint> pts;
    for (std::size_t i = 0; i < opt.n1; ++i) {
        for (std::size_t k = 0; k < opt.n2; ++k) {
            PortraitPoint pp;
            const double j1 = jitter(rng), j2 = jitter(rng);
            pp.p0 = {opt.lo[0] + (static_cast<double>(i) + 0.5 + j1) * d1,
                     opt.lo[1] + (static_cast<double>(k) + 0.5 + j2) * d2};
            pts.push_back(pp);
        }
    }
    unsigned workers = opt.workers != 0 ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < pts.size(); i = next++) {
            try {
                const Orbit o = integrate_orbit(slopes, pts[i].p0, opt.orbit);
                pts[i].forward = o.forward;
                pts[i].backward = o.backward;
            } catch (const Error&) {
                // Left as NotIntegrated.
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return pts;
}

}  // namespace hjnash
