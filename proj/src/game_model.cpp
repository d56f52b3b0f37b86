#include "hjnash/game_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hjnash {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ValueAndSlope eval_smooth(const SmoothPerturbedCost& c, double x) {
    const double t = x / c.length_scale;
    double phi = 0.0, dphi = 0.0;
    switch (c.shape) {
        case PerturbationShape::Tanh: {
            phi = std::tanh(t);
            const double sech = 1.0 / std::cosh(t);
            dphi = sech * sech;
            break;
        }
        case PerturbationShape::Sin:
            phi = std::sin(t);
            dphi = std::cos(t);
            break;
        case PerturbationShape::GaussianBump:
            phi = std::exp(-t * t);
            dphi = -2.0 * t * phi;
            break;
    }
    return {c.slope * x + c.amplitude * phi, c.slope + c.amplitude / c.length_scale * dphi};
}

ValueAndSlope eval_tabulated(const TabulatedCost& c, double x) {
    const auto& xs = c.x;
    const auto& ys = c.y;
    const auto& m = c.second;
    const std::size_t n = xs.size();
    auto segment_slope = [&](std::size_t i, double at) {
        const double h = xs[i + 1] - xs[i];
        const double a = (xs[i + 1] - at) / h;
        const double b = (at - xs[i]) / h;
        return (ys[i + 1] - ys[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m[i] +
               (3.0 * b * b - 1.0) / 6.0 * h * m[i + 1];
    };
    if (x <= xs.front()) {
        const double s = segment_slope(0, xs.front());
        return {ys.front() + s * (x - xs.front()), s};
    }
    if (x >= xs.back()) {
        const double s = segment_slope(n - 2, xs.back());
        return {ys.back() + s * (x - xs.back()), s};
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double h = xs[i + 1] - xs[i];
    const double a = (xs[i + 1] - x) / h;
    const double b = (x - xs[i]) / h;
    const double v = a * ys[i] + b * ys[i + 1] +
                     ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
    return {v, segment_slope(i, x)};
}

}  // namespace

TabulatedCost make_tabulated(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw InputError("tabulated cost needs at least two (x, y) pairs of equal length");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw InputError("tabulated cost grid must be strictly increasing");
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0), u(n, 0.0);
    // Tridiagonal sweep for the natural spline (m_0 = m_{n-1} = 0).
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        const double p = sig * m[i - 1] + 2.0;
        m[i] = (sig - 1.0) / p;
        const double d = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        u[i] = (6.0 * d / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
    }
    m[n - 1] = 0.0;
    for (std::size_t i = n - 1; i-- > 0;) m[i] = m[i] * m[i + 1] + u[i];
    m[0] = 0.0;
    return TabulatedCost{std::move(x), std::move(y), std::move(m)};
}

ValueAndSlope CostFunction::eval(double x) const {
    return std::visit(overloaded{
                          [x](const LinearCost& c) { return ValueAndSlope{c.slope * x + c.offset, c.slope}; },
                          [x](const SmoothPerturbedCost& c) { return eval_smooth(c, x); },
                          [x](const TabulatedCost& c) { return eval_tabulated(c, x); },
                      },
                      kind_);
}

bool CostFunction::is_constant(double c) const {
    const auto* lin = std::get_if<LinearCost>(&kind_);
    return lin != nullptr && lin->slope == 0.0 && lin->offset == c;
}

void GameSpec::check_well_formed() const {
    if (players < 2) throw InputError("a game needs at least two players");
    if (h.size() != players || k.size() != players)
        throw InputError("expected one h and one k cost function per player");
    if (!(C > 0.0) || !std::isfinite(C)) throw InputError("C must be a positive number");
    if (!(L > 0.0) || !std::isfinite(L)) throw InputError("L must be a positive number");
    for (const auto* fam : {&h, &k})
        for (const auto& f : *fam)
            if (const auto* sp = std::get_if<SmoothPerturbedCost>(&f.kind()); sp && !(sp->length_scale > 0.0))
                throw InputError("smooth_perturbed length_scale must be positive");
}

bool GameSpec::has_unit_weights() const {
    return std::all_of(k.begin(), k.end(), [](const CostFunction& f) { return f.is_constant(1.0); });
}

GameSpec two_player_game(CostFunction h1, CostFunction h2, double C, double L) {
    GameSpec g;
    g.players = 2;
    g.h = {std::move(h1), std::move(h2)};
    g.k = {CostFunction::constant(1.0), CostFunction::constant(1.0)};
    g.C = C;
    g.L = L;
    return g;
}

GameSpec linear_example_game(double kappa, double L) {
    return two_player_game(CostFunction::linear(-kappa), CostFunction::linear(kappa), std::max(1.0, kappa), L);
}

std::vector<double> SampleGrid::points(double L) const {
    const double a = half_width_factor * L;
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * a * points_per_unit));
    std::vector<double> xs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) xs[i] = -a + 2.0 * a * static_cast<double>(i) / static_cast<double>(n);
    return xs;
}

ValidationReport validate_game(const GameSpec& spec, const SampleGrid& grid) {
    spec.check_well_formed();
    ValidationReport rep;
    const auto xs = grid.points(spec.L);
    rep.grid_points = xs.size();
    const double C = spec.C;
    for (double x : xs) {
        for (std::size_t i = 0; i < spec.players; ++i) {
            const auto hv = spec.h[i].eval(x);
            const double kv = spec.k[i].value(x);
            if (!std::isfinite(hv.value) || !std::isfinite(hv.slope) || !std::isfinite(kv)) {
                std::ostringstream os;
                os << "non-finite cost evaluation for player " << i + 1 << " at x = " << x;
                throw NonFiniteError(x, os.str());
            }
            if (kv < 1.0 / C) rep.violations.push_back({x, i, "k below 1/C", kv, 1.0 / C});
            if (kv > C) rep.violations.push_back({x, i, "k above C", kv, C});
            if (std::abs(hv.slope) > C) rep.violations.push_back({x, i, "|h'| above C", std::abs(hv.slope), C});
        }
    }
    return rep;
}

std::string to_string(RegimeTag tag) {
    switch (tag) {
        case RegimeTag::CooperativeIncreasing: return "CooperativeIncreasing";
        case RegimeTag::CooperativeDecreasing: return "CooperativeDecreasing";
        case RegimeTag::Conflicting: return "Conflicting";
        case RegimeTag::LinearExample: return "LinearExample";
        case RegimeTag::General: return "General";
    }
    return "General";
}

Regime classify_regime(const GameSpec& spec, const SampleGrid& grid) {
    spec.check_well_formed();
    if (spec.players != 2) throw UnsupportedError("regime classification is defined for two players");
    Regime r;
    const auto xs = grid.points(spec.L);
    Vec2 sum{0.0, 0.0};
    r.slope_min = {INFINITY, INFINITY};
    r.slope_max = {-INFINITY, -INFINITY};
    for (double x : xs) {
        for (std::size_t i = 0; i < 2; ++i) {
            const double s = spec.h[i].slope(x);
            sum[i] += s;
            r.slope_min[i] = std::min(r.slope_min[i], s);
            r.slope_max[i] = std::max(r.slope_max[i], s);
        }
    }
    const double n = static_cast<double>(xs.size());
    r.kappa1 = sum[0] / n;
    r.kappa2 = sum[1] / n;
    r.delta = std::max({r.slope_max[0] - r.kappa1, r.kappa1 - r.slope_min[0], r.slope_max[1] - r.kappa2,
                        r.kappa2 - r.slope_min[1]});

    const auto* l1 = std::get_if<LinearCost>(&spec.h[0].kind());
    const auto* l2 = std::get_if<LinearCost>(&spec.h[1].kind());
    if (l1 && l2 && l1->offset == 0.0 && l2->offset == 0.0 && l2->slope > 0.0 && l1->slope == -l2->slope) {
        r.tag = RegimeTag::LinearExample;
        r.kappa1 = l1->slope;
        r.kappa2 = l2->slope;
        r.delta = 0.0;
        return r;
    }
    const double lo = 1.0 / spec.C, hi = spec.C;
    auto within = [&](double a, double b) { return a >= lo && b <= hi; };
    if (within(r.slope_min[0], r.slope_max[0]) && within(r.slope_min[1], r.slope_max[1])) {
        r.tag = RegimeTag::CooperativeIncreasing;
    } else if (within(-r.slope_max[0], -r.slope_min[0]) && within(-r.slope_max[1], -r.slope_min[1])) {
        r.tag = RegimeTag::CooperativeDecreasing;
    } else if (r.slope_max[0] < 0.0 && r.slope_min[1] > 0.0 && std::abs(r.kappa1 + r.kappa2) > 2.0 * r.delta) {
        // Signs separated everywhere and h1' + h2' bounded away from zero.
        r.tag = RegimeTag::Conflicting;
    }
    return r;
}

}  // namespace hjnash
