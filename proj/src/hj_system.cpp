#include "hjnash/hj_system.hpp"

#include <cmath>
#include <sstream>

namespace hjnash {

namespace {

void require_size(const GameSpec& spec, const std::vector<double>& v, const char* what) {
    if (v.size() != spec.players) {
        std::ostringstream os;
        os << what << " has " << v.size() << " entries, expected " << spec.players;
        throw InputError(os.str());
    }
}

void require_planar(const GameSpec& spec) {
    if (spec.players != 2) throw UnsupportedError("the gradient system is implemented for two players");
    if (!spec.has_unit_weights()) throw UnsupportedError("the gradient system requires k_1 = k_2 = 1");
}

// (p_i / (2 k_i) - sum_j p_j / k_j) p_i, the quadratic part of the value.
std::vector<double> quadratic_part(const GameSpec& spec, double x, const std::vector<double>& p) {
    std::vector<double> k(spec.players);
    double drift = 0.0;
    for (std::size_t j = 0; j < spec.players; ++j) {
        k[j] = spec.k[j].value(x);
        drift += p[j] / k[j];
    }
    std::vector<double> q(spec.players);
    for (std::size_t i = 0; i < spec.players; ++i) q[i] = (p[i] / (2.0 * k[i]) - drift) * p[i];
    return q;
}

}  // namespace

std::vector<double> optimal_feedback(const GameSpec& spec, const GradientState& state) {
    require_size(spec, state.p, "gradient");
    std::vector<double> a(spec.players);
    for (std::size_t i = 0; i < spec.players; ++i) a[i] = -state.p[i] / spec.k[i].value(state.x);
    return a;
}

std::vector<double> reconstruct_values(const GameSpec& spec, double x, const std::vector<double>& p) {
    require_size(spec, p, "gradient");
    auto u = quadratic_part(spec, x, p);
    for (std::size_t i = 0; i < spec.players; ++i) u[i] += spec.h[i].value(x);
    return u;
}

std::vector<double> hj_residual(const GameSpec& spec, double x, const std::vector<double>& u,
                                const std::vector<double>& p) {
    require_size(spec, u, "value");
    const auto rhs = reconstruct_values(spec, x, p);
    std::vector<double> r(spec.players);
    for (std::size_t i = 0; i < spec.players; ++i) r[i] = u[i] - rhs[i];
    return r;
}

Vec2 gradient_field(const Vec2& p, const Vec2& slopes, double eps_sing) {
    const double d = delta(p);
    if (d <= eps_sing) {
        std::ostringstream os;
        os << "gradient ODE is singular at p = (" << p[0] << ", " << p[1] << "), Delta = " << d;
        throw SingularError(p, os.str());
    }
    const Vec2 n = rescaled_field(p, slopes);
    return {n[0] / d, n[1] / d};
}

Vec2 slopes_at(const GameSpec& spec, double x) { return {spec.h[0].slope(x), spec.h[1].slope(x)}; }

Vec2 gradient_ode_rhs(const GameSpec& spec, double x, const Vec2& p, double eps_sing) {
    require_planar(spec);
    return gradient_field(p, slopes_at(spec, x), eps_sing);
}

Vec2 rescaled_rhs(const GameSpec& spec, double x, const Vec2& p) {
    require_planar(spec);
    return rescaled_field(p, slopes_at(spec, x));
}

Vec2 values_from_gradient(const GameSpec& spec, double x, const Vec2& p) {
    return {spec.h[0].value(x) - p[0] * p[1] - 0.5 * p[0] * p[0],
            spec.h[1].value(x) - p[0] * p[1] - 0.5 * p[1] * p[1]};
}

JumpRecord make_jump(double y, const Vec2& p_minus, const Vec2& p_plus) {
    JumpRecord r;
    r.y = y;
    r.p_minus = {p_minus[0], p_minus[1]};
    r.p_plus = {p_plus[0], p_plus[1]};
    return r;
}

JumpRecord jump_admissible(const GameSpec& spec, JumpRecord record, double tol) {
    require_size(spec, record.p_minus, "p_minus");
    require_size(spec, record.p_plus, "p_plus");
    const auto qm = quadratic_part(spec, record.y, record.p_minus);
    const auto qp = quadratic_part(spec, record.y, record.p_plus);
    double res = 0.0;
    for (std::size_t i = 0; i < spec.players; ++i) res = std::max(res, std::abs(qm[i] - qp[i]));
    record.identities_residual = res;

    double sum_minus = 0.0, sum_plus = 0.0;
    for (std::size_t i = 0; i < spec.players; ++i) {
        const double k = spec.k[i].value(record.y);
        sum_minus += record.p_minus[i] / k;
        sum_plus += record.p_plus[i] / k;
    }
    std::ostringstream why;
    if (sum_minus < 0.0) why << "drift ordering: sum p-/k = " << sum_minus << " < 0";
    if (sum_plus > 0.0) {
        if (why.tellp() > 0) why << "; ";
        why << "drift ordering: sum p+/k = " << sum_plus << " > 0";
    }
    if (!(res <= tol)) {
        if (why.tellp() > 0) why << "; ";
        why << "value continuity identities off by " << res;
    }
    record.violated = why.str();
    record.admissible = record.violated.empty();
    return record;
}

}  // namespace hjnash
