#include "hjnash/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>
#include <variant>

namespace hjnash {

using nlohmann::json;

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Field errors carry the line of the first occurrence of the key, when found.
class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        std::size_t line = 0;
        const auto dot = path.find_last_of('.');
        std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
        key = key.substr(0, key.find('['));
        if (!key.empty() && key != "$") {
            const auto pos = text_.find("\"" + key + "\"");
            if (pos != std::string::npos) line = line_of_offset(text_, pos);
        }
        std::ostringstream os;
        os << "field '" << path << "': " << msg;
        if (line > 0) os << " (line " << line << ")";
        throw ParseError(os.str(), line, path);
    }

    double number(const json& j, const std::string& path) const {
        if (!j.is_number()) fail(path, "expected a number");
        const double v = j.get<double>();
        if (!std::isfinite(v)) fail(path, "expected a finite number");
        return v;
    }

    const json& member(const json& obj, const std::string& key, const std::string& path) const {
        const auto it = obj.find(key);
        if (it == obj.end()) fail(path + "." + key, "missing");
        return *it;
    }

    std::vector<double> numbers(const json& j, const std::string& path) const {
        if (!j.is_array()) fail(path, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    void only(const json& obj, const std::set<std::string>& allowed, const std::string& path) const {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown field");
    }

    CostFunction cost(const json& j, const std::string& path) const {
        if (j.is_number()) return CostFunction::constant(number(j, path));
        if (!j.is_object()) fail(path, "expected a number or a cost object");
        const json& kind = member(j, "kind", path);
        if (!kind.is_string()) fail(path + ".kind", "expected a string");
        const auto k = kind.get<std::string>();
        if (k == "linear") {
            only(j, {"kind", "slope", "offset"}, path);
            LinearCost c;
            c.slope = number(member(j, "slope", path), path + ".slope");
            if (j.contains("offset")) c.offset = number(j["offset"], path + ".offset");
            return c;
        }
        if (k == "smooth_perturbed") {
            only(j, {"kind", "slope", "amplitude", "shape", "length_scale"}, path);
            SmoothPerturbedCost c;
            c.slope = number(member(j, "slope", path), path + ".slope");
            c.amplitude = number(member(j, "amplitude", path), path + ".amplitude");
            if (j.contains("length_scale")) c.length_scale = number(j["length_scale"], path + ".length_scale");
            if (!(c.length_scale > 0.0)) fail(path + ".length_scale", "must be positive");
            const std::string shape = j.value("shape", std::string("tanh"));
            if (shape == "tanh") c.shape = PerturbationShape::Tanh;
            else if (shape == "sin") c.shape = PerturbationShape::Sin;
            else if (shape == "gaussian_bump") c.shape = PerturbationShape::GaussianBump;
            else fail(path + ".shape", "expected tanh, sin or gaussian_bump");
            return c;
        }
        if (k == "tabulated") {
            only(j, {"kind", "x", "y"}, path);
            auto xs = numbers(member(j, "x", path), path + ".x");
            auto ys = numbers(member(j, "y", path), path + ".y");
            try {
                return make_tabulated(std::move(xs), std::move(ys));
            } catch (const InputError& e) {
                fail(path, e.what());
            }
        }
        fail(path + ".kind", "unknown cost kind '" + k + "'");
    }

private:
    const std::string& text_;
};

const char* shape_name(PerturbationShape s) {
    switch (s) {
        case PerturbationShape::Tanh: return "tanh";
        case PerturbationShape::Sin: return "sin";
        case PerturbationShape::GaussianBump: return "gaussian_bump";
    }
    return "tanh";
}

json vec(const Vec2& v) { return json::array({v[0], v[1]}); }

Vec2 to_vec2(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json jump_json(const JumpRecord& r) {
    return {{"y", r.y},
            {"p_minus", r.p_minus},
            {"p_plus", r.p_plus},
            {"admissible", r.admissible},
            {"identities_residual", r.identities_residual},
            {"violated", r.violated}};
}

}  // namespace

GameSpec parse_game_spec(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
        std::ostringstream os;
        os << "malformed JSON at line " << line << ": " << e.what();
        throw ParseError(os.str(), line, "");
    }
    const Reader rd(text);
    if (!doc.is_object()) rd.fail("$", "expected an object");
    rd.only(doc, {"players", "h", "k", "C", "L"}, "$");

    GameSpec spec;
    spec.players = 2;
    if (doc.contains("players")) {
        const json& pl = doc["players"];
        if (!pl.is_number_integer() || pl.get<long long>() < 1) rd.fail("$.players", "expected a positive integer");
        spec.players = pl.get<std::size_t>();
    }
    const json& h = rd.member(doc, "h", "$");
    if (!h.is_array() || h.size() != spec.players) rd.fail("$.h", "expected one cost per player");
    for (std::size_t i = 0; i < h.size(); ++i) spec.h.push_back(rd.cost(h[i], "$.h[" + std::to_string(i) + "]"));
    if (doc.contains("k")) {
        const json& k = doc["k"];
        if (!k.is_array() || k.size() != spec.players) rd.fail("$.k", "expected one weight per player");
        for (std::size_t i = 0; i < k.size(); ++i) spec.k.push_back(rd.cost(k[i], "$.k[" + std::to_string(i) + "]"));
    } else {
        spec.k.assign(spec.players, CostFunction::constant(1.0));
    }
    spec.C = rd.number(rd.member(doc, "C", "$"), "$.C");
    spec.L = rd.number(rd.member(doc, "L", "$"), "$.L");
    try {
        spec.check_well_formed();
    } catch (const InputError& e) {
        throw ParseError(e.what(), 0, "$");
    }
    return spec;
}

GameSpec load_game_spec(const std::string& path) { return parse_game_spec(read_file(path)); }

json to_json(const CostFunction& f) {
    return std::visit(
        [](const auto& c) -> json {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, LinearCost>) {
                return {{"kind", "linear"}, {"slope", c.slope}, {"offset", c.offset}};
            } else if constexpr (std::is_same_v<T, SmoothPerturbedCost>) {
                return {{"kind", "smooth_perturbed"},
                        {"slope", c.slope},
                        {"amplitude", c.amplitude},
                        {"shape", shape_name(c.shape)},
                        {"length_scale", c.length_scale}};
            } else {
                return {{"kind", "tabulated"}, {"x", c.x}, {"y", c.y}};
            }
        },
        f.kind());
}

json to_json(const GameSpec& spec) {
    json h = json::array(), k = json::array();
    for (const auto& f : spec.h) h.push_back(to_json(f));
    for (const auto& f : spec.k) k.push_back(to_json(f));
    return {{"players", spec.players}, {"h", h}, {"k", k}, {"C", spec.C}, {"L", spec.L}};
}

json to_json(const ValidationReport& rep) {
    json v = json::array();
    for (const auto& x : rep.violations)
        v.push_back({{"x", x.x}, {"player", x.player}, {"quantity", x.quantity}, {"value", x.value}, {"bound", x.bound}});
    return {{"ok", rep.ok()}, {"grid_points", rep.grid_points}, {"violations", v}};
}

json to_json(const Regime& reg) {
    return {{"tag", to_string(reg.tag)}, {"kappa", {reg.kappa1, reg.kappa2}}, {"delta", reg.delta},
            {"slope_min", vec(reg.slope_min)}, {"slope_max", vec(reg.slope_max)}};
}

json to_json(const AdmissibilityReport& rep) {
    json jumps = json::array();
    for (const auto& r : rep.jumps) jumps.push_back(jump_json(r));
    return {{"pass", rep.pass},
            {"failures", rep.failures},
            {"a1", {{"pass", rep.a1}, {"max_residual", rep.max_residual},
                    {"derivative_mismatch", rep.derivative_mismatch}, {"derivative_bound", rep.derivative_bound}}},
            {"a2", {{"pass", rep.a2}, {"growth_constant", rep.growth_constant}, {"growth_slope", rep.growth_slope},
                    {"threshold", rep.growth_threshold}}},
            {"a3", {{"pass", rep.a3}, {"jumps", jumps}}}};
}

json to_json(const PiecewiseSolution& sol) {
    json p = json::array(), u = json::array(), dp = json::array(), jumps = json::array();
    for (const auto& v : sol.p) p.push_back(vec(v));
    for (const auto& v : sol.u) u.push_back(vec(v));
    for (const auto& v : sol.dp) dp.push_back(vec(v));
    for (const auto& r : sol.jumps) jumps.push_back(jump_json(r));
    json out = {{"method", sol.method}, {"nu", sol.nu}, {"period", sol.period}, {"closure_error", sol.closure_error},
                {"grid", sol.grid}, {"p", p}, {"u", u}, {"dp", dp}, {"jumps", jumps}};
    if (sol.audit) out["audit"] = to_json(*sol.audit);
    return out;
}

PiecewiseSolution solution_from_json(const json& j) {
    try {
        PiecewiseSolution sol;
        sol.method = j.at("method").get<std::string>();
        sol.nu = j.value("nu", 0.0);
        sol.period = j.value("period", 0.0);
        sol.closure_error = j.value("closure_error", 0.0);
        sol.grid = j.at("grid").get<std::vector<double>>();
        for (const auto& v : j.at("p")) sol.p.push_back(to_vec2(v));
        for (const auto& v : j.at("u")) sol.u.push_back(to_vec2(v));
        if (j.contains("dp"))
            for (const auto& v : j.at("dp")) sol.dp.push_back(to_vec2(v));
        if (j.contains("jumps")) {
            for (const auto& r : j.at("jumps")) {
                JumpRecord rec;
                rec.y = r.at("y").get<double>();
                rec.p_minus = r.at("p_minus").get<std::vector<double>>();
                rec.p_plus = r.at("p_plus").get<std::vector<double>>();
                rec.admissible = r.value("admissible", false);
                rec.identities_residual = r.value("identities_residual", 0.0);
                rec.violated = r.value("violated", std::string());
                sol.jumps.push_back(rec);
            }
        }
        const std::size_t n = sol.grid.size();
        if (n < 2 || sol.p.size() != n || sol.u.size() != n || (!sol.dp.empty() && sol.dp.size() != n))
            throw InputError("solution arrays have inconsistent lengths");
        return sol;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed solution document: ") + e.what(), 0, "");
    }
}

json to_json(const OrbitSide& side) {
    json out = {{"kind", to_string(side.kind)}, {"s_end", side.s_end}};
    switch (side.kind) {
        case Termination::Converged:
            out["limit"] = vec(side.limit);
            out["at_origin"] = side.at_origin;
            break;
        case Termination::BlowUp:
            out["s0"] = side.s0;
            out["eta"] = side.eta;
            out["exponent"] = side.exponent;
            out["delta_exponent"] = side.delta_exponent;
            break;
        case Termination::ClosedOrbit:
            out["period"] = side.period;
            out["x_period"] = side.x_period;
            break;
        default: break;
    }
    return out;
}

json to_json(const NashReport& rep) {
    json pts = json::array();
    for (const auto& p : rep.points)
        pts.push_back({{"player", p.player}, {"y", p.y}, {"claimed", p.claimed}, {"dp", p.dp}, {"gap", p.gap},
                       {"pass", p.pass}});
    return {{"pass", rep.pass},
            {"tol", rep.tol},
            {"resolved", rep.resolved},
            {"error_estimate", {rep.error_estimate[0], rep.error_estimate[1]}},
            {"points", pts},
            {"caveats", rep.caveats}};
}

json to_json(const Trajectory& tr) {
    json ev = json::array();
    for (const auto& e : tr.events) ev.push_back({{"t", e.t}, {"x", e.x}, {"kind", to_string(e.kind)}});
    return {{"samples", tr.t.size()}, {"horizon", tr.horizon}, {"truncated", tr.truncated}, {"events", ev},
            {"notes", tr.notes}};
}

json to_json(const CostBreakdown& cost) {
    json players = json::array();
    for (const auto& pc : cost.player)
        players.push_back(
            {{"running", pc.running}, {"control", pc.control}, {"total", pc.total}, {"tail_bound", pc.tail_bound}});
    return {{"players", players}, {"truncated", cost.truncated}};
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

template <class... Ts>
void csv_row(std::string& out, const Ts&... cols) {
    bool first = true;
    auto put = [&](const auto& c) {
        if (!first) out += ',';
        first = false;
        if constexpr (std::is_arithmetic_v<std::decay_t<decltype(c)>>) out += format_double(static_cast<double>(c));
        else out += c;
    };
    (put(cols), ...);
    out += '\n';
}

}  // namespace

std::string solution_csv(const PiecewiseSolution& sol) {
    std::string out = "x,p1,p2,u1,u2\n";
    for (std::size_t i = 0; i < sol.grid.size(); ++i)
        csv_row(out, sol.grid[i], sol.p[i][0], sol.p[i][1], sol.u[i][0], sol.u[i][1]);
    return out;
}

std::string orbit_csv(const Orbit& orbit) {
    std::string out = "s,p1,p2,x\n";
    for (std::size_t i = 0; i < orbit.s.size(); ++i) csv_row(out, orbit.s[i], orbit.p[i][0], orbit.p[i][1], orbit.x[i]);
    return out;
}

std::string portrait_csv(const std::vector<PortraitPoint>& pts) {
    // s column: blow-up time, loop period, or where the integration stopped.
    auto s_of = [](const OrbitSide& side) {
        if (side.kind == Termination::BlowUp) return side.s0;
        if (side.kind == Termination::ClosedOrbit) return side.period;
        return side.s_end;
    };
    std::string out = "p1,p2,forward,forward_s,backward,backward_s\n";
    for (const auto& pt : pts)
        csv_row(out, pt.p0[0], pt.p0[1], to_string(pt.forward.kind), s_of(pt.forward), to_string(pt.backward.kind),
                s_of(pt.backward));
    return out;
}

std::string trajectory_csv(const GameSpec& spec, const Trajectory& tr) {
    std::string out = "t,x,alpha1,alpha2,running1,running2\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        const double x = tr.x[i], w = std::exp(-tr.t[i]);
        double r[2];
        for (std::size_t m = 0; m < 2; ++m)
            r[m] = w * (spec.h[m].value(x) + 0.5 * spec.k[m].value(x) * tr.alpha[i][m] * tr.alpha[i][m]);
        csv_row(out, tr.t[i], x, tr.alpha[i][0], tr.alpha[i][1], r[0], r[1]);
    }
    return out;
}

std::string nash_csv(const NashReport& rep) {
    std::string out = "player,y,u,V,gap\n";
    for (const auto& pt : rep.points) csv_row(out, static_cast<double>(pt.player + 1), pt.y, pt.claimed, pt.dp, pt.gap);
    return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string spec_hash(const GameSpec& spec) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(to_json(spec).dump()));
    return buf;
}

json to_json(const RunManifest& m) {
    return {{"command", m.command}, {"spec_hash", m.spec_hash}, {"params", m.params},
            {"outputs", m.outputs}, {"seed", m.seed},           {"version", m.version}};
}

std::vector<RejectedCandidate> rejected_candidates(double points_per_unit) {
    const double L = 5.0;
    const GameSpec spec = two_player_game(CostFunction::constant(0.0), CostFunction::constant(0.0), 1.0, L);
    const auto half = static_cast<long>(std::ceil(L * points_per_unit));
    std::vector<double> grid;
    for (long i = -half; i <= half; ++i) grid.push_back(static_cast<double>(i) / points_per_unit);

    std::vector<RejectedCandidate> out;
    {
        std::vector<Vec2> p;
        for (double x : grid) {
            const double ax = std::abs(x);
            const double p1 = ax < 1.0 ? (x >= 0.0 ? 1.0 - ax : -(1.0 - ax)) : 0.0;
            p.push_back({p1, 0.0});
        }
        std::vector<JumpRecord> jumps{make_jump(0.0, {-1.0, 0.0}, {1.0, 0.0})};
        out.push_back({"tent", spec, solution_from_samples(spec, grid, p, {}, jumps, "candidate"), "A3"});
    }
    {
        std::vector<Vec2> p;
        for (double x : grid) p.push_back({-x, 0.0});
        out.push_back({"quadratic", spec, solution_from_samples(spec, grid, p, {}, {}, "candidate"), "A2"});
    }
    for (auto& c : out) c.solution.audit = audit(c.solution, c.spec);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << contents;
    if (!out) throw InputError("write to '" + path + "' failed");
}

}  // namespace hjnash
