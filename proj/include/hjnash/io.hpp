#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hjnash/equilibrium_solver.hpp"
#include "hjnash/game_model.hpp"
#include "hjnash/game_simulator.hpp"
#include "hjnash/nash_verifier.hpp"
#include "hjnash/phase_plane.hpp"

namespace hjnash {

inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed input document; line is 0 when the error is not positional.
class ParseError : public InputError {
public:
    ParseError(const std::string& what, std::size_t line, std::string field)
        : InputError(what), line(line), field(std::move(field)) {}
    std::size_t line;
    std::string field;
};

/// Game document:
///   {"players": 2, "C": 2, "L": 5,
///    "h": [{"kind": "linear", "slope": 1, "offset": 0}, ...],
///    "k": [1, {"kind": "tabulated", "x": [...], "y": [...]}]}
/// A bare number is a constant function; "k" defaults to 1.
GameSpec parse_game_spec(const std::string& text);
GameSpec load_game_spec(const std::string& path);

nlohmann::json to_json(const CostFunction& f);
nlohmann::json to_json(const GameSpec& spec);
nlohmann::json to_json(const ValidationReport& rep);
nlohmann::json to_json(const Regime& reg);
nlohmann::json to_json(const AdmissibilityReport& rep);
nlohmann::json to_json(const PiecewiseSolution& sol);
nlohmann::json to_json(const OrbitSide& side);
nlohmann::json to_json(const NashReport& rep);
nlohmann::json to_json(const Trajectory& tr);
nlohmann::json to_json(const CostBreakdown& cost);

PiecewiseSolution solution_from_json(const nlohmann::json& j);

/// Full round-trip precision ("%.17g").
std::string format_double(double v);

std::string solution_csv(const PiecewiseSolution& sol);
std::string orbit_csv(const Orbit& orbit);
std::string portrait_csv(const std::vector<PortraitPoint>& pts);
/// Columns t, x, alpha1, alpha2 and the discounted running cost e^{-t} (h_i + k_i alpha_i^2 / 2).
std::string trajectory_csv(const GameSpec& spec, const Trajectory& tr);
std::string nash_csv(const NashReport& rep);

std::uint64_t fnv1a(const std::string& bytes);

struct RunManifest {
    std::string command;
    std::string spec_hash;  // hex FNV-1a of the canonical game document, empty without a spec
    std::map<std::string, std::string> params;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    std::string version = kToolVersion;
};

nlohmann::json to_json(const RunManifest& m);
std::string spec_hash(const GameSpec& spec);

/// A candidate solution reproduced for rejection by the audit.
struct RejectedCandidate {
    std::string name;
    GameSpec spec;
    PiecewiseSolution solution;
    std::string expected_failure;  // reason code the audit must report
};

/// Two candidates of the zero game (h = 0, k = 1, C = 1, L = 5) that satisfy the HJ
/// system pointwise: u1 = -(1 - |x|)^2 / 2 on |x| < 1 (jump at 0) and u1 = -x^2 / 2.
std::vector<RejectedCandidate> rejected_candidates(double points_per_unit = 100.0);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace hjnash
