/**
 * @file protocols.hpp
 * @brief Purification protocols as one-round maps (output quality, success
 * probability) and the registry that holds them.
 *
 * BBPSSW is built in. Higher-order r-to-1 maps are read from a JSON document:
 *
 *     { "protocols": [ { "family": "jansen", "name": "...", "r": 4,
 *                        "variable": "werner", "f_num": [...], "f_den": [...],
 *                        "g_num": [...], "g_den": [...], "domain": [lo, hi] } ] }
 *
 * Coefficients are in ascending powers. Fidelity-variable entries are
 * rewritten over the Werner parameter when loaded.
 */
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hopfid/rational_map.hpp"
#include "hopfid/werner.hpp"

namespace hopfid {

enum class Family { bbpssw, jansen, custom };

[[nodiscard]] constexpr std::string_view to_string(Family f) noexcept {
    switch (f) {
        case Family::bbpssw: return "bbpssw";
        case Family::jansen: return "jansen";
        case Family::custom: return "custom";
    }
    return "custom";
}

[[nodiscard]] inline std::optional<Family> parse_family(std::string_view s) noexcept {
    if (s == "bbpssw") return Family::bbpssw;
    if (s == "jansen") return Family::jansen;
    if (s == "custom") return Family::custom;
    return std::nullopt;
}

class RegistryParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RegistryValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A vanishing denominator during evaluation; indicates malformed registry data.
class MapEvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed interval of Werner parameters on which a map may be applied.
struct QualityInterval {
    double lo = kSeparableWerner;
    double hi = 1.0;

    [[nodiscard]] constexpr bool contains(double w) const noexcept { return w >= lo && w <= hi; }
    bool operator==(const QualityInterval&) const = default;
};

struct PurificationMap {
    Family family = Family::custom;
    std::string name;
    int r = 2;
    RationalMap f;  ///< output Werner parameter given success
    RationalMap g;  ///< success probability of one block
    QualityInterval domain;
    QualityVariable declared_variable = QualityVariable::werner;

    bool operator==(const PurificationMap&) const = default;
};

struct RoundResult {
    WernerParameter w_out;
    double p_round = 0.0;
};

struct BbpsswRound {
    Fidelity f_out;
    double p_round = 0.0;
};

/**
 * @brief One successful BBPSSW round on two identical Werner copies.
 *
 * F' = (F^2 + (1-F)^2/9) / D and p = D with D = F^2 + 2F(1-F)/3 + 5(1-F)^2/9.
 */
[[nodiscard]] inline BbpsswRound bbpssw_step(Fidelity fidelity) {
    const double f = fidelity.value();
    if (!(f > 0.25)) {
        throw DomainError("BBPSSW input fidelity must lie in (1/4, 1], got " + std::to_string(f));
    }
    const double e = 1.0 - f;
    const double success = f * f + (2.0 / 3.0) * f * e + (5.0 / 9.0) * e * e;
    const double out = (f * f + e * e / 9.0) / success;
    return {Fidelity(std::min(out, 1.0)), std::min(success, 1.0)};
}

/// BBPSSW expressed as a registry entry; `apply_map` routes it to `bbpssw_step`.
[[nodiscard]] inline PurificationMap bbpssw_map() {
    RationalMap f_fid{QualityVariable::fidelity, {1.0 / 9.0, -2.0 / 9.0, 10.0 / 9.0}, {5.0 / 9.0, -4.0 / 9.0, 8.0 / 9.0}};
    RationalMap g_fid{QualityVariable::fidelity, {5.0 / 9.0, -4.0 / 9.0, 8.0 / 9.0}, {1.0}};
    PurificationMap m;
    m.family = Family::bbpssw;
    m.name = "bbpssw";
    m.r = 2;
    m.f = werner_output_map_from_fidelity(f_fid);
    m.g = werner_scalar_map_from_fidelity(g_fid);
    m.domain = {0.0, 1.0};
    m.declared_variable = QualityVariable::fidelity;
    return m;
}

/**
 * @brief Apply one purification round to identical copies of quality w.
 * @throws DomainError if w is outside the map's domain.
 * @throws MapEvaluationError if a denominator vanishes at w.
 */
[[nodiscard]] inline RoundResult apply_map(const PurificationMap& map, WernerParameter w) {
    if (map.family == Family::bbpssw) {
        const auto step = bbpssw_step(fidelity_from_werner(w));
        return {werner_from_fidelity(step.f_out), step.p_round};
    }
    const double x = w.value();
    if (!map.domain.contains(x)) {
        throw DomainError("Werner parameter " + std::to_string(x) + " outside domain of '" + map.name + "'");
    }
    const double f_den = map.f.denominator_at(x);
    const double g_den = map.g.denominator_at(x);
    if (f_den == 0.0 || g_den == 0.0 || !std::isfinite(f_den) || !std::isfinite(g_den)) {
        throw MapEvaluationError("denominator of '" + map.name + "' vanishes at w=" + std::to_string(x));
    }
    const double w_out = map.f.numerator_at(x) / f_den;
    const double p = map.g.numerator_at(x) / g_den;
    return {WernerParameter(std::clamp(w_out, 0.0, 1.0)), std::clamp(p, 0.0, 1.0)};
}

namespace detail {

inline constexpr double kAnchorTolerance = 1e-9;
inline constexpr int kValidationSamples = 1000;

[[noreturn]] inline void invalid(const PurificationMap& m, const std::string& what) {
    throw RegistryValidationError("protocol '" + m.name + "': " + what);
}

}  // namespace detail

/// Checks the structural invariants every registry entry must satisfy.
inline void validate_map(const PurificationMap& m) {
    using detail::invalid;
    using detail::kAnchorTolerance;
    if (m.name.empty()) invalid(m, "empty name");
    if (m.r < 2) invalid(m, "block size r must be at least 2");
    if (!(m.domain.lo >= 0.0 && m.domain.hi <= 1.0 && m.domain.lo < m.domain.hi)) {
        invalid(m, "domain must satisfy 0 <= lo < hi <= 1 in the Werner parameter");
    }
    if (m.f.numerator.empty() || m.f.denominator.empty() || m.g.numerator.empty() || m.g.denominator.empty()) {
        invalid(m, "empty coefficient list");
    }
    const double f1 = m.f(1.0);
    const double g1 = m.g(1.0);
    if (!(std::abs(f1 - 1.0) <= kAnchorTolerance && std::abs(g1 - 1.0) <= kAnchorTolerance)) {
        std::ostringstream os;
        os << "perfect-input anchor violated (f(1)=" << f1 << ", g(1)=" << g1 << ")";
        invalid(m, os.str());
    }
    double f_den_sign = 0.0;
    double g_den_sign = 0.0;
    for (int i = 0; i <= detail::kValidationSamples; ++i) {
        const double w = m.domain.lo + (m.domain.hi - m.domain.lo) * i / detail::kValidationSamples;
        const double fd = m.f.denominator_at(w);
        const double gd = m.g.denominator_at(w);
        if (!(std::abs(fd) > 1e-12) || !(std::abs(gd) > 1e-12)) {
            invalid(m, "denominator vanishes at w=" + std::to_string(w));
        }
        if (i == 0) {
            f_den_sign = std::copysign(1.0, fd);
            g_den_sign = std::copysign(1.0, gd);
        } else if (std::copysign(1.0, fd) != f_den_sign || std::copysign(1.0, gd) != g_den_sign) {
            invalid(m, "denominator changes sign inside the domain near w=" + std::to_string(w));
        }
        const double out = m.f.numerator_at(w) / fd;
        if (!(out >= -kAnchorTolerance && out <= 1.0 + kAnchorTolerance)) {
            invalid(m, "output quality f(" + std::to_string(w) + ")=" + std::to_string(out) + " outside [0, 1]");
        }
        if (w > kSeparableWerner) {
            const double p = m.g.numerator_at(w) / gd;
            if (!(p > 0.0 && p <= 1.0 + kAnchorTolerance)) {
                invalid(m, "success probability g(" + std::to_string(w) + ")=" + std::to_string(p) + " outside (0, 1]");
            }
        }
    }
}

/** @brief Immutable, validated list of purification maps; BBPSSW is always first. */
class ProtocolRegistry {
public:
    ProtocolRegistry() { entries_.push_back(bbpssw_map()); }

    /// Validates and appends; names must be unique.
    void add(PurificationMap m) {
        validate_map(m);
        if (find(m.name) != nullptr) {
            throw RegistryValidationError("protocol '" + m.name + "': duplicate name");
        }
        entries_.push_back(std::move(m));
    }

    [[nodiscard]] std::span<const PurificationMap> entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] auto begin() const noexcept { return entries_.begin(); }
    [[nodiscard]] auto end() const noexcept { return entries_.end(); }

    [[nodiscard]] const PurificationMap* find(std::string_view name) const noexcept {
        for (const auto& e : entries_) {
            if (e.name == name) return &e;
        }
        return nullptr;
    }

    [[nodiscard]] bool has_family(Family f) const noexcept {
        for (const auto& e : entries_) {
            if (e.family == f) return true;
        }
        return false;
    }

    bool operator==(const ProtocolRegistry&) const = default;

private:
    std::vector<PurificationMap> entries_;
};

namespace detail {

inline std::string line_context(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline std::vector<double> coeffs(const nlohmann::json& entry, const char* key, const std::string& where) {
    if (!entry.contains(key)) throw RegistryParseError(where + "." + key + ": missing field");
    const auto& arr = entry.at(key);
    if (!arr.is_array() || arr.empty()) {
        throw RegistryParseError(where + "." + key + ": expected a non-empty array of numbers");
    }
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) throw RegistryParseError(where + "." + key + ": expected a non-empty array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline PurificationMap parse_entry(const nlohmann::json& entry, std::size_t index) {
    const std::string where = "protocols[" + std::to_string(index) + "]";
    if (!entry.is_object()) throw RegistryParseError(where + ": expected an object");

    auto string_field = [&](const char* key) -> std::string {
        if (!entry.contains(key) || !entry.at(key).is_string()) {
            throw RegistryParseError(where + "." + key + ": expected a string");
        }
        return entry.at(key).get<std::string>();
    };

    PurificationMap m;
    const auto family = parse_family(string_field("family"));
    if (!family || *family == Family::bbpssw) {
        throw RegistryParseError(where + ".family: expected \"jansen\" or \"custom\"");
    }
    m.family = *family;
    m.name = string_field("name");
    if (!entry.contains("r") || !entry.at("r").is_number_integer()) {
        throw RegistryParseError(where + ".r: expected an integer");
    }
    m.r = entry.at("r").get<int>();

    const std::string variable = entry.contains("variable") ? string_field("variable") : "werner";
    if (variable == "werner") {
        m.declared_variable = QualityVariable::werner;
    } else if (variable == "fidelity") {
        m.declared_variable = QualityVariable::fidelity;
    } else {
        throw RegistryParseError(where + ".variable: expected \"werner\" or \"fidelity\"");
    }

    RationalMap f{m.declared_variable, coeffs(entry, "f_num", where), coeffs(entry, "f_den", where)};
    RationalMap g{m.declared_variable, coeffs(entry, "g_num", where), coeffs(entry, "g_den", where)};
    m.f = werner_output_map_from_fidelity(f);
    m.g = werner_scalar_map_from_fidelity(g);

    if (entry.contains("domain")) {
        const auto& d = entry.at("domain");
        if (!d.is_array() || d.size() != 2 || !d[0].is_number() || !d[1].is_number()) {
            throw RegistryParseError(where + ".domain: expected [lo, hi]");
        }
        double lo = d[0].get<double>();
        double hi = d[1].get<double>();
        if (m.declared_variable == QualityVariable::fidelity) {
            lo = (4.0 * lo - 1.0) / 3.0;
            hi = (4.0 * hi - 1.0) / 3.0;
        }
        m.domain = {lo, hi};
    }
    return m;
}

}  // namespace detail

/**
 * @brief Parse and validate a registry document. An empty or whitespace-only
 * document yields the built-in registry.
 * @throws RegistryParseError with line or field context.
 * @throws RegistryValidationError naming the entry and the failed invariant.
 */
[[nodiscard]] inline ProtocolRegistry load_registry(std::string_view text) {
    ProtocolRegistry registry;
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return registry;

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw RegistryParseError("registry parse error at " + detail::line_context(text, e.byte) + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("protocols") || !doc.at("protocols").is_array()) {
        throw RegistryParseError("registry: top level must be an object with a \"protocols\" array");
    }
    const auto& list = doc.at("protocols");
    for (std::size_t i = 0; i < list.size(); ++i) {
        registry.add(detail::parse_entry(list[i], i));
    }
    return registry;
}

[[nodiscard]] inline ProtocolRegistry load_registry_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RegistryParseError("cannot open registry file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return load_registry(buf.str());
    } catch (const RegistryParseError& e) {
        throw RegistryParseError(path.string() + ": " + e.what());
    } catch (const RegistryValidationError& e) {
        throw RegistryValidationError(path.string() + ": " + e.what());
    }
}

}  // namespace hopfid
