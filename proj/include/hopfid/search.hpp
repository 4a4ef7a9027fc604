/**
 * @file search.hpp
 * @brief Minimum raw-copy search over protocol, block size, depth and budget,
 * and the self-consistent fixed-target construction.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hopfid/protocols.hpp"
#include "hopfid/schedule.hpp"
#include "hopfid/werner.hpp"

namespace hopfid {

/** @brief The finite candidate set explored by the search. */
struct SearchSpace {
    ProtocolRegistry registry;
    /// Restricts block sizes for every family. When unset each family uses its
    /// default: {2} for BBPSSW, {3, ..., 7} for Jansen, any r for custom maps.
    std::optional<std::vector<int>> r_allowed;
    /// Empty means every family in the registry.
    std::vector<Family> families;
    int k_max = 14;
    std::int64_t n0_max = 5000;

    [[nodiscard]] bool allows(const PurificationMap& m) const {
        if (!families.empty() && std::find(families.begin(), families.end(), m.family) == families.end()) {
            return false;
        }
        if (r_allowed) return std::find(r_allowed->begin(), r_allowed->end(), m.r) != r_allowed->end();
        switch (m.family) {
            case Family::bbpssw: return m.r == 2;
            case Family::jansen: return m.r >= 3 && m.r <= 7;
            case Family::custom: return true;
        }
        return false;
    }

    /// Copy of this space restricted to a single family.
    [[nodiscard]] SearchSpace only(Family f) const {
        SearchSpace s = *this;
        s.families = {f};
        return s;
    }

    void validate() const {
        if (k_max < 1) throw DomainError("k_max must be at least 1");
        int max_r = 0;
        for (const auto& m : registry) {
            if (allows(m)) max_r = std::max(max_r, m.r);
        }
        if (n0_max < max_r) throw DomainError("n0_max must be at least the largest allowed block size");
    }
};

enum class SearchStatus { feasible, fidelity_infeasible, budget_exceeded };

[[nodiscard]] constexpr std::string_view to_string(SearchStatus s) noexcept {
    switch (s) {
        case SearchStatus::feasible: return "feasible";
        case SearchStatus::fidelity_infeasible: return "fidelity-infeasible";
        case SearchStatus::budget_exceeded: return "budget-exceeded";
    }
    return "fidelity-infeasible";
}

struct Selection {
    std::string protocol;
    Family family = Family::custom;
    int r = 2;
    int k = 1;

    bool operator==(const Selection&) const = default;
};

struct SearchResult {
    SearchStatus status = SearchStatus::fidelity_infeasible;
    std::optional<std::int64_t> n0_min;
    std::optional<Selection> selected;
    std::optional<ScheduleTrace> trace;
    std::optional<double> p_succ_at_min;
    /// Link quality the selected schedule recovers; the requested w0 for
    /// `min_copy_search`, the fixed target w* for `fixed_target_budget`.
    std::optional<WernerParameter> target;
    std::string reason;

    [[nodiscard]] bool feasible() const noexcept { return status == SearchStatus::feasible; }
};

/** @brief A feasible (protocol, r, k) with its minimum budget. */
struct Candidate {
    std::size_t registry_index = 0;
    std::string protocol;
    int r = 2;
    int k = 1;
    std::int64_t n0_min = 0;
};

/// Strict ordering: fewer copies, then smaller k, then smaller r, then registry order.
[[nodiscard]] inline bool better_candidate(const Candidate& a, const Candidate& b) noexcept {
    if (a.n0_min != b.n0_min) return a.n0_min < b.n0_min;
    if (a.k != b.k) return a.k < b.k;
    if (a.r != b.r) return a.r < b.r;
    return a.registry_index < b.registry_index;
}

[[nodiscard]] inline const Candidate& tie_break(std::span<const Candidate> candidates) {
    if (candidates.empty()) throw std::invalid_argument("tie_break needs at least one candidate");
    return *std::min_element(candidates.begin(), candidates.end(),
                             [](const Candidate& a, const Candidate& b) { return better_candidate(a, b); });
}

/// r^k, saturated just above `limit`.
[[nodiscard]] inline std::int64_t saturating_power(int r, int k, std::int64_t limit) noexcept {
    std::int64_t v = 1;
    for (int i = 0; i < k; ++i) {
        if (v > limit / r) return limit + 1;
        v *= r;
    }
    return v;
}

/**
 * @brief Smallest n0 in [r^k, cap] with all-in success at least p_th.
 *
 * Doubles from r^k (the smallest budget with nonzero success) until the
 * threshold is met, then bisects. Relies on success being non-decreasing in n0.
 */
[[nodiscard]] inline std::optional<std::int64_t> minimum_budget(int r, std::span<const double> p_levels, double p_th,
                                                                std::int64_t cap) {
    const std::int64_t start = saturating_power(r, static_cast<int>(p_levels.size()), cap);
    if (start > cap) return std::nullopt;
    auto ok = [&](std::int64_t n) { return all_in_success(n, r, p_levels) >= p_th; };

    std::int64_t fail = start - 1;  // largest budget known to miss the threshold
    std::int64_t hi = start;
    while (!ok(hi)) {
        if (hi >= cap) return std::nullopt;
        fail = hi;
        hi = std::min(hi * 2, cap);
    }
    while (hi - fail > 1) {
        const std::int64_t mid = fail + (hi - fail) / 2;
        if (ok(mid)) {
            hi = mid;
        } else {
            fail = mid;
        }
    }
    return hi;
}

namespace detail {

inline void check_threshold(double p_th) {
    if (!(p_th > 0.0 && p_th <= 1.0)) throw DomainError("success threshold must lie in (0, 1]");
}

inline std::string format_fixed(double v, int digits = 4) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

inline SearchResult finish(const SearchSpace& space, const std::optional<Candidate>& best,
                           const std::optional<ScheduleTrace>& best_trace, double best_p,
                           std::optional<WernerParameter> target, bool fidelity_ok) {
    SearchResult res;
    if (best) {
        const auto& m = space.registry.entries()[best->registry_index];
        res.status = SearchStatus::feasible;
        res.n0_min = best->n0_min;
        res.selected = Selection{m.name, m.family, m.r, best->k};
        res.trace = best_trace;
        res.p_succ_at_min = best_p;
        res.target = target;
    } else if (fidelity_ok) {
        res.status = SearchStatus::budget_exceeded;
        res.reason = "outside the explored exact-DP regime: no fidelity-feasible schedule reaches the threshold with n0 <= " +
                     std::to_string(space.n0_max);
    } else {
        res.status = SearchStatus::fidelity_infeasible;
        res.reason = "no candidate schedule restores the target quality within k <= " + std::to_string(space.k_max);
    }
    return res;
}

}  // namespace detail

/**
 * @brief Minimum raw-copy budget for hop-independent recovery of w0 over the path.
 *
 * Each allowed (protocol, k) is screened by its deterministic trace; survivors
 * get a bracketed binary search for the smallest budget whose all-in success
 * reaches p_th. The best candidate under `tie_break` is returned. Infeasibility
 * is reported in the result, never thrown.
 */
[[nodiscard]] inline SearchResult min_copy_search(WernerParameter w0, PathSpec path, double p_th,
                                                  const SearchSpace& space) {
    detail::check_threshold(p_th);
    space.validate();

    const WernerParameter w_raw = raw_werner(w0, path);
    if (!above_boundary(w0, path)) {
        SearchResult res;
        res.status = SearchStatus::fidelity_infeasible;
        res.reason = "raw Werner parameter " + detail::format_fixed(w_raw.value()) + " <= 1/3 (separable input)";
        return res;
    }

    std::optional<Candidate> best;
    std::optional<ScheduleTrace> best_trace;
    double best_p = 0.0;
    bool fidelity_ok = false;

    const auto entries = space.registry.entries();
    for (std::size_t idx = 0; idx < entries.size(); ++idx) {
        const auto& map = entries[idx];
        if (!space.allows(map)) continue;

        ScheduleTrace trace;
        trace.w_levels.push_back(w_raw);
        for (int k = 1; k <= space.k_max; ++k) {
            if (extend_trace(map, trace)) break;  // deeper schedules fail at the same level
            if (trace.w_out() < w0) continue;
            fidelity_ok = true;
            const std::int64_t cap = best ? std::min(best->n0_min, space.n0_max) : space.n0_max;
            if (saturating_power(map.r, k, cap) > cap) break;  // r^k only grows with k

            const auto n0 = minimum_budget(map.r, trace.p_levels, p_th, cap);
            if (!n0) continue;
            Candidate c{idx, map.name, map.r, k, *n0};
            if (!best || better_candidate(c, *best)) {
                best = c;
                best_trace = trace;
                best_p = all_in_success(*n0, map.r, trace.p_levels);
            }
        }
    }
    return detail::finish(space, best, best_trace, best_p, w0, fidelity_ok);
}

/// k-fold composition of the output map; nullopt if any application leaves the domain.
[[nodiscard]] inline std::optional<double> iterate_map(const PurificationMap& map, double w, int k) {
    ScheduleTrace trace;
    trace.w_levels.push_back(WernerParameter(w));
    for (int j = 0; j < k; ++j) {
        if (extend_trace(map, trace)) return std::nullopt;
    }
    return trace.w_out().value();
}

/**
 * @brief Self-consistent target w* <= w_th with f^(k)(w*^links) = w*.
 *
 * Scans h(w) = f^(k)(w^links) - w downward from w_th on a 1e-3 grid to the
 * entanglement boundary and bisects the first sign change, so the largest root
 * is returned. Residual |h(w*)| <= 1e-9; roots found by bisection satisfy h(w*) >= 0.
 */
[[nodiscard]] inline std::optional<WernerParameter> fixed_target(const PurificationMap& map, PathSpec path, int k,
                                                                 WernerParameter w_th) {
    constexpr double kGridStep = 1e-3;
    constexpr double kResidual = 1e-9;
    if (k < 1) throw DomainError("recursion depth must be at least 1");

    const double lower = boundary_w0(path).value();
    const double upper = w_th.value();
    if (upper < lower) return std::nullopt;

    auto h = [&](double w) -> std::optional<double> {
        const auto out = iterate_map(map, std::pow(w, path.links()), k);
        if (!out) return std::nullopt;
        return *out - w;
    };

    auto bisect = [&](double lo, double hi, double h_hi) -> std::optional<WernerParameter> {
        // Invariant: sign(h(hi)) == sign(h_hi) and h(lo) has the opposite sign.
        const bool rising = h_hi > 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
            const double mid = 0.5 * (lo + hi);
            const auto hm = h(mid);
            if (!hm) break;
            if ((*hm > 0.0) == rising) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        const double root = rising ? hi : lo;
        const auto hr = h(root);
        if (hr && *hr >= 0.0 && *hr <= kResidual) return WernerParameter(root);
        return std::nullopt;
    };

    std::optional<std::pair<double, double>> prev;  // (w, h(w)) at the previous valid grid point
    for (int i = 0;; ++i) {
        double w = upper - i * kGridStep;
        const bool last = w <= lower;
        if (last) w = lower;
        if (const auto hw = h(w)) {
            if (std::abs(*hw) <= kResidual) return WernerParameter(w);
            if (prev && (prev->second > 0.0) != (*hw > 0.0)) {
                if (auto root = bisect(w, prev->first, prev->second)) return root;
            }
            prev = {w, *hw};
        }
        if (last) break;
    }
    return std::nullopt;
}

/**
 * @brief Budget at the fixed target: for each allowed protocol take the first
 * depth with a target w* <= w_th, then the minimum budget there.
 */
[[nodiscard]] inline SearchResult fixed_target_budget(WernerParameter w_th, PathSpec path, double p_th,
                                                      const SearchSpace& space) {
    detail::check_threshold(p_th);
    space.validate();

    std::optional<Candidate> best;
    std::optional<ScheduleTrace> best_trace;
    std::optional<WernerParameter> best_target;
    double best_p = 0.0;
    bool found_target = false;

    const auto entries = space.registry.entries();
    for (std::size_t idx = 0; idx < entries.size(); ++idx) {
        const auto& map = entries[idx];
        if (!space.allows(map)) continue;
        for (int k = 1; k <= space.k_max; ++k) {
            const auto target = fixed_target(map, path, k, w_th);
            if (!target) continue;
            found_target = true;
            auto traced = try_evolve_trace(map, raw_werner(*target, path), k);
            if (auto* trace = std::get_if<ScheduleTrace>(&traced)) {
                if (const auto n0 = minimum_budget(map.r, trace->p_levels, p_th, space.n0_max)) {
                    Candidate c{idx, map.name, map.r, k, *n0};
                    if (!best || better_candidate(c, *best)) {
                        best = c;
                        best_trace = *trace;
                        best_target = *target;
                        best_p = all_in_success(*n0, map.r, trace->p_levels);
                    }
                }
            }
            break;
        }
    }
    auto res = detail::finish(space, best, best_trace, best_p, best_target, found_target);
    if (!found_target) {
        res.reason = "no fixed target w* <= " + detail::format_fixed(w_th.value()) + " above the entanglement boundary " +
                     detail::format_fixed(boundary_w0(path).value(), 5);
    }
    return res;
}

}  // namespace hopfid
