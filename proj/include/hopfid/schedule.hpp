/**
 * @file schedule.hpp
 * @brief The all-in recursive purification schedule.
 *
 * At every level all available copies are grouped into floor(n/r) blocks, each
 * block succeeds independently with the level's probability, and successes are
 * pooled for the next level. Copies left over at a level are discarded. The
 * number of surviving copies is tracked exactly as a probability mass function.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hopfid/protocols.hpp"
#include "hopfid/werner.hpp"

namespace hopfid {

/** @brief Block size, recursion depth and initial raw-copy budget. */
struct ScheduleConfig {
    int r = 2;
    int depth = 1;
    std::int64_t n0 = 1;

    ScheduleConfig() = default;
    ScheduleConfig(int block_size, int k, std::int64_t copies) : r(block_size), depth(k), n0(copies) {
        if (r < 2) throw DomainError("block size must be at least 2");
        if (depth < 1) throw DomainError("recursion depth must be at least 1");
        if (n0 < 1) throw DomainError("copy budget must be at least 1");
    }
};

/** @brief Deterministic per-level qualities w^(0..k) and block success probabilities p_1..p_k. */
struct ScheduleTrace {
    std::vector<WernerParameter> w_levels;
    std::vector<double> p_levels;

    [[nodiscard]] int depth() const noexcept { return static_cast<int>(p_levels.size()); }
    [[nodiscard]] WernerParameter w_out() const { return w_levels.back(); }

    bool operator==(const ScheduleTrace&) const = default;
};

struct TraceFailure {
    enum class Kind { domain_exit, zero_probability, evaluation };
    Kind kind;
    int level;  ///< 1-based level whose evaluation failed
    std::string message;
};

class TraceError : public std::runtime_error {
public:
    explicit TraceError(TraceFailure f) : std::runtime_error(f.message), failure_(std::move(f)) {}
    [[nodiscard]] const TraceFailure& failure() const noexcept { return failure_; }

private:
    TraceFailure failure_;
};

/// Applies one more level to an existing trace. Returns a failure instead of throwing.
[[nodiscard]] inline std::optional<TraceFailure> extend_trace(const PurificationMap& map, ScheduleTrace& trace) {
    const int level = trace.depth() + 1;
    const WernerParameter w_in = trace.w_levels.back();
    RoundResult round;
    try {
        round = apply_map(map, w_in);
    } catch (const DomainError& e) {
        return TraceFailure{TraceFailure::Kind::domain_exit, level,
                            "level " + std::to_string(level) + ": input leaves the map domain (" + e.what() + ")"};
    } catch (const MapEvaluationError& e) {
        return TraceFailure{TraceFailure::Kind::evaluation, level,
                            "level " + std::to_string(level) + ": " + e.what()};
    }
    if (round.p_round <= 0.0) {
        return TraceFailure{TraceFailure::Kind::zero_probability, level,
                            "level " + std::to_string(level) + ": block success probability is zero"};
    }
    trace.w_levels.push_back(round.w_out);
    trace.p_levels.push_back(round.p_round);
    return std::nullopt;
}

[[nodiscard]] inline std::variant<ScheduleTrace, TraceFailure> try_evolve_trace(const PurificationMap& map,
                                                                                WernerParameter w_raw, int depth) {
    ScheduleTrace trace;
    trace.w_levels.push_back(w_raw);
    for (int j = 1; j <= depth; ++j) {
        if (auto failure = extend_trace(map, trace)) return *std::move(failure);
    }
    return trace;
}

/// @throws TraceError naming the offending level on domain exit or a zero success probability.
[[nodiscard]] inline ScheduleTrace evolve_trace(const PurificationMap& map, WernerParameter w_raw, int depth) {
    if (depth < 1) throw DomainError("recursion depth must be at least 1");
    auto result = try_evolve_trace(map, w_raw, depth);
    if (auto* failure = std::get_if<TraceFailure>(&result)) throw TraceError(std::move(*failure));
    return std::get<ScheduleTrace>(std::move(result));
}

/// Number of complete purification blocks formed from n copies.
[[nodiscard]] constexpr std::int64_t blocks(std::int64_t n, int r) noexcept { return n / r; }

/** @brief Probability mass over the number of available copies after a level. */
struct CopyDistribution {
    int level = 0;
    std::vector<double> mass;  ///< mass[m] = Pr[N = m]

    [[nodiscard]] static CopyDistribution point(std::int64_t n) {
        CopyDistribution d;
        d.mass.assign(static_cast<std::size_t>(n) + 1, 0.0);
        d.mass.back() = 1.0;
        return d;
    }

    [[nodiscard]] double operator[](std::size_t m) const noexcept { return m < mass.size() ? mass[m] : 0.0; }
    [[nodiscard]] double total() const noexcept { return std::accumulate(mass.begin(), mass.end(), 0.0); }
    [[nodiscard]] std::size_t max_count() const noexcept { return mass.empty() ? 0 : mass.size() - 1; }
};

namespace detail {

inline constexpr double kMassFloor = 1e-15;
inline constexpr double kTailCutoff = 1e-22;

/// Binomial(trials, p) masses anchored at the mode in log space and extended by
/// the multiplicative ratio in both directions; tails below kTailCutoff relative
/// to the mode are left at zero. Returns masses for m in [first, first + size).
struct BinomialWindow {
    std::int64_t first = 0;
    std::vector<double> mass;
};

inline BinomialWindow binomial_window(std::int64_t trials, double p) {
    if (trials == 0 || p <= 0.0) return {0, {1.0}};
    if (p >= 1.0) return {trials, {1.0}};

    const auto n = static_cast<double>(trials);
    const auto mode = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor((n + 1.0) * p)), trials);
    const double odds = p / (1.0 - p);
    const double log_mode = std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(mode) + 1.0) -
                            std::lgamma(n - static_cast<double>(mode) + 1.0) + static_cast<double>(mode) * std::log(p) +
                            (n - static_cast<double>(mode)) * std::log1p(-p);
    const double peak = std::exp(log_mode);

    std::vector<double> upper{peak};
    double v = peak;
    for (std::int64_t m = mode; m < trials; ++m) {
        v *= static_cast<double>(trials - m) / static_cast<double>(m + 1) * odds;
        if (v < kTailCutoff * peak) break;
        upper.push_back(v);
    }
    std::vector<double> lower;
    v = peak;
    for (std::int64_t m = mode; m > 0; --m) {
        v *= static_cast<double>(m) / static_cast<double>(trials - m + 1) / odds;
        if (v < kTailCutoff * peak) break;
        lower.push_back(v);
    }

    BinomialWindow w;
    w.first = mode - static_cast<std::int64_t>(lower.size());
    w.mass.assign(lower.rbegin(), lower.rend());
    w.mass.insert(w.mass.end(), upper.begin(), upper.end());
    const double sum = std::accumulate(w.mass.begin(), w.mass.end(), 0.0);
    for (auto& x : w.mass) x /= sum;
    return w;
}

}  // namespace detail

/// Full Binomial(trials, p) probability mass function.
[[nodiscard]] inline std::vector<double> binomial_pmf(std::int64_t trials, double p) {
    std::vector<double> out(static_cast<std::size_t>(trials) + 1, 0.0);
    const auto w = detail::binomial_window(trials, p);
    for (std::size_t i = 0; i < w.mass.size(); ++i) out[static_cast<std::size_t>(w.first) + i] = w.mass[i];
    return out;
}

/**
 * @brief One level of the all-in schedule.
 *
 * q_new(m) = sum_n q_prev(n) C(floor(n/r), m) p^m (1-p)^(floor(n/r)-m).
 * Masses below 1e-15 are dropped and the result renormalised.
 */
[[nodiscard]] inline CopyDistribution dp_step(const CopyDistribution& prev, double p_level, int r) {
    if (!(p_level >= 0.0 && p_level <= 1.0)) throw DomainError("level probability outside [0, 1]");
    if (r < 2) throw DomainError("block size must be at least 2");

    // Copy counts sharing the same number of blocks lead to the same binomial.
    const std::size_t max_blocks = prev.max_count() / static_cast<std::size_t>(r);
    std::vector<double> by_blocks(max_blocks + 1, 0.0);
    for (std::size_t n = 0; n < prev.mass.size(); ++n) by_blocks[n / static_cast<std::size_t>(r)] += prev.mass[n];

    CopyDistribution next;
    next.level = prev.level + 1;
    next.mass.assign(max_blocks + 1, 0.0);
    for (std::size_t b = 0; b <= max_blocks; ++b) {
        const double weight = by_blocks[b];
        if (weight == 0.0) continue;
        const auto window = detail::binomial_window(static_cast<std::int64_t>(b), p_level);
        for (std::size_t i = 0; i < window.mass.size(); ++i) {
            next.mass[static_cast<std::size_t>(window.first) + i] += weight * window.mass[i];
        }
    }

    double kept = 0.0;
    for (auto& x : next.mass) {
        if (x < detail::kMassFloor) x = 0.0;
        kept += x;
    }
    if (kept > 0.0) {
        for (auto& x : next.mass) x /= kept;
    }
    while (next.mass.size() > 1 && next.mass.back() == 0.0) next.mass.pop_back();
    return next;
}

/// Terminal distribution q_k after all levels, starting from exactly n0 copies.
[[nodiscard]] inline CopyDistribution survivor_distribution(std::int64_t n0, int r, std::span<const double> p_levels) {
    if (n0 < 0) throw DomainError("copy budget must be non-negative");
    auto q = CopyDistribution::point(n0);
    for (const double p : p_levels) q = dp_step(q, p, r);
    return q;
}

[[nodiscard]] inline CopyDistribution survivor_distribution(const ScheduleConfig& config, const ScheduleTrace& trace) {
    if (trace.depth() != config.depth) throw DomainError("trace depth does not match schedule depth");
    return survivor_distribution(config.n0, config.r, trace.p_levels);
}

/// Probability that at least one copy survives every level: 1 - q_k(0).
[[nodiscard]] inline double all_in_success(std::int64_t n0, int r, std::span<const double> p_levels) {
    return 1.0 - survivor_distribution(n0, r, p_levels)[0];
}

[[nodiscard]] inline double all_in_success(const ScheduleConfig& config, const ScheduleTrace& trace) {
    return 1.0 - survivor_distribution(config, trace)[0];
}

}  // namespace hopfid
