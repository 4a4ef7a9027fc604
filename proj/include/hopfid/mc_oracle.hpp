/**
 * @file mc_oracle.hpp
 * @brief Monte Carlo simulation of the all-in schedule, block by block.
 *
 * Used as an independent statistical check on the exact dynamic program.
 * Every episode draws from its own counter-derived stream, so estimates do not
 * depend on the number of worker threads.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "hopfid/schedule.hpp"

namespace hopfid {

/// SplitMix64 stream keyed by (seed, episode index).
class EpisodeRng {
public:
    EpisodeRng(std::uint64_t seed, std::uint64_t episode) noexcept
        : state_(mix(seed ^ mix(episode + 0x632be59bd9b4e019ULL))) {}

    std::uint64_t next() noexcept { return mix(state_ += kGamma); }

    /// Bernoulli draw using an integer threshold so p = 1 always succeeds.
    bool bernoulli(std::uint64_t threshold, bool certain) noexcept { return certain || next() < threshold; }

    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t state_;
};

struct TrialSpec {
    ScheduleConfig config;
    std::vector<double> p_levels;
    std::int64_t trials = 1;
    std::uint64_t seed = 0;
};

struct MonteCarloEstimate {
    double p_hat = 0.0;
    double standard_error = 0.0;
    std::int64_t successes = 0;
    std::int64_t trials = 0;
};

namespace detail {

struct LevelDraw {
    std::uint64_t threshold;
    bool certain;
};

/// One episode: returns true if at least one copy survives every level.
inline bool run_episode(const TrialSpec& spec, const std::vector<LevelDraw>& draws, std::uint64_t episode) {
    EpisodeRng rng(spec.seed, episode);
    std::int64_t copies = spec.config.n0;
    for (const auto& d : draws) {
        const std::int64_t block_count = blocks(copies, spec.config.r);
        std::int64_t survivors = 0;
        for (std::int64_t b = 0; b < block_count; ++b) survivors += rng.bernoulli(d.threshold, d.certain) ? 1 : 0;
        copies = survivors;
        if (copies == 0) return false;
    }
    return copies >= 1;
}

}  // namespace detail

/**
 * @brief Fraction of simulated episodes ending with at least one copy, and its
 * binomial standard error sqrt(p(1-p)/trials).
 *
 * @param threads worker count; 0 picks the hardware concurrency.
 */
[[nodiscard]] inline MonteCarloEstimate simulate_success(const TrialSpec& spec, unsigned threads = 0) {
    if (spec.trials < 1) throw DomainError("trials must be at least 1");
    if (static_cast<int>(spec.p_levels.size()) != spec.config.depth) {
        throw DomainError("number of level probabilities must equal the schedule depth");
    }

    std::vector<detail::LevelDraw> draws;
    for (const double p : spec.p_levels) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("level probability outside [0, 1]");
        const double scaled = std::ldexp(p, 64);
        const auto threshold = scaled >= 18446744073709551615.0 ? std::numeric_limits<std::uint64_t>::max()
                                                               : static_cast<std::uint64_t>(scaled);
        draws.push_back({threshold, p >= 1.0});
    }

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::int64_t>(threads, spec.trials));

    // Fixed-size chunks keep the partition independent of scheduling; the sum is exact.
    constexpr std::int64_t kChunk = 4096;
    const std::int64_t chunks = (spec.trials + kChunk - 1) / kChunk;
    std::atomic<std::int64_t> next_chunk{0};
    std::vector<std::int64_t> per_thread(threads, 0);

    auto worker = [&](unsigned id) {
        std::int64_t local = 0;
        for (std::int64_t c = next_chunk++; c < chunks; c = next_chunk++) {
            const std::int64_t end = std::min(spec.trials, (c + 1) * kChunk);
            for (std::int64_t e = c * kChunk; e < end; ++e) {
                local += detail::run_episode(spec, draws, static_cast<std::uint64_t>(e)) ? 1 : 0;
            }
        }
        per_thread[id] = local;
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& t : pool) t.join();
    }

    MonteCarloEstimate est;
    est.trials = spec.trials;
    for (const auto s : per_thread) est.successes += s;
    est.p_hat = static_cast<double>(est.successes) / static_cast<double>(spec.trials);
    est.standard_error = std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(spec.trials));
    return est;
}

}  // namespace hopfid
