/**
 * @file sweep.hpp
 * @brief Resource landscapes over (path length, link quality, threshold) and
 * their summary statistics, with CSV and JSON export.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "hopfid/search.hpp"

namespace hopfid {

struct GridSpec {
    std::vector<int> ell_values{2, 3, 4, 5, 6, 7, 8, 9, 10};
    double w0_lo = 0.5;
    double w0_hi = 1.0;
    double w0_step = 0.0025;
    std::vector<double> p_th_values{0.5, 0.7, 0.99};
    SearchSpace space;

    /// lo + i*step for every i with the value at most hi (up to rounding).
    [[nodiscard]] std::vector<double> w0_values() const {
        std::vector<double> out;
        const auto count = static_cast<std::int64_t>(std::floor((w0_hi - w0_lo) / w0_step + 1e-9));
        for (std::int64_t i = 0; i <= count; ++i) {
            out.push_back(std::min(w0_lo + static_cast<double>(i) * w0_step, w0_hi));
        }
        return out;
    }

    void validate() const {
        if (ell_values.empty()) throw DomainError("grid needs at least one path length");
        for (const int ell : ell_values) {
            if (ell < 1) throw DomainError("path lengths must be at least 1");
        }
        if (!(w0_lo >= 0.0 && w0_hi <= 1.0 && w0_lo <= w0_hi)) throw DomainError("w0 range must satisfy 0 <= lo <= hi <= 1");
        if (!(w0_step > 0.0)) throw DomainError("w0 step must be positive");
        if (p_th_values.empty()) throw DomainError("grid needs at least one success threshold");
        for (const double p : p_th_values) {
            if (!(p > 0.0 && p <= 1.0)) throw DomainError("success thresholds must lie in (0, 1]");
        }
        space.validate();
    }
};

/** @brief Outcome of one protocol family at one grid point. */
struct FamilyOutcome {
    Family family = Family::bbpssw;
    SearchStatus status = SearchStatus::fidelity_infeasible;
    std::optional<std::int64_t> n0_min;
    std::optional<int> r;
    std::optional<int> k;
    std::optional<double> w_out;
    std::optional<double> p_succ;

    [[nodiscard]] bool feasible() const noexcept { return status == SearchStatus::feasible; }
    bool operator==(const FamilyOutcome&) const = default;
};

struct SweepPoint {
    int ell = 1;
    double w0 = 0.0;
    double p_th = 0.0;
    double boundary_w0 = 0.0;
    bool above_boundary = false;
    std::vector<FamilyOutcome> outcomes;

    [[nodiscard]] const FamilyOutcome* outcome(Family f) const noexcept {
        for (const auto& o : outcomes) {
            if (o.family == f) return &o;
        }
        return nullptr;
    }

    bool operator==(const SweepPoint&) const = default;
};

struct FamilySummary {
    Family family = Family::bbpssw;
    double p_th = 0.0;
    std::int64_t points = 0;
    std::int64_t feasible = 0;
    std::int64_t budget_exceeded = 0;
    std::optional<double> median_n0;
    std::int64_t low_copy = 0;  ///< feasible points with n0 <= 10
    std::optional<double> median_k;
    std::optional<int> max_k;
    /// Mean over path lengths of (smallest feasible w0) - 3^(-1/ell).
    std::optional<double> mean_boundary_gap;
};

/// Jansen versus BBPSSW on grid points where both are feasible.
struct SharedComparison {
    double p_th = 0.0;
    std::int64_t shared = 0;
    std::int64_t jansen_fewer = 0;
    std::int64_t jansen_shallower = 0;

    [[nodiscard]] std::optional<double> fewer_fraction() const noexcept {
        if (shared == 0) return std::nullopt;
        return static_cast<double>(jansen_fewer) / static_cast<double>(shared);
    }
    [[nodiscard]] std::optional<double> shallower_fraction() const noexcept {
        if (shared == 0) return std::nullopt;
        return static_cast<double>(jansen_shallower) / static_cast<double>(shared);
    }
};

struct SweepSummary {
    std::vector<FamilySummary> families;
    std::vector<SharedComparison> shared;

    [[nodiscard]] const FamilySummary* find(Family f, double p_th) const noexcept {
        for (const auto& s : families) {
            if (s.family == f && s.p_th == p_th) return &s;
        }
        return nullptr;
    }
};

struct SweepResult {
    std::vector<SweepPoint> points;
    SweepSummary summary;
};

/// Families present in the registry and allowed by the space, in fixed order.
[[nodiscard]] inline std::vector<Family> sweep_families(const SearchSpace& space) {
    std::vector<Family> out;
    for (const Family f : {Family::bbpssw, Family::jansen, Family::custom}) {
        const auto restricted = space.only(f);
        for (const auto& m : space.registry) {
            if (restricted.allows(m)) {
                out.push_back(f);
                break;
            }
        }
    }
    return out;
}

[[nodiscard]] inline FamilyOutcome to_outcome(Family family, const SearchResult& res) {
    FamilyOutcome o;
    o.family = family;
    o.status = res.status;
    if (res.feasible()) {
        o.n0_min = res.n0_min;
        o.r = res.selected->r;
        o.k = res.selected->k;
        o.w_out = res.trace->w_out().value();
        o.p_succ = res.p_succ_at_min;
    }
    return o;
}

namespace detail {

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

[[nodiscard]] inline SweepSummary summarize(const std::vector<SweepPoint>& points, const std::vector<Family>& families,
                                            const std::vector<double>& p_ths) {
    SweepSummary summary;
    for (const Family fam : families) {
        for (const double p_th : p_ths) {
            FamilySummary s;
            s.family = fam;
            s.p_th = p_th;
            std::vector<double> n0s;
            std::vector<double> ks;
            std::map<int, double> min_feasible_w0;
            std::map<int, double> boundary;
            for (const auto& pt : points) {
                if (pt.p_th != p_th) continue;
                const auto* o = pt.outcome(fam);
                if (o == nullptr) continue;
                ++s.points;
                if (o->status == SearchStatus::budget_exceeded) ++s.budget_exceeded;
                if (!o->feasible()) continue;
                ++s.feasible;
                n0s.push_back(static_cast<double>(*o->n0_min));
                ks.push_back(static_cast<double>(*o->k));
                if (*o->n0_min <= 10) ++s.low_copy;
                s.max_k = std::max(s.max_k.value_or(0), *o->k);
                auto [it, inserted] = min_feasible_w0.try_emplace(pt.ell, pt.w0);
                if (!inserted) it->second = std::min(it->second, pt.w0);
                boundary[pt.ell] = pt.boundary_w0;
            }
            if (!n0s.empty()) {
                s.median_n0 = detail::median(n0s);
                s.median_k = detail::median(ks);
                double gap = 0.0;
                for (const auto& [ell, w] : min_feasible_w0) gap += w - boundary[ell];
                s.mean_boundary_gap = gap / static_cast<double>(min_feasible_w0.size());
            }
            summary.families.push_back(s);
        }
    }
    const bool comparable = std::find(families.begin(), families.end(), Family::bbpssw) != families.end() &&
                            std::find(families.begin(), families.end(), Family::jansen) != families.end();
    if (comparable) {
        for (const double p_th : p_ths) {
            SharedComparison c;
            c.p_th = p_th;
            for (const auto& pt : points) {
                if (pt.p_th != p_th) continue;
                const auto* b = pt.outcome(Family::bbpssw);
                const auto* j = pt.outcome(Family::jansen);
                if (b == nullptr || j == nullptr || !b->feasible() || !j->feasible()) continue;
                ++c.shared;
                if (*j->n0_min < *b->n0_min) ++c.jansen_fewer;
                if (*j->k < *b->k) ++c.jansen_shallower;
            }
            summary.shared.push_back(c);
        }
    }
    return summary;
}

/**
 * @brief Evaluates every (ell, w0, p_th) grid point for every family.
 *
 * Points are independent; results land at fixed indices so the output does not
 * depend on the thread count. `threads == 0` uses the hardware concurrency.
 */
[[nodiscard]] inline SweepResult run_sweep(const GridSpec& grid, unsigned threads = 0) {
    grid.validate();
    const auto families = sweep_families(grid.space);
    const auto w0s = grid.w0_values();

    std::vector<SweepPoint> points;
    for (const int ell : grid.ell_values) {
        const PathSpec path(ell);
        for (const double w0 : w0s) {
            for (const double p_th : grid.p_th_values) {
                SweepPoint pt;
                pt.ell = ell;
                pt.w0 = w0;
                pt.p_th = p_th;
                pt.boundary_w0 = boundary_w0(path).value();
                pt.above_boundary = above_boundary(WernerParameter(w0), path);
                pt.outcomes.resize(families.size());
                points.push_back(std::move(pt));
            }
        }
    }

    std::vector<SearchSpace> spaces;
    for (const Family f : families) spaces.push_back(grid.space.only(f));

    const std::size_t jobs = points.size() * families.size();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job = next++; job < jobs; job = next++) {
            auto& pt = points[job / families.size()];
            const std::size_t fi = job % families.size();
            const auto res = min_copy_search(WernerParameter(pt.w0), PathSpec(pt.ell), pt.p_th, spaces[fi]);
            pt.outcomes[fi] = to_outcome(families[fi], res);
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads == 1 || jobs < 2) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SweepResult out;
    out.summary = summarize(points, families, grid.p_th_values);
    out.points = std::move(points);
    return out;
}

// ---------------------------------------------------------------------------
// Export / import

inline constexpr std::string_view kCsvHeader = "ell,w0,pth,family,status,n0_min,r,k,w_out,p_succ,boundary_w0";

class SweepIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to exactly the same double.
[[nodiscard]] inline std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

template <class T>
[[nodiscard]] std::string format_optional(const std::optional<T>& v) {
    if (!v) return {};
    if constexpr (std::is_floating_point_v<T>) {
        return format_real(*v);
    } else {
        return std::to_string(*v);
    }
}

inline void write_csv(std::ostream& os, const std::vector<SweepPoint>& points) {
    os << kCsvHeader << '\n';
    for (const auto& pt : points) {
        for (const auto& o : pt.outcomes) {
            os << pt.ell << ',' << format_real(pt.w0) << ',' << format_real(pt.p_th) << ',' << to_string(o.family) << ','
               << to_string(o.status) << ',' << format_optional(o.n0_min) << ',' << format_optional(o.r) << ','
               << format_optional(o.k) << ',' << format_optional(o.w_out) << ',' << format_optional(o.p_succ) << ','
               << format_real(pt.boundary_w0) << '\n';
        }
    }
}

[[nodiscard]] inline nlohmann::ordered_json summary_json(const SweepSummary& summary) {
    auto opt = [](const auto& v) -> nlohmann::ordered_json {
        if (v) return *v;
        return nullptr;
    };
    nlohmann::ordered_json out;
    out["families"] = nlohmann::ordered_json::array();
    for (const auto& s : summary.families) {
        out["families"].push_back({{"family", to_string(s.family)},
                                   {"pth", s.p_th},
                                   {"points", s.points},
                                   {"feasible", s.feasible},
                                   {"budget_exceeded", s.budget_exceeded},
                                   {"median_n0", opt(s.median_n0)},
                                   {"n0_le_10", s.low_copy},
                                   {"median_k", opt(s.median_k)},
                                   {"max_k", opt(s.max_k)},
                                   {"mean_boundary_gap", opt(s.mean_boundary_gap)}});
    }
    out["shared"] = nlohmann::ordered_json::array();
    for (const auto& c : summary.shared) {
        out["shared"].push_back({{"pth", c.p_th},
                                 {"shared_feasible", c.shared},
                                 {"jansen_fewer", c.jansen_fewer},
                                 {"jansen_fewer_fraction", opt(c.fewer_fraction())},
                                 {"jansen_shallower", c.jansen_shallower},
                                 {"jansen_shallower_fraction", opt(c.shallower_fraction())}});
    }
    return out;
}

inline void write_json(std::ostream& os, const std::vector<SweepPoint>& points, const SweepSummary& summary,
                       const std::optional<GridSpec>& grid = std::nullopt) {
    auto opt = [](const auto& v) -> nlohmann::ordered_json {
        if (v) return *v;
        return nullptr;
    };
    nlohmann::ordered_json doc;
    if (grid) {
        doc["grid"] = {{"ell", grid->ell_values},
                       {"w0", {grid->w0_lo, grid->w0_hi, grid->w0_step}},
                       {"pth", grid->p_th_values},
                       {"k_max", grid->space.k_max},
                       {"n0_max", grid->space.n0_max}};
    }
    doc["points"] = nlohmann::ordered_json::array();
    for (const auto& pt : points) {
        for (const auto& o : pt.outcomes) {
            doc["points"].push_back({{"ell", pt.ell},
                                     {"w0", pt.w0},
                                     {"pth", pt.p_th},
                                     {"family", to_string(o.family)},
                                     {"status", to_string(o.status)},
                                     {"n0_min", opt(o.n0_min)},
                                     {"r", opt(o.r)},
                                     {"k", opt(o.k)},
                                     {"w_out", opt(o.w_out)},
                                     {"p_succ", opt(o.p_succ)},
                                     {"boundary_w0", pt.boundary_w0}});
        }
    }
    doc["summary"] = summary_json(summary);
    os << doc.dump(2) << '\n';
}

enum class ExportFormat { csv, json };

/// @throws SweepIoError naming the path when the file cannot be written.
inline void export_sweep(const std::vector<SweepPoint>& points, const SweepSummary& summary, ExportFormat format,
                         const std::filesystem::path& path, const std::optional<GridSpec>& grid = std::nullopt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SweepIoError("cannot open " + path.string() + " for writing");
    if (format == ExportFormat::csv) {
        write_csv(out, points);
    } else {
        write_json(out, points, summary, grid);
    }
    out.flush();
    if (!out) throw SweepIoError("write failed for " + path.string());
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <class T>
T parse_number(std::string_view s, std::size_t line_no) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw SweepIoError("line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

template <class T>
std::optional<T> parse_optional(std::string_view s, std::size_t line_no) {
    if (s.empty()) return std::nullopt;
    return parse_number<T>(s, line_no);
}

inline SearchStatus parse_status(std::string_view s, std::size_t line_no) {
    for (const auto st : {SearchStatus::feasible, SearchStatus::fidelity_infeasible, SearchStatus::budget_exceeded}) {
        if (to_string(st) == s) return st;
    }
    throw SweepIoError("line " + std::to_string(line_no) + ": unknown status '" + std::string(s) + "'");
}

}  // namespace detail

/// Reads rows written by `write_csv`, regrouping consecutive rows of one grid point.
[[nodiscard]] inline std::vector<SweepPoint> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader) throw SweepIoError("line 1: unexpected CSV header");
    std::vector<SweepPoint> points;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = detail::split_fields(line);
        if (f.size() != 11) throw SweepIoError("line " + std::to_string(line_no) + ": expected 11 fields");

        const int ell = detail::parse_number<int>(f[0], line_no);
        const double w0 = detail::parse_number<double>(f[1], line_no);
        const double p_th = detail::parse_number<double>(f[2], line_no);
        FamilyOutcome o;
        const auto fam = parse_family(f[3]);
        if (!fam) throw SweepIoError("line " + std::to_string(line_no) + ": unknown family");
        o.family = *fam;
        o.status = detail::parse_status(f[4], line_no);
        o.n0_min = detail::parse_optional<std::int64_t>(f[5], line_no);
        o.r = detail::parse_optional<int>(f[6], line_no);
        o.k = detail::parse_optional<int>(f[7], line_no);
        o.w_out = detail::parse_optional<double>(f[8], line_no);
        o.p_succ = detail::parse_optional<double>(f[9], line_no);
        const double boundary = detail::parse_number<double>(f[10], line_no);

        if (points.empty() || points.back().ell != ell || points.back().w0 != w0 || points.back().p_th != p_th) {
            SweepPoint pt;
            pt.ell = ell;
            pt.w0 = w0;
            pt.p_th = p_th;
            pt.boundary_w0 = boundary;
            pt.above_boundary = above_boundary(WernerParameter(w0), PathSpec(ell));
            points.push_back(std::move(pt));
        }
        points.back().outcomes.push_back(o);
    }
    return points;
}

}  // namespace hopfid
