// Command-line front end for the hopfid library. Kept in a header so the test
// suite can drive `run` in-process.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hopfid/hopfid.hpp"

namespace hopfid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;

/// A flag value that failed validation; reported with exit status 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double parse_real(const std::string& text, const std::string& flag) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw UsageError(flag + ": '" + text + "' is not a number");
    }
}

inline int parse_int(const std::string& text, const std::string& flag) {
    try {
        std::size_t used = 0;
        const long v = std::stol(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw UsageError(flag + ": '" + text + "' is not an integer");
    }
}

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, sep)) out.push_back(item);
    if (!text.empty() && text.back() == sep) out.emplace_back();
    return out;
}

/// `lo:hi` (inclusive) or a single integer.
inline std::vector<int> parse_int_range(const std::string& text, const std::string& flag) {
    const auto parts = split(text, ':');
    if (parts.empty() || parts.size() > 2) throw UsageError(flag + ": expected lo:hi, got '" + text + "'");
    const int lo = parse_int(parts[0], flag);
    const int hi = parts.size() == 2 ? parse_int(parts[1], flag) : lo;
    if (lo > hi) throw UsageError(flag + ": lower end exceeds upper end");
    std::vector<int> out;
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
}

struct RealRange {
    double lo;
    double hi;
    double step;
};

/// `lo:hi[:step]` or a single value.
inline RealRange parse_real_range(const std::string& text, const std::string& flag, double default_step) {
    const auto parts = split(text, ':');
    if (parts.empty() || parts.size() > 3) throw UsageError(flag + ": expected lo:hi[:step], got '" + text + "'");
    RealRange r{parse_real(parts[0], flag), 0.0, default_step};
    r.hi = parts.size() >= 2 ? parse_real(parts[1], flag) : r.lo;
    if (parts.size() == 3) r.step = parse_real(parts[2], flag);
    if (r.lo > r.hi) throw UsageError(flag + ": lower end exceeds upper end");
    if (!(r.step > 0.0)) throw UsageError(flag + ": step must be positive");
    return r;
}

inline std::vector<double> parse_real_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(parse_real(part, flag));
    if (out.empty()) throw UsageError(flag + ": expected a comma-separated list");
    return out;
}

inline void require_unit(double v, const std::string& flag) {
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError(flag + " must lie in [0, 1]");
}

inline void require_threshold(double v, const std::string& flag) {
    if (!(v > 0.0 && v <= 1.0)) throw UsageError(flag + " must lie in (0, 1]");
}

inline void require_at_least(std::int64_t v, std::int64_t lo, const std::string& flag) {
    if (v < lo) throw UsageError(flag + " must be at least " + std::to_string(lo));
}

inline std::string fixed(double v, int digits = 6) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

inline nlohmann::ordered_json trace_json(const ScheduleTrace& t) {
    nlohmann::ordered_json w = nlohmann::ordered_json::array();
    for (const auto& x : t.w_levels) w.push_back(x.value());
    return {{"w_levels", w}, {"p_levels", t.p_levels}};
}

inline nlohmann::ordered_json result_json(const SearchResult& res) {
    nlohmann::ordered_json j;
    j["status"] = std::string(to_string(res.status));
    j["n0_min"] = res.n0_min ? nlohmann::ordered_json(*res.n0_min) : nlohmann::ordered_json(nullptr);
    if (res.selected) {
        j["selected"] = {{"protocol", res.selected->protocol},
                         {"family", std::string(to_string(res.selected->family))},
                         {"r", res.selected->r},
                         {"k", res.selected->k}};
    } else {
        j["selected"] = nullptr;
    }
    j["target_w0"] = res.target ? nlohmann::ordered_json(res.target->value()) : nlohmann::ordered_json(nullptr);
    j["trace"] = res.trace ? trace_json(*res.trace) : nlohmann::ordered_json(nullptr);
    j["p_succ_at_min"] = res.p_succ_at_min ? nlohmann::ordered_json(*res.p_succ_at_min) : nlohmann::ordered_json(nullptr);
    if (!res.reason.empty()) j["reason"] = res.reason;
    return j;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SweepIoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw SweepIoError("write failed for " + path);
}

inline void print_trace(std::ostream& out, const ScheduleTrace& t) {
    out << "trace:\n";
    for (std::size_t j = 0; j < t.w_levels.size(); ++j) {
        out << "  level " << j << ": w=" << fixed(t.w_levels[j].value());
        if (j > 0) out << " p=" << fixed(t.p_levels[j - 1]);
        out << '\n';
    }
}

/// Options shared by the searching subcommands.
struct SpaceOptions {
    std::string registry;
    std::string families;
    std::string r_list;
    int k_max = 14;
    std::int64_t n0_max = 5000;

    void attach(CLI::App* cmd) {
        cmd->add_option("--registry", registry, "Protocol registry JSON (default: $HOPFID_REGISTRY)")
            ->envname("HOPFID_REGISTRY");
        cmd->add_option("--family", families, "Comma-separated families to search: bbpssw,jansen,custom");
        cmd->add_option("--r", r_list, "Comma-separated block sizes (default: per-family)");
        cmd->add_option("--k-max", k_max, "Maximum recursion depth")->capture_default_str();
        cmd->add_option("--n0-max", n0_max, "Maximum copy budget for the exact DP")->capture_default_str();
    }

    [[nodiscard]] SearchSpace build() const {
        require_at_least(k_max, 1, "--k-max");
        require_at_least(n0_max, 2, "--n0-max");
        SearchSpace space;
        if (!registry.empty()) space.registry = load_registry_file(registry);
        if (!families.empty()) {
            for (const auto& name : split(families, ',')) {
                const auto f = parse_family(name);
                if (!f) throw UsageError("--family: unknown family '" + name + "'");
                space.families.push_back(*f);
            }
        }
        if (!r_list.empty()) {
            std::vector<int> rs;
            for (const auto& part : split(r_list, ',')) {
                const int r = parse_int(part, "--r");
                require_at_least(r, 2, "--r");
                rs.push_back(r);
            }
            space.r_allowed = rs;
        }
        space.k_max = k_max;
        space.n0_max = n0_max;
        return space;
    }
};

}  // namespace detail

/**
 * @brief Parses argv and runs one subcommand.
 * @return 0 on success (or feasible), 2 for an infeasible point or failed
 * validation, 1 for usage, registry or I/O errors.
 */
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    using namespace detail;

    CLI::App app{"Minimum raw-copy budgets for hop-independent Werner recovery"};
    app.require_subcommand(1);

    // mincopy
    auto* mincopy = app.add_subcommand("mincopy", "Minimum copy budget at one (w0, ell, pth)");
    std::string mc_w0, mc_pth, mc_out;
    int mc_ell = 0;
    SpaceOptions mc_space;
    mincopy->add_option("--w0", mc_w0, "Elementary-link Werner parameter")->required();
    mincopy->add_option("--ell", mc_ell, "Number of elementary links")->required();
    mincopy->add_option("--pth", mc_pth, "Success threshold")->required();
    mincopy->add_option("--out", mc_out, "Write the result as JSON");
    mc_space.attach(mincopy);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Resource landscape over a (ell, w0, pth) grid");
    std::string sw_ell = "2:10", sw_w0 = "0.5:1.0:0.0025", sw_pth = "0.5,0.7,0.99", sw_out, sw_format;
    unsigned sw_threads = 0;
    SpaceOptions sw_space;
    sweep->add_option("--ell", sw_ell, "Path lengths lo:hi")->capture_default_str();
    sweep->add_option("--w0", sw_w0, "Link qualities lo:hi[:step]")->capture_default_str();
    sweep->add_option("--pth", sw_pth, "Comma-separated success thresholds")->capture_default_str();
    sweep->add_option("--out", sw_out, "Output file (CSV unless --format json or a .json name)");
    sweep->add_option("--format", sw_format, "csv or json");
    sweep->add_option("--threads", sw_threads, "Worker threads (0 = hardware)");
    sw_space.attach(sweep);

    // fixedpoint
    auto* fixedpoint = app.add_subcommand("fixedpoint", "Budget at the self-consistent target w* <= wth");
    std::string fp_wth, fp_pth, fp_out;
    int fp_ell = 0;
    SpaceOptions fp_space;
    fixedpoint->add_option("--wth", fp_wth, "Upper bound on the recovery target")->required();
    fixedpoint->add_option("--ell", fp_ell, "Number of elementary links")->required();
    fixedpoint->add_option("--pth", fp_pth, "Success threshold")->required();
    fixedpoint->add_option("--out", fp_out, "Write the per-family results as JSON");
    fp_space.attach(fixedpoint);

    // boundary
    auto* boundary = app.add_subcommand("boundary", "Entanglement boundary 3^(-1/ell)");
    std::string bd_ell = "1:10", bd_out;
    boundary->add_option("--ell", bd_ell, "Path lengths lo:hi")->capture_default_str();
    boundary->add_option("--out", bd_out, "Write the table as CSV");

    // validate
    auto* validate = app.add_subcommand("validate", "Exact DP versus Monte Carlo at one schedule");
    std::int64_t va_n0 = 0, va_trials = 1000000;
    int va_r = 0;
    std::string va_p, va_out;
    std::uint64_t va_seed = 1;
    unsigned va_threads = 0;
    validate->add_option("--n0", va_n0, "Initial copy budget")->required();
    validate->add_option("--r", va_r, "Block size")->required();
    validate->add_option("--p", va_p, "Comma-separated level success probabilities")->required();
    validate->add_option("--trials", va_trials, "Monte Carlo episodes")->capture_default_str();
    validate->add_option("--seed", va_seed, "Random seed")->capture_default_str();
    validate->add_option("--threads", va_threads, "Worker threads (0 = hardware)");
    validate->add_option("--out", va_out, "Write the comparison as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*mincopy) {
            const double w0 = parse_real(mc_w0, "--w0");
            const double pth = parse_real(mc_pth, "--pth");
            require_unit(w0, "--w0");
            require_at_least(mc_ell, 1, "--ell");
            require_threshold(pth, "--pth");
            const auto space = mc_space.build();

            const PathSpec path(mc_ell);
            const auto res = min_copy_search(WernerParameter(w0), path, pth, space);
            out << "w0=" << mc_w0 << " ell=" << mc_ell << " pth=" << mc_pth << '\n';
            out << "raw Werner parameter: " << fixed(raw_werner(WernerParameter(w0), path).value()) << '\n';
            out << "entanglement boundary: " << fixed(boundary_w0(path).value()) << '\n';
            out << "status: " << to_string(res.status) << '\n';
            auto doc = result_json(res);
            if (res.feasible()) {
                const auto& sel = *res.selected;
                const std::int64_t n0 = *res.n0_min;
                const double below = all_in_success(n0 - 1, sel.r, res.trace->p_levels);
                out << "n0_min: " << n0 << '\n';
                out << "selected: " << to_string(sel.family) << ' ' << sel.protocol << " r=" << sel.r << " k=" << sel.k << '\n';
                print_trace(out, *res.trace);
                out << "w_out: " << fixed(res.trace->w_out().value()) << '\n';
                out << "P_succ(n0=" << n0 << "): " << fixed(*res.p_succ_at_min) << '\n';
                out << "P_succ(n0=" << n0 - 1 << "): " << fixed(below) << '\n';
                doc["p_succ_below_min"] = below;
            } else {
                out << "reason: " << res.reason << '\n';
            }
            if (!mc_out.empty()) write_file(mc_out, doc.dump(2) + "\n");
            return res.feasible() ? kExitOk : kExitInfeasible;
        }

        if (*sweep) {
            GridSpec grid;
            grid.ell_values = parse_int_range(sw_ell, "--ell");
            for (const int ell : grid.ell_values) require_at_least(ell, 1, "--ell");
            const auto w0 = parse_real_range(sw_w0, "--w0", 0.0025);
            require_unit(w0.lo, "--w0");
            require_unit(w0.hi, "--w0");
            grid.w0_lo = w0.lo;
            grid.w0_hi = w0.hi;
            grid.w0_step = w0.step;
            grid.p_th_values = parse_real_list(sw_pth, "--pth");
            for (const double p : grid.p_th_values) require_threshold(p, "--pth");
            ExportFormat format = ExportFormat::csv;
            if (sw_format == "json" || (sw_format.empty() && std::filesystem::path(sw_out).extension() == ".json")) {
                format = ExportFormat::json;
            } else if (!sw_format.empty() && sw_format != "csv") {
                throw UsageError("--format must be csv or json");
            }
            grid.space = sw_space.build();

            const auto result = run_sweep(grid, sw_threads);
            out << "grid: ell=" << sw_ell << " w0=" << format_real(grid.w0_lo) << ':' << format_real(grid.w0_hi) << ':'
                << format_real(grid.w0_step) << " pth=" << sw_pth << " k_max=" << grid.space.k_max
                << " n0_max=" << grid.space.n0_max << '\n';
            out << "points: " << result.points.size() << '\n';
            for (const auto& s : result.summary.families) {
                out << to_string(s.family) << " pth=" << format_real(s.p_th) << ": feasible=" << s.feasible << '/'
                    << s.points << " budget_exceeded=" << s.budget_exceeded;
                if (s.median_n0) {
                    out << " median_n0=" << format_real(*s.median_n0) << " n0<=10=" << s.low_copy
                        << " median_k=" << format_real(*s.median_k) << " max_k=" << *s.max_k
                        << " mean_boundary_gap=" << fixed(*s.mean_boundary_gap, 4);
                }
                out << '\n';
            }
            for (const auto& c : result.summary.shared) {
                out << "shared pth=" << format_real(c.p_th) << ": points=" << c.shared;
                if (const auto f = c.fewer_fraction()) {
                    out << " jansen_fewer=" << fixed(*f, 4) << " jansen_shallower=" << fixed(*c.shallower_fraction(), 4);
                }
                out << '\n';
            }
            if (!sw_out.empty()) export_sweep(result.points, result.summary, format, sw_out, grid);
            return kExitOk;
        }

        if (*fixedpoint) {
            const double wth = parse_real(fp_wth, "--wth");
            const double pth = parse_real(fp_pth, "--pth");
            require_unit(wth, "--wth");
            require_at_least(fp_ell, 1, "--ell");
            require_threshold(pth, "--pth");
            const auto space = fp_space.build();

            const PathSpec path(fp_ell);
            out << "wth=" << fp_wth << " ell=" << fp_ell << " pth=" << fp_pth << '\n';
            nlohmann::ordered_json doc = nlohmann::ordered_json::array();
            bool any = false;
            for (const Family fam : sweep_families(space)) {
                const auto res = fixed_target_budget(WernerParameter(wth), path, pth, space.only(fam));
                auto j = result_json(res);
                j["family"] = std::string(to_string(fam));
                doc.push_back(j);
                out << to_string(fam) << ": " << to_string(res.status);
                if (res.feasible()) {
                    any = true;
                    out << " w*=" << fixed(res.target->value()) << " n0=" << *res.n0_min << " protocol=" << res.selected->protocol
                        << " r=" << res.selected->r << " k=" << res.selected->k << " P_succ=" << fixed(*res.p_succ_at_min);
                } else {
                    out << " (" << res.reason << ')';
                }
                out << '\n';
            }
            if (!fp_out.empty()) write_file(fp_out, doc.dump(2) + "\n");
            return any ? kExitOk : kExitInfeasible;
        }

        if (*boundary) {
            const auto ells = parse_int_range(bd_ell, "--ell");
            for (const int ell : ells) require_at_least(ell, 1, "--ell");
            std::ostringstream csv;
            csv << "ell,boundary_w0\n";
            out << "ell  boundary_w0\n";
            for (const int ell : ells) {
                const double b = boundary_w0(PathSpec(ell)).value();
                out << std::setw(3) << ell << "  " << fixed(b) << '\n';
                csv << ell << ',' << format_real(b) << '\n';
            }
            if (!bd_out.empty()) write_file(bd_out, csv.str());
            return kExitOk;
        }

        if (*validate) {
            require_at_least(va_n0, 1, "--n0");
            require_at_least(va_r, 2, "--r");
            require_at_least(va_trials, 1, "--trials");
            const auto ps = parse_real_list(va_p, "--p");
            for (const double p : ps) require_unit(p, "--p");

            TrialSpec spec{ScheduleConfig(va_r, static_cast<int>(ps.size()), va_n0), ps, va_trials, va_seed};
            const double dp = all_in_success(va_n0, va_r, ps);
            const auto mc = simulate_success(spec, va_threads);
            double z = 0.0;
            if (mc.standard_error > 0.0) {
                z = (mc.p_hat - dp) / mc.standard_error;
            } else if (std::abs(mc.p_hat - dp) > 1e-12) {
                z = std::copysign(INFINITY, mc.p_hat - dp);
            }
            const bool agree = std::abs(z) <= 3.0;
            out << "n0=" << va_n0 << " r=" << va_r << " p=" << va_p << " trials=" << va_trials << " seed=" << va_seed << '\n';
            out << "dp: " << fixed(dp, 6) << '\n';
            out << "mc: " << fixed(mc.p_hat, 6) << " (" << mc.successes << '/' << mc.trials << ")\n";
            out << "stderr: " << fixed(mc.standard_error, 6) << '\n';
            out << "z: " << fixed(z, 3) << '\n';
            out << (agree ? "agree" : "DISAGREE") << " (|z| <= 3)\n";
            if (!va_out.empty()) {
                nlohmann::ordered_json j{{"n0", va_n0},        {"r", va_r},         {"p_levels", ps},
                                         {"trials", va_trials}, {"seed", va_seed},   {"dp", dp},
                                         {"mc", mc.p_hat},      {"stderr", mc.standard_error}, {"z", z}};
                write_file(va_out, j.dump(2) + "\n");
            }
            return agree ? kExitOk : kExitInfeasible;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const RegistryParseError& e) {
        err << "registry error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const RegistryValidationError& e) {
        err << "registry error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SweepIoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace hopfid::cli
