/**
 * @file werner.hpp
 * @brief Werner-state quality algebra: parameters, fidelity conversion,
 * swap degradation along a path and the entanglement boundary.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <stdexcept>
#include <string>

namespace hopfid {

/// Raised when a quality value or probability is outside its valid range.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr double kSeparableWerner = 1.0 / 3.0;

/** @brief Werner parameter w in [0, 1] (weight on the Bell component). */
class WernerParameter {
public:
    constexpr WernerParameter() = default;

    explicit WernerParameter(double w) : value_(w) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw DomainError("Werner parameter " + std::to_string(w) + " outside [0, 1]");
        }
    }

    [[nodiscard]] constexpr double value() const noexcept { return value_; }
    [[nodiscard]] constexpr bool entangled() const noexcept { return value_ > kSeparableWerner; }

    constexpr auto operator<=>(const WernerParameter&) const = default;

private:
    double value_ = 0.0;
};

/** @brief Bell-state fidelity F in [1/4, 1]. */
class Fidelity {
public:
    constexpr Fidelity() : value_(0.25) {}

    explicit Fidelity(double f) : value_(f) {
        if (!(f >= 0.25 && f <= 1.0)) {
            throw DomainError("fidelity " + std::to_string(f) + " outside [1/4, 1]");
        }
    }

    [[nodiscard]] constexpr double value() const noexcept { return value_; }

    constexpr auto operator<=>(const Fidelity&) const = default;

private:
    double value_;
};

/** @brief Number of elementary links on an end-to-end path (at least one). */
class PathSpec {
public:
    explicit PathSpec(int links) : links_(links) {
        if (links < 1) {
            throw DomainError("path length must be at least 1, got " + std::to_string(links));
        }
    }

    [[nodiscard]] constexpr int links() const noexcept { return links_; }

private:
    int links_;
};

[[nodiscard]] inline Fidelity fidelity_from_werner(WernerParameter w) {
    return Fidelity((1.0 + 3.0 * w.value()) / 4.0);
}

[[nodiscard]] inline WernerParameter werner_from_fidelity(Fidelity f) {
    // (4F - 1)/3 can land a rounding step above 1 for F == 1.
    const double w = (4.0 * f.value() - 1.0) / 3.0;
    return WernerParameter(std::clamp(w, 0.0, 1.0));
}

/// Quality of a raw end-to-end pair after ideal swapping over the path.
[[nodiscard]] inline WernerParameter raw_werner(WernerParameter w0, PathSpec path) {
    return WernerParameter(std::pow(w0.value(), path.links()));
}

/// Smallest link quality whose raw end-to-end state is still entangled: 3^(-1/links).
[[nodiscard]] inline WernerParameter boundary_w0(PathSpec path) {
    return WernerParameter(std::pow(3.0, -1.0 / path.links()));
}

/// True iff w0 > 3^(-1/links), the necessary condition for any recovery.
/// Compared on the link side so that w0 == boundary_w0(path) is never above.
[[nodiscard]] inline bool above_boundary(WernerParameter w0, PathSpec path) {
    return w0 > boundary_w0(path) && raw_werner(w0, path).entangled();
}

}  // namespace hopfid
