/**
 * @file rational_map.hpp
 * @brief Ratio of two real polynomials in a single quality variable.
 */
#pragma once

#include <algorithm>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace hopfid {

enum class QualityVariable { werner, fidelity };

[[nodiscard]] constexpr std::string_view to_string(QualityVariable v) noexcept {
    return v == QualityVariable::werner ? "werner" : "fidelity";
}

/// Horner evaluation; coefficients are in ascending powers.
[[nodiscard]] inline double eval_polynomial(std::span<const double> coeffs, double x) noexcept {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

/** @brief p(x) / q(x) with both polynomials in ascending-power form. */
struct RationalMap {
    QualityVariable variable = QualityVariable::werner;
    std::vector<double> numerator{0.0};
    std::vector<double> denominator{1.0};

    [[nodiscard]] double numerator_at(double x) const noexcept { return eval_polynomial(numerator, x); }
    [[nodiscard]] double denominator_at(double x) const noexcept { return eval_polynomial(denominator, x); }
    [[nodiscard]] double operator()(double x) const noexcept { return numerator_at(x) / denominator_at(x); }

    bool operator==(const RationalMap&) const = default;
};

namespace poly {

[[nodiscard]] inline std::vector<double> add(std::span<const double> a, std::span<const double> b,
                                             double scale_a = 1.0, double scale_b = 1.0) {
    std::vector<double> out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += scale_a * a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += scale_b * b[i];
    return out;
}

/// Coefficients of p(offset + slope * x).
[[nodiscard]] inline std::vector<double> compose_affine(std::span<const double> p, double offset, double slope) {
    std::vector<double> out(p.size(), 0.0);
    std::vector<double> power{1.0};  // (offset + slope x)^i
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < power.size(); ++j) out[j] += p[i] * power[j];
        std::vector<double> next(power.size() + 1, 0.0);
        for (std::size_t j = 0; j < power.size(); ++j) {
            next[j] += offset * power[j];
            next[j + 1] += slope * power[j];
        }
        power = std::move(next);
    }
    return out;
}

}  // namespace poly

/**
 * @brief Rewrite a fidelity-variable output map F' = N(F)/D(F) as a Werner map.
 *
 * Substitutes F = (1 + 3w)/4 and converts the output with w' = (4F' - 1)/3,
 * giving w' = (4N - D) / (3D) evaluated at F(w).
 */
[[nodiscard]] inline RationalMap werner_output_map_from_fidelity(const RationalMap& m) {
    if (m.variable == QualityVariable::werner) return m;
    auto num = poly::compose_affine(m.numerator, 0.25, 0.75);
    auto den = poly::compose_affine(m.denominator, 0.25, 0.75);
    RationalMap out;
    out.variable = QualityVariable::werner;
    out.numerator = poly::add(num, den, 4.0, -1.0);
    out.denominator = poly::add(den, {}, 3.0);
    return out;
}

/// Rewrite a fidelity-variable scalar map (e.g. a success probability) over w.
[[nodiscard]] inline RationalMap werner_scalar_map_from_fidelity(const RationalMap& m) {
    if (m.variable == QualityVariable::werner) return m;
    RationalMap out;
    out.variable = QualityVariable::werner;
    out.numerator = poly::compose_affine(m.numerator, 0.25, 0.75);
    out.denominator = poly::compose_affine(m.denominator, 0.25, 0.75);
    return out;
}

}  // namespace hopfid
