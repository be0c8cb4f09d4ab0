#pragma once

#include <span>
#include <string>
#include <vector>

namespace designrisk {

enum class TrendFamily {
    PowerSum,        // f(x) = sum_j c_j * x_j^{e_j}
    PowerIntercept,  // f(x) = c_0 + c_1 * x^{e}
};

// Parametric trend that is linear in its coefficients. Exponents are always
// fixed; coefficients may be fixed or free (estimable by the GREG fit).
//
// Parameter layout:
//   PowerIntercept: {c0, c1, e}
//   PowerSum:       {c_1..c_J, e_1..e_J}
class TrendSpec {
public:
    TrendSpec() = default;
    TrendSpec(TrendFamily family, std::vector<double> params, std::vector<bool> fixed);

    static TrendSpec power_intercept(double intercept, double slope, double exponent);
    static TrendSpec power_sum(std::vector<double> coefficients, std::vector<double> exponents);

    TrendFamily family() const { return family_; }
    const std::vector<double>& params() const { return params_; }
    const std::vector<bool>& fixed() const { return fixed_; }

    // Number of auxiliary variables the trend reads.
    std::size_t dims() const;
    std::size_t coefficient_count() const;
    std::size_t free_count() const;

    // Indices (into the coefficient list) of free coefficients, in order.
    std::vector<std::size_t> free_indices() const;

    double coefficient(std::size_t i) const { return params_[i]; }
    // Exponent of auxiliary j (PowerIntercept has a single exponent).
    double exponent(std::size_t j = 0) const;

    // Basis values phi_i(x) such that f(x) = sum_i c_i phi_i(x).
    void basis(std::span<const double> x, std::span<double> out) const;

    // Copy with the free coefficients replaced (in free_indices() order).
    TrendSpec with_free_coefficients(std::span<const double> values) const;
    // Copy with every exponent replaced.
    TrendSpec with_exponents(std::span<const double> exponents) const;
    TrendSpec with_exponent(double e) const;

private:
    void validate() const;

    TrendFamily family_ = TrendFamily::PowerIntercept;
    std::vector<double> params_{0.0, 1.0, 1.0};
    std::vector<bool> fixed_{false, false, true};
};

struct SpreadSpec {
    double exponent = 0.0;  // g(x) = x^exponent
};

double eval_trend(const TrendSpec& spec, std::span<const double> x);
double eval_trend(const TrendSpec& spec, double x);
double eval_spread(const SpreadSpec& spec, double x);

std::string to_string(TrendFamily family);
TrendFamily trend_family_from_string(const std::string& name);

}  // namespace designrisk
