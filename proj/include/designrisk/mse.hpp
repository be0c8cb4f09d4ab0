#pragma once

#include <span>
#include <string>
#include <vector>

#include "designrisk/design.hpp"
#include "designrisk/model.hpp"
#include "designrisk/population.hpp"

namespace designrisk {

enum class MseUnits { Absolute, Beta11Squared };
std::string to_string(MseUnits units);

// trend_term: design MSE of the HT sum of the trend discrepancy.
// spread_term: model contribution of the noise, sigma^2 sum (1/pi - 1) g^2.
struct MseBreakdown {
    double trend_term = 0.0;
    double spread_term = 0.0;
    double total = 0.0;
    MseUnits units = MseUnits::Absolute;
};

// sigma^2 * sum_U (1/pi_k - 1) g_k^2
double godambe_joshi_bound(std::span<const double> pi, std::span<const double> g, double sigma2);
// sigma^2 * ((sum g)^2 / n - sum g^2): the bound attained by pi proportional to g.
double optimal_anticipated_mse(std::span<const double> g, std::size_t n, double sigma2);

// Anticipated MSE of the difference estimator with anchors z under the
// working model (trend f, spread g, variance sigma0^2).
MseBreakdown anticipated_mse(const DesignOperator& design, const Population& pop,
                             const TrendSpec& trend, const SpreadSpec& spread, double sigma0_sq,
                             std::span<const double> z);

// Model-expected design MSE of the difference estimator calibrated on the
// working trend when the true model is (true_trend, true_spread, sigma2).
MseBreakdown expected_mse_misspecified(const DesignOperator& design, const Population& pop,
                                       const TrendSpec& working_trend, const TrendSpec& true_trend,
                                       const SpreadSpec& true_spread, double sigma2);

// Same quantity written for pi proportional to the working spread: the
// discrepancy is divided by g_delta and rescaled by (sum g_delta / n)^2.
// Only meaningful when no unit is capped.
MseBreakdown expected_mse_pps_form(const DesignOperator& design, const Population& pop,
                                   const TrendSpec& working_trend, const SpreadSpec& working_spread,
                                   const TrendSpec& true_trend, const SpreadSpec& true_spread,
                                   double sigma2);

// v_k = (x^b - mean x^b) - (x^d - mean x^d) S_bd / S_dd with divisor N-1 covariances.
std::vector<double> v_residuals(const Population& pop, double delta12, double beta12);

// How sigma^2 enters the GREG limit MSE.
struct SigmaSpec {
    enum class Mode { Absolute, F0 };
    Mode mode = Mode::Absolute;
    double sigma2 = 0.0;  // Absolute
    double R_xy = 0.0;    // F0: elicited correlation between x and y
    // F0 mode: when |R_xy| > |R_1beta| report F0 = 0 instead of failing.
    bool clamp_inadmissible = false;

    static SigmaSpec absolute(double s2) { return {Mode::Absolute, s2, 0.0, false}; }
    static SigmaSpec f0(double r, bool clamp = false) { return {Mode::F0, 0.0, r, clamp}; }
};

struct GregMseDetail {
    MseBreakdown mse;
    double f0 = 0.0;
    bool f0_clamped = false;
};

// Limit design MSE of the GREG estimator with the census fit replaced by the
// projection of the true trend onto the working regressors. PowerIntercept
// with unit weights and both coefficients free uses the v_k form directly.
// F0 mode reports the result in units of beta11^2.
GregMseDetail greg_expected_mse_detail(const DesignOperator& design, const Population& pop,
                                       const TrendSpec& working_trend, const TrendSpec& true_trend,
                                       const SpreadSpec& true_spread, std::span<const double> a,
                                       const SigmaSpec& sigma);
MseBreakdown greg_expected_mse(const DesignOperator& design, const Population& pop,
                               const TrendSpec& working_trend, const TrendSpec& true_trend,
                               const SpreadSpec& true_spread, std::span<const double> a,
                               const SigmaSpec& sigma);

// Breakdown CSV: design,trend_term,spread_term,total,units
std::string breakdown_csv(const std::vector<std::pair<std::string, MseBreakdown>>& rows);

}  // namespace designrisk
