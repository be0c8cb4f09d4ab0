#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "designrisk/design.hpp"
#include "designrisk/model.hpp"
#include "designrisk/population.hpp"

namespace designrisk {

// GREG weight families a_k.
struct WeightSpec {
    enum class Family { Unit, ProportionalToSpreadSq };
    Family family = Family::Unit;
    double spread_exponent = 0.0;  // used by ProportionalToSpreadSq: a_k = x_k^{2e}

    std::string name() const;
};

std::vector<double> greg_weights(const Population& pop, const WeightSpec& spec);

struct HtEstimator {};
struct DifferenceEstimator {
    std::vector<double> z;
};
struct GregEstimator {
    TrendSpec trend;       // working trend; free coefficients are fitted
    std::vector<double> a; // a_k > 0 for every unit
};
using EstimatorSpec = std::variant<HtEstimator, DifferenceEstimator, GregEstimator>;

enum class FitContext { Sample, Census };

struct FitResult {
    std::vector<double> coefficients;  // free coefficients in TrendSpec::free_indices() order
    FitContext context = FitContext::Census;
};

double ht_estimate(const Sample& sample, std::span<const double> y);
double difference_estimate(const Sample& sample, std::span<const double> z,
                           std::span<const double> y);

// Weighted least squares over the sample with weights 1/(a_k pi_k).
FitResult greg_fit_sample(const Population& pop, const Sample& sample, const GregEstimator& spec,
                          std::span<const double> y);
// Weighted least squares over U with weights 1/a_k.
FitResult greg_fit_census(const Population& pop, const GregEstimator& spec,
                          std::span<const double> y);

double greg_estimate(const Population& pop, const Sample& sample, const GregEstimator& spec,
                     std::span<const double> y);

double estimate(const EstimatorSpec& spec, const Population& pop, const Sample& sample,
                std::span<const double> y);

// Census projection of the true trend values onto the working regressors:
// the limit of the census GREG coefficients when y follows `truth` exactly.
FitResult limit_coefficients(const Population& pop, const TrendSpec& working,
                             const TrendSpec& truth, std::span<const double> a);

// Working trend with its free coefficients replaced by a fit.
TrendSpec fitted_trend(const TrendSpec& working, const FitResult& fit);

// y_k - f(x_k | census fit), the residuals entering the GREG design MSE.
std::vector<double> census_residuals(const Population& pop, const GregEstimator& spec,
                                     std::span<const double> y);

}  // namespace designrisk
