#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "designrisk/design.hpp"
#include "designrisk/estimator.hpp"
#include "designrisk/model.hpp"
#include "designrisk/mse.hpp"
#include "designrisk/population.hpp"
#include "designrisk/rng.hpp"

namespace designrisk {

// sigma^2 = (S_ff / mean(g^2)) (1/R^2 - 1)
double sigma_from_correlation(const PopulationMoments& m, double R_fy);

// F0 = (S_1beta^2 / S_11) (1/R_xy^2 - 1/R_1beta^2) / mean(x^{2 beta2}); sigma^2 ~ beta11^2 F0.
double f0_factor(const PopulationMoments& m, double R_xy);

// Bivariate normal over (beta12, beta2). sd = 0 in a coordinate is a point mass there.
struct NormalPrior {
    std::array<double, 2> mean{1.0, 1.0};
    std::array<double, 2> sd{0.0, 0.0};
    double corr = 0.0;
};
// Independent uniforms; only integrable by Monte Carlo.
struct UniformPrior {
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
};

struct PriorComponent {
    double weight = 1.0;
    std::variant<NormalPrior, UniformPrior> dist;
};

// Mixture prior h(beta12, beta2), optionally with a prior on sigma^2. The
// loss is linear in sigma^2, so only its mean enters the risk (sigma^2
// assumed independent of beta).
class Prior {
public:
    static Prior normal(std::array<double, 2> mean, std::array<double, 2> sd, double corr = 0.0);
    static Prior point_mass(double beta12, double beta2);
    static Prior uniform(std::array<double, 2> lo, std::array<double, 2> hi);
    static Prior mixture(const std::vector<std::pair<double, Prior>>& parts);

    const std::vector<PriorComponent>& components() const { return components_; }
    bool all_normal() const;
    std::array<double, 2> mean() const;
    std::array<double, 2> draw(Rng& rng) const;

    std::optional<double> sigma2_mean;
    std::optional<double> sigma2_sd;

private:
    std::vector<PriorComponent> components_;
};

struct SigmaTreatment {
    enum class Mode { PriorOnSigma, FixedGuess, FromCorrelation, F0 };
    Mode mode = Mode::FromCorrelation;
    double value = 0.0;  // sigma^2 for FixedGuess; R_fy or R_xy for the correlation modes

    static SigmaTreatment fixed_guess(double s2) { return {Mode::FixedGuess, s2}; }
    static SigmaTreatment from_correlation(double r) { return {Mode::FromCorrelation, r}; }
    static SigmaTreatment f0(double r) { return {Mode::F0, r}; }
    static SigmaTreatment prior_on_sigma() { return {Mode::PriorOnSigma, 0.0}; }
};
std::string to_string(SigmaTreatment::Mode mode);

enum class EstimatorKind { Difference, Greg };
std::string to_string(EstimatorKind kind);

struct WorkingModel {
    TrendSpec trend;
    SpreadSpec spread;
};

struct Integration {
    enum class Method { Auto, Quadrature, MonteCarlo };
    Method method = Method::Auto;  // Auto: quadrature for normal priors
    std::size_t nodes = 16;        // per dimension
    std::size_t draws = 100000;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

struct RiskSettings {
    EstimatorKind estimator = EstimatorKind::Greg;
    SigmaTreatment sigma = SigmaTreatment::from_correlation(0.75);
    Integration integration;
    WeightSpec::Family weights = WeightSpec::Family::Unit;
    // F0 mode: nodes where |R_xy| > |R_1beta| contribute F0 = 0 instead of failing.
    bool clamp_f0 = true;
};

// Default sigma treatment: F0 for GREG on a power_intercept trend.
SigmaTreatment::Mode default_sigma_mode(EstimatorKind kind, const TrendSpec& working);

struct RiskError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LossValue {
    MseBreakdown mse;
    bool clamped = false;
};

// The integrand: expected design MSE when the truth is the working trend with
// exponent beta12 and spread exponent beta2.
LossValue loss(const DesignOperator& design, const Population& pop, const WorkingModel& working,
               double beta12, double beta2, const RiskSettings& settings, const Prior& prior);

struct RiskValue {
    double value = 0.0;
    MseUnits units = MseUnits::Absolute;
    std::string method;
    std::size_t nodes = 0;
    std::size_t clamped_nodes = 0;
};

RiskValue risk(const DesignOperator& design, const Population& pop, const WorkingModel& working,
               const Prior& prior, const RiskSettings& settings);

struct RiskEntry {
    DesignSpec spec;
    RiskValue risk;
    MseBreakdown at_prior_mean;
};

struct RiskReport {
    std::vector<RiskEntry> entries;      // input order
    std::vector<std::size_t> ranking;    // entry indices, ascending risk, ties by input position
    const RiskEntry& winner() const { return entries.at(ranking.front()); }
};

RiskReport compare_designs(const std::vector<DesignSpec>& designs, const Population& pop,
                           std::size_t n, const WorkingModel& working, const Prior& prior,
                           const RiskSettings& settings);

}  // namespace designrisk
