#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "designrisk/design.hpp"
#include "designrisk/estimator.hpp"
#include "designrisk/population.hpp"
#include "designrisk/risk.hpp"

namespace designrisk {

struct StudyCell {
    double beta12 = 1.0;
    double beta2 = 0.5;
    double delta2 = 0.5;
};

// The grids of the published efficiency table.
std::vector<StudyCell> correct_model_cells();
std::vector<StudyCell> misspecified_cells();

struct SimulationConfig {
    std::size_t N = 5000;
    std::size_t n = 500;
    std::size_t B = 5000;
    std::uint64_t seed = 1;
    std::vector<StudyCell> cells;
    double rho = 0.95;
    double beta10 = 1000.0;
    double beta11 = 1.0;
    double x_shape = 0.04;
    double x_scale = 1200.0;
    double x_shift = 1.0;
    std::size_t strata = 5;
    std::size_t bins = 100;
    WeightSpec::Family greg_weights = WeightSpec::Family::ProportionalToSpreadSq;
    std::optional<double> sigma2;  // skips the per-cell solve when set
    std::size_t threads = 1;

    void validate() const;
};

struct EfficiencyRow {
    StudyCell cell;
    double sigma2 = 0.0;
    double base_mse = 0.0;     // mean pps-dif MSE over used replicates
    double eff_pps_dif = 0.0;  // baseline against itself
    double eff_pps_greg = 0.0;
    double eff_stsi_dif = 0.0;
    double eff_stsi_greg = 0.0;
    double se_pps_greg = 0.0;
    double se_stsi_dif = 0.0;
    double se_stsi_greg = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0;
};

struct EfficiencyTable {
    std::vector<EfficiencyRow> rows;
    std::string csv() const;
};

// Per replicate r the x-values come from stream (seed, r) and are shared by
// every cell; y for cell c comes from stream (seed, r, c + 1). sigma^2 is
// fixed per cell from a pilot population drawn from stream (seed, 2^64 - 1).
EfficiencyTable run_study(const SimulationConfig& config);

// Shifted-gamma population whose x mean, sd and skewness match the inputs.
Population analog_population(std::size_t N, double mean, double sd, double skewness,
                             std::uint64_t seed);

struct Scenario {
    std::string name;
    WorkingModel working;
    Prior prior;
    SigmaTreatment sigma;
};

struct Truth {
    bool at_prior_mean = true;
    double beta12 = 1.0;
    double beta2 = 1.0;
    std::optional<double> sigma2;  // absent: the scenario's sigma treatment
};

struct CaseStudyInput {
    std::vector<Scenario> scenarios;
    std::vector<DesignSpec> designs;  // NaN spread exponent: use the scenario's working spread
    std::size_t n = 1000;
    RiskSettings settings;            // sigma is taken from each scenario
    std::optional<Truth> truth;
};

struct ScenarioResult {
    std::string name;
    RiskReport report;
    bool has_truth = false;
    double truth_beta12 = 0.0;
    double truth_beta2 = 0.0;
    std::vector<MseBreakdown> realized;          // per design, input order
    std::vector<std::size_t> realized_ranking;
    std::string verdict;                          // "match" / "contradicts" / ""
};

std::vector<ScenarioResult> case_study(const Population& pop, const CaseStudyInput& input);

}  // namespace designrisk
