#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "designrisk/design.hpp"
#include "designrisk/model.hpp"
#include "designrisk/montecarlo.hpp"
#include "designrisk/population.hpp"
#include "designrisk/risk.hpp"

namespace designrisk {

using json = nlohmann::json;

// Raised for any schema violation; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_json(const std::filesystem::path& path);

TrendSpec trend_from_json(const json& j);
json to_json(const TrendSpec& t);
SpreadSpec spread_from_json(const json& j);
WorkingModel working_from_json(const json& j);
DesignSpec design_from_json(const json& j);
json to_json(const DesignSpec& d);
Prior prior_from_json(const json& j);
SigmaTreatment sigma_from_json(const json& j);
WeightSpec::Family weights_from_json(const json& j);
// `working` picks the default sigma mode when the block leaves it out.
RiskSettings risk_settings_from_json(const json& j, const WorkingModel* working = nullptr);
SimulationConfig simulation_from_json(const json& j);

// {"csv": path} | {"gamma": {N, shape, scale, shift, seed}} |
// {"analog": {N, mean, sd, skewness, seed}}. `seed` overrides the block's seed.
Population population_from_json(const json& j, const std::optional<std::uint64_t>& seed = {});

CaseStudyInput case_study_from_json(const json& j);

json to_json(const MseBreakdown& b);
json to_json(const RiskValue& r);
json to_json(const RiskReport& r);
json to_json(const std::vector<ScenarioResult>& results);

}  // namespace designrisk
