#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "designrisk/config.hpp"

using namespace designrisk;

TEST(Config, TrendRoundTrip) {
    const auto t = trend_from_json(json::parse(R"({"family":"power_intercept","params":[0,1,1.9],"fixed":[true,false,true]})"));
    EXPECT_EQ(t.family(), TrendFamily::PowerIntercept);
    EXPECT_EQ(t.exponent(), 1.9);
    EXPECT_EQ(t.free_count(), 1u);
    EXPECT_EQ(trend_from_json(to_json(t)).params(), t.params());
}

TEST(Config, TrendErrors) {
    EXPECT_THROW(trend_from_json(json::parse(R"({"family":"cubic","params":[1,2,3]})")), ConfigError);
    EXPECT_THROW(trend_from_json(json::parse(R"({"family":"power_intercept","params":[1,2]})")), ConfigError);
    EXPECT_THROW(trend_from_json(json::parse(R"({"params":[1,2,3]})")), ConfigError);
    EXPECT_THROW(trend_from_json(json::parse(R"({"family":"power_intercept","params":[1,"a",3]})")), ConfigError);
}

TEST(Config, Spread) {
    EXPECT_EQ(spread_from_json(json(0.75)).exponent, 0.75);
    EXPECT_EQ(spread_from_json(json::parse(R"({"exponent":2})")).exponent, 2.0);
    EXPECT_THROW(spread_from_json(json::parse(R"({"power":2})")), ConfigError);
}

TEST(Config, Designs) {
    const auto s = design_from_json(json::parse(R"({"kind":"stsi","H":6,"spread_exponent":2,"bins":50})"));
    EXPECT_EQ(s.kind, DesignSpec::Kind::Stsi);
    EXPECT_EQ(s.strata, 6u);
    EXPECT_EQ(s.bins, 50u);
    EXPECT_TRUE(std::isnan(design_from_json(json::parse(R"({"kind":"pps"})")).spread_exponent));
    EXPECT_EQ(design_from_json(json::parse(R"({"kind":"srs"})")).kind, DesignSpec::Kind::Srs);
    EXPECT_THROW(design_from_json(json::parse(R"({"kind":"cluster"})")), ConfigError);
    EXPECT_THROW(design_from_json(json::parse(R"({"kind":"stsi","H":0})")), ConfigError);
    EXPECT_THROW(design_from_json(json::parse(R"({"kind":"stsi","H":-2})")), ConfigError);
}

TEST(Config, Priors) {
    const auto n = prior_from_json(json::parse(R"({"mean":[1,1],"sd":[0.3,0.3],"corr":0.2})"));
    EXPECT_TRUE(n.all_normal());
    EXPECT_EQ(n.mean()[0], 1.0);
    const auto pm = prior_from_json(json::parse(R"({"point":[1.9,2.0]})"));
    EXPECT_EQ(pm.mean()[1], 2.0);
    const auto u = prior_from_json(json::parse(R"({"uniform":{"lo":[0,0],"hi":[2,1]}})"));
    EXPECT_FALSE(u.all_normal());
    EXPECT_NEAR(u.mean()[0], 1.0, 1e-12);
    const auto m = prior_from_json(json::parse(
        R"({"mixture":[{"weight":1,"prior":{"point":[1,1]}},{"weight":3,"prior":{"point":[2,1]}}],"sigma2":{"mean":4}})"));
    EXPECT_NEAR(m.mean()[0], 1.75, 1e-12);
    EXPECT_EQ(*m.sigma2_mean, 4.0);
    EXPECT_THROW(prior_from_json(json::parse(R"({"mean":[1,1],"sd":[-1,0.3]})")), ConfigError);
    EXPECT_THROW(prior_from_json(json::parse(R"({"mean":[1],"sd":[1,0.3]})")), ConfigError);
    EXPECT_THROW(prior_from_json(json::parse(R"({"mean":[1,1],"sd":[1,1],"corr":2})")), ConfigError);
    EXPECT_THROW(prior_from_json(json::parse(R"({"mixture":[]})")), ConfigError);
    EXPECT_THROW(prior_from_json(json::parse(R"({"uniform":{"lo":[2,0],"hi":[1,1]}})")), ConfigError);
}

TEST(Config, Sigma) {
    EXPECT_EQ(sigma_from_json(json::parse(R"({"mode":"f0","R_xy":0.75})")).mode, SigmaTreatment::Mode::F0);
    EXPECT_EQ(sigma_from_json(json::parse(R"({"mode":"fixed_guess","sigma2":3})")).value, 3.0);
    EXPECT_EQ(sigma_from_json(json::parse(R"({"mode":"prior_on_sigma"})")).mode, SigmaTreatment::Mode::PriorOnSigma);
    EXPECT_THROW(sigma_from_json(json::parse(R"({"mode":"from_correlation","R_fy":1.0})")), ConfigError);
    EXPECT_THROW(sigma_from_json(json::parse(R"({"mode":"f0","R_xy":1.5})")), ConfigError);
    EXPECT_THROW(sigma_from_json(json::parse(R"({"mode":"guess"})")), ConfigError);
}

TEST(Config, SettingsDefaultSigmaMode) {
    const WorkingModel w{TrendSpec::power_intercept(0, 1, 1), SpreadSpec{1}};
    const auto s = risk_settings_from_json(json::parse(R"({"sigma":{"R_xy":0.75}})"), &w);
    EXPECT_EQ(s.sigma.mode, SigmaTreatment::Mode::F0);
    EXPECT_EQ(s.sigma.value, 0.75);
    const auto d = risk_settings_from_json(
        json::parse(R"({"estimator":"difference","sigma":{"R_fy":0.8},"integration":{"method":"monte_carlo","draws":500,"seed":3}})"),
        &w);
    EXPECT_EQ(d.sigma.mode, SigmaTreatment::Mode::FromCorrelation);
    EXPECT_EQ(d.integration.method, Integration::Method::MonteCarlo);
    EXPECT_EQ(d.integration.draws, 500u);
    EXPECT_EQ(d.integration.seed, 3u);
    EXPECT_THROW(risk_settings_from_json(json::parse(R"({"estimator":"ht"})")), ConfigError);
    EXPECT_THROW(risk_settings_from_json(json::parse(R"({"a":"triangular"})")), ConfigError);
    EXPECT_THROW(risk_settings_from_json(json::parse(R"({"integration":{"nodes":0}})")), ConfigError);
}

TEST(Config, Simulation) {
    const auto c = simulation_from_json(json::parse(R"({"N":1000,"n":100,"B":10,"grid":"all"})"));
    EXPECT_EQ(c.cells.size(), 18u);
    const auto d = simulation_from_json(json::parse(R"({"grid":[[1,0.5,0.75]],"a":"unit","sigma2":2})"));
    EXPECT_EQ(d.cells.size(), 1u);
    EXPECT_EQ(d.greg_weights, WeightSpec::Family::Unit);
    EXPECT_EQ(*d.sigma2, 2.0);
    EXPECT_THROW(simulation_from_json(json::parse(R"({"grid":"sideways"})")), ConfigError);
    EXPECT_THROW(simulation_from_json(json::parse(R"({"grid":[[1,0.5]]})")), ConfigError);
    EXPECT_THROW(simulation_from_json(json::parse(R"({"N":10,"n":20,"grid":"correct"})")), ConfigError);
    EXPECT_THROW(simulation_from_json(json::parse(R"({"N":1.5,"grid":"correct"})")), ConfigError);
}

TEST(Config, Populations) {
    const auto g = population_from_json(json::parse(R"({"gamma":{"N":100,"shape":2,"scale":3,"shift":1,"seed":4}})"));
    EXPECT_EQ(g.size(), 100u);
    const auto again = population_from_json(json::parse(R"({"gamma":{"N":100,"shape":2,"scale":3,"shift":1}})"), 4u);
    EXPECT_TRUE(std::equal(g.x().begin(), g.x().end(), again.x().begin()));
    EXPECT_THROW(population_from_json(json::parse(R"({"gamma":{"N":100,"shape":2,"scale":3}})")), ConfigError);
    EXPECT_THROW(population_from_json(json::parse(R"({"gamma":{"N":100,"shape":-2,"scale":3,"seed":1}})")), ConfigError);
    EXPECT_THROW(population_from_json(json::parse(R"({"weibull":{}})")), ConfigError);
    EXPECT_THROW(population_from_json(json::parse(R"({"csv":"/nonexistent/pop.csv"})")), std::runtime_error);
}

TEST(Config, CaseStudy) {
    const auto in = case_study_from_json(json::parse(R"({
        "n": 1000,
        "designs": [{"kind":"pps"},{"kind":"stsi","H":6}],
        "scenarios": [{"name":"c1","working":{"trend":{"family":"power_intercept","params":[0,1,1]},"spread":1},
                       "prior":{"mean":[1,1],"sd":[0.33,0.33]},"sigma":{"R_xy":0.75}}],
        "truth": "prior_mean"})"));
    EXPECT_EQ(in.n, 1000u);
    EXPECT_EQ(in.designs.size(), 2u);
    EXPECT_EQ(in.scenarios[0].sigma.mode, SigmaTreatment::Mode::F0);
    ASSERT_TRUE(in.truth.has_value());
    EXPECT_TRUE(in.truth->at_prior_mean);
    EXPECT_THROW(case_study_from_json(json::parse(R"({"n":10,"designs":[],"scenarios":[]})")), ConfigError);
    EXPECT_THROW(case_study_from_json(json::parse(R"({"designs":[]})")), ConfigError);
}

TEST(Config, LoadJsonErrors) {
    EXPECT_THROW(load_json("/nonexistent/file.json"), std::runtime_error);
    const auto p = std::filesystem::temp_directory_path() / "designrisk_bad.json";
    { std::ofstream(p) << "{ not json"; }
    EXPECT_THROW(load_json(p), ConfigError);
    std::filesystem::remove(p);
}

TEST(Config, ReportJsonShape) {
    const auto pop = synthesize_x(300, 2, 10, 1, 3);
    const WorkingModel w{TrendSpec::power_intercept(0, 1, 1), SpreadSpec{1}};
    RiskSettings s;
    s.sigma = SigmaTreatment::f0(0.8);
    const auto r = compare_designs({DesignSpec::pps(1), DesignSpec::stsi(3, 1)}, pop, 30, w,
                                   Prior::normal({1, 1}, {0.2, 0.2}), s);
    const auto j = to_json(r);
    ASSERT_EQ(j["designs"].size(), 2u);
    EXPECT_EQ(j["designs"][0]["units"], "beta11_sq");
    EXPECT_EQ(j["designs"][0]["method"], "gauss_hermite");
    EXPECT_EQ(j["designs"][1]["label"], "stsi(H=3;1)");
    EXPECT_EQ(j["ranking"].size(), 2u);
}
