#include "designrisk/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace designrisk {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) bad(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) bad(where, std::string("missing key '") + key + "'");
    return *it;
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) bad(where, "expected a finite number");
    return v;
}

std::size_t as_count(const json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<long long>() < 0) bad(where, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

std::uint64_t as_u64(const json& j, const std::string& where) {
    if (!j.is_number_integer()) bad(where, "expected an integer seed");
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    const auto v = j.get<long long>();
    if (v < 0) bad(where, "seed must be nonnegative");
    return static_cast<std::uint64_t>(v);
}

std::string as_string(const json& j, const std::string& where) {
    if (!j.is_string()) bad(where, "expected a string");
    return j.get<std::string>();
}

double number_at(const json& j, const char* key, const std::string& where) {
    return as_number(need(j, key, where), where + "." + key);
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
    return j.contains(key) ? as_number(j.at(key), where + "." + key) : fallback;
}

std::size_t count_or(const json& j, const char* key, std::size_t fallback, const std::string& where) {
    return j.contains(key) ? as_count(j.at(key), where + "." + key) : fallback;
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::array<double, 2> pair_of(const json& j, const std::string& where) {
    const auto v = numbers(j, where);
    if (v.size() != 2) bad(where, "expected two values (beta12, beta2)");
    return {v[0], v[1]};
}

// Re-tag library validation errors as schema errors.
template <class F>
auto checked(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        bad(where, e.what());
    } catch (const std::domain_error& e) {
        bad(where, e.what());
    }
}

}  // namespace

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
}

TrendSpec trend_from_json(const json& j) {
    const std::string where = "trend";
    const auto family = as_string(need(j, "family", where), where + ".family");
    const auto params = numbers(need(j, "params", where), where + ".params");
    std::vector<bool> fixed;
    if (j.contains("fixed")) {
        const auto& f = j.at("fixed");
        if (!f.is_array()) bad(where + ".fixed", "expected an array of booleans");
        for (const auto& b : f) {
            if (!b.is_boolean()) bad(where + ".fixed", "expected an array of booleans");
            fixed.push_back(b.get<bool>());
        }
    }
    return checked(where, [&] {
        return TrendSpec(trend_family_from_string(family), params, fixed);
    });
}

json to_json(const TrendSpec& t) {
    return {{"family", to_string(t.family())}, {"params", t.params()}, {"fixed", t.fixed()}};
}

SpreadSpec spread_from_json(const json& j) {
    if (j.is_number()) return SpreadSpec{as_number(j, "spread")};
    return SpreadSpec{number_at(j, "exponent", "spread")};
}

WorkingModel working_from_json(const json& j) {
    return {trend_from_json(need(j, "trend", "working")), spread_from_json(need(j, "spread", "working"))};
}

DesignSpec design_from_json(const json& j) {
    const std::string where = "design";
    const auto kind = as_string(need(j, "kind", where), where + ".kind");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double e = number_or(j, "spread_exponent", nan, where);
    if (kind == "pps") return DesignSpec::pps(e);
    if (kind == "stsi") {
        const auto H = as_count(need(j, "H", where), where + ".H");
        if (H < 1) bad(where + ".H", "must be >= 1");
        return DesignSpec::stsi(H, e, count_or(j, "bins", 100, where));
    }
    if (kind == "srs") return DesignSpec::srs();
    bad(where + ".kind", "unknown design kind '" + kind + "'");
}

json to_json(const DesignSpec& d) {
    json j;
    switch (d.kind) {
        case DesignSpec::Kind::Pps:
            j = {{"kind", "pps"}, {"spread_exponent", d.spread_exponent}};
            break;
        case DesignSpec::Kind::Stsi:
            j = {{"kind", "stsi"}, {"H", d.strata}, {"spread_exponent", d.spread_exponent}, {"bins", d.bins}};
            break;
        case DesignSpec::Kind::Srs: j = {{"kind", "srs"}}; break;
    }
    return j;
}

Prior prior_from_json(const json& j) {
    const std::string where = "prior";
    if (!j.is_object()) bad(where, "expected an object");
    Prior p;
    if (j.contains("mixture")) {
        const auto& parts = j.at("mixture");
        if (!parts.is_array() || parts.empty()) bad(where + ".mixture", "expected a nonempty array");
        std::vector<std::pair<double, Prior>> comps;
        for (const auto& c : parts) {
            comps.emplace_back(number_at(c, "weight", where + ".mixture"),
                               prior_from_json(need(c, "prior", where + ".mixture")));
        }
        p = checked(where, [&] { return Prior::mixture(comps); });
    } else if (j.contains("point")) {
        const auto b = pair_of(j.at("point"), where + ".point");
        p = Prior::point_mass(b[0], b[1]);
    } else if (j.contains("uniform")) {
        const auto& u = j.at("uniform");
        const auto lo = pair_of(need(u, "lo", where + ".uniform"), where + ".uniform.lo");
        const auto hi = pair_of(need(u, "hi", where + ".uniform"), where + ".uniform.hi");
        p = checked(where, [&] { return Prior::uniform(lo, hi); });
    } else {
        const auto mean = pair_of(need(j, "mean", where), where + ".mean");
        const auto sd = pair_of(need(j, "sd", where), where + ".sd");
        const double corr = number_or(j, "corr", 0.0, where);
        p = checked(where, [&] { return Prior::normal(mean, sd, corr); });
    }
    if (j.contains("sigma2")) {
        const auto& s = j.at("sigma2");
        p.sigma2_mean = number_at(s, "mean", where + ".sigma2");
        if (*p.sigma2_mean < 0.0) bad(where + ".sigma2.mean", "must be >= 0");
        if (s.contains("sd")) p.sigma2_sd = number_at(s, "sd", where + ".sigma2");
    }
    return p;
}

SigmaTreatment sigma_from_json(const json& j) {
    const std::string where = "sigma";
    const auto mode = as_string(need(j, "mode", where), where + ".mode");
    if (mode == "fixed_guess") {
        const double s2 = number_at(j, "sigma2", where);
        if (s2 < 0.0) bad(where + ".sigma2", "must be >= 0");
        return SigmaTreatment::fixed_guess(s2);
    }
    if (mode == "from_correlation") {
        const double r = number_at(j, "R_fy", where);
        if (!(r > 0.0 && r < 1.0)) bad(where + ".R_fy", "must lie in (0, 1)");
        return SigmaTreatment::from_correlation(r);
    }
    if (mode == "f0") {
        const double r = number_at(j, "R_xy", where);
        if (!(std::abs(r) > 0.0 && std::abs(r) <= 1.0)) bad(where + ".R_xy", "must lie in (0, 1]");
        return SigmaTreatment::f0(r);
    }
    if (mode == "prior_on_sigma") return SigmaTreatment::prior_on_sigma();
    bad(where + ".mode", "unknown sigma mode '" + mode + "'");
}

WeightSpec::Family weights_from_json(const json& j) {
    const auto s = as_string(j, "a");
    if (s == "unit") return WeightSpec::Family::Unit;
    if (s == "proportional_to_spread_sq") return WeightSpec::Family::ProportionalToSpreadSq;
    bad("a", "unknown weight family '" + s + "'");
}

RiskSettings risk_settings_from_json(const json& j, const WorkingModel* working) {
    const std::string where = "settings";
    if (!j.is_object()) bad(where, "expected an object");
    RiskSettings s;
    if (j.contains("estimator")) {
        const auto e = as_string(j.at("estimator"), where + ".estimator");
        if (e == "greg") s.estimator = EstimatorKind::Greg;
        else if (e == "difference") s.estimator = EstimatorKind::Difference;
        else bad(where + ".estimator", "expected 'greg' or 'difference'");
    }
    if (j.contains("a")) s.weights = weights_from_json(j.at("a"));
    if (j.contains("clamp_f0")) {
        if (!j.at("clamp_f0").is_boolean()) bad(where + ".clamp_f0", "expected a boolean");
        s.clamp_f0 = j.at("clamp_f0").get<bool>();
    }
    if (j.contains("sigma")) {
        const auto& sj = j.at("sigma");
        if (sj.contains("mode")) {
            s.sigma = sigma_from_json(sj);
        } else {
            // Mode left to the default for the estimator/trend pair.
            const auto mode = working ? default_sigma_mode(s.estimator, working->trend)
                                      : SigmaTreatment::Mode::FromCorrelation;
            json filled = sj;
            filled["mode"] = to_string(mode);
            s.sigma = sigma_from_json(filled);
        }
    }
    if (j.contains("integration")) {
        const auto& ij = j.at("integration");
        const std::string w = where + ".integration";
        if (!ij.is_object()) bad(w, "expected an object");
        if (ij.contains("method")) {
            const auto m = as_string(ij.at("method"), w + ".method");
            if (m == "auto") s.integration.method = Integration::Method::Auto;
            else if (m == "quadrature") s.integration.method = Integration::Method::Quadrature;
            else if (m == "monte_carlo") s.integration.method = Integration::Method::MonteCarlo;
            else bad(w + ".method", "expected auto, quadrature or monte_carlo");
        }
        s.integration.nodes = count_or(ij, "nodes", s.integration.nodes, w);
        s.integration.draws = count_or(ij, "draws", s.integration.draws, w);
        if (ij.contains("seed")) s.integration.seed = as_u64(ij.at("seed"), w + ".seed");
        if (s.integration.nodes < 1) bad(w + ".nodes", "must be >= 1");
    }
    return s;
}

SimulationConfig simulation_from_json(const json& j) {
    const std::string where = "study";
    if (!j.is_object()) bad(where, "expected an object");
    SimulationConfig c;
    c.N = count_or(j, "N", c.N, where);
    c.n = count_or(j, "n", c.n, where);
    c.B = count_or(j, "B", c.B, where);
    if (j.contains("seed")) c.seed = as_u64(j.at("seed"), where + ".seed");
    c.rho = number_or(j, "rho", c.rho, where);
    c.beta10 = number_or(j, "beta10", c.beta10, where);
    c.beta11 = number_or(j, "beta11", c.beta11, where);
    c.x_shape = number_or(j, "x_shape", c.x_shape, where);
    c.x_scale = number_or(j, "x_scale", c.x_scale, where);
    c.x_shift = number_or(j, "x_shift", c.x_shift, where);
    c.strata = count_or(j, "H", c.strata, where);
    c.bins = count_or(j, "bins", c.bins, where);
    if (j.contains("a")) c.greg_weights = weights_from_json(j.at("a"));
    if (j.contains("sigma2")) c.sigma2 = number_at(j, "sigma2", where);
    const auto& grid = need(j, "grid", where);
    if (grid.is_string()) {
        const auto name = grid.get<std::string>();
        if (name == "correct") c.cells = correct_model_cells();
        else if (name == "misspecified") c.cells = misspecified_cells();
        else if (name == "all") {
            c.cells = correct_model_cells();
            const auto m = misspecified_cells();
            c.cells.insert(c.cells.end(), m.begin(), m.end());
        } else bad(where + ".grid", "expected correct, misspecified, all or a list of cells");
    } else if (grid.is_array()) {
        for (const auto& cell : grid) {
            const auto v = numbers(cell, where + ".grid");
            if (v.size() != 3) bad(where + ".grid", "each cell is [beta12, beta2, delta2]");
            c.cells.push_back({v[0], v[1], v[2]});
        }
    } else {
        bad(where + ".grid", "expected a name or a list of cells");
    }
    checked(where, [&] {
        c.validate();
        return 0;
    });
    return c;
}

Population population_from_json(const json& j, const std::optional<std::uint64_t>& seed) {
    const std::string where = "population";
    if (!j.is_object()) bad(where, "expected an object");
    if (j.contains("csv")) {
        CsvSchema schema;
        if (j.contains("y_column")) schema.y = as_string(j.at("y_column"), where + ".y_column");
        return load_population(as_string(j.at("csv"), where + ".csv"), schema);
    }
    auto seed_of = [&](const json& b, const std::string& w) {
        if (seed) return *seed;
        return as_u64(need(b, "seed", w), w + ".seed");
    };
    if (j.contains("gamma")) {
        const auto& b = j.at("gamma");
        const std::string w = where + ".gamma";
        const auto N = as_count(need(b, "N", w), w + ".N");
        const double shape = number_at(b, "shape", w), scale = number_at(b, "scale", w);
        const double shift = number_or(b, "shift", 0.0, w);
        const auto s = seed_of(b, w);
        return checked(w, [&] { return synthesize_x(N, shape, scale, shift, s); });
    }
    if (j.contains("analog")) {
        const auto& b = j.at("analog");
        const std::string w = where + ".analog";
        const auto N = as_count(need(b, "N", w), w + ".N");
        const double m = number_at(b, "mean", w), sd = number_at(b, "sd", w),
                     sk = number_at(b, "skewness", w);
        const auto s = seed_of(b, w);
        return checked(w, [&] { return analog_population(N, m, sd, sk, s); });
    }
    bad(where, "expected one of csv, gamma, analog");
}

CaseStudyInput case_study_from_json(const json& j) {
    const std::string where = "casestudy";
    CaseStudyInput in;
    in.n = as_count(need(j, "n", where), where + ".n");
    const auto& designs = need(j, "designs", where);
    if (!designs.is_array()) bad(where + ".designs", "expected an array");
    for (const auto& d : designs) in.designs.push_back(design_from_json(d));
    if (j.contains("settings")) in.settings = risk_settings_from_json(j.at("settings"));
    const auto& scenarios = need(j, "scenarios", where);
    if (!scenarios.is_array() || scenarios.empty()) bad(where + ".scenarios", "expected a nonempty array");
    for (const auto& s : scenarios) {
        Scenario sc;
        sc.name = as_string(need(s, "name", where + ".scenarios"), where + ".scenarios.name");
        sc.working = working_from_json(need(s, "working", sc.name));
        sc.prior = prior_from_json(need(s, "prior", sc.name));
        const auto& sj = need(s, "sigma", sc.name);
        if (sj.contains("mode")) {
            sc.sigma = sigma_from_json(sj);
        } else {
            json filled = sj;
            filled["mode"] = to_string(default_sigma_mode(in.settings.estimator, sc.working.trend));
            sc.sigma = sigma_from_json(filled);
        }
        in.scenarios.push_back(std::move(sc));
    }
    if (j.contains("truth")) {
        const auto& t = j.at("truth");
        Truth truth;
        if (t.is_string()) {
            if (t.get<std::string>() != "prior_mean") bad(where + ".truth", "expected 'prior_mean' or an object");
        } else {
            const auto b = pair_of(need(t, "beta", where + ".truth"), where + ".truth.beta");
            truth.at_prior_mean = false;
            truth.beta12 = b[0];
            truth.beta2 = b[1];
            if (t.contains("sigma2")) truth.sigma2 = number_at(t, "sigma2", where + ".truth");
        }
        in.truth = truth;
    }
    return in;
}

json to_json(const MseBreakdown& b) {
    return {{"trend_term", b.trend_term},
            {"spread_term", b.spread_term},
            {"total", b.total},
            {"units", to_string(b.units)}};
}

json to_json(const RiskValue& r) {
    return {{"risk", r.value},
            {"units", to_string(r.units)},
            {"method", r.method},
            {"nodes", r.nodes},
            {"clamped_nodes", r.clamped_nodes}};
}

json to_json(const RiskReport& r) {
    json designs = json::array();
    for (const auto& e : r.entries) {
        json d = to_json(e.risk);
        d["spec"] = to_json(e.spec);
        d["label"] = e.spec.label();
        d["at_prior_mean"] = to_json(e.at_prior_mean);
        designs.push_back(std::move(d));
    }
    return {{"designs", designs}, {"ranking", r.ranking}, {"winner", r.winner().spec.label()}};
}

json to_json(const std::vector<ScenarioResult>& results) {
    json out = json::array();
    for (const auto& s : results) {
        json j = {{"name", s.name}, {"report", to_json(s.report)}};
        if (s.has_truth) {
            json realized = json::array();
            for (const auto& b : s.realized) realized.push_back(to_json(b));
            j["truth"] = {{"beta12", s.truth_beta12}, {"beta2", s.truth_beta2}};
            j["realized"] = realized;
            j["realized_ranking"] = s.realized_ranking;
            j["verdict"] = s.verdict;
        }
        out.push_back(std::move(j));
    }
    return {{"scenarios", out}};
}

}  // namespace designrisk
