// designrisk: command-line front end.
//   designrisk <synth|risk|compare|simulate|casestudy|verify> [--config f] [--seed s] [--threads k] [--out dir]

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "designrisk/config.hpp"
#include "designrisk/csv.hpp"
#include "designrisk/mse.hpp"
#include "designrisk/rng.hpp"
#include "designrisk/verify.hpp"

namespace fs = std::filesystem;
using namespace designrisk;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
    std::string out = ".";
};

json need_config(const Options& o) {
    if (o.config.empty()) throw ConfigError("--config is required for this command");
    return load_json(o.config);
}

const json& section(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
    return j.at(key);
}

std::size_t sample_size(const json& j) {
    const auto& n = section(j, "n");
    if (!n.is_number_integer() || n.get<long long>() < 1) throw ConfigError("config.n: expected a positive integer");
    return n.get<std::size_t>();
}

fs::path out_path(const Options& o, const std::string& name) {
    fs::create_directories(o.out);
    return fs::path(o.out) / name;
}

void emit(const Options& o, const std::string& name, const std::string& content) {
    const auto p = out_path(o, name);
    write_file_atomic(p, content);
    std::cout << "wrote " << p.string() << '\n';
}

RiskSettings settings_for(const json& cfg, const WorkingModel& working, const Options& o) {
    RiskSettings s;
    if (cfg.contains("settings")) {
        s = risk_settings_from_json(cfg.at("settings"), &working);
    }
    if (!cfg.contains("settings") || !cfg.at("settings").contains("sigma")) {
        throw ConfigError("settings.sigma: required (give R_xy, R_fy or sigma2 with a mode)");
    }
    s.integration.threads = o.threads;
    if (o.seed) s.integration.seed = *o.seed;
    return s;
}

int cmd_synth(const Options& o) {
    const auto cfg = need_config(o);
    auto pop = population_from_json(section(cfg, "population"), o.seed);
    if (cfg.contains("y")) {
        const auto& yj = cfg.at("y");
        const auto trend = trend_from_json(section(yj, "trend"));
        const auto spread = spread_from_json(section(yj, "spread"));
        double sigma2 = 0.0;
        if (yj.contains("sigma2")) {
            if (!yj.at("sigma2").is_number()) throw ConfigError("y.sigma2: expected a number");
            sigma2 = yj.at("sigma2").get<double>();
        } else if (yj.contains("rho")) {
            if (!yj.at("rho").is_number()) throw ConfigError("y.rho: expected a number");
            sigma2 = solve_sigma_for_target_correlation(pop, trend, spread, yj.at("rho").get<double>());
        } else {
            throw ConfigError("y: give sigma2 or rho");
        }
        std::uint64_t seed = 0;
        if (o.seed) seed = mix64(*o.seed);
        else if (yj.contains("seed") && yj.at("seed").is_number_unsigned()) seed = yj.at("seed").get<std::uint64_t>();
        else throw ConfigError("y.seed: required unless --seed is given");
        pop = synthesize_y(pop, trend, spread, sigma2, seed);
        std::cerr << "sigma2 = " << format_double(sigma2) << '\n';
    }
    const auto p = out_path(o, "population.csv");
    save_population(p, pop);
    std::cout << "wrote " << p.string() << '\n';
    return 0;
}

int cmd_risk(const Options& o) {
    const auto cfg = need_config(o);
    const auto pop = population_from_json(section(cfg, "population"));
    const auto working = working_from_json(section(cfg, "working"));
    auto spec = design_from_json(section(cfg, "design"));
    if (std::isnan(spec.spread_exponent)) spec.spread_exponent = working.spread.exponent;
    const auto prior = prior_from_json(section(cfg, "prior"));
    const auto settings = settings_for(cfg, working, o);
    const auto op = bind_design(spec, pop, sample_size(cfg));
    const auto r = risk(op, pop, working, prior, settings);
    json j = to_json(r);
    j["spec"] = to_json(spec);
    emit(o, "risk.json", j.dump(2) + "\n");
    return 0;
}

int cmd_compare(const Options& o) {
    const auto cfg = need_config(o);
    const auto pop = population_from_json(section(cfg, "population"));
    const auto working = working_from_json(section(cfg, "working"));
    const auto& dj = section(cfg, "designs");
    if (!dj.is_array()) throw ConfigError("designs: expected an array");
    std::vector<DesignSpec> designs;
    for (const auto& d : dj) designs.push_back(design_from_json(d));
    const auto prior = prior_from_json(section(cfg, "prior"));
    const auto settings = settings_for(cfg, working, o);
    const std::size_t n = sample_size(cfg);
    const auto report = compare_designs(designs, pop, n, working, prior, settings);

    emit(o, "report.json", to_json(report).dump(2) + "\n");
    std::vector<std::pair<std::string, MseBreakdown>> rows;
    for (const auto& e : report.entries) rows.emplace_back(e.spec.label(), e.at_prior_mean);
    emit(o, "breakdown.csv", breakdown_csv(rows));
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const auto& spec = report.entries[i].spec;
        if (spec.kind != DesignSpec::Kind::Stsi) continue;
        const auto op = bind_design(spec, pop, n);
        emit(o, "strata_" + std::to_string(i) + ".csv", strata_csv(*op.layout()));
    }
    std::cout << "winner: " << report.winner().spec.label() << '\n';
    return 0;
}

int cmd_simulate(const Options& o) {
    const auto cfg = need_config(o);
    auto study = simulation_from_json(section(cfg, "study"));
    if (o.seed) study.seed = *o.seed;
    study.threads = o.threads;
    const auto table = run_study(study);
    emit(o, "table1.csv", table.csv());
    return 0;
}

int cmd_casestudy(const Options& o) {
    const auto cfg = need_config(o);
    const auto pop = population_from_json(section(cfg, "population"), o.seed);
    auto input = case_study_from_json(cfg);
    input.settings.integration.threads = o.threads;
    const auto results = case_study(pop, input);

    const auto x = pop.x();
    const auto m = moments(pop, TrendSpec::power_intercept(0.0, 1.0, 1.0), SpreadSpec{0.0});
    double min_x = *std::min_element(x.begin(), x.end());
    json j = to_json(results);
    j["population"] = {{"N", pop.size()}, {"mean", m.mean_x}, {"sd", m.sd_x},
                       {"skewness", m.skew_x}, {"min", min_x}};
    if (section(cfg, "population").contains("analog")) j["population"]["family"] = "shifted_gamma_analog";
    emit(o, "casestudy.json", j.dump(2) + "\n");
    for (const auto& s : results) {
        std::cout << s.name << ": winner " << s.report.winner().spec.label();
        if (s.has_truth) std::cout << ", realized ranking " << s.verdict;
        std::cout << '\n';
    }
    return 0;
}

int cmd_verify() {
    const auto results = run_enumeration_oracles();
    bool all = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  rel_err=" << r.rel_error << '\n';
        all = all && r.passed;
    }
    return all ? 0 : 1;
}

void diagnostic(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rank sampling designs by prior-weighted risk"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub, bool config) {
        if (config) sub->add_option("--config", opt.config, "JSON config")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "root seed (overrides the config)");
        sub->add_option("--threads", opt.threads, "worker thread cap")->check(CLI::PositiveNumber);
        sub->add_option("--out", opt.out, "output directory");
    };
    std::string which;
    for (const char* name : {"synth", "risk", "compare", "simulate", "casestudy", "verify"}) {
        auto* sub = app.add_subcommand(name);
        add_common(sub, std::string(name) != "verify");
        sub->callback([&which, name] { which = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    for (auto* sub : app.get_subcommands()) {
        if (sub->count("--seed") > 0) opt.seed = seed;
    }

    try {
        if (which == "synth") return cmd_synth(opt);
        if (which == "risk") return cmd_risk(opt);
        if (which == "compare") return cmd_compare(opt);
        if (which == "simulate") return cmd_simulate(opt);
        if (which == "casestudy") return cmd_casestudy(opt);
        if (which == "verify") return cmd_verify();
    } catch (const ConfigError& e) {
        diagnostic("schema", e.what());
        return 2;
    } catch (const json::exception& e) {
        diagnostic("schema", e.what());
        return 2;
    } catch (const std::exception& e) {
        diagnostic("runtime", e.what());
        return 1;
    }
    return 1;
}
