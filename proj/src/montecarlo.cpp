#include "designrisk/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "designrisk/csv.hpp"
#include "designrisk/quadrature.hpp"
#include "designrisk/rng.hpp"

namespace designrisk {

std::vector<StudyCell> correct_model_cells() {
    std::vector<StudyCell> cells;
    for (double b12 : {0.75, 1.0, 1.25}) {
        for (double b2 : {0.5, 0.75, 1.0}) cells.push_back({b12, b2, b2});
    }
    return cells;
}

std::vector<StudyCell> misspecified_cells() {
    return {{0.75, 0.5, 0.75}, {0.75, 0.75, 1.0}, {0.75, 1.0, 0.5},
            {1.0, 0.5, 1.0},   {1.0, 0.75, 0.5},  {1.0, 1.0, 0.75},
            {1.25, 0.5, 0.75}, {1.25, 0.75, 1.0}, {1.25, 1.0, 0.5}};
}

void SimulationConfig::validate() const {
    if (B < 1) throw std::invalid_argument("B must be >= 1");
    if (N < 2) throw std::invalid_argument("N must be >= 2");
    if (!(n < N)) throw std::invalid_argument("n must be < N");
    if (cells.empty()) throw std::invalid_argument("study grid is empty");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
    if (!(x_shape > 0.0 && x_scale > 0.0)) throw std::invalid_argument("gamma shape and scale must be > 0");
    if (n < 2 * strata) throw std::invalid_argument("n must be >= 2H");
    if (sigma2 && !(*sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
}

namespace {

struct CellDraw {
    bool ok = false;
    double m0 = 0.0;
    double eff[3] = {0.0, 0.0, 0.0};  // pps-greg, stsi-dif, stsi-greg
};

std::vector<double> minus(std::span<const double> a, std::span<const double> b) {
    std::vector<double> d(a.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = a[k] - b[k];
    return d;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

EfficiencyTable run_study(const SimulationConfig& cfg) {
    cfg.validate();
    const std::size_t C = cfg.cells.size();

    std::vector<double> sigma2(C);
    {
        const auto pilot = synthesize_x(cfg.N, cfg.x_shape, cfg.x_scale, cfg.x_shift,
                                        stream_key(cfg.seed, std::numeric_limits<std::uint64_t>::max()));
        for (std::size_t c = 0; c < C; ++c) {
            const auto& cell = cfg.cells[c];
            sigma2[c] = cfg.sigma2 ? *cfg.sigma2
                                   : solve_sigma_for_target_correlation(
                                         pilot, TrendSpec::power_intercept(cfg.beta10, cfg.beta11, cell.beta12),
                                         SpreadSpec{cell.beta2}, cfg.rho);
        }
    }

    std::vector<CellDraw> draws(cfg.B * C);
    parallel_for(cfg.B, cfg.threads, [&](std::size_t r) {
        const auto xpop = synthesize_x(cfg.N, cfg.x_shape, cfg.x_scale, cfg.x_shift,
                                       stream_key(cfg.seed, r));
        for (std::size_t c = 0; c < C; ++c) {
            const auto& cell = cfg.cells[c];
            auto& out = draws[r * C + c];
            try {
                const auto trend = TrendSpec::power_intercept(cfg.beta10, cfg.beta11, cell.beta12);
                const auto pop = synthesize_y(xpop, trend, SpreadSpec{cell.beta2}, sigma2[c],
                                              stream_key(cfg.seed, r, c + 1));
                const auto y = pop.y();
                const auto f = trend_values(pop, trend);
                const auto e_dif = minus(y, f);

                const SpreadSpec working{cell.delta2};
                const DesignOperator pps(pps_inclusion_probs(pop, working, cfg.n));
                const DesignOperator st(build_strata(pop, working, cfg.strata, cfg.n, cfg.bins));

                const GregEstimator greg{trend, greg_weights(pop, WeightSpec{cfg.greg_weights, cell.delta2})};
                const auto e_greg = census_residuals(pop, greg, y);

                out.m0 = pps.variance(e_dif);
                const double m[3] = {pps.variance(e_greg), st.variance(e_dif), st.variance(e_greg)};
                for (int s = 0; s < 3; ++s) out.eff[s] = 100.0 * out.m0 / m[s];
                out.ok = std::isfinite(out.m0) && out.m0 > 0.0 &&
                         std::all_of(std::begin(out.eff), std::end(out.eff),
                                     [](double v) { return std::isfinite(v); });
            } catch (const std::exception&) {
                out.ok = false;
            }
        }
    });

    EfficiencyTable table;
    for (std::size_t c = 0; c < C; ++c) {
        EfficiencyRow row;
        row.cell = cfg.cells[c];
        row.sigma2 = sigma2[c];
        std::vector<double> base, e[3];
        double self = 0.0;
        for (std::size_t r = 0; r < cfg.B; ++r) {
            const auto& d = draws[r * C + c];
            if (!d.ok) {
                ++row.excluded;
                continue;
            }
            base.push_back(d.m0);
            self += 100.0 * d.m0 / d.m0;
            for (int s = 0; s < 3; ++s) e[s].push_back(d.eff[s]);
        }
        row.used = base.size();
        if (row.used > 0) {
            row.base_mse = mean_of(base);
            row.eff_pps_dif = self / static_cast<double>(row.used);
            row.eff_pps_greg = mean_of(e[0]);
            row.eff_stsi_dif = mean_of(e[1]);
            row.eff_stsi_greg = mean_of(e[2]);
            row.se_pps_greg = se_of(e[0]);
            row.se_stsi_dif = se_of(e[1]);
            row.se_stsi_greg = se_of(e[2]);
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.base_mse = row.eff_pps_dif = row.eff_pps_greg = row.eff_stsi_dif = nan;
            row.eff_stsi_greg = row.se_pps_greg = row.se_stsi_dif = row.se_stsi_greg = nan;
        }
        table.rows.push_back(row);
    }
    return table;
}

std::string EfficiencyTable::csv() const {
    std::ostringstream out;
    out << "beta12,beta2,delta2,base_mse,eff_pps_greg,eff_stsi_dif,eff_stsi_greg,"
           "se_pps_greg,se_stsi_dif,se_stsi_greg,excluded\n";
    for (const auto& r : rows) {
        out << format_double(r.cell.beta12) << ',' << format_double(r.cell.beta2) << ','
            << format_double(r.cell.delta2) << ',' << format_double(r.base_mse) << ','
            << format_double(r.eff_pps_greg) << ',' << format_double(r.eff_stsi_dif) << ','
            << format_double(r.eff_stsi_greg) << ',' << format_double(r.se_pps_greg) << ','
            << format_double(r.se_stsi_dif) << ',' << format_double(r.se_stsi_greg) << ','
            << r.excluded << '\n';
    }
    return out.str();
}

Population analog_population(std::size_t N, double mean, double sd, double skewness,
                             std::uint64_t seed) {
    const auto g = match_shifted_gamma(mean, sd, skewness);
    return synthesize_x(N, g.shape, g.scale, g.shift, seed);
}

std::vector<ScenarioResult> case_study(const Population& pop, const CaseStudyInput& input) {
    if (input.scenarios.empty()) throw std::invalid_argument("case study needs at least one scenario");
    std::vector<ScenarioResult> results;
    for (const auto& sc : input.scenarios) {
        RiskSettings settings = input.settings;
        settings.sigma = sc.sigma;

        ScenarioResult res;
        res.name = sc.name;
        res.report = compare_designs(input.designs, pop, input.n, sc.working, sc.prior, settings);

        if (input.truth) {
            const auto& t = *input.truth;
            const auto m = sc.prior.mean();
            res.has_truth = true;
            res.truth_beta12 = t.at_prior_mean ? m[0] : t.beta12;
            res.truth_beta2 = t.at_prior_mean ? m[1] : t.beta2;
            RiskSettings truth_settings = settings;
            if (t.sigma2) truth_settings.sigma = SigmaTreatment::fixed_guess(*t.sigma2);
            for (const auto& entry : res.report.entries) {
                const auto op = bind_design(entry.spec, pop, input.n);
                res.realized.push_back(loss(op, pop, sc.working, res.truth_beta12, res.truth_beta2,
                                            truth_settings, sc.prior)
                                           .mse);
            }
            res.realized_ranking.resize(res.realized.size());
            std::iota(res.realized_ranking.begin(), res.realized_ranking.end(), 0);
            std::stable_sort(res.realized_ranking.begin(), res.realized_ranking.end(),
                             [&](std::size_t a, std::size_t b) {
                                 return res.realized[a].total < res.realized[b].total;
                             });
            res.verdict = res.realized_ranking.front() == res.report.ranking.front() ? "match"
                                                                                      : "contradicts";
        }
        results.push_back(std::move(res));
    }
    return results;
}

}  // namespace designrisk
