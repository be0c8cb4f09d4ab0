#include "designrisk/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "designrisk/estimator.hpp"
#include "designrisk/mse.hpp"
#include "designrisk/population.hpp"

namespace designrisk {

std::vector<std::pair<std::string, ExactDesign>> oracle_designs() {
    using S = std::vector<std::pair<std::vector<std::size_t>, double>>;
    std::vector<std::pair<std::string, ExactDesign>> out;
    out.emplace_back("srs(4,2)", ExactDesign::srs(4, 2));
    out.emplace_back("uneq(5,2)", ExactDesign(5, S{{{0, 1}, 0.15},
                                                    {{0, 2}, 0.10},
                                                    {{1, 3}, 0.20},
                                                    {{2, 4}, 0.25},
                                                    {{3, 4}, 0.10},
                                                    {{1, 4}, 0.20}}));
    out.emplace_back("uneq(6,3)", ExactDesign(6, S{{{0, 1, 2}, 0.20},
                                                    {{3, 4, 5}, 0.20},
                                                    {{0, 3, 5}, 0.15},
                                                    {{1, 2, 4}, 0.15},
                                                    {{0, 4, 5}, 0.10},
                                                    {{1, 3, 5}, 0.10},
                                                    {{2, 3, 4}, 0.10}}));
    out.emplace_back("uneq(8,4)", ExactDesign(8, S{{{0, 2, 4, 6}, 0.30},
                                                    {{1, 3, 5, 7}, 0.25},
                                                    {{0, 1, 6, 7}, 0.15},
                                                    {{2, 3, 4, 5}, 0.10},
                                                    {{0, 3, 5, 6}, 0.10},
                                                    {{1, 2, 4, 7}, 0.10}}));
    return out;
}

namespace {

double rel_err(double got, double want) {
    const double scale = std::max({std::abs(got), std::abs(want), 1e-300});
    return std::abs(got - want) / scale;
}

Sample sample_of(const ExactDesign& d, const std::vector<std::size_t>& units) {
    Sample s;
    s.units = units;
    std::sort(s.units.begin(), s.units.end());
    for (auto k : s.units) s.pi.push_back(d.pi()[k]);
    return s;
}

}  // namespace

std::vector<CheckResult> run_enumeration_oracles(double tolerance) {
    std::vector<CheckResult> results;
    auto record = [&](const std::string& name, double got, double want) {
        const double r = rel_err(got, want);
        std::ostringstream msg;
        msg.precision(17);
        msg << "analytic=" << got << " enumerated=" << want;
        results.push_back({name, r <= tolerance, r, msg.str()});
    };

    for (const auto& [label, design] : oracle_designs()) {
        const std::size_t N = design.N();
        std::vector<double> x(N), y(N), z(N);
        for (std::size_t k = 0; k < N; ++k) {
            x[k] = 1.0 + 1.5 * static_cast<double>(k) + 0.25 * static_cast<double>(k * k);
            y[k] = 3.0 + 2.0 * x[k] + std::sin(7.0 * static_cast<double>(k + 1)) * 4.0;
            z[k] = 2.5 + 1.8 * x[k];
        }
        if (label == "srs(4,2)") y = {1.0, 2.0, 3.0, 4.0};
        const auto pop = Population::from_x(x, y);
        const DesignOperator op{design};
        double t_y = 0.0;
        for (double v : y) t_y += v;

        // Design MSE of the HT sum of e = y - z.
        std::vector<double> e(N);
        for (std::size_t k = 0; k < N; ++k) e[k] = y[k] - z[k];
        double t_e = 0.0;
        for (double v : e) t_e += v;

        double mse_e = 0.0, mean_ht = 0.0, mean_dif = 0.0, mse_dif = 0.0;
        for (const auto& [units, p] : design.support()) {
            const auto s = sample_of(design, units);
            double hat_e = 0.0;
            for (auto k : units) hat_e += e[k] / design.pi()[k];
            mse_e += p * (hat_e - t_e) * (hat_e - t_e);
            mean_ht += p * ht_estimate(s, y);
            const double d = difference_estimate(s, z, y);
            mean_dif += p * d;
            mse_dif += p * (d - t_y) * (d - t_y);
        }
        record(label + " design variance", op.variance(e), mse_e);
        record(label + " HT unbiased", mean_ht, t_y);
        record(label + " difference unbiased", mean_dif, t_y);
        record(label + " difference MSE", op.variance(e), mse_dif);

        // Anticipated MSE under working trend f, spread g, sigma0^2: per sample
        // E_xi (t_hat - t)^2 = D(s)^2 + sigma^2 sum_k g_k^2 (I_k/pi_k - 1)^2.
        const auto trend = TrendSpec::power_intercept(4.0, 1.7, 0.8);
        const SpreadSpec spread{0.6};
        const double sigma2 = 2.3;
        const auto f = trend_values(pop, trend);
        const auto g = spread_values(pop, spread);
        auto enumerate_model_mse = [&](std::span<const double> mean, std::span<const double> anchor,
                                       std::span<const double> spread_g, double s2) {
            double total = 0.0;
            double bias_total = 0.0;
            for (std::size_t k = 0; k < N; ++k) bias_total += mean[k] - anchor[k];
            for (const auto& [units, p] : design.support()) {
                std::vector<bool> in(N, false);
                for (auto k : units) in[k] = true;
                double D = -bias_total;
                double noise = 0.0;
                for (std::size_t k = 0; k < N; ++k) {
                    const double ik = in[k] ? 1.0 / design.pi()[k] : 0.0;
                    if (in[k]) D += (mean[k] - anchor[k]) * ik;
                    noise += spread_g[k] * spread_g[k] * (ik - 1.0) * (ik - 1.0);
                }
                total += p * (D * D + s2 * noise);
            }
            return total;
        };
        record(label + " anticipated MSE (z = 0)", anticipated_mse(op, pop, trend, spread, sigma2,
                                                                  std::vector<double>(N, 0.0)).total,
               enumerate_model_mse(f, std::vector<double>(N, 0.0), g, sigma2));
        record(label + " anticipated MSE (z = f)", anticipated_mse(op, pop, trend, spread, sigma2, f).total,
               enumerate_model_mse(f, f, g, sigma2));

        const auto truth = TrendSpec::power_intercept(4.0, 1.7, 1.15);
        const SpreadSpec true_spread{0.9};
        const auto fb = trend_values(pop, truth);
        const auto gb = spread_values(pop, true_spread);
        record(label + " misspecified expected MSE",
               expected_mse_misspecified(op, pop, trend, truth, true_spread, sigma2).total,
               enumerate_model_mse(fb, f, gb, sigma2));
    }

    // Hand value: SRS(4,2), e = (1,2,3,4): 20/3.
    {
        const DesignOperator op{ExactDesign::srs(4, 2)};
        const std::vector<double> e{1.0, 2.0, 3.0, 4.0};
        record("srs(4,2) hand value 20/3", op.variance(e), 20.0 / 3.0);
    }
    return results;
}

}  // namespace designrisk
