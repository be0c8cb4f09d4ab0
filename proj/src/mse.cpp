#include "designrisk/mse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "designrisk/csv.hpp"
#include "designrisk/estimator.hpp"
#include "designrisk/risk.hpp"

namespace designrisk {

std::string to_string(MseUnits units) {
    return units == MseUnits::Absolute ? "absolute" : "beta11_sq";
}

namespace {

MseBreakdown make(double trend, double spread, MseUnits units = MseUnits::Absolute) {
    return {trend, spread, trend + spread, units};
}

// sum g^2/pi - sum g^2
double spread_sum(std::span<const double> pi, std::span<const double> g) {
    double s = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) s += (1.0 / pi[k] - 1.0) * g[k] * g[k];
    return s;
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
    std::vector<double> d(a.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = a[k] - b[k];
    return d;
}

}  // namespace

double godambe_joshi_bound(std::span<const double> pi, std::span<const double> g, double sigma2) {
    return sigma2 * spread_sum(pi, g);
}

double optimal_anticipated_mse(std::span<const double> g, std::size_t n, double sigma2) {
    double s = 0.0, s2 = 0.0;
    for (double v : g) {
        s += v;
        s2 += v * v;
    }
    return sigma2 * (s * s / static_cast<double>(n) - s2);
}

MseBreakdown anticipated_mse(const DesignOperator& design, const Population& pop,
                             const TrendSpec& trend, const SpreadSpec& spread, double sigma0_sq,
                             std::span<const double> z) {
    if (z.size() != pop.size()) throw std::invalid_argument("anchors z must cover every unit");
    const auto f = trend_values(pop, trend);
    const auto g = spread_values(pop, spread);
    const auto d = difference(f, z);
    return make(design.variance(d), godambe_joshi_bound(design.pi(), g, sigma0_sq));
}

MseBreakdown expected_mse_misspecified(const DesignOperator& design, const Population& pop,
                                       const TrendSpec& working_trend, const TrendSpec& true_trend,
                                       const SpreadSpec& true_spread, double sigma2) {
    const auto f_true = trend_values(pop, true_trend);
    const auto f_work = trend_values(pop, working_trend);
    const auto g = spread_values(pop, true_spread);
    const auto d = difference(f_true, f_work);
    return make(design.variance(d), godambe_joshi_bound(design.pi(), g, sigma2));
}

MseBreakdown expected_mse_pps_form(const DesignOperator& design, const Population& pop,
                                   const TrendSpec& working_trend, const SpreadSpec& working_spread,
                                   const TrendSpec& true_trend, const SpreadSpec& true_spread,
                                   double sigma2) {
    const auto f_true = trend_values(pop, true_trend);
    const auto f_work = trend_values(pop, working_trend);
    const auto g_d = spread_values(pop, working_spread);
    const auto g_b = spread_values(pop, true_spread);
    const double scale = std::accumulate(g_d.begin(), g_d.end(), 0.0) /
                         static_cast<double>(design.n());

    // MSE of the plain sample sum of w_k = d_k / g_k: as an HT sum its
    // per-unit value is w_k * pi_k.
    const auto pi = design.pi();
    std::vector<double> w_as_ht(pop.size());
    for (std::size_t k = 0; k < w_as_ht.size(); ++k) {
        w_as_ht[k] = (f_true[k] - f_work[k]) / g_d[k] * pi[k];
    }
    const double trend = scale * scale * design.variance(w_as_ht);

    double ratio_sum = 0.0, g2_sum = 0.0;
    for (std::size_t k = 0; k < g_b.size(); ++k) {
        ratio_sum += g_b[k] * g_b[k] / g_d[k];
        g2_sum += g_b[k] * g_b[k];
    }
    return make(trend, sigma2 * (scale * ratio_sum - g2_sum));
}

std::vector<double> v_residuals(const Population& pop, double delta12, double beta12) {
    const auto x = pop.x();
    const std::size_t N = x.size();
    std::vector<double> xb(N), xd(N);
    for (std::size_t k = 0; k < N; ++k) {
        xb[k] = beta12 == 0.0 ? 1.0 : std::pow(x[k], beta12);
        xd[k] = delta12 == 0.0 ? 1.0 : std::pow(x[k], delta12);
    }
    const double mb = std::accumulate(xb.begin(), xb.end(), 0.0) / static_cast<double>(N);
    const double md = std::accumulate(xd.begin(), xd.end(), 0.0) / static_cast<double>(N);
    double s_bd = 0.0, s_dd = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        s_bd += (xb[k] - mb) * (xd[k] - md);
        s_dd += (xd[k] - md) * (xd[k] - md);
    }
    s_bd /= static_cast<double>(N - 1);
    s_dd /= static_cast<double>(N - 1);
    if (!(s_dd > 0.0)) throw std::invalid_argument("v_residuals: x^delta12 is constant (S_dd = 0)");
    const double slope = s_bd / s_dd;
    std::vector<double> v(N);
    for (std::size_t k = 0; k < N; ++k) v[k] = (xb[k] - mb) - (xd[k] - md) * slope;
    return v;
}

GregMseDetail greg_expected_mse_detail(const DesignOperator& design, const Population& pop,
                                       const TrendSpec& working_trend, const TrendSpec& true_trend,
                                       const SpreadSpec& true_spread, std::span<const double> a,
                                       const SigmaSpec& sigma) {
    const bool f0_mode = sigma.mode == SigmaSpec::Mode::F0;
    const bool power_intercept = working_trend.family() == TrendFamily::PowerIntercept &&
                                 true_trend.family() == TrendFamily::PowerIntercept;
    if (f0_mode && !power_intercept) {
        throw std::invalid_argument("F0 mode requires power_intercept working and true trends");
    }

    const bool unit_weights =
        std::all_of(a.begin(), a.end(), [&](double v) { return v == a.front(); });
    const bool both_free = working_trend.free_count() == 2;

    GregMseDetail out;
    double trend_term = 0.0;
    if (power_intercept && unit_weights && both_free) {
        const auto v = v_residuals(pop, working_trend.exponent(), true_trend.exponent());
        trend_term = design.variance(v);
        if (!f0_mode) {
            const double b11 = true_trend.coefficient(1);
            trend_term *= b11 * b11;
        }
    } else {
        // General route: residual of the census projection of the true trend.
        TrendSpec target = true_trend;
        if (f0_mode) {
            // Relative form: unit slope, zero intercept.
            target = TrendSpec(TrendFamily::PowerIntercept, {0.0, 1.0, true_trend.exponent()},
                               {false, false, true});
        }
        const auto fit = limit_coefficients(pop, working_trend, target, a);
        const auto f_proj = trend_values(pop, fitted_trend(working_trend, fit));
        const auto f_true = trend_values(pop, target);
        trend_term = design.variance(difference(f_true, f_proj));
    }

    const auto g = spread_values(pop, true_spread);
    const double s = spread_sum(design.pi(), g);
    if (f0_mode) {
        const auto m = moments(pop, true_trend, true_spread);
        if (std::abs(sigma.R_xy) > std::abs(m.R_1beta)) {
            if (!sigma.clamp_inadmissible) {
                throw std::domain_error("F0: |R_xy| = " + std::to_string(std::abs(sigma.R_xy)) +
                                        " exceeds |R_1beta| = " + std::to_string(std::abs(m.R_1beta)));
            }
            out.f0 = 0.0;
            out.f0_clamped = true;
        } else {
            out.f0 = f0_factor(m, sigma.R_xy);
        }
        out.mse = make(trend_term, out.f0 * s, MseUnits::Beta11Squared);
    } else {
        out.mse = make(trend_term, sigma.sigma2 * s);
    }
    return out;
}

MseBreakdown greg_expected_mse(const DesignOperator& design, const Population& pop,
                               const TrendSpec& working_trend, const TrendSpec& true_trend,
                               const SpreadSpec& true_spread, std::span<const double> a,
                               const SigmaSpec& sigma) {
    return greg_expected_mse_detail(design, pop, working_trend, true_trend, true_spread, a, sigma)
        .mse;
}

std::string breakdown_csv(const std::vector<std::pair<std::string, MseBreakdown>>& rows) {
    std::ostringstream out;
    out << "design,trend_term,spread_term,total,units\n";
    for (const auto& [name, b] : rows) {
        out << name << ',' << format_double(b.trend_term) << ',' << format_double(b.spread_term)
            << ',' << format_double(b.total) << ',' << to_string(b.units) << '\n';
    }
    return out.str();
}

}  // namespace designrisk
