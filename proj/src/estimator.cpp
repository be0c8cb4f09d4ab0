#include "designrisk/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/QR>

namespace designrisk {

std::string WeightSpec::name() const {
    return family == Family::Unit ? "unit" : "proportional_to_spread_sq";
}

std::vector<double> greg_weights(const Population& pop, const WeightSpec& spec) {
    std::vector<double> a(pop.size(), 1.0);
    if (spec.family == WeightSpec::Family::ProportionalToSpreadSq) {
        const auto g = spread_values(pop, SpreadSpec{spec.spread_exponent});
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = g[k] * g[k];
    }
    return a;
}

double ht_estimate(const Sample& sample, std::span<const double> y) {
    double t = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double v = y[sample.units[i]];
        if (!std::isfinite(v)) {
            throw std::invalid_argument("sampled unit " + std::to_string(sample.units[i] + 1) +
                                        " has no y value");
        }
        t += v / sample.pi[i];
    }
    return t;
}

double difference_estimate(const Sample& sample, std::span<const double> z,
                           std::span<const double> y) {
    double t = 0.0;
    for (double v : z) t += v;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto k = sample.units[i];
        if (!std::isfinite(y[k])) {
            throw std::invalid_argument("sampled unit " + std::to_string(k + 1) + " has no y value");
        }
        t += (y[k] - z[k]) / sample.pi[i];
    }
    return t;
}

namespace {

// Solves min sum_k w_k (r_k - phi_k' b)^2 over the listed units.
std::vector<double> weighted_least_squares(const Population& pop, const TrendSpec& trend,
                                           std::span<const std::size_t> units,
                                           std::span<const double> w,
                                           std::span<const double> y) {
    const auto free = trend.free_indices();
    const std::size_t p = free.size();
    const std::size_t nc = trend.coefficient_count();
    if (p == 0) return {};
    const auto m = static_cast<Eigen::Index>(units.size());
    if (units.size() < p) throw std::runtime_error("GREG fit: fewer units than free coefficients");

    Eigen::MatrixXd X(m, static_cast<Eigen::Index>(p));
    Eigen::VectorXd r(m);
    std::vector<double> phi(nc);
    std::vector<double> xk(pop.dims());
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto k = units[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < pop.dims(); ++j) xk[j] = pop.aux(j)[k];
        trend.basis(xk, phi);
        double offset = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            if (trend.fixed()[c]) offset += trend.coefficient(c) * phi[c];
        }
        const double sw = std::sqrt(w[static_cast<std::size_t>(i)]);
        for (std::size_t c = 0; c < p; ++c) X(i, static_cast<Eigen::Index>(c)) = sw * phi[free[c]];
        r(i) = sw * (y[k] - offset);
    }
    // Column equilibration keeps the rank decision scale-free.
    Eigen::VectorXd scale(static_cast<Eigen::Index>(p));
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        const double nrm = X.col(c).norm();
        scale(c) = nrm > 0.0 ? nrm : 1.0;
        X.col(c) /= scale(c);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(p)) {
        throw std::runtime_error("GREG fit: regressors are collinear on the fitting set (rank " +
                                 std::to_string(qr.rank()) + " < " + std::to_string(p) + ")");
    }
    const Eigen::VectorXd b = qr.solve(r);
    std::vector<double> out(p);
    for (std::size_t c = 0; c < p; ++c) {
        out[c] = b(static_cast<Eigen::Index>(c)) / scale(static_cast<Eigen::Index>(c));
        if (!std::isfinite(out[c])) throw std::runtime_error("GREG fit produced a non-finite coefficient");
    }
    return out;
}

void check_weights(std::span<const double> a, std::size_t N) {
    if (a.size() != N) throw std::invalid_argument("GREG weights a_k must cover every unit");
    for (double v : a) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("GREG weights must be > 0");
    }
}

}  // namespace

FitResult greg_fit_sample(const Population& pop, const Sample& sample, const GregEstimator& spec,
                          std::span<const double> y) {
    check_weights(spec.a, pop.size());
    std::vector<double> w(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto k = sample.units[i];
        if (!std::isfinite(y[k])) {
            throw std::invalid_argument("sampled unit " + std::to_string(k + 1) + " has no y value");
        }
        w[i] = 1.0 / (spec.a[k] * sample.pi[i]);
    }
    return {weighted_least_squares(pop, spec.trend, sample.units, w, y), FitContext::Sample};
}

FitResult greg_fit_census(const Population& pop, const GregEstimator& spec,
                          std::span<const double> y) {
    check_weights(spec.a, pop.size());
    std::vector<std::size_t> units(pop.size());
    std::vector<double> w(pop.size());
    for (std::size_t k = 0; k < units.size(); ++k) {
        units[k] = k;
        w[k] = 1.0 / spec.a[k];
    }
    return {weighted_least_squares(pop, spec.trend, units, w, y), FitContext::Census};
}

TrendSpec fitted_trend(const TrendSpec& working, const FitResult& fit) {
    return working.with_free_coefficients(fit.coefficients);
}

double greg_estimate(const Population& pop, const Sample& sample, const GregEstimator& spec,
                     std::span<const double> y) {
    const auto fit = greg_fit_sample(pop, sample, spec, y);
    const auto f = trend_values(pop, fitted_trend(spec.trend, fit));
    double t = 0.0;
    for (double v : f) t += v;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto k = sample.units[i];
        t += (y[k] - f[k]) / sample.pi[i];
    }
    return t;
}

double estimate(const EstimatorSpec& spec, const Population& pop, const Sample& sample,
                std::span<const double> y) {
    return std::visit(
        [&](const auto& e) -> double {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, HtEstimator>) return ht_estimate(sample, y);
            else if constexpr (std::is_same_v<T, DifferenceEstimator>)
                return difference_estimate(sample, e.z, y);
            else return greg_estimate(pop, sample, e, y);
        },
        spec);
}

FitResult limit_coefficients(const Population& pop, const TrendSpec& working,
                             const TrendSpec& truth, std::span<const double> a) {
    const auto f_true = trend_values(pop, truth);
    GregEstimator spec{working, std::vector<double>(a.begin(), a.end())};
    return greg_fit_census(pop, spec, f_true);
}

std::vector<double> census_residuals(const Population& pop, const GregEstimator& spec,
                                     std::span<const double> y) {
    const auto fit = greg_fit_census(pop, spec, y);
    const auto f = trend_values(pop, fitted_trend(spec.trend, fit));
    std::vector<double> e(pop.size());
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = y[k] - f[k];
    return e;
}

}  // namespace designrisk
