#include "designrisk/model.hpp"

#include <cmath>
#include <stdexcept>

namespace designrisk {

namespace {

double power(double x, double e) {
    if (e == 0.0) return 1.0;
    if (x == 0.0 && e < 0.0) throw std::domain_error("0 raised to a negative exponent");
    const double v = std::pow(x, e);
    if (!std::isfinite(v)) {
        throw std::domain_error("power " + std::to_string(x) + "^" + std::to_string(e) +
                                " is not finite");
    }
    return v;
}

}  // namespace

TrendSpec::TrendSpec(TrendFamily family, std::vector<double> params, std::vector<bool> fixed)
    : family_(family), params_(std::move(params)), fixed_(std::move(fixed)) {
    if (fixed_.empty()) {
        fixed_.assign(params_.size(), false);
        const std::size_t nc = coefficient_count();
        for (std::size_t i = nc; i < params_.size(); ++i) fixed_[i] = true;
    }
    validate();
}

TrendSpec TrendSpec::power_intercept(double intercept, double slope, double exponent) {
    return TrendSpec(TrendFamily::PowerIntercept, {intercept, slope, exponent},
                     {false, false, true});
}

TrendSpec TrendSpec::power_sum(std::vector<double> coefficients, std::vector<double> exponents) {
    if (coefficients.size() != exponents.size()) {
        throw std::invalid_argument("power_sum: coefficient and exponent counts differ");
    }
    const std::size_t j = coefficients.size();
    std::vector<double> params = std::move(coefficients);
    params.insert(params.end(), exponents.begin(), exponents.end());
    std::vector<bool> fixed(2 * j, false);
    for (std::size_t i = j; i < 2 * j; ++i) fixed[i] = true;
    return TrendSpec(TrendFamily::PowerSum, std::move(params), std::move(fixed));
}

void TrendSpec::validate() const {
    if (family_ == TrendFamily::PowerIntercept && params_.size() != 3) {
        throw std::invalid_argument("power_intercept trend needs 3 parameters");
    }
    if (family_ == TrendFamily::PowerSum && (params_.empty() || params_.size() % 2 != 0)) {
        throw std::invalid_argument("power_sum trend needs 2J parameters");
    }
    if (fixed_.size() != params_.size()) {
        throw std::invalid_argument("trend fixed mask length does not match parameters");
    }
    for (double p : params_) {
        if (!std::isfinite(p)) throw std::invalid_argument("trend parameters must be finite");
    }
    for (std::size_t i = coefficient_count(); i < params_.size(); ++i) {
        if (!fixed_[i]) throw std::invalid_argument("trend exponents must be fixed parameters");
    }
}

std::size_t TrendSpec::dims() const {
    return family_ == TrendFamily::PowerIntercept ? 1 : params_.size() / 2;
}

std::size_t TrendSpec::coefficient_count() const {
    return family_ == TrendFamily::PowerIntercept ? 2 : params_.size() / 2;
}

std::size_t TrendSpec::free_count() const { return free_indices().size(); }

std::vector<std::size_t> TrendSpec::free_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < coefficient_count(); ++i) {
        if (!fixed_[i]) out.push_back(i);
    }
    return out;
}

double TrendSpec::exponent(std::size_t j) const {
    if (family_ == TrendFamily::PowerIntercept) return params_[2];
    return params_.at(coefficient_count() + j);
}

void TrendSpec::basis(std::span<const double> x, std::span<double> out) const {
    if (x.size() < dims()) throw std::invalid_argument("trend evaluated with too few auxiliaries");
    if (family_ == TrendFamily::PowerIntercept) {
        out[0] = 1.0;
        out[1] = power(x[0], params_[2]);
        return;
    }
    const std::size_t j = dims();
    for (std::size_t i = 0; i < j; ++i) out[i] = power(x[i], params_[j + i]);
}

TrendSpec TrendSpec::with_free_coefficients(std::span<const double> values) const {
    const auto idx = free_indices();
    if (values.size() != idx.size()) {
        throw std::invalid_argument("wrong number of free coefficients");
    }
    TrendSpec out = *this;
    for (std::size_t i = 0; i < idx.size(); ++i) out.params_[idx[i]] = values[i];
    out.validate();
    return out;
}

TrendSpec TrendSpec::with_exponents(std::span<const double> exponents) const {
    TrendSpec out = *this;
    const std::size_t nc = coefficient_count();
    if (exponents.size() != params_.size() - nc) {
        throw std::invalid_argument("wrong number of exponents");
    }
    for (std::size_t i = 0; i < exponents.size(); ++i) out.params_[nc + i] = exponents[i];
    out.validate();
    return out;
}

TrendSpec TrendSpec::with_exponent(double e) const {
    std::vector<double> ex(params_.size() - coefficient_count(), e);
    return with_exponents(ex);
}

double eval_trend(const TrendSpec& spec, std::span<const double> x) {
    double phi[64];
    const std::size_t nc = spec.coefficient_count();
    if (nc > 64) throw std::invalid_argument("trend has too many coefficients");
    spec.basis(x, std::span<double>(phi, nc));
    double f = 0.0;
    for (std::size_t i = 0; i < nc; ++i) f += spec.coefficient(i) * phi[i];
    return f;
}

double eval_trend(const TrendSpec& spec, double x) {
    return eval_trend(spec, std::span<const double>(&x, 1));
}

double eval_spread(const SpreadSpec& spec, double x) {
    if (spec.exponent == 0.0) return 1.0;
    if (!(x > 0.0)) {
        throw std::domain_error("power spread requires x > 0 (got " + std::to_string(x) + ")");
    }
    return power(x, spec.exponent);
}

std::string to_string(TrendFamily family) {
    return family == TrendFamily::PowerSum ? "power_sum" : "power_intercept";
}

TrendFamily trend_family_from_string(const std::string& name) {
    if (name == "power_sum") return TrendFamily::PowerSum;
    if (name == "power_intercept") return TrendFamily::PowerIntercept;
    throw std::invalid_argument("unknown trend family: " + name);
}

}  // namespace designrisk
