#include "designrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "designrisk/quadrature.hpp"

namespace designrisk {

double sigma_from_correlation(const PopulationMoments& m, double R_fy) {
    if (!(R_fy > 0.0 && R_fy < 1.0)) {
        throw std::invalid_argument("correlation must lie in (0, 1), got " + std::to_string(R_fy));
    }
    if (!(m.S_ff > 0.0)) throw std::invalid_argument("trend is constant on the population (S_ff = 0)");
    if (!(m.g2_bar > 0.0)) throw std::invalid_argument("mean squared spread must be positive");
    return m.S_ff / m.g2_bar * (1.0 / (R_fy * R_fy) - 1.0);
}

double f0_factor(const PopulationMoments& m, double R_xy) {
    if (!(m.S_11 > 0.0)) throw std::invalid_argument("x is constant on the population (S_11 = 0)");
    if (R_xy == 0.0 || !std::isfinite(R_xy)) throw std::invalid_argument("R_xy must be nonzero");
    if (std::abs(R_xy) > std::abs(m.R_1beta)) {
        std::ostringstream msg;
        msg << "inconsistent elicitation: |R_xy| = " << std::abs(R_xy) << " exceeds |R_1beta| = "
            << std::abs(m.R_1beta);
        throw std::domain_error(msg.str());
    }
    const double r1 = m.R_1beta;
    return m.S_1beta * m.S_1beta / m.S_11 * (1.0 / (R_xy * R_xy) - 1.0 / (r1 * r1)) /
           m.x2beta_bar;
}

// ---- prior ----

Prior Prior::normal(std::array<double, 2> mean, std::array<double, 2> sd, double corr) {
    for (double s : sd) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("prior sd must be >= 0");
    }
    if (!(std::abs(corr) <= 1.0)) throw std::invalid_argument("prior corr must lie in [-1, 1]");
    Prior p;
    p.components_.push_back({1.0, NormalPrior{mean, sd, corr}});
    return p;
}

Prior Prior::point_mass(double beta12, double beta2) {
    return normal({beta12, beta2}, {0.0, 0.0}, 0.0);
}

Prior Prior::uniform(std::array<double, 2> lo, std::array<double, 2> hi) {
    for (int j = 0; j < 2; ++j) {
        if (!(hi[j] >= lo[j])) throw std::invalid_argument("uniform prior needs hi >= lo");
    }
    Prior p;
    p.components_.push_back({1.0, UniformPrior{lo, hi}});
    return p;
}

Prior Prior::mixture(const std::vector<std::pair<double, Prior>>& parts) {
    if (parts.empty()) throw std::invalid_argument("mixture prior needs components");
    double total = 0.0;
    for (const auto& [w, _] : parts) {
        if (!(w > 0.0)) throw std::invalid_argument("mixture weights must be positive");
        total += w;
    }
    Prior p;
    for (const auto& [w, part] : parts) {
        for (const auto& c : part.components_) p.components_.push_back({c.weight * w / total, c.dist});
    }
    return p;
}

bool Prior::all_normal() const {
    return std::all_of(components_.begin(), components_.end(), [](const PriorComponent& c) {
        return std::holds_alternative<NormalPrior>(c.dist);
    });
}

std::array<double, 2> Prior::mean() const {
    std::array<double, 2> m{0.0, 0.0};
    for (const auto& c : components_) {
        std::array<double, 2> cm;
        if (const auto* nrm = std::get_if<NormalPrior>(&c.dist)) {
            cm = nrm->mean;
        } else {
            const auto& u = std::get<UniformPrior>(c.dist);
            cm = {0.5 * (u.lo[0] + u.hi[0]), 0.5 * (u.lo[1] + u.hi[1])};
        }
        m[0] += c.weight * cm[0];
        m[1] += c.weight * cm[1];
    }
    return m;
}

namespace {

double std_normal(Rng& rng) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::array<double, 2> transform(const NormalPrior& p, double z1, double z2) {
    const double rho = (p.sd[0] > 0.0 && p.sd[1] > 0.0) ? p.corr : 0.0;
    return {p.mean[0] + p.sd[0] * z1,
            p.mean[1] + p.sd[1] * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2)};
}

}  // namespace

std::array<double, 2> Prior::draw(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    const PriorComponent* chosen = &components_.back();
    for (const auto& c : components_) {
        acc += c.weight;
        if (u < acc) {
            chosen = &c;
            break;
        }
    }
    if (const auto* nrm = std::get_if<NormalPrior>(&chosen->dist)) {
        const double z1 = std_normal(rng);
        const double z2 = std_normal(rng);
        return transform(*nrm, z1, z2);
    }
    const auto& un = std::get<UniformPrior>(chosen->dist);
    const double a = rng.uniform();
    const double b = rng.uniform();
    return {un.lo[0] + a * (un.hi[0] - un.lo[0]), un.lo[1] + b * (un.hi[1] - un.lo[1])};
}

std::string to_string(SigmaTreatment::Mode mode) {
    switch (mode) {
        case SigmaTreatment::Mode::PriorOnSigma: return "prior_on_sigma";
        case SigmaTreatment::Mode::FixedGuess: return "fixed_guess";
        case SigmaTreatment::Mode::FromCorrelation: return "from_correlation";
        case SigmaTreatment::Mode::F0: return "f0";
    }
    return "?";
}

std::string to_string(EstimatorKind kind) {
    return kind == EstimatorKind::Difference ? "difference" : "greg";
}

SigmaTreatment::Mode default_sigma_mode(EstimatorKind kind, const TrendSpec& working) {
    if (kind == EstimatorKind::Greg && working.family() == TrendFamily::PowerIntercept) {
        return SigmaTreatment::Mode::F0;
    }
    return SigmaTreatment::Mode::FromCorrelation;
}

// ---- integrand ----

LossValue loss(const DesignOperator& design, const Population& pop, const WorkingModel& working,
               double beta12, double beta2, const RiskSettings& settings, const Prior& prior) {
    const TrendSpec truth = working.trend.with_exponent(beta12);
    const SpreadSpec true_spread{beta2};
    const auto& sigma = settings.sigma;

    auto absolute_sigma2 = [&]() -> double {
        switch (sigma.mode) {
            case SigmaTreatment::Mode::FixedGuess: return sigma.value;
            case SigmaTreatment::Mode::PriorOnSigma:
                if (!prior.sigma2_mean) throw std::invalid_argument("prior_on_sigma needs a sigma2 prior");
                return *prior.sigma2_mean;
            case SigmaTreatment::Mode::FromCorrelation:
                return sigma_from_correlation(moments(pop, truth, true_spread), sigma.value);
            case SigmaTreatment::Mode::F0: break;
        }
        throw std::logic_error("unreachable");
    };

    LossValue out;
    if (settings.estimator == EstimatorKind::Difference) {
        double s2 = 0.0;
        if (sigma.mode == SigmaTreatment::Mode::F0) {
            if (working.trend.family() != TrendFamily::PowerIntercept) {
                throw std::invalid_argument("f0 sigma mode needs a power_intercept trend");
            }
            const auto m = moments(pop, truth, true_spread);
            if (std::abs(sigma.value) > std::abs(m.R_1beta) && settings.clamp_f0) {
                out.clamped = true;
            } else {
                const double b11 = working.trend.coefficient(1);
                s2 = b11 * b11 * f0_factor(m, sigma.value);
            }
        } else {
            s2 = absolute_sigma2();
        }
        out.mse = expected_mse_misspecified(design, pop, working.trend, truth, true_spread, s2);
        return out;
    }

    const auto a = greg_weights(pop, WeightSpec{settings.weights, working.spread.exponent});
    SigmaSpec spec = sigma.mode == SigmaTreatment::Mode::F0
                         ? SigmaSpec::f0(sigma.value, settings.clamp_f0)
                         : SigmaSpec::absolute(absolute_sigma2());
    const auto detail = greg_expected_mse_detail(design, pop, working.trend, truth, true_spread, a, spec);
    out.mse = detail.mse;
    out.clamped = detail.f0_clamped;
    return out;
}

// ---- risk ----

namespace {

struct Node {
    double weight;
    double beta12;
    double beta2;
};

std::vector<Node> quadrature_nodes(const Prior& prior, std::size_t per_dim) {
    const auto rule = gauss_hermite(per_dim);
    const GaussHermite single{{0.0}, {1.0}};
    std::vector<Node> nodes;
    for (const auto& c : prior.components()) {
        const auto& p = std::get<NormalPrior>(c.dist);
        const auto& r1 = p.sd[0] > 0.0 ? rule : single;
        const auto& r2 = p.sd[1] > 0.0 ? rule : single;
        for (std::size_t i = 0; i < r1.nodes.size(); ++i) {
            for (std::size_t j = 0; j < r2.nodes.size(); ++j) {
                const auto b = transform(p, r1.nodes[i], r2.nodes[j]);
                nodes.push_back({c.weight * r1.weights[i] * r2.weights[j], b[0], b[1]});
            }
        }
    }
    return nodes;
}

std::vector<Node> monte_carlo_nodes(const Prior& prior, std::size_t draws, std::uint64_t seed) {
    if (draws == 0) throw std::invalid_argument("Monte Carlo integration needs draws > 0");
    std::vector<Node> nodes(draws);
    const double w = 1.0 / static_cast<double>(draws);
    for (std::size_t i = 0; i < draws; ++i) {
        Rng rng(stream_key(seed, i));
        const auto b = prior.draw(rng);
        nodes[i] = {w, b[0], b[1]};
    }
    return nodes;
}

}  // namespace

RiskValue risk(const DesignOperator& design, const Population& pop, const WorkingModel& working,
               const Prior& prior, const RiskSettings& settings) {
    const auto& integ = settings.integration;
    bool quadrature = false;
    switch (integ.method) {
        case Integration::Method::Auto: quadrature = prior.all_normal(); break;
        case Integration::Method::Quadrature:
            if (!prior.all_normal()) {
                throw std::invalid_argument("quadrature integration needs a normal prior");
            }
            quadrature = true;
            break;
        case Integration::Method::MonteCarlo: quadrature = false; break;
    }
    const auto nodes = quadrature ? quadrature_nodes(prior, integ.nodes)
                                  : monte_carlo_nodes(prior, integ.draws, integ.seed);

    std::vector<LossValue> values(nodes.size());
    parallel_for(nodes.size(), integ.threads, [&](std::size_t i) {
        const auto& nd = nodes[i];
        auto fail = [&](const std::string& why) {
            std::ostringstream msg;
            msg << "divergent integrand at node " << i << " (beta12=" << nd.beta12
                << ", beta2=" << nd.beta2 << "): " << why;
            throw RiskError(msg.str());
        };
        try {
            values[i] = loss(design, pop, working, nd.beta12, nd.beta2, settings, prior);
        } catch (const RiskError&) {
            throw;
        } catch (const std::exception& e) {
            fail(e.what());
        }
        if (!std::isfinite(values[i].mse.total)) fail("non-finite MSE");
    });

    RiskValue out;
    out.method = quadrature ? "gauss_hermite" : "monte_carlo";
    out.nodes = nodes.size();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        out.value += nodes[i].weight * values[i].mse.total;
        if (values[i].clamped) ++out.clamped_nodes;
        out.units = values[i].mse.units;
    }
    if (!std::isfinite(out.value)) throw RiskError("risk integral overflowed");
    return out;
}

RiskReport compare_designs(const std::vector<DesignSpec>& designs, const Population& pop,
                           std::size_t n, const WorkingModel& working, const Prior& prior,
                           const RiskSettings& settings) {
    if (designs.size() < 2) throw std::invalid_argument("compare_designs needs at least two designs");
    RiskReport report;
    const auto m = prior.mean();
    for (auto spec : designs) {
        if (std::isnan(spec.spread_exponent)) spec.spread_exponent = working.spread.exponent;
        const auto op = bind_design(spec, pop, n);
        RiskEntry entry{spec, risk(op, pop, working, prior, settings), {}};
        entry.at_prior_mean = loss(op, pop, working, m[0], m[1], settings, prior).mse;
        report.entries.push_back(std::move(entry));
    }
    report.ranking.resize(report.entries.size());
    std::iota(report.ranking.begin(), report.ranking.end(), 0);
    std::stable_sort(report.ranking.begin(), report.ranking.end(), [&](std::size_t a, std::size_t b) {
        return report.entries[a].risk.value < report.entries[b].risk.value;
    });
    return report;
}

}  // namespace designrisk
