#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "designrisk/design.hpp"
#include "designrisk/rng.hpp"

using namespace designrisk;

namespace {
double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Quadratic form over an explicit joint-inclusion matrix.
double quadratic_form(const std::vector<double>& pi, const Eigen::MatrixXd& joint,
                      const std::vector<double>& e) {
    double v = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) {
        for (std::size_t l = 0; l < pi.size(); ++l) {
            v += (joint(k, l) - pi[k] * pi[l]) * e[k] / pi[k] * e[l] / pi[l];
        }
    }
    return v;
}
}  // namespace

TEST(PpsProbs, Proportional) {
    const std::vector<double> g{1, 2, 3, 4};
    const auto p = pps_inclusion_probs(g, 2);
    const double want[] = {0.2, 0.4, 0.6, 0.8};
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(p.pi[k], want[k], 1e-15);
}

TEST(PpsProbs, CappingOnePass) {
    const std::vector<double> g{1, 1, 1, 7};
    const auto p = pps_inclusion_probs(g, 2);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(p.pi[k], 1.0 / 3.0, 1e-15);
    EXPECT_EQ(p.pi[3], 1.0);
}

TEST(PpsProbs, ConstantSizeIsEqualProbability) {
    const std::vector<double> g(40, 3.5);
    const auto p = pps_inclusion_probs(g, 10);
    for (double v : p.pi) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(PpsProbs, SumAndCapInvariantRandomized) {
    Rng rng(17);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t N = 5 + rep % 60;
        std::vector<double> g(N);
        for (auto& v : g) v = std::pow(rng.uniform() + 1e-3, -2.0 * rng.uniform());
        const std::size_t n = 1 + (rep * 7) % (N - 1);
        const auto p = pps_inclusion_probs(g, n);
        EXPECT_NEAR(sum(p.pi), static_cast<double>(n), 1e-9);
        EXPECT_LE(*std::max_element(p.pi.begin(), p.pi.end()), 1.0);
        // idempotent on its own output
        const auto q = pps_inclusion_probs(p.pi, n);
        for (std::size_t k = 0; k < N; ++k) EXPECT_NEAR(q.pi[k], p.pi[k], 1e-12);
    }
}

TEST(PpsProbs, Errors) {
    const std::vector<double> g{1, 2, 3};
    EXPECT_THROW(pps_inclusion_probs(g, 4), std::invalid_argument);
    EXPECT_THROW(pps_inclusion_probs(g, 0), std::invalid_argument);
    const std::vector<double> zero{0, 0, 0};
    EXPECT_THROW(pps_inclusion_probs(zero, 1), std::invalid_argument);
}

TEST(Pareto, TakeAllUnitsAlwaysIn) {
    const std::vector<double> g{1, 1, 1, 1, 1, 50};
    const auto p = pps_inclusion_probs(g, 3);
    ASSERT_EQ(p.pi[5], 1.0);
    for (std::uint64_t s = 0; s < 500; ++s) {
        const auto smp = pareto_pps_sample(p, s);
        EXPECT_EQ(smp.size(), 3u);
        EXPECT_EQ(smp.units.back(), 5u);
    }
}

TEST(Pareto, EqualProbabilityFrequencies) {
    InclusionProbs p{{0.5, 0.5, 0.5, 0.5}, 2};
    std::vector<int> hits(4, 0);
    const int R = 100000;
    for (int r = 0; r < R; ++r) {
        for (auto k : pareto_pps_sample(p, stream_key(3, r)).units) ++hits[k];
    }
    for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / R, 0.5, 0.005);
}

TEST(Pareto, UnequalProbabilityFrequencies) {
    InclusionProbs p{{0.2, 0.4, 0.6, 0.8}, 2};
    std::vector<int> hits(4, 0);
    const int R = 100000;
    for (int r = 0; r < R; ++r) {
        const auto s = pareto_pps_sample(p, stream_key(4, r));
        ASSERT_EQ(s.size(), 2u);
        ASSERT_LT(s.units[0], s.units[1]);
        for (auto k : s.units) ++hits[k];
    }
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(static_cast<double>(hits[k]) / R, p.pi[k], 0.01);
}

// Pareto ranking reproduces the targets only approximately; these are its actual
// first-order inclusion probabilities for (0.2, 0.4, 0.6, 0.8), n = 2, from an
// independent 4e6-draw simulation.
TEST(Pareto, MatchesIndependentSimulation) {
    InclusionProbs p{{0.2, 0.4, 0.6, 0.8}, 2};
    const double actual[4] = {0.18676, 0.38500, 0.61477, 0.81348};
    std::vector<int> hits(4, 0);
    const int R = 100000;
    for (int r = 0; r < R; ++r) {
        for (auto k : pareto_pps_sample(p, stream_key(4, r)).units) ++hits[k];
    }
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(static_cast<double>(hits[k]) / R, actual[k], 0.005);
}

TEST(Pareto, Deterministic) {
    InclusionProbs p{{0.2, 0.4, 0.6, 0.8}, 2};
    EXPECT_EQ(pareto_pps_sample(p, 99).units, pareto_pps_sample(p, 99).units);
}

TEST(Neyman, ExactProportionality) {
    const std::vector<std::size_t> N_h{100, 100};
    const std::vector<double> S{1, 3};
    EXPECT_EQ(neyman_allocation(N_h, S, 40), (std::vector<std::size_t>{10, 30}));
}

TEST(Neyman, BoundsAndTotal) {
    const std::vector<std::size_t> N_h{5, 1000, 3, 40};
    const std::vector<double> S{100, 1, 0, 50};
    const auto nh = neyman_allocation(N_h, S, 60);
    EXPECT_EQ(std::accumulate(nh.begin(), nh.end(), std::size_t{0}), 60u);
    for (std::size_t h = 0; h < 4; ++h) {
        EXPECT_GE(nh[h], 2u);
        EXPECT_LE(nh[h], N_h[h]);
    }
    EXPECT_EQ(nh[0], 5u);  // take-all
    EXPECT_EQ(nh[2], 2u);  // floor
    EXPECT_THROW(neyman_allocation(N_h, S, 7), std::invalid_argument);
}

TEST(Strata, SingleStratumIsSrs) {
    std::vector<double> g(50);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = 1.0 + k;
    const auto L = build_strata(g, 1, 12);
    EXPECT_EQ(L.H, 1u);
    EXPECT_EQ(L.n_h, (std::vector<std::size_t>{12}));
    EXPECT_EQ(L.N_h, (std::vector<std::size_t>{50}));
}

TEST(Strata, UniformGridSplitsInHalf) {
    std::vector<double> g(1000);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = 1.0 + static_cast<double>(k);
    const auto L = build_strata(g, 2, 100, 100);
    ASSERT_EQ(L.H, 2u);
    // one bin holds 10 grid points
    EXPECT_NEAR(static_cast<double>(L.N_h[0]), 500.0, 10.0);
    EXPECT_NEAR(L.boundaries[0], 500.5, 10.0);
    EXPECT_EQ(L.N_h[0] + L.N_h[1], 1000u);
    EXPECT_EQ(L.n(), 100u);
}

TEST(Strata, InvariantsOnSkewedSizes) {
    const auto pop = synthesize_x(5000, 0.04, 1200, 1, 8);
    for (double e : {0.5, 0.75, 1.0}) {
        const auto L = build_strata(pop, SpreadSpec{e}, 5, 500);
        EXPECT_EQ(std::accumulate(L.N_h.begin(), L.N_h.end(), std::size_t{0}), 5000u);
        EXPECT_EQ(L.n(), 500u);
        for (std::size_t h = 0; h < L.H; ++h) {
            EXPECT_GE(L.n_h[h], 2u);
            EXPECT_LE(L.n_h[h], L.N_h[h]);
        }
        for (std::size_t h = 1; h + 1 < L.H; ++h) EXPECT_LT(L.boundaries[h - 1], L.boundaries[h]);
    }
}

TEST(Strata, Errors) {
    std::vector<double> g(30, 1.0);
    EXPECT_THROW(build_strata(g, 2, 10), std::invalid_argument);  // constant g
    g[0] = 2.0;
    EXPECT_THROW(build_strata(g, 3, 5), std::invalid_argument);  // n < 2H
}

TEST(Stsi, CensusWhenNEqualsN) {
    std::vector<double> g(20);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = 1.0 + k;
    const auto L = build_strata(g, 1, 20);
    const auto s = stsi_sample(L, 5);
    EXPECT_EQ(s.size(), 20u);
    for (double p : s.pi) EXPECT_EQ(p, 1.0);
}

TEST(Stsi, FrequenciesMatchAllocation) {
    const auto L = make_layout({0, 0, 0, 0, 1, 1, 1, 1, 1, 1}, {2, 3});
    std::vector<int> hits(10, 0);
    const int R = 100000;
    for (int r = 0; r < R; ++r) {
        const auto s = stsi_sample(L, stream_key(12, r));
        ASSERT_EQ(s.size(), 5u);
        ASSERT_EQ(std::set<std::size_t>(s.units.begin(), s.units.end()).size(), 5u);
        for (auto k : s.units) ++hits[k];
    }
    for (int k = 0; k < 10; ++k) {
        const double want = k < 4 ? 0.5 : 0.5;
        EXPECT_NEAR(static_cast<double>(hits[k]) / R, want, 0.005);
    }
    EXPECT_EQ(stsi_sample(L, 77).units, stsi_sample(L, 77).units);
}

TEST(Variance, SrsEnumeration) {
    const DesignOperator op{ExactDesign::srs(4, 2)};
    const std::vector<double> e{1, 2, 3, 4};
    EXPECT_NEAR(op.variance(e), 20.0 / 3.0, 1e-12);
    EXPECT_NEAR(op.exact()->joint()(0, 1), 1.0 / 6.0, 1e-15);
    double brute = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            const double t = 2.0 * (e[i] + e[j]);
            brute += (t - 10.0) * (t - 10.0) / 6.0;
        }
    }
    EXPECT_NEAR(op.variance(e), brute, 1e-12);
}

TEST(Variance, ResidualProportionalToPiIsZero) {
    const auto pop = synthesize_x(300, 1.0, 10.0, 1.0, 4);
    const auto probs = pps_inclusion_probs(pop, SpreadSpec{0.5}, 30);
    std::vector<double> e(probs.pi);
    for (auto& v : e) v *= 3.7;
    EXPECT_NEAR(DesignOperator(probs).variance(e), 0.0, 1e-9);
    const auto L = build_strata(pop, SpreadSpec{0.5}, 3, 30);
    const auto pi = L.inclusion_probs();
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = 2.0 * pi[k];
    EXPECT_NEAR(DesignOperator(L).variance(e), 0.0, 1e-9);
    const DesignOperator ex{ExactDesign::srs(6, 3)};
    EXPECT_NEAR(ex.variance(std::vector<double>(6, 0.5)), 0.0, 1e-12);
}

TEST(Variance, StsiClosedFormEqualsJointForm) {
    const std::vector<std::size_t> a{0, 1, 0, 2, 1, 0, 2, 2, 1, 0, 1, 2, 0};
    const auto L = make_layout(a, {2, 3, 2});
    const std::size_t N = a.size();
    const auto pi = L.inclusion_probs();
    Eigen::MatrixXd J(N, N);
    for (std::size_t k = 0; k < N; ++k) {
        for (std::size_t l = 0; l < N; ++l) {
            const double Nk = L.N_h[a[k]], nk = L.n_h[a[k]];
            const double Nl = L.N_h[a[l]], nl = L.n_h[a[l]];
            if (k == l) J(k, l) = nk / Nk;
            else if (a[k] == a[l]) J(k, l) = nk * (nk - 1) / (Nk * (Nk - 1));
            else J(k, l) = nk * nl / (Nk * Nl);
        }
    }
    std::vector<double> e(N);
    for (std::size_t k = 0; k < N; ++k) e[k] = std::sin(1.3 * k) * 10 + k;
    const double closed = DesignOperator(L).variance(e);
    EXPECT_NEAR(closed, quadratic_form(pi, J, e), 1e-10 * std::abs(closed));
}

TEST(Variance, ExactEqualsEnumerationRandomDesigns) {
    Rng rng(5);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t N = 3 + rep % 6, n = 1 + rep % (N - 1);
        // every n-subset with random probability
        std::vector<std::pair<std::vector<std::size_t>, double>> support;
        std::vector<bool> mask(N, false);
        std::fill(mask.begin(), mask.begin() + n, true);
        double total = 0.0;
        do {
            std::vector<std::size_t> s;
            for (std::size_t k = 0; k < N; ++k) if (mask[k]) s.push_back(k);
            const double p = 0.05 + rng.uniform();
            support.emplace_back(s, p);
            total += p;
        } while (std::prev_permutation(mask.begin(), mask.end()));
        for (auto& [s, p] : support) p /= total;
        const ExactDesign d(N, support);
        std::vector<double> e(N);
        for (auto& v : e) v = 10.0 * rng.uniform() - 3.0;
        const double t = sum(e);
        double brute = 0.0;
        for (const auto& [s, p] : support) {
            double hat = 0.0;
            for (auto k : s) hat += e[k] / d.pi()[k];
            brute += p * (hat - t) * (hat - t);
        }
        const double got = DesignOperator(d).variance(e);
        EXPECT_NEAR(got, brute, 1e-10 * std::max(1.0, brute));
    }
}

TEST(Variance, HajekCloseToMonteCarlo) {
    const auto pop = synthesize_x(200, 2.0, 20.0, 5.0, 31);
    const auto probs = pps_inclusion_probs(pop, SpreadSpec{0.8}, 20);
    std::vector<double> e(200);
    for (std::size_t k = 0; k < 200; ++k) e[k] = 3.0 * std::sqrt(pop.x()[k]) + 0.02 * pop.x()[k] * pop.x()[k] / 10.0;
    const DesignOperator op(probs);
    const double h = op.variance(e);
    const double mc = op.monte_carlo_variance(e, 100000, 2024);
    EXPECT_LT(std::abs(h - mc) / mc, 0.05);
}

TEST(ExactDesign, Validation) {
    using S = std::vector<std::pair<std::vector<std::size_t>, double>>;
    EXPECT_THROW(ExactDesign(3, S{{{0, 1}, 0.5}, {{1, 2}, 0.4}}), std::invalid_argument);
    EXPECT_THROW(ExactDesign(3, S{{{0, 1}, 0.5}, {{2}, 0.5}}), std::invalid_argument);
    EXPECT_THROW(ExactDesign(3, S{{{0, 0}, 1.0}}), std::invalid_argument);
    EXPECT_THROW(ExactDesign(3, S{{{0, 3}, 1.0}}), std::invalid_argument);
}

TEST(DesignSpec, LabelsAndBinding) {
    EXPECT_EQ(DesignSpec::pps(0.75).label(), "pps(0.75)");
    EXPECT_EQ(DesignSpec::stsi(5, 0.75).label(), "stsi(H=5;0.75)");
    EXPECT_EQ(DesignSpec::srs().label(), "srs");
    const auto pop = synthesize_x(100, 1, 5, 1, 1);
    const auto op = bind_design(DesignSpec::srs(), pop, 10);
    for (double p : op.pi()) EXPECT_NEAR(p, 0.1, 1e-15);
    EXPECT_EQ(bind_design(DesignSpec::pps(1.0), pop, 10).kind(), "pps");
    EXPECT_EQ(bind_design(DesignSpec::stsi(2, 1.0), pop, 10).kind(), "stsi");
}

TEST(DesignSpec, StrataCsv) {
    const auto L = make_layout({0, 0, 1, 1, 1}, {2, 2}, std::vector<double>{1, 2, 3, 4, 5});
    const auto csv = strata_csv(L);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "h,N_h,n_h,S_gh,boundary");
    EXPECT_NE(csv.find("inf"), std::string::npos);
}
