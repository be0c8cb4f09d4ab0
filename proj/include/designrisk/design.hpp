#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "designrisk/model.hpp"
#include "designrisk/population.hpp"

namespace designrisk {

struct InclusionProbs {
    std::vector<double> pi;
    std::size_t n = 0;
};

struct Sample {
    std::vector<std::size_t> units;  // zero-based unit indices, ascending
    std::vector<double> pi;          // inclusion probability of each sampled unit
    std::size_t size() const { return units.size(); }
};

// pi_k proportional to size_k with iterative capping at 1; sum(pi) == n.
InclusionProbs pps_inclusion_probs(std::span<const double> size, std::size_t n);
InclusionProbs pps_inclusion_probs(const Population& pop, const SpreadSpec& spread, std::size_t n);

// Pareto order sampling: units with pi == 1 are always taken, the rest are
// ranked by q_k = [U_k/(1-U_k)] / [pi_k/(1-pi_k)] and the smallest are kept.
Sample pareto_pps_sample(const InclusionProbs& probs, std::uint64_t seed);

struct StratifiedLayout {
    std::size_t H = 0;
    std::vector<double> boundaries;       // H-1 upper cut points on g
    std::vector<std::size_t> assignment;  // unit -> stratum
    std::vector<std::size_t> N_h;
    std::vector<std::size_t> n_h;
    std::vector<double> S_gh;             // within-stratum sd of g, divisor N_h - 1
    std::size_t bins_used = 0;

    std::size_t N() const { return assignment.size(); }
    std::size_t n() const;
    std::vector<double> inclusion_probs() const;
};

// Neyman allocation n_h proportional to N_h * S_h, bounded to [2, N_h] and
// rounded by largest remainder so that sum(n_h) == n.
std::vector<std::size_t> neyman_allocation(std::span<const std::size_t> N_h,
                                           std::span<const double> S_h, std::size_t n);

// cum-sqrt(f) boundaries on an equal-width histogram of g, then Neyman
// allocation on the sd of g. Re-bins with doubled resolution when a stratum
// would end up with fewer than two units.
StratifiedLayout build_strata(std::span<const double> g, std::size_t H, std::size_t n,
                              std::size_t bins = 100);
StratifiedLayout build_strata(const Population& pop, const SpreadSpec& spread, std::size_t H,
                              std::size_t n, std::size_t bins = 100);

// Layout from an explicit unit->stratum assignment and allocation.
StratifiedLayout make_layout(std::vector<std::size_t> assignment, std::vector<std::size_t> n_h,
                             std::span<const double> g = {});

Sample stsi_sample(const StratifiedLayout& layout, std::uint64_t seed);

// Design given by its full support: every sample with its probability.
class ExactDesign {
public:
    ExactDesign(std::size_t N, std::vector<std::pair<std::vector<std::size_t>, double>> support);

    static ExactDesign srs(std::size_t N, std::size_t n);

    std::size_t N() const { return N_; }
    std::size_t n() const { return n_; }
    const std::vector<std::pair<std::vector<std::size_t>, double>>& support() const {
        return support_;
    }
    const std::vector<double>& pi() const { return pi_; }
    const Eigen::MatrixXd& joint() const { return joint_; }

private:
    std::size_t N_;
    std::size_t n_ = 0;
    std::vector<std::pair<std::vector<std::size_t>, double>> support_;
    std::vector<double> pi_;
    Eigen::MatrixXd joint_;  // pi_kl, diagonal holds pi_k
};

// MSE of the HT sum of e from joint inclusion probabilities.
double joint_inclusion_variance(std::span<const double> pi, const Eigen::MatrixXd& joint,
                                std::span<const double> e);
// Hajek fixed-size approximation for pi-ps designs.
double hajek_variance(std::span<const double> pi, std::span<const double> e);
// Closed form for stratified SRS without replacement.
double stsi_variance(const StratifiedLayout& layout, std::span<const double> e);

struct DesignSpec {
    enum class Kind { Pps, Stsi, Srs };
    Kind kind = Kind::Pps;
    double spread_exponent = 0.0;
    std::size_t strata = 1;
    std::size_t bins = 100;

    static DesignSpec pps(double exponent) { return {Kind::Pps, exponent, 1, 100}; }
    static DesignSpec stsi(std::size_t H, double exponent, std::size_t bins = 100) {
        return {Kind::Stsi, exponent, H, bins};
    }
    static DesignSpec srs() { return {Kind::Srs, 0.0, 1, 100}; }

    std::string label() const;
};

// A design bound to a concrete population: knows its pi_k and how to
// compute the design MSE of HT-form sums.
class DesignOperator {
public:
    explicit DesignOperator(InclusionProbs probs);
    explicit DesignOperator(StratifiedLayout layout);
    explicit DesignOperator(ExactDesign design);

    std::string kind() const;
    std::size_t N() const;
    std::size_t n() const;
    std::span<const double> pi() const { return pi_; }

    // Analytic MSE of sum_s e_k/pi_k: exact (support), closed form (STSI) or
    // Hajek (pi-ps).
    double variance(std::span<const double> e) const;
    // Empirical MSE of sum_s e_k/pi_k over `draws` independent samples.
    double monte_carlo_variance(std::span<const double> e, std::size_t draws,
                                std::uint64_t seed) const;

    Sample draw(std::uint64_t seed) const;

    const StratifiedLayout* layout() const { return std::get_if<StratifiedLayout>(&impl_); }
    const ExactDesign* exact() const { return std::get_if<ExactDesign>(&impl_); }

private:
    std::variant<InclusionProbs, StratifiedLayout, ExactDesign> impl_;
    std::vector<double> pi_;
};

DesignOperator bind_design(const DesignSpec& spec, const Population& pop, std::size_t n);

// Stratum report rows: h,N_h,n_h,S_gh,boundary
std::string strata_csv(const StratifiedLayout& layout);

}  // namespace designrisk
