#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "designrisk/model.hpp"

namespace designrisk {

// Finite population frame. Auxiliaries are stored column-wise (J columns);
// every example in this library uses J = 1. Immutable after construction.
class Population {
public:
    Population(std::vector<std::int64_t> ids, std::vector<std::vector<double>> aux,
               std::optional<std::vector<double>> y = std::nullopt);

    // Convenience: ids 1..N, single auxiliary.
    static Population from_x(std::vector<double> x,
                             std::optional<std::vector<double>> y = std::nullopt);

    std::size_t size() const { return ids_.size(); }
    std::size_t dims() const { return aux_.size(); }
    const std::vector<std::int64_t>& ids() const { return ids_; }

    std::span<const double> x() const { return aux_[0]; }
    std::span<const double> aux(std::size_t j) const { return aux_.at(j); }
    // Auxiliary vector of unit k.
    std::vector<double> unit(std::size_t k) const;

    bool has_y() const { return y_.has_value(); }
    std::span<const double> y() const;
    double total_y() const;

    Population with_y(std::vector<double> y) const;

private:
    std::vector<std::int64_t> ids_;
    std::vector<std::vector<double>> aux_;
    std::optional<std::vector<double>> y_;
};

struct PopulationMoments {
    double mean_x = 0.0;
    double sd_x = 0.0;    // divisor N
    double skew_x = 0.0;  // m3 / m2^{3/2}
    double f_bar = 0.0;
    double S_ff = 0.0;    // divisor N
    double g2_bar = 0.0;  // mean of g(x)^2
    double S_11 = 0.0;    // divisor N
    double S_1beta = 0.0; // divisor N, covariance of x and x^{trend exponent}
    double x2beta_bar = 0.0;
    double R_1beta = 0.0;
};

// Names of the columns to read. `y` may be empty to skip the study variable.
struct CsvSchema {
    std::string id = "id";
    std::vector<std::string> x{"x"};
    std::string y = "y";
};

Population load_population(const std::filesystem::path& path, const CsvSchema& schema = {});
void save_population(const std::filesystem::path& path, const Population& pop);

// x_k = shift + Gamma(shape, scale); unit k draws from its own stream.
Population synthesize_x(std::size_t N, double shape, double scale, double shift,
                        std::uint64_t seed);

// Shifted gamma whose mean, standard deviation and skewness match the inputs.
struct ShiftedGamma {
    double shape;
    double scale;
    double shift;
};
ShiftedGamma match_shifted_gamma(double mean, double sd, double skewness);

// y_k ~ Gamma with mean f_k and variance sigma2 * g_k^2.
Population synthesize_y(const Population& pop, const TrendSpec& trend, const SpreadSpec& spread,
                        double sigma2, std::uint64_t seed);

std::vector<double> trend_values(const Population& pop, const TrendSpec& trend);
std::vector<double> spread_values(const Population& pop, const SpreadSpec& spread);

PopulationMoments moments(const Population& pop, const TrendSpec& trend, const SpreadSpec& spread);

// sigma^2 such that the model-implied correlation between f(x) and y is rho.
double solve_sigma_for_target_correlation(const Population& pop, const TrendSpec& trend,
                                          const SpreadSpec& spread, double rho);

// Plain Pearson correlation (divisor-free).
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace designrisk
