#include "designrisk/population.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "designrisk/csv.hpp"
#include "designrisk/rng.hpp"
#include "designrisk/risk.hpp"

namespace designrisk {

Population::Population(std::vector<std::int64_t> ids, std::vector<std::vector<double>> aux,
                       std::optional<std::vector<double>> y)
    : ids_(std::move(ids)), aux_(std::move(aux)), y_(std::move(y)) {
    if (ids_.size() < 2) throw std::invalid_argument("population needs N >= 2 units");
    if (aux_.empty()) throw std::invalid_argument("population needs at least one auxiliary");
    for (const auto& col : aux_) {
        if (col.size() != ids_.size()) {
            throw std::invalid_argument("auxiliary column length differs from N");
        }
        for (double v : col) {
            if (!std::isfinite(v)) throw std::invalid_argument("auxiliary values must be finite");
        }
    }
    if (y_ && y_->size() != ids_.size()) {
        throw std::invalid_argument("y length differs from N");
    }
}

Population Population::from_x(std::vector<double> x, std::optional<std::vector<double>> y) {
    std::vector<std::int64_t> ids(x.size());
    std::iota(ids.begin(), ids.end(), std::int64_t{1});
    std::vector<std::vector<double>> aux;
    aux.push_back(std::move(x));
    return Population(std::move(ids), std::move(aux), std::move(y));
}

std::vector<double> Population::unit(std::size_t k) const {
    std::vector<double> out(aux_.size());
    for (std::size_t j = 0; j < aux_.size(); ++j) out[j] = aux_[j][k];
    return out;
}

std::span<const double> Population::y() const {
    if (!y_) throw std::logic_error("population has no study variable");
    return *y_;
}

double Population::total_y() const {
    const auto yy = y();
    return std::accumulate(yy.begin(), yy.end(), 0.0);
}

Population Population::with_y(std::vector<double> y) const {
    return Population(ids_, aux_, std::move(y));
}

Population load_population(const std::filesystem::path& path, const CsvSchema& schema) {
    if (!std::filesystem::exists(path)) {
        throw std::runtime_error("population file not found: " + path.string());
    }
    const CsvTable table = read_csv(path);

    const int id_col = schema.id.empty() ? -1 : table.column(schema.id);
    std::vector<int> x_cols;
    for (const auto& name : schema.x) {
        const int c = table.column(name);
        if (c < 0) throw std::runtime_error("missing column '" + name + "' in " + path.string());
        x_cols.push_back(c);
    }
    const int y_col = schema.y.empty() ? -1 : table.column(schema.y);

    const std::size_t n = table.rows.size();
    std::vector<std::int64_t> ids(n);
    std::vector<std::vector<double>> aux(x_cols.size(), std::vector<double>(n));
    std::optional<std::vector<double>> y;
    if (y_col >= 0) y.emplace(n);

    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = table.rows[r];
        const std::size_t row_no = r + 1;
        ids[r] = id_col >= 0 ? static_cast<std::int64_t>(parse_cell(row[id_col], row_no, schema.id))
                             : static_cast<std::int64_t>(r + 1);
        for (std::size_t j = 0; j < x_cols.size(); ++j) {
            aux[j][r] = parse_cell(row[x_cols[j]], row_no, schema.x[j]);
        }
        if (y) (*y)[r] = parse_cell(row[y_col], row_no, schema.y);
    }
    if (n < 2) throw std::runtime_error("population needs N >= 2 rows, got " + std::to_string(n));
    return Population(std::move(ids), std::move(aux), std::move(y));
}

void save_population(const std::filesystem::path& path, const Population& pop) {
    std::ostringstream out;
    out << "id";
    if (pop.dims() == 1) {
        out << ",x";
    } else {
        for (std::size_t j = 0; j < pop.dims(); ++j) out << ",x" << (j + 1);
    }
    if (pop.has_y()) out << ",y";
    out << '\n';
    for (std::size_t k = 0; k < pop.size(); ++k) {
        out << pop.ids()[k];
        for (std::size_t j = 0; j < pop.dims(); ++j) out << ',' << format_double(pop.aux(j)[k]);
        if (pop.has_y()) out << ',' << format_double(pop.y()[k]);
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

Population synthesize_x(std::size_t N, double shape, double scale, double shift,
                        std::uint64_t seed) {
    if (N < 2) throw std::invalid_argument("synthesize_x: N must be >= 2");
    if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shift)) {
        throw std::invalid_argument("synthesize_x: shape and scale must be positive");
    }
    std::vector<double> x(N);
    for (std::size_t k = 0; k < N; ++k) {
        Rng rng(stream_key(seed, k));
        std::gamma_distribution<double> gamma(shape, scale);
        x[k] = shift + gamma(rng);
    }
    return Population::from_x(std::move(x));
}

ShiftedGamma match_shifted_gamma(double mean, double sd, double skewness) {
    if (!(sd > 0.0) || !(skewness > 0.0)) {
        throw std::invalid_argument("shifted gamma needs sd > 0 and skewness > 0");
    }
    const double shape = 4.0 / (skewness * skewness);
    const double scale = sd / std::sqrt(shape);
    return {shape, scale, mean - shape * scale};
}

Population synthesize_y(const Population& pop, const TrendSpec& trend, const SpreadSpec& spread,
                        double sigma2, std::uint64_t seed) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("synthesize_y: sigma2 must be positive");
    const auto f = trend_values(pop, trend);
    const auto g = spread_values(pop, spread);
    std::vector<double> y(pop.size());
    for (std::size_t k = 0; k < pop.size(); ++k) {
        if (!(f[k] > 0.0)) {
            throw std::domain_error("synthesize_y: trend value " + std::to_string(f[k]) +
                                    " at unit " + std::to_string(k + 1) +
                                    " is not positive; gamma generator needs f > 0");
        }
        const double v = sigma2 * g[k] * g[k];
        const double shape = f[k] * f[k] / v;
        const double scale = v / f[k];
        Rng rng(stream_key(seed, k));
        std::gamma_distribution<double> gamma(shape, scale);
        y[k] = gamma(rng);
    }
    return pop.with_y(std::move(y));
}

std::vector<double> trend_values(const Population& pop, const TrendSpec& trend) {
    std::vector<double> f(pop.size());
    if (pop.dims() == 1) {
        const auto x = pop.x();
        for (std::size_t k = 0; k < f.size(); ++k) f[k] = eval_trend(trend, x[k]);
        return f;
    }
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = eval_trend(trend, pop.unit(k));
    return f;
}

std::vector<double> spread_values(const Population& pop, const SpreadSpec& spread) {
    const auto x = pop.x();
    std::vector<double> g(x.size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = eval_spread(spread, x[k]);
    return g;
}

double correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("correlation needs two equal-length vectors");
    }
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

PopulationMoments moments(const Population& pop, const TrendSpec& trend,
                          const SpreadSpec& spread) {
    const auto x = pop.x();
    const double N = static_cast<double>(pop.size());
    PopulationMoments m;

    m.mean_x = std::accumulate(x.begin(), x.end(), 0.0) / N;
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        const double d = v - m.mean_x;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= N;
    m3 /= N;
    m.sd_x = std::sqrt(m2);
    m.skew_x = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    m.S_11 = m2;

    const auto f = trend_values(pop, trend);
    m.f_bar = std::accumulate(f.begin(), f.end(), 0.0) / N;
    for (double v : f) m.S_ff += (v - m.f_bar) * (v - m.f_bar);
    m.S_ff /= N;

    const auto g = spread_values(pop, spread);
    for (double v : g) m.g2_bar += v * v;
    m.g2_bar /= N;
    m.x2beta_bar = m.g2_bar;

    // x against x^{e}, e = first trend exponent.
    const double e = trend.exponent(0);
    std::vector<double> xe(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) xe[k] = e == 0.0 ? 1.0 : std::pow(x[k], e);
    const double mean_xe = std::accumulate(xe.begin(), xe.end(), 0.0) / N;
    double s1b = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        s1b += (x[k] - m.mean_x) * (xe[k] - mean_xe);
        sbb += (xe[k] - mean_xe) * (xe[k] - mean_xe);
    }
    m.S_1beta = s1b / N;
    sbb /= N;
    m.R_1beta = (m.S_11 > 0.0 && sbb > 0.0) ? m.S_1beta / std::sqrt(m.S_11 * sbb) : 0.0;
    if (m.R_1beta > 1.0) m.R_1beta = 1.0;
    if (m.R_1beta < -1.0) m.R_1beta = -1.0;
    return m;
}

double solve_sigma_for_target_correlation(const Population& pop, const TrendSpec& trend,
                                          const SpreadSpec& spread, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw std::invalid_argument("target correlation must lie in (0, 1)");
    }
    const auto m = moments(pop, trend, spread);
    if (!(m.S_ff > 0.0)) throw std::invalid_argument("trend is constant on the population");
    return sigma_from_correlation(m, rho);
}

}  // namespace designrisk
