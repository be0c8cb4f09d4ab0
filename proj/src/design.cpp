#include "designrisk/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "designrisk/csv.hpp"
#include "designrisk/rng.hpp"

namespace designrisk {

InclusionProbs pps_inclusion_probs(std::span<const double> size, std::size_t n) {
    const std::size_t N = size.size();
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    if (n > N) {
        throw std::invalid_argument("sample size n=" + std::to_string(n) +
                                    " exceeds population size N=" + std::to_string(N));
    }
    double total = 0.0;
    for (double s : size) {
        if (!std::isfinite(s) || s < 0.0) {
            throw std::invalid_argument("size measure must be finite and nonnegative");
        }
        total += s;
    }
    if (total <= 0.0) throw std::invalid_argument("size measure is zero for every unit");
    for (double s : size) {
        if (s == 0.0) throw std::invalid_argument("size measure must be positive for every unit");
    }

    InclusionProbs out;
    out.n = n;
    out.pi.assign(N, 0.0);
    std::vector<char> capped(N, 0);
    std::size_t n_capped = 0;
    for (;;) {
        double free_total = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            if (!capped[k]) free_total += size[k];
        }
        const double m = static_cast<double>(n - n_capped);
        bool changed = false;
        for (std::size_t k = 0; k < N; ++k) {
            if (capped[k]) {
                out.pi[k] = 1.0;
                continue;
            }
            out.pi[k] = m * size[k] / free_total;
        }
        for (std::size_t k = 0; k < N; ++k) {
            if (!capped[k] && out.pi[k] > 1.0) {
                capped[k] = 1;
                ++n_capped;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return out;
}

InclusionProbs pps_inclusion_probs(const Population& pop, const SpreadSpec& spread, std::size_t n) {
    return pps_inclusion_probs(spread_values(pop, spread), n);
}

Sample pareto_pps_sample(const InclusionProbs& probs, std::uint64_t seed) {
    const std::size_t N = probs.pi.size();
    Rng rng(seed);
    std::vector<std::size_t> certain;
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(N);
    for (std::size_t k = 0; k < N; ++k) {
        const double u = rng.uniform();
        const double p = probs.pi[k];
        if (p >= 1.0) {
            certain.push_back(k);
            continue;
        }
        const double q = (u / (1.0 - u)) / (p / (1.0 - p));
        ranked.emplace_back(q, k);
    }
    const std::size_t take = probs.n - std::min(probs.n, certain.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                      ranked.end());
    Sample s;
    s.units = std::move(certain);
    for (std::size_t i = 0; i < take; ++i) s.units.push_back(ranked[i].second);
    std::sort(s.units.begin(), s.units.end());
    s.pi.reserve(s.units.size());
    for (auto k : s.units) s.pi.push_back(probs.pi[k]);
    return s;
}

std::size_t StratifiedLayout::n() const {
    return std::accumulate(n_h.begin(), n_h.end(), std::size_t{0});
}

std::vector<double> StratifiedLayout::inclusion_probs() const {
    std::vector<double> pi(assignment.size());
    for (std::size_t k = 0; k < pi.size(); ++k) {
        const auto h = assignment[k];
        pi[k] = static_cast<double>(n_h[h]) / static_cast<double>(N_h[h]);
    }
    return pi;
}

std::vector<std::size_t> neyman_allocation(std::span<const std::size_t> N_h,
                                           std::span<const double> S_h, std::size_t n) {
    const std::size_t H = N_h.size();
    if (H == 0 || S_h.size() != H) throw std::invalid_argument("neyman_allocation: bad strata");
    const std::size_t N = std::accumulate(N_h.begin(), N_h.end(), std::size_t{0});
    if (n < 2 * H) {
        throw std::invalid_argument("sample size n=" + std::to_string(n) + " is below 2H=" +
                                    std::to_string(2 * H));
    }
    if (n > N) throw std::invalid_argument("sample size exceeds population size");
    for (auto Nh : N_h) {
        if (Nh < 2) throw std::invalid_argument("every stratum needs at least two units");
    }

    enum class State { Free, Floor, TakeAll };
    std::vector<State> state(H, State::Free);
    std::vector<double> raw(H, 0.0);

    for (;;) {
        double m = static_cast<double>(n);
        double w_total = 0.0;
        double n_total = 0.0;
        for (std::size_t h = 0; h < H; ++h) {
            if (state[h] == State::TakeAll) m -= static_cast<double>(N_h[h]);
            if (state[h] == State::Floor) m -= 2.0;
            if (state[h] == State::Free) {
                w_total += static_cast<double>(N_h[h]) * S_h[h];
                n_total += static_cast<double>(N_h[h]);
            }
        }
        const bool use_sizes = !(w_total > 0.0);
        for (std::size_t h = 0; h < H; ++h) {
            if (state[h] == State::TakeAll) raw[h] = static_cast<double>(N_h[h]);
            else if (state[h] == State::Floor) raw[h] = 2.0;
            else {
                const double w = use_sizes ? static_cast<double>(N_h[h])
                                           : static_cast<double>(N_h[h]) * S_h[h];
                raw[h] = m * w / (use_sizes ? n_total : w_total);
            }
        }
        bool moved = false;
        for (std::size_t h = 0; h < H; ++h) {
            if (state[h] == State::Free && raw[h] > static_cast<double>(N_h[h])) {
                state[h] = State::TakeAll;
                moved = true;
            }
        }
        if (moved) continue;
        for (std::size_t h = 0; h < H; ++h) {
            if (state[h] == State::Free && raw[h] < 2.0) {
                state[h] = State::Floor;
                moved = true;
            }
        }
        if (!moved) break;
    }

    // Largest remainder among free strata.
    std::vector<std::size_t> out(H);
    std::size_t assigned = 0;
    std::vector<std::pair<double, std::size_t>> remainders;
    for (std::size_t h = 0; h < H; ++h) {
        const double fl = std::floor(raw[h] + 1e-9);
        out[h] = static_cast<std::size_t>(fl);
        assigned += out[h];
        if (state[h] == State::Free && out[h] < N_h[h]) remainders.emplace_back(raw[h] - fl, h);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::size_t i = 0;
    while (assigned > n) {
        // Only reachable through floating-point slack in floor(raw).
        if (remainders.empty()) throw std::logic_error("neyman_allocation: rounding failed");
        --out[remainders.back().second];
        remainders.pop_back();
        --assigned;
    }
    while (assigned < n) {
        if (i >= remainders.size()) throw std::logic_error("neyman_allocation: rounding failed");
        ++out[remainders[i++].second];
        ++assigned;
    }
    return out;
}

namespace {

void fill_stratum_stats(StratifiedLayout& layout, std::span<const double> g) {
    const std::size_t H = layout.H;
    layout.N_h.assign(H, 0);
    for (auto h : layout.assignment) ++layout.N_h[h];
    layout.S_gh.assign(H, 0.0);
    if (g.empty()) return;
    std::vector<double> mean(H, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) mean[layout.assignment[k]] += g[k];
    for (std::size_t h = 0; h < H; ++h) {
        if (layout.N_h[h] > 0) mean[h] /= static_cast<double>(layout.N_h[h]);
    }
    std::vector<double> ss(H, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double d = g[k] - mean[layout.assignment[k]];
        ss[layout.assignment[k]] += d * d;
    }
    for (std::size_t h = 0; h < H; ++h) {
        if (layout.N_h[h] > 1) layout.S_gh[h] = std::sqrt(ss[h] / static_cast<double>(layout.N_h[h] - 1));
    }
}

}  // namespace

StratifiedLayout build_strata(std::span<const double> g, std::size_t H, std::size_t n,
                              std::size_t bins) {
    const std::size_t N = g.size();
    if (H == 0) throw std::invalid_argument("build_strata: H must be >= 1");
    if (bins == 0) throw std::invalid_argument("build_strata: bins must be >= 1");
    if (n < 2 * H && !(H == 1 && n >= 1)) {
        throw std::invalid_argument("build_strata: n=" + std::to_string(n) + " is below 2H=" +
                                    std::to_string(2 * H));
    }
    if (n > N) throw std::invalid_argument("build_strata: n exceeds N");
    for (double v : g) {
        if (!std::isfinite(v)) throw std::invalid_argument("build_strata: g must be finite");
    }

    StratifiedLayout layout;
    layout.H = H;
    if (H == 1) {
        layout.assignment.assign(N, 0);
        layout.bins_used = bins;
        fill_stratum_stats(layout, g);
        layout.n_h = {n};
        return layout;
    }

    const auto [lo_it, hi_it] = std::minmax_element(g.begin(), g.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) throw std::invalid_argument("build_strata: g is constant, cannot form strata");

    constexpr int kMaxRebins = 12;
    std::size_t b = bins;
    for (int attempt = 0; attempt <= kMaxRebins; ++attempt, b *= 2) {
        const double width = (hi - lo) / static_cast<double>(b);
        std::vector<std::size_t> bin_of(N);
        std::vector<double> count(b, 0.0);
        for (std::size_t k = 0; k < N; ++k) {
            auto i = static_cast<std::size_t>((g[k] - lo) / width);
            if (i >= b) i = b - 1;
            bin_of[k] = i;
            count[i] += 1.0;
        }
        std::vector<double> cum(b);
        double acc = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            acc += std::sqrt(count[i]);
            cum[i] = acc;
        }

        std::vector<std::size_t> cuts;
        bool ok = true;
        std::ptrdiff_t prev = -1;
        for (std::size_t h = 1; h < H; ++h) {
            const double target = acc * static_cast<double>(h) / static_cast<double>(H);
            std::size_t best = 0;
            double best_d = std::abs(cum[0] - target);
            for (std::size_t i = 1; i < b; ++i) {
                const double d = std::abs(cum[i] - target);
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            if (static_cast<std::ptrdiff_t>(best) <= prev) best = static_cast<std::size_t>(prev + 1);
            if (best >= b - 1) {
                ok = false;
                break;
            }
            cuts.push_back(best);
            prev = static_cast<std::ptrdiff_t>(best);
        }
        if (!ok) continue;

        layout.assignment.assign(N, 0);
        for (std::size_t k = 0; k < N; ++k) {
            layout.assignment[k] = static_cast<std::size_t>(
                std::lower_bound(cuts.begin(), cuts.end(), bin_of[k]) - cuts.begin());
        }
        fill_stratum_stats(layout, g);
        if (std::any_of(layout.N_h.begin(), layout.N_h.end(), [](auto v) { return v < 2; })) {
            continue;
        }
        layout.boundaries.clear();
        for (auto c : cuts) layout.boundaries.push_back(lo + static_cast<double>(c + 1) * width);
        layout.bins_used = b;
        layout.n_h = neyman_allocation(layout.N_h, layout.S_gh, n);
        return layout;
    }
    throw std::runtime_error("build_strata: could not place " + std::to_string(H) +
                             " nonempty strata (each with >= 2 units) after re-binning up to " +
                             std::to_string(b / 2) + " bins");
}

StratifiedLayout build_strata(const Population& pop, const SpreadSpec& spread, std::size_t H,
                              std::size_t n, std::size_t bins) {
    return build_strata(spread_values(pop, spread), H, n, bins);
}

StratifiedLayout make_layout(std::vector<std::size_t> assignment, std::vector<std::size_t> n_h,
                             std::span<const double> g) {
    StratifiedLayout layout;
    layout.H = n_h.size();
    layout.assignment = std::move(assignment);
    for (auto h : layout.assignment) {
        if (h >= layout.H) throw std::invalid_argument("make_layout: stratum index out of range");
    }
    if (!g.empty() && g.size() != layout.assignment.size()) {
        throw std::invalid_argument("make_layout: g length differs from N");
    }
    fill_stratum_stats(layout, g);
    layout.n_h = std::move(n_h);
    for (std::size_t h = 0; h < layout.H; ++h) {
        if (layout.n_h[h] < 1 || layout.n_h[h] > layout.N_h[h]) {
            throw std::invalid_argument("make_layout: need 1 <= n_h <= N_h in every stratum");
        }
    }
    layout.bins_used = 0;
    return layout;
}

Sample stsi_sample(const StratifiedLayout& layout, std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> members(layout.H);
    for (std::size_t k = 0; k < layout.assignment.size(); ++k) {
        members[layout.assignment[k]].push_back(k);
    }
    Rng rng(seed);
    Sample s;
    s.units.reserve(layout.n());
    for (std::size_t h = 0; h < layout.H; ++h) {
        auto& m = members[h];
        const std::size_t take = layout.n_h[h];
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t remaining = m.size() - i;
            const auto j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(remaining));
            std::swap(m[i], m[std::min(j, m.size() - 1)]);
            s.units.push_back(m[i]);
        }
    }
    std::sort(s.units.begin(), s.units.end());
    s.pi.reserve(s.units.size());
    for (auto k : s.units) {
        const auto h = layout.assignment[k];
        s.pi.push_back(static_cast<double>(layout.n_h[h]) / static_cast<double>(layout.N_h[h]));
    }
    return s;
}

ExactDesign::ExactDesign(std::size_t N,
                         std::vector<std::pair<std::vector<std::size_t>, double>> support)
    : N_(N), support_(std::move(support)) {
    if (support_.empty()) throw std::invalid_argument("exact design needs a nonempty support");
    n_ = support_.front().first.size();
    double total = 0.0;
    pi_.assign(N_, 0.0);
    joint_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N_), static_cast<Eigen::Index>(N_));
    for (auto& [units, p] : support_) {
        if (units.size() != n_) throw std::invalid_argument("exact design samples differ in size");
        if (!(p >= 0.0)) throw std::invalid_argument("exact design probabilities must be >= 0");
        std::sort(units.begin(), units.end());
        if (std::adjacent_find(units.begin(), units.end()) != units.end()) {
            throw std::invalid_argument("exact design sample repeats a unit");
        }
        if (!units.empty() && units.back() >= N_) {
            throw std::invalid_argument("exact design unit out of range");
        }
        for (auto k : units) {
            pi_[k] += p;
            for (auto l : units) {
                joint_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) += p;
            }
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("exact design probabilities sum to " + std::to_string(total));
    }
}

ExactDesign ExactDesign::srs(std::size_t N, std::size_t n) {
    if (n == 0 || n > N) throw std::invalid_argument("srs: need 0 < n <= N");
    std::vector<std::pair<std::vector<std::size_t>, double>> support;
    std::vector<bool> mask(N, false);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n), true);
    do {
        std::vector<std::size_t> s;
        for (std::size_t k = 0; k < N; ++k) {
            if (mask[k]) s.push_back(k);
        }
        support.emplace_back(std::move(s), 0.0);
    } while (std::prev_permutation(mask.begin(), mask.end()));
    const double p = 1.0 / static_cast<double>(support.size());
    for (auto& entry : support) entry.second = p;
    return ExactDesign(N, std::move(support));
}

double joint_inclusion_variance(std::span<const double> pi, const Eigen::MatrixXd& joint,
                                std::span<const double> e) {
    const std::size_t N = pi.size();
    double v = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        const double ck = e[k] / pi[k];
        for (std::size_t l = 0; l < N; ++l) {
            const double pkl = k == l ? pi[k]
                                      : joint(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
            v += (pkl - pi[k] * pi[l]) * ck * (e[l] / pi[l]);
        }
    }
    return v;
}

double hajek_variance(std::span<const double> pi, std::span<const double> e) {
    double c_total = 0.0;
    double a_num = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) {
        const double c = pi[k] * (1.0 - pi[k]);
        c_total += c;
        a_num += c * e[k] / pi[k];
    }
    if (c_total <= 0.0) return 0.0;
    const double a = a_num / c_total;
    double v = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) {
        const double c = pi[k] * (1.0 - pi[k]);
        const double d = e[k] / pi[k] - a;
        v += c * d * d;
    }
    return v;
}

double stsi_variance(const StratifiedLayout& layout, std::span<const double> e) {
    const std::size_t H = layout.H;
    std::vector<double> mean(H, 0.0);
    for (std::size_t k = 0; k < e.size(); ++k) mean[layout.assignment[k]] += e[k];
    for (std::size_t h = 0; h < H; ++h) mean[h] /= static_cast<double>(layout.N_h[h]);
    std::vector<double> ss(H, 0.0);
    for (std::size_t k = 0; k < e.size(); ++k) {
        const double d = e[k] - mean[layout.assignment[k]];
        ss[layout.assignment[k]] += d * d;
    }
    double v = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
        const double Nh = static_cast<double>(layout.N_h[h]);
        const double nh = static_cast<double>(layout.n_h[h]);
        if (layout.N_h[h] < 2 || layout.n_h[h] == layout.N_h[h]) continue;
        const double s2 = ss[h] / (Nh - 1.0);
        v += Nh * Nh * (1.0 - nh / Nh) * s2 / nh;
    }
    return v;
}

std::string DesignSpec::label() const {
    std::ostringstream out;
    switch (kind) {
        case Kind::Pps: out << "pps(" << spread_exponent << ")"; break;
        case Kind::Stsi: out << "stsi(H=" << strata << ";" << spread_exponent << ")"; break;
        case Kind::Srs: out << "srs"; break;
    }
    return out.str();
}

DesignOperator::DesignOperator(InclusionProbs probs) : impl_(std::move(probs)) {
    pi_ = std::get<InclusionProbs>(impl_).pi;
}

DesignOperator::DesignOperator(StratifiedLayout layout) : impl_(std::move(layout)) {
    pi_ = std::get<StratifiedLayout>(impl_).inclusion_probs();
}

DesignOperator::DesignOperator(ExactDesign design) : impl_(std::move(design)) {
    pi_ = std::get<ExactDesign>(impl_).pi();
    for (double p : pi_) {
        if (!(p > 0.0)) throw std::invalid_argument("exact design has a unit with pi_k = 0");
    }
}

std::string DesignOperator::kind() const {
    switch (impl_.index()) {
        case 0: return "pps";
        case 1: return "stsi";
        default: return "exact";
    }
}

std::size_t DesignOperator::N() const { return pi_.size(); }

std::size_t DesignOperator::n() const {
    return std::visit(
        [](const auto& d) -> std::size_t {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, InclusionProbs>) return d.n;
            else return d.n();
        },
        impl_);
}

double DesignOperator::variance(std::span<const double> e) const {
    if (e.size() != pi_.size()) throw std::invalid_argument("residual vector length differs from N");
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, InclusionProbs>) return hajek_variance(d.pi, e);
            else if constexpr (std::is_same_v<T, StratifiedLayout>) return stsi_variance(d, e);
            else return joint_inclusion_variance(d.pi(), d.joint(), e);
        },
        impl_);
}

Sample DesignOperator::draw(std::uint64_t seed) const {
    return std::visit(
        [&](const auto& d) -> Sample {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, InclusionProbs>) return pareto_pps_sample(d, seed);
            else if constexpr (std::is_same_v<T, StratifiedLayout>) return stsi_sample(d, seed);
            else {
                Rng rng(seed);
                const double u = rng.uniform();
                double acc = 0.0;
                const auto& sup = d.support();
                std::size_t pick = sup.size() - 1;
                for (std::size_t i = 0; i < sup.size(); ++i) {
                    acc += sup[i].second;
                    if (u < acc) {
                        pick = i;
                        break;
                    }
                }
                Sample s;
                s.units = sup[pick].first;
                for (auto k : s.units) s.pi.push_back(d.pi()[k]);
                return s;
            }
        },
        impl_);
}

double DesignOperator::monte_carlo_variance(std::span<const double> e, std::size_t draws,
                                            std::uint64_t seed) const {
    if (draws == 0) throw std::invalid_argument("monte_carlo_variance: draws must be positive");
    const double total = std::accumulate(e.begin(), e.end(), 0.0);
    double acc = 0.0;
    for (std::size_t r = 0; r < draws; ++r) {
        const Sample s = draw(stream_key(seed, r));
        double est = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) est += e[s.units[i]] / s.pi[i];
        acc += (est - total) * (est - total);
    }
    return acc / static_cast<double>(draws);
}

DesignOperator bind_design(const DesignSpec& spec, const Population& pop, std::size_t n) {
    const SpreadSpec spread{spec.spread_exponent};
    switch (spec.kind) {
        case DesignSpec::Kind::Pps:
            return DesignOperator(pps_inclusion_probs(pop, spread, n));
        case DesignSpec::Kind::Stsi:
            return DesignOperator(build_strata(pop, spread, spec.strata, n, spec.bins));
        case DesignSpec::Kind::Srs:
            return DesignOperator(make_layout(std::vector<std::size_t>(pop.size(), 0), {n}));
    }
    throw std::invalid_argument("unknown design kind");
}

std::string strata_csv(const StratifiedLayout& layout) {
    std::ostringstream out;
    out << "h,N_h,n_h,S_gh,boundary\n";
    for (std::size_t h = 0; h < layout.H; ++h) {
        out << (h + 1) << ',' << layout.N_h[h] << ',' << layout.n_h[h] << ','
            << format_double(layout.S_gh[h]) << ',';
        if (h < layout.boundaries.size()) out << format_double(layout.boundaries[h]);
        else out << "inf";
        out << '\n';
    }
    return out.str();
}

}  // namespace designrisk
