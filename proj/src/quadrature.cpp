#include "designrisk/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace designrisk {

GaussHermite gauss_hermite(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gauss_hermite: need at least one node");
    GaussHermite rule;
    if (n == 1) {
        rule.nodes = {0.0};
        rule.weights = {1.0};
        return rule;
    }
    // Jacobi matrix of the probabilists' Hermite polynomials: off-diagonal sqrt(k).
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 1; k < n; ++k) {
        J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
    if (eig.info() != Eigen::Success) throw std::runtime_error("gauss_hermite: eigensolver failed");
    rule.nodes.resize(n);
    rule.weights.resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = eig.eigenvalues()(i);
        const double v0 = eig.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;
        total += rule.weights[i];
    }
    for (auto& w : rule.weights) w /= total;
    // Symmetrize against round-off.
    for (std::size_t i = 0; i < n / 2; ++i) {
        const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace designrisk
