#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace designrisk {

// Gauss-Hermite rule for E[h(Z)], Z ~ N(0,1): nodes and weights with
// sum(weights) = 1. Computed by Golub-Welsch.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermite gauss_hermite(std::size_t n);

// Runs body(i) for i in [0, count) on up to `threads` workers. Callers write
// into per-index slots and reduce afterwards in index order.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace designrisk
