#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace msde {

/// Run fn(i) for i in [0, n) on `workers` threads. Each index writes only its
/// own slot, so results are identical for any worker count.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

/// Pairwise (cascade) summation: order-independent to reported precision and
/// far more accurate than naive left-to-right sums on long arrays.
double pairwise_sum(std::span<const double> values);

struct MeanCi {
    double mean = 0.0;
    double stddev = 0.0;
    double ci99 = 0.0;  // 2.576 * stddev / sqrt(n)
};

/// Mean and 99% half-width computed from stored per-sample values
/// (deterministic reduction order).
MeanCi mean_ci(std::span<const double> values);

int default_worker_count();

}  // namespace msde
