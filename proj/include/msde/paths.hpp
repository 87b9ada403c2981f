#pragma once

#include <cstdint>
#include <functional>

#include "msde/types.hpp"

namespace msde {

/// Uniform grid on [0, T] with n_steps cells.
struct TimeGrid {
    double horizon = 1.0;
    int n_steps = 1;

    double dt() const { return horizon / n_steps; }
    double node(int k) const { return k * horizon / n_steps; }

    bool operator==(const TimeGrid& other) const {
        return horizon == other.horizon && n_steps == other.n_steps;
    }
};

/// Discrete Brownian path: per-cell increments plus cumulative values.
/// Cumulative values are always the running sum of the stored increments,
/// so W(t_0) = 0 and W(t_k) = sum_{j<k} dW_j exactly as stored.
struct BrownianPath {
    TimeGrid grid;
    Mat increments;  // n_steps x m
    Mat cumulative;  // (n_steps+1) x m
    std::uint64_t stream_id = 0;

    int noise_dim() const { return static_cast<int>(increments.cols()); }

    /// Rebuild cumulative from increments (sequential summation).
    void rebuild_cumulative();

    /// W(t_k) as a vector in R^m.
    Vec value(int k) const { return cumulative.row(k).transpose(); }
};

/// Cameron-Martin direction: piecewise-constant density hdot on grid cells
/// and its primitive h(t_k) = sum_{j<k} hdot_j * dt.
struct CameronMartinDirection {
    TimeGrid grid;
    Mat hdot;       // n_steps x m
    Mat primitive;  // (n_steps+1) x m

    static CameronMartinDirection constant(const TimeGrid& grid, const Vec& rate);
    static CameronMartinDirection from_density(const TimeGrid& grid, const Mat& hdot);
    /// Project a continuous density onto the piecewise-constant cells
    /// (cell averages via Simpson's rule).
    static CameronMartinDirection project(const TimeGrid& grid,
                                          const std::function<Vec(double)>& density);

    /// ||h||_H^2 = sum |hdot_j|^2 dt.
    double norm_h_squared() const;
    Vec value(int k) const { return primitive.row(k).transpose(); }
};

/// Draw the Brownian path for (seed, stream_id); deterministic and
/// independent across stream ids.
BrownianPath sample_brownian(const TimeGrid& grid, int m, std::uint64_t stream_id,
                             std::uint64_t seed);

/// Shift along a Cameron-Martin direction: increments become
/// dW_k + eps * hdot_k * dt.
BrownianPath shift_path(const BrownianPath& path, const CameronMartinDirection& h, double eps);

/// Doleans-Dade exponential of hdot along the path, evaluated at every node.
/// Computed in log space, hence strictly positive.
Vec doleans_exponential(const BrownianPath& path, const CameronMartinDirection& h);

/// Paired Monte Carlo check of the Cameron-Martin formula
/// E[F(omega + h)] = E[F(omega) E(hdot)(T)] using common random numbers.
struct CameronMartinCheck {
    double lhs = 0.0;      // mean of F over shifted paths
    double rhs = 0.0;      // mean of F * Doleans weight over base paths
    double ci = 0.0;       // 99% half-width of the paired difference
    double lhs_ci = 0.0;   // 99% half-width of lhs alone
    double rhs_ci = 0.0;   // 99% half-width of rhs alone
};

using PathFunctional = std::function<double(const BrownianPath&)>;

CameronMartinCheck cameron_martin_check(const PathFunctional& f, const CameronMartinDirection& h,
                                        int n_paths, std::uint64_t seed, int workers = 1);

/// Export a path as CSV with columns t, W1..Wm (re-parses bit-exactly).
void write_path_csv(const BrownianPath& path, const std::string& file);

}  // namespace msde
