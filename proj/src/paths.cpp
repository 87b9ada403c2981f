#include "msde/paths.hpp"

#include <cmath>

#include "msde/csv.hpp"
#include "msde/ensemble.hpp"
#include "msde/rng.hpp"

namespace msde {

void BrownianPath::rebuild_cumulative() {
    const int n = grid.n_steps;
    const int m = noise_dim();
    cumulative.resize(n + 1, m);
    cumulative.row(0).setZero();
    for (int k = 0; k < n; ++k) {
        cumulative.row(k + 1) = cumulative.row(k) + increments.row(k);
    }
}

CameronMartinDirection CameronMartinDirection::constant(const TimeGrid& grid, const Vec& rate) {
    Mat hdot(grid.n_steps, rate.size());
    for (int k = 0; k < grid.n_steps; ++k) hdot.row(k) = rate.transpose();
    return from_density(grid, hdot);
}

CameronMartinDirection CameronMartinDirection::from_density(const TimeGrid& grid, const Mat& hdot) {
    if (hdot.rows() != grid.n_steps) {
        throw GridMismatchError("Cameron-Martin density rows must equal n_steps");
    }
    CameronMartinDirection h;
    h.grid = grid;
    h.hdot = hdot;
    const double dt = grid.dt();
    h.primitive.resize(grid.n_steps + 1, hdot.cols());
    h.primitive.row(0).setZero();
    for (int k = 0; k < grid.n_steps; ++k) {
        h.primitive.row(k + 1) = h.primitive.row(k) + hdot.row(k) * dt;
    }
    return h;
}

CameronMartinDirection CameronMartinDirection::project(
    const TimeGrid& grid, const std::function<Vec(double)>& density) {
    const Vec probe = density(0.0);
    Mat hdot(grid.n_steps, probe.size());
    for (int k = 0; k < grid.n_steps; ++k) {
        const double a = grid.node(k);
        const double b = grid.node(k + 1);
        const Vec mid = density(0.5 * (a + b));
        hdot.row(k) = ((density(a) + 4.0 * mid + density(b)) / 6.0).transpose();
    }
    return from_density(grid, hdot);
}

double CameronMartinDirection::norm_h_squared() const {
    return hdot.squaredNorm() * grid.dt();
}

BrownianPath sample_brownian(const TimeGrid& grid, int m, std::uint64_t stream_id,
                             std::uint64_t seed) {
    BrownianPath path;
    path.grid = grid;
    path.stream_id = stream_id;
    path.increments.resize(grid.n_steps, m);
    RandomStream rng(seed, stream_id);
    const double sqrt_dt = std::sqrt(grid.dt());
    for (int k = 0; k < grid.n_steps; ++k) {
        for (int i = 0; i < m; ++i) path.increments(k, i) = sqrt_dt * rng.normal();
    }
    path.rebuild_cumulative();
    return path;
}

BrownianPath shift_path(const BrownianPath& path, const CameronMartinDirection& h, double eps) {
    if (!(path.grid == h.grid) || path.noise_dim() != h.hdot.cols()) {
        throw GridMismatchError("shift_path: direction not on the path's grid");
    }
    BrownianPath shifted;
    shifted.grid = path.grid;
    shifted.stream_id = path.stream_id;
    shifted.increments = path.increments + eps * path.grid.dt() * h.hdot;
    shifted.rebuild_cumulative();
    return shifted;
}

Vec doleans_exponential(const BrownianPath& path, const CameronMartinDirection& h) {
    if (!(path.grid == h.grid) || path.noise_dim() != h.hdot.cols()) {
        throw GridMismatchError("doleans_exponential: direction not on the path's grid");
    }
    const int n = path.grid.n_steps;
    const double dt = path.grid.dt();
    Vec out(n + 1);
    double log_e = 0.0;
    out[0] = 1.0;
    for (int k = 0; k < n; ++k) {
        log_e += h.hdot.row(k).dot(path.increments.row(k));
        log_e -= 0.5 * h.hdot.row(k).squaredNorm() * dt;
        out[k + 1] = std::exp(log_e);
    }
    return out;
}

void write_path_csv(const BrownianPath& path, const std::string& file) {
    CsvWriter writer(file);
    std::vector<std::string> names = {"t"};
    for (int i = 0; i < path.noise_dim(); ++i) names.push_back("W" + std::to_string(i + 1));
    writer.header(names);
    std::vector<double> row(path.noise_dim() + 1);
    for (int k = 0; k <= path.grid.n_steps; ++k) {
        row[0] = path.grid.node(k);
        for (int i = 0; i < path.noise_dim(); ++i) row[i + 1] = path.cumulative(k, i);
        writer.row(row);
    }
    writer.close();
}

CameronMartinCheck cameron_martin_check(const PathFunctional& f, const CameronMartinDirection& h,
                                        int n_paths, std::uint64_t seed, int workers) {
    const int m = static_cast<int>(h.hdot.cols());
    std::vector<double> lhs_vals(n_paths), rhs_vals(n_paths), diff_vals(n_paths);
    parallel_for(n_paths, workers, [&](int i) {
        const BrownianPath omega = sample_brownian(h.grid, m, static_cast<std::uint64_t>(i), seed);
        const BrownianPath shifted = shift_path(omega, h, 1.0);
        const double weight = doleans_exponential(omega, h)[h.grid.n_steps];
        lhs_vals[i] = f(shifted);
        rhs_vals[i] = f(omega) * weight;
        diff_vals[i] = lhs_vals[i] - rhs_vals[i];
    });
    CameronMartinCheck out;
    const MeanCi lhs = mean_ci(lhs_vals);
    const MeanCi rhs = mean_ci(rhs_vals);
    const MeanCi diff = mean_ci(diff_vals);
    out.lhs = lhs.mean;
    out.rhs = rhs.mean;
    out.ci = diff.ci99;
    out.lhs_ci = lhs.ci99;
    out.rhs_ci = rhs.ci99;
    return out;
}

}  // namespace msde
