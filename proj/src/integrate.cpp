#include "msde/integrate.hpp"

#include <cmath>

#include "msde/ensemble.hpp"

namespace msde {

namespace {

constexpr int kNewtonMaxIter = 50;

double newton_tol(const Vec& x) { return 1e-12 * (1.0 + x.norm()); }

}  // namespace

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Implicit: return "implicit";
        case Scheme::Tamed: return "tamed";
        default: return "explicit";
    }
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "implicit") return Scheme::Implicit;
    if (name == "tamed") return Scheme::Tamed;
    if (name == "explicit") return Scheme::Explicit;
    throw ConfigError("unknown scheme '" + name + "'");
}

Vec implicit_step(const SdeModel& model, const Vec& x, double dt, const Vec& dW) {
    if (model.constant_L > 0.0 && dt * model.constant_L >= 1.0) {
        throw StepError("implicit_step: dt * L >= 1 violates the solvability precondition");
    }
    const Vec rhs = x + model.eval_diffusion(x) * dW;
    const double tol = newton_tol(x);

    Vec z = x;
    Vec residual = z - rhs - model.eval_drift(z) * dt;
    for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
        if (residual.norm() <= tol) return z;
        const Mat jac = Mat::Identity(model.d, model.d) - dt * drift_jacobian(model, z);
        const Eigen::PartialPivLU<Mat> lu(jac);
        Vec step = lu.solve(residual);
        if (!step.allFinite()) {
            // damped fixed-point fallback: z <- z - 0.5 * G(z)
            step = 0.5 * residual;
        }
        z -= step;
        if (!z.allFinite()) throw StepError("implicit_step: iterate diverged");
        residual = z - rhs - model.eval_drift(z) * dt;
    }
    if (residual.norm() <= 10.0 * tol) return z;  // accept near-converged tail
    throw StepError("implicit_step: Newton did not converge in " +
                    std::to_string(kNewtonMaxIter) + " iterations");
}

StatePath solve_sde(const SdeModel& model, const Vec& x0, const BrownianPath& path, Scheme scheme) {
    if (x0.size() != model.d) throw ConfigError("solve_sde: x0 dimension mismatch");
    if (path.noise_dim() != model.m) throw ConfigError("solve_sde: noise dimension mismatch");
    if (scheme == Scheme::Explicit && !model.globally_lipschitz) {
        throw ConfigError("solve_sde: explicit scheme requires a globally Lipschitz model");
    }
    const int n = path.grid.n_steps;
    const double dt = path.grid.dt();

    StatePath out;
    out.grid = path.grid;
    out.scheme = scheme;
    out.source_stream = path.stream_id;
    out.states.resize(n + 1, model.d);
    out.states.row(0) = x0.transpose();

    Vec x = x0;
    for (int k = 0; k < n; ++k) {
        const Vec dW = path.increments.row(k).transpose();
        try {
            switch (scheme) {
                case Scheme::Implicit: {
                    x = implicit_step(model, x, dt, dW);
                    break;
                }
                case Scheme::Tamed: {
                    const Vec b = model.eval_drift(x);
                    x += b * (dt / (1.0 + dt * b.norm())) + model.eval_diffusion(x) * dW;
                    break;
                }
                case Scheme::Explicit: {
                    x += model.eval_drift(x) * dt + model.eval_diffusion(x) * dW;
                    break;
                }
            }
        } catch (const ModelError& e) {
            // a non-finite coefficient evaluation mid-trajectory is a blow-up
            throw DivergenceError(std::string("solve_sde: ") + e.what(), k + 1);
        }
        if (!x.allFinite()) throw DivergenceError("solve_sde: non-finite state", k + 1);
        out.states.row(k + 1) = x.transpose();
    }
    return out;
}

LinearFieldData linearize_along(const SdeModel& model, const StatePath& xpath) {
    const int n = xpath.grid.n_steps;
    LinearFieldData data;
    data.B.resize(n + 1);
    data.Sigma.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        const Vec x = xpath.state(k);
        data.B[k] = drift_jacobian(model, x);
        data.Sigma[k].reserve(model.m);
        for (int i = 0; i < model.m; ++i) {
            data.Sigma[k].push_back(diffusion_column_jacobian(model, i, x));
        }
    }
    return data;
}

StatePath solve_linear_sde(const LinearSdeCoefficients& coeffs, const BrownianPath& path) {
    if (!coeffs.fields) throw ConfigError("solve_linear_sde: missing multiplicative fields");
    const int n = path.grid.n_steps;
    const int d = static_cast<int>(coeffs.alpha.size());
    const int m = path.noise_dim();
    const int r = coeffs.start_index;
    if (r < 0 || r > n) throw ConfigError("solve_linear_sde: start index out of range");
    if (static_cast<int>(coeffs.fields->B.size()) != n + 1) {
        throw GridMismatchError("solve_linear_sde: coefficient grid misaligned with path grid");
    }
    const bool has_u = coeffs.U.size() > 0;
    const bool has_v = !coeffs.V.empty();
    const double dt = path.grid.dt();

    StatePath out;
    out.grid = path.grid;
    out.scheme = Scheme::Explicit;
    out.source_stream = path.stream_id;
    out.states = Mat::Zero(n + 1, d);
    out.states.row(r) = coeffs.alpha.transpose();

    Vec y = coeffs.alpha;
    for (int k = r; k < n; ++k) {
        Vec incr = coeffs.fields->B[k] * y * dt;
        if (has_u) incr += coeffs.U.row(k).transpose() * dt;
        const Vec dW = path.increments.row(k).transpose();
        for (int i = 0; i < m; ++i) {
            incr += (coeffs.fields->Sigma[k][i] * y) * dW[i];
            if (has_v) incr += coeffs.V[k].col(i) * dW[i];
        }
        y += incr;
        if (!y.allFinite()) throw DivergenceError("solve_linear_sde: non-finite state", k + 1);
        out.states.row(k + 1) = y.transpose();
    }
    return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit fit;
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2 || x.size() != y.size()) return fit;
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

StrongErrorTable strong_error_table(const SdeModel& model, const Vec& x0, double T,
                                    const std::vector<int>& resolutions, int n_paths,
                                    std::uint64_t seed, Scheme scheme, int oracle_factor,
                                    int workers) {
    if (resolutions.empty()) throw ConfigError("strong_error_table: no resolutions");
    int finest = 0;
    for (int r : resolutions) finest = std::max(finest, r);
    for (int r : resolutions) {
        if (r < 1 || finest % r != 0) {
            throw ConfigError("strong_error_table: resolutions must be nested (divide the finest)");
        }
    }
    const int oracle_steps = finest * std::max(1, oracle_factor);
    const TimeGrid fine_grid{T, oracle_steps};

    const auto n_res = resolutions.size();
    std::vector<std::vector<double>> sq_err(n_res, std::vector<double>(n_paths));
    parallel_for(n_paths, workers, [&](int p) {
        const BrownianPath fine = sample_brownian(fine_grid, model.m, p, seed);
        const Vec oracle = solve_sde(model, x0, fine, scheme).state(oracle_steps);
        for (std::size_t ri = 0; ri < n_res; ++ri) {
            const int n = resolutions[ri];
            const int factor = oracle_steps / n;
            BrownianPath coarse;
            coarse.grid = TimeGrid{T, n};
            coarse.stream_id = fine.stream_id;
            coarse.increments.resize(n, model.m);
            for (int k = 0; k < n; ++k) {
                coarse.increments.row(k) =
                    fine.cumulative.row((k + 1) * factor) - fine.cumulative.row(k * factor);
            }
            coarse.rebuild_cumulative();
            const Vec approx = solve_sde(model, x0, coarse, scheme).state(n);
            sq_err[ri][p] = (approx - oracle).squaredNorm();
        }
    });

    StrongErrorTable table;
    table.resolutions = resolutions;
    table.oracle_steps = oracle_steps;
    std::vector<double> log_dt, log_err;
    for (std::size_t ri = 0; ri < n_res; ++ri) {
        const double dt = T / resolutions[ri];
        const double rms = std::sqrt(pairwise_sum(sq_err[ri]) / n_paths);
        table.dt.push_back(dt);
        table.rms_error.push_back(rms);
        log_dt.push_back(std::log(dt));
        log_err.push_back(std::log(rms));
    }
    const LineFit fit = fit_line(log_dt, log_err);
    table.slope = fit.slope;
    table.r_squared = fit.r_squared;
    return table;
}

}  // namespace msde
