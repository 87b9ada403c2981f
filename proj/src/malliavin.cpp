#include "msde/malliavin.hpp"

#include <algorithm>
#include <cmath>

#include "msde/ensemble.hpp"

namespace msde {

MalliavinMatrix malliavin_matrix(const FlowMatrices& flow, const StatePath& xpath,
                                 const SdeModel& model, int t_index) {
    const int d = model.d;
    const double dt = xpath.grid.dt();
    MalliavinMatrix out;
    out.t_index = t_index;
    out.C = Mat::Zero(d, d);
    for (int s = 0; s < t_index; ++s) {
        const Mat ks = flow.K[s] * model.eval_diffusion(xpath.state(s));
        out.C += ks * ks.transpose() * dt;
    }
    Mat q = flow.J[t_index] * out.C * flow.J[t_index].transpose();
    if (!q.allFinite()) throw ModelError("malliavin_matrix: non-finite entries");
    out.Q = 0.5 * (q + q.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(out.Q);
    if (eig.info() != Eigen::Success) throw ModelError("malliavin_matrix: eigensolver failed");
    out.eigenvalues = eig.eigenvalues();
    return out;
}

Mat malliavin_matrix_from_grid(const DerivativeGrid& grid, int t_index, double dt) {
    Mat q = Mat::Zero(grid.dim(), grid.dim());
    for (int s = 0; s < t_index; ++s) {
        const auto block = grid.block(s, t_index);
        q += block * block.transpose() * dt;
    }
    return q;
}

SpectrumSummary covariance_spectrum(const MalliavinMatrix& q) {
    SpectrumSummary out;
    out.min_eig = q.eigenvalues.minCoeff();
    out.max_eig = q.eigenvalues.maxCoeff();
    out.condition = out.min_eig > 0.0 ? out.max_eig / out.min_eig
                                      : std::numeric_limits<double>::infinity();
    return out;
}

double rank_tol(double max_eig) { return 1e-8 * std::max(1.0, max_eig); }

double nondegenerate_fraction(std::span<const SpectrumSummary> spectra) {
    if (spectra.empty()) return 0.0;
    int count = 0;
    for (const auto& s : spectra) {
        if (s.min_eig > rank_tol(s.max_eig)) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(spectra.size());
}

GateauxReport gateaux_quotient_test(const SdeModel& model, const Vec& x0, const TimeGrid& grid,
                                    const CameronMartinDirection& h,
                                    const std::vector<double>& epsilons, int n_paths,
                                    std::uint64_t seed, Scheme scheme, int workers) {
    for (std::size_t i = 1; i < epsilons.size(); ++i) {
        if (epsilons[i] >= epsilons[i - 1]) {
            throw ConfigError("gateaux_quotient_test: epsilons must be decreasing");
        }
    }
    for (double eps : epsilons) {
        if (eps <= 0.0 || eps > 1.0) {
            throw ConfigError("gateaux_quotient_test: epsilons must lie in (0, 1]");
        }
    }
    const int n = grid.n_steps;
    const double dt = grid.dt();
    const auto n_eps = epsilons.size();

    struct PathResult {
        std::vector<double> sup_err;
        std::vector<double> sup_quot;
        bool excluded = false;
    };
    std::vector<PathResult> results(n_paths);

    parallel_for(n_paths, workers, [&](int p) {
        PathResult& res = results[p];
        res.sup_err.assign(n_eps, 0.0);
        res.sup_quot.assign(n_eps, 0.0);
        const BrownianPath omega = sample_brownian(grid, model.m, p, seed);
        StatePath x;
        try {
            x = solve_sde(model, x0, omega, scheme);
        } catch (const std::runtime_error&) {
            res.excluded = true;
            return;
        }

        // G(t_k) = sum_{s<k} D_s X(t_k) hdot_s dt, advanced by the exact
        // derivative of the integrator map in use. Differentiating the same
        // discrete map that produced the quotient keeps the comparison free
        // of an O(dt) scheme-mismatch floor.
        const LinearFieldData fields = linearize_along(model, x);
        const Mat eye = Mat::Identity(model.d, model.d);
        Mat g = Mat::Zero(n + 1, model.d);
        Vec gk = Vec::Zero(model.d);
        for (int k = 0; k < n; ++k) {
            const Vec dW = omega.increments.row(k).transpose();
            Vec stoch = gk + model.eval_diffusion(x.state(k)) * h.hdot.row(k).transpose() * dt;
            for (int i = 0; i < model.m; ++i) stoch += (fields.Sigma[k][i] * gk) * dW[i];
            switch (scheme) {
                case Scheme::Implicit: {
                    gk = (eye - dt * fields.B[k + 1]).partialPivLu().solve(stoch);
                    break;
                }
                case Scheme::Tamed: {
                    const Vec b = model.eval_drift(x.state(k));
                    const double norm_b = b.norm();
                    const double denom = 1.0 + dt * norm_b;
                    Mat jac = fields.B[k] / denom;
                    if (norm_b > 0.0) {
                        jac -= (dt / (denom * denom * norm_b)) * b *
                               (b.transpose() * fields.B[k]);
                    }
                    gk = stoch + jac * gk * dt;
                    break;
                }
                case Scheme::Explicit: {
                    gk = stoch + fields.B[k] * gk * dt;
                    break;
                }
            }
            g.row(k + 1) = gk.transpose();
        }

        for (std::size_t ei = 0; ei < n_eps; ++ei) {
            const double eps = epsilons[ei];
            StatePath shifted;
            try {
                shifted = solve_sde(model, x0, shift_path(omega, h, eps), scheme);
            } catch (const std::runtime_error&) {
                res.excluded = true;
                return;
            }
            double sup_err = 0.0, sup_quot = 0.0;
            for (int k = 0; k <= n; ++k) {
                const Vec quot = (shifted.state(k) - x.state(k)) / eps;
                sup_quot = std::max(sup_quot, quot.norm());
                sup_err = std::max(sup_err, (quot - g.row(k).transpose()).norm());
            }
            res.sup_err[ei] = sup_err;
            res.sup_quot[ei] = sup_quot;
        }
    });

    GateauxReport report;
    report.epsilons = epsilons;
    report.n_paths = n_paths;
    std::vector<double> errs, quots;
    errs.reserve(n_paths);
    for (std::size_t ei = 0; ei < n_eps; ++ei) {
        errs.clear();
        quots.clear();
        for (const auto& res : results) {
            if (res.excluded) continue;
            errs.push_back(res.sup_err[ei]);
            quots.push_back(res.sup_quot[ei]);
        }
        report.mean_sup_error.push_back(mean_ci(errs).mean);
        report.quotient_sup_mean.push_back(mean_ci(quots).mean);
    }
    report.n_excluded =
        static_cast<int>(std::count_if(results.begin(), results.end(),
                                       [](const PathResult& r) { return r.excluded; }));
    std::vector<double> log_eps, log_err;
    for (std::size_t ei = 0; ei < n_eps; ++ei) {
        if (report.mean_sup_error[ei] > 0.0) {
            log_eps.push_back(std::log(epsilons[ei]));
            log_err.push_back(std::log(report.mean_sup_error[ei]));
        }
    }
    report.slope = fit_line(log_eps, log_err).slope;
    return report;
}

namespace {

std::vector<MomentBoundRow> fit_moment_rows(const std::vector<std::vector<double>>& node_moments,
                                            const std::vector<double>& sup_moments,
                                            const TimeGrid& grid, const Vec& x0,
                                            const std::vector<double>& p_list) {
    std::vector<MomentBoundRow> rows;
    for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
        const double p = p_list[pi];
        MomentBoundRow row;
        row.p = p;
        row.sup_moment = sup_moments[pi];
        const double bound0 = std::pow(2.0, (p - 2.0) / 2.0) * (1.0 + std::pow(x0.norm(), p));
        double alpha = 0.0;
        std::vector<double> ts, logs;
        for (int k = 1; k <= grid.n_steps; ++k) {
            const double t = grid.node(k);
            const double moment = node_moments[pi][k];
            if (moment <= 0.0) continue;
            alpha = std::max(alpha, std::log(moment / bound0) / (p * t));
            ts.push_back(t);
            logs.push_back(std::log(moment));
        }
        row.alpha_hat = std::max(alpha, 0.0);
        const LineFit fit = fit_line(ts, logs);
        row.ls_alpha = fit.slope / p;
        double rss = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double r = logs[i] - (fit.intercept + fit.slope * ts[i]);
            rss += r * r;
        }
        row.ls_residual = ts.empty() ? 0.0 : std::sqrt(rss / ts.size());
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

std::vector<MomentBoundRow> moment_bound_report(std::span<const StatePath> ensemble, const Vec& x0,
                                                const std::vector<double>& p_list) {
    if (ensemble.empty()) throw ConfigError("moment_bound_report: empty ensemble");
    for (double p : p_list) {
        if (p < 2.0) throw ConfigError("moment_bound_report: p must be >= 2");
    }
    const TimeGrid grid = ensemble[0].grid;
    const int n = grid.n_steps;
    std::vector<std::vector<double>> node_moments(p_list.size(), std::vector<double>(n + 1, 0.0));
    std::vector<double> sup_moments(p_list.size(), 0.0);
    for (const StatePath& path : ensemble) {
        double sup_norm = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double norm = path.state(k).norm();
            sup_norm = std::max(sup_norm, norm);
            for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
                node_moments[pi][k] += std::pow(norm, p_list[pi]);
            }
        }
        for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
            sup_moments[pi] += std::pow(sup_norm, p_list[pi]);
        }
    }
    const auto count = static_cast<double>(ensemble.size());
    for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
        sup_moments[pi] /= count;
        for (double& v : node_moments[pi]) v /= count;
    }
    return fit_moment_rows(node_moments, sup_moments, grid, x0, p_list);
}

std::vector<MomentBoundRow> moment_bound_scan(const SdeModel& model, const Vec& x0,
                                              const TimeGrid& grid, int n_paths,
                                              std::uint64_t seed,
                                              const std::vector<double>& p_list, Scheme scheme,
                                              int workers) {
    for (double p : p_list) {
        if (p < 2.0) throw ConfigError("moment_bound_scan: p must be >= 2");
    }
    const int n = grid.n_steps;
    constexpr int kChunk = 256;
    const int n_chunks = (n_paths + kChunk - 1) / kChunk;

    // per-chunk partial sums; reduced in chunk order afterwards so worker
    // scheduling cannot change the result
    std::vector<std::vector<std::vector<double>>> chunk_nodes(
        n_chunks,
        std::vector<std::vector<double>>(p_list.size(), std::vector<double>(n + 1, 0.0)));
    std::vector<std::vector<double>> chunk_sups(n_chunks,
                                                std::vector<double>(p_list.size(), 0.0));

    parallel_for(n_chunks, workers, [&](int c) {
        const int begin = c * kChunk;
        const int end = std::min(n_paths, begin + kChunk);
        for (int pth = begin; pth < end; ++pth) {
            const BrownianPath omega = sample_brownian(grid, model.m, pth, seed);
            const StatePath x = solve_sde(model, x0, omega, scheme);
            double sup_norm = 0.0;
            for (int k = 0; k <= n; ++k) {
                const double norm = x.state(k).norm();
                sup_norm = std::max(sup_norm, norm);
                for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
                    chunk_nodes[c][pi][k] += std::pow(norm, p_list[pi]);
                }
            }
            for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
                chunk_sups[c][pi] += std::pow(sup_norm, p_list[pi]);
            }
        }
    });

    std::vector<std::vector<double>> node_moments(p_list.size(), std::vector<double>(n + 1, 0.0));
    std::vector<double> sup_moments(p_list.size(), 0.0);
    std::vector<double> scratch(n_chunks);
    for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
        for (int k = 0; k <= n; ++k) {
            for (int c = 0; c < n_chunks; ++c) scratch[c] = chunk_nodes[c][pi][k];
            node_moments[pi][k] = pairwise_sum(scratch) / n_paths;
        }
        for (int c = 0; c < n_chunks; ++c) scratch[c] = chunk_sups[c][pi];
        sup_moments[pi] = pairwise_sum(scratch) / n_paths;
    }
    return fit_moment_rows(node_moments, sup_moments, grid, x0, p_list);
}

PathBundle make_path_bundle(const SdeModel& model, const TimeGrid& grid, const Vec& x0,
                            std::uint64_t stream_id, std::uint64_t seed, Scheme scheme, int order,
                            int coarsening) {
    PathBundle bundle{sample_brownian(grid, model.m, stream_id, seed),
                      StatePath{},
                      DerivativeGrid(grid.n_steps, model.d, model.m),
                      std::nullopt};
    bundle.x = solve_sde(model, x0, bundle.noise, scheme);
    const FlowMatrices flow = compute_flow(model, bundle.x, bundle.noise);
    bundle.first = malliavin_first(model, bundle.x, bundle.noise, FirstOrderMethod::Flow, &flow);
    if (order >= 2) {
        bundle.second = malliavin_second(model, bundle.x, bundle.noise, bundle.first, coarsening);
    }
    return bundle;
}

NormEstimate sobolev_norm_estimate(std::span<const PathBundle> ensemble, int k, double p,
                                   int t_index) {
    if (ensemble.empty()) throw ConfigError("sobolev_norm_estimate: empty ensemble");
    if (k < 0 || k > 2) throw ConfigError("sobolev_norm_estimate: k must be in {0, 1, 2}");
    std::vector<double> per_path(ensemble.size());
    for (std::size_t idx = 0; idx < ensemble.size(); ++idx) {
        const PathBundle& bundle = ensemble[idx];
        const double dt = bundle.x.grid.dt();
        double q = std::pow(bundle.x.state(t_index).norm(), p);
        if (k >= 1) {
            double first_sq = 0.0;
            for (int s = 0; s < t_index; ++s) {
                first_sq += bundle.first.block(s, t_index).squaredNorm() * dt;
            }
            q += std::pow(first_sq, p / 2.0);
        }
        if (k >= 2) {
            if (!bundle.second) {
                throw ConfigError("sobolev_norm_estimate: bundle lacks a second-order grid");
            }
            const auto& grid2 = *bundle.second;
            const double w = grid2.coarsening() * dt;
            double second_sq = 0.0;
            const auto& nodes = grid2.nodes();
            for (std::size_t rp = 0; rp < nodes.size(); ++rp) {
                for (std::size_t sp = 0; sp < nodes.size(); ++sp) {
                    if (std::max(nodes[rp], nodes[sp]) > t_index) continue;
                    const double* cell =
                        grid2.cell(static_cast<int>(rp), static_cast<int>(sp), t_index);
                    double sq = 0.0;
                    const int len = bundle.x.dim() * bundle.noise.noise_dim() *
                                    bundle.noise.noise_dim();
                    for (int e = 0; e < len; ++e) sq += cell[e] * cell[e];
                    second_sq += sq * w * w;
                }
            }
            q += std::pow(second_sq, p / 2.0);
        }
        per_path[idx] = q;
    }
    const MeanCi stats = mean_ci(per_path);
    NormEstimate out;
    out.k = k;
    out.p = p;
    out.n_paths = static_cast<int>(ensemble.size());
    out.value = std::pow(stats.mean, 1.0 / p);
    // delta method for the p-th root
    out.std_error = stats.mean > 0.0
                        ? (stats.stddev / std::sqrt(static_cast<double>(ensemble.size()))) *
                              std::pow(stats.mean, 1.0 / p - 1.0) / p
                        : 0.0;
    return out;
}

KdeResult kde_density(std::span<const double> samples, std::optional<double> bandwidth) {
    if (samples.size() < 100) throw ConfigError("kde_density: need at least 100 samples");
    const auto n = static_cast<double>(samples.size());
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double mean = pairwise_sum(sorted) / n;
    double var = 0.0;
    for (double v : sorted) var += (v - mean) * (v - mean);
    var /= (n - 1.0);
    if (var == 0.0) throw ConfigError("kde_density: zero-variance samples");

    double bw;
    if (bandwidth) {
        bw = *bandwidth;
        if (bw <= 0.0) throw ConfigError("kde_density: bandwidth must be positive");
    } else {
        // Silverman's rule of thumb
        const double sd = std::sqrt(var);
        const auto quantile = [&](double q) {
            const double pos = q * (n - 1.0);
            const auto lo = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(lo);
            return sorted[lo] * (1.0 - frac) + sorted[std::min(lo + 1, sorted.size() - 1)] * frac;
        };
        const double iqr = quantile(0.75) - quantile(0.25);
        const double scale = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
        bw = 0.9 * scale * std::pow(n, -0.2);
    }

    constexpr int kGridSize = 512;
    KdeResult out;
    out.bandwidth = bw;
    out.x.resize(kGridSize);
    out.density.resize(kGridSize);
    const double lo = sorted.front() - 3.0 * bw;
    const double hi = sorted.back() + 3.0 * bw;
    const double step = (hi - lo) / (kGridSize - 1);
    const double norm = 1.0 / (n * bw * std::sqrt(2.0 * 3.14159265358979323846));
    for (int g = 0; g < kGridSize; ++g) {
        const double xg = lo + g * step;
        double acc = 0.0;
        for (double v : sorted) {
            const double z = (xg - v) / bw;
            acc += std::exp(-0.5 * z * z);
        }
        out.x[g] = xg;
        out.density[g] = acc * norm;
    }
    for (int g = 1; g + 1 < kGridSize; ++g) {
        const double second =
            (out.density[g + 1] - 2.0 * out.density[g] + out.density[g - 1]) / (step * step);
        out.max_second_derivative = std::max(out.max_second_derivative, std::abs(second));
    }
    return out;
}

}  // namespace msde
