#include "msde/variational.hpp"

#include <cmath>

namespace msde {

std::vector<Mat> jacobian_flow(const SdeModel& model, const StatePath& xpath,
                               const BrownianPath& path) {
    if (!(xpath.grid == path.grid)) {
        throw GridMismatchError("jacobian_flow: state path not generated on this Brownian path");
    }
    const int n = path.grid.n_steps;
    const int d = model.d;
    const auto fields = std::make_shared<const LinearFieldData>(linearize_along(model, xpath));

    std::vector<Mat> J(n + 1, Mat::Zero(d, d));
    for (int col = 0; col < d; ++col) {
        LinearSdeCoefficients coeffs;
        coeffs.start_index = 0;
        coeffs.alpha = Vec::Unit(d, col);
        coeffs.fields = fields;
        const StatePath column = solve_linear_sde(coeffs, path);
        for (int k = 0; k <= n; ++k) J[k].col(col) = column.state(k);
    }
    return J;
}

std::vector<Mat> inverse_flow(const SdeModel& model, const StatePath& xpath,
                              const BrownianPath& path) {
    if (!(xpath.grid == path.grid)) {
        throw GridMismatchError("inverse_flow: state path not generated on this Brownian path");
    }
    const int n = path.grid.n_steps;
    const int d = model.d;
    const int m = model.m;
    const double dt = path.grid.dt();
    const LinearFieldData fields = linearize_along(model, xpath);

    std::vector<Mat> K(n + 1);
    K[0] = Mat::Identity(d, d);
    for (int k = 0; k < n; ++k) {
        // drift matrix with the quadratic-variation correction sum_i (grad sigma^i)^2
        Mat corrected = fields.B[k];
        for (int i = 0; i < m; ++i) corrected -= fields.Sigma[k][i] * fields.Sigma[k][i];
        Mat next = K[k] - (K[k] * corrected) * dt;
        const Vec dW = path.increments.row(k).transpose();
        for (int i = 0; i < m; ++i) next -= (K[k] * fields.Sigma[k][i]) * dW[i];
        if (!next.allFinite()) throw DivergenceError("inverse_flow: non-finite entries", k + 1);
        K[k + 1] = std::move(next);
    }
    return K;
}

FlowMatrices compute_flow(const SdeModel& model, const StatePath& xpath,
                          const BrownianPath& path) {
    FlowMatrices flow;
    flow.grid = path.grid;
    flow.J = jacobian_flow(model, xpath, path);
    flow.K = inverse_flow(model, xpath, path);
    const Mat eye = Mat::Identity(model.d, model.d);
    for (std::size_t k = 0; k < flow.J.size(); ++k) {
        flow.flow_defect = std::max(flow.flow_defect, (flow.K[k] * flow.J[k] - eye).norm());
    }
    return flow;
}

Mat fundamental_matrix(const FlowMatrices& flow, int s_index, int t_index) {
    if (s_index > t_index) {
        throw ConfigError("fundamental_matrix: requires s_index <= t_index");
    }
    return flow.J[t_index] * flow.K[s_index];
}

double flow_tol(double dt, double c_model) {
    return c_model * std::sqrt(dt) * (1.0 + std::log(1.0 / dt));
}

DerivativeGrid::DerivativeGrid(int n_steps, int d, int m, std::size_t memory_cap_bytes)
    : n_(n_steps), d_(d), m_(m) {
    const std::size_t bytes = required_bytes(n_steps, d, m);
    if (bytes > memory_cap_bytes) {
        throw BudgetError("DerivativeGrid: " + std::to_string(bytes) +
                          " bytes exceed the configured memory cap");
    }
    data_.assign(bytes / sizeof(double), 0.0);
}

std::size_t DerivativeGrid::required_bytes(int n_steps, int d, int m) {
    const auto n = static_cast<std::size_t>(n_steps);
    const std::size_t cells = (n + 1) * (n + 2) / 2;
    return cells * static_cast<std::size_t>(d) * static_cast<std::size_t>(m) * sizeof(double);
}

std::size_t DerivativeGrid::cell_index(int s, int t) const {
    // row s starts after rows 0..s-1, which hold (n+1) + n + ... entries
    const auto su = static_cast<std::size_t>(s);
    const auto n1 = static_cast<std::size_t>(n_) + 1;
    const std::size_t row_start = su * n1 - su * (su - 1) / 2;
    return (row_start + static_cast<std::size_t>(t - s)) * d_ * m_;
}

double* DerivativeGrid::data(int s, int t) {
    if (s < 0 || t > n_ || s > t) {
        throw ConfigError("DerivativeGrid: index outside triangular support");
    }
    return data_.data() + cell_index(s, t);
}

const double* DerivativeGrid::data(int s, int t) const {
    if (s < 0 || t > n_ || s > t) {
        throw ConfigError("DerivativeGrid: index outside triangular support");
    }
    return data_.data() + cell_index(s, t);
}

double DerivativeGrid::max_abs_diff(const DerivativeGrid& other) const {
    if (other.n_ != n_ || other.d_ != d_ || other.m_ != m_) {
        throw GridMismatchError("DerivativeGrid: incompatible shapes");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        worst = std::max(worst, std::abs(data_[i] - other.data_[i]));
    }
    return worst;
}

DerivativeGrid malliavin_first(const SdeModel& model, const StatePath& xpath,
                               const BrownianPath& path, FirstOrderMethod method,
                               const FlowMatrices* flow, std::size_t memory_cap_bytes) {
    if (!(xpath.grid == path.grid)) {
        throw GridMismatchError("malliavin_first: state path not generated on this Brownian path");
    }
    const int n = path.grid.n_steps;
    const int d = model.d;
    const int m = model.m;
    const double dt = path.grid.dt();
    DerivativeGrid grid(n, d, m, memory_cap_bytes);

    if (method == FirstOrderMethod::Direct) {
        const LinearFieldData fields = linearize_along(model, xpath);
        Mat row(d, m);
        for (int s = 0; s <= n; ++s) {
            row = model.eval_diffusion(xpath.state(s));
            grid.block(s, s) = row;
            for (int k = s; k < n; ++k) {
                Mat incr = fields.B[k] * row * dt;
                const Vec dW = path.increments.row(k).transpose();
                for (int i = 0; i < m; ++i) incr += (fields.Sigma[k][i] * row) * dW[i];
                row += incr;
                if (!row.allFinite()) {
                    throw DivergenceError("malliavin_first: non-finite entries", k + 1);
                }
                grid.block(s, k + 1) = row;
            }
        }
        return grid;
    }

    FlowMatrices local;
    if (!flow) {
        local = compute_flow(model, xpath, path);
        flow = &local;
    }
    for (int s = 0; s <= n; ++s) {
        const Mat seed = flow->K[s] * model.eval_diffusion(xpath.state(s));
        for (int t = s; t <= n; ++t) {
            grid.block(s, t) = flow->J[t] * seed;
        }
    }
    return grid;
}

SecondDerivativeGrid::SecondDerivativeGrid(int n_steps, int d, int m, int coarsening,
                                           std::size_t memory_cap_bytes)
    : n_(n_steps), d_(d), m_(m), coarsening_(coarsening) {
    if (coarsening < 1) throw ConfigError("SecondDerivativeGrid: coarsening must be >= 1");
    for (int k = 0; k <= n_; k += coarsening) nodes_.push_back(k);

    const std::size_t cell = static_cast<std::size_t>(d_) * m_ * m_;
    std::size_t total = 0;
    pair_offsets_.reserve(nodes_.size() * nodes_.size());
    for (int r : nodes_) {
        for (int s : nodes_) {
            pair_offsets_.push_back(total);
            total += static_cast<std::size_t>(n_ - std::max(r, s) + 1) * cell;
        }
    }
    if (total * sizeof(double) > memory_cap_bytes) {
        throw BudgetError("SecondDerivativeGrid: memory cap exceeded; use a larger coarsening");
    }
    data_.assign(total, 0.0);
}

std::size_t SecondDerivativeGrid::cell_offset(int r_pos, int s_pos, int t) const {
    const int r = nodes_[r_pos];
    const int s = nodes_[s_pos];
    const int t0 = std::max(r, s);
    if (t < t0 || t > n_) {
        throw ConfigError("SecondDerivativeGrid: index outside stored support");
    }
    const std::size_t pair = pair_offsets_[r_pos * nodes_.size() + s_pos];
    return pair + static_cast<std::size_t>(t - t0) * d_ * m_ * m_;
}

double* SecondDerivativeGrid::cell(int r_pos, int s_pos, int t) {
    return data_.data() + cell_offset(r_pos, s_pos, t);
}

const double* SecondDerivativeGrid::cell(int r_pos, int s_pos, int t) const {
    return data_.data() + cell_offset(r_pos, s_pos, t);
}

double SecondDerivativeGrid::value(int r_pos, int s_pos, int t, int i, int j, int k) const {
    return cell(r_pos, s_pos, t)[i + d_ * (j + m_ * k)];
}

SecondDerivativeGrid malliavin_second(const SdeModel& model, const StatePath& xpath,
                                      const BrownianPath& path, const DerivativeGrid& first,
                                      int coarsening, std::size_t memory_cap_bytes) {
    if (!(xpath.grid == path.grid)) {
        throw GridMismatchError("malliavin_second: state path not generated on this Brownian path");
    }
    if (first.n_steps() != path.grid.n_steps) {
        throw GridMismatchError("malliavin_second: first-order grid misaligned");
    }
    const int n = path.grid.n_steps;
    const int d = model.d;
    const int m = model.m;
    const double dt = path.grid.dt();
    SecondDerivativeGrid grid(n, d, m, coarsening, memory_cap_bytes);
    const LinearFieldData fields = linearize_along(model, xpath);

    const auto& nodes = grid.nodes();
    for (std::size_t rp = 0; rp < nodes.size(); ++rp) {
        for (std::size_t sp = 0; sp < nodes.size(); ++sp) {
            const int r = nodes[rp];
            const int s = nodes[sp];
            const int t0 = std::max(r, s);
            for (int j = 0; j < m; ++j) {
                for (int k = 0; k < m; ++k) {
                    // initial value at t0: D_s^k sigma^j(X(r)) for r >= s,
                    // grad sigma^k(X(s)) D_r^j X(s) for r < s
                    Vec z(d);
                    if (r >= s) {
                        z = fields.Sigma[r][j] * first.block(s, r).col(k);
                    } else {
                        z = fields.Sigma[s][k] * first.block(r, s).col(j);
                    }
                    double* cell0 = grid.cell(static_cast<int>(rp), static_cast<int>(sp), t0);
                    for (int i = 0; i < d; ++i) cell0[i + d * (j + m * k)] = z[i];

                    for (int u = t0; u < n; ++u) {
                        const Vec d_sk = first.block(s, u).col(k);
                        const Vec d_rj = first.block(r, u).col(j);
                        const Vec forcing_u =
                            deriv_apply(model, DerivTarget::Drift, 0, xpath.state(u), 2,
                                        {d_sk, d_rj});
                        Vec incr = (forcing_u + fields.B[u] * z) * dt;
                        const Vec dW = path.increments.row(u).transpose();
                        for (int i = 0; i < m; ++i) {
                            const Vec forcing_v =
                                deriv_apply(model, DerivTarget::DiffusionColumn, i,
                                            xpath.state(u), 2, {d_sk, d_rj});
                            incr += (forcing_v + fields.Sigma[u][i] * z) * dW[i];
                        }
                        z += incr;
                        if (!z.allFinite()) {
                            throw DivergenceError("malliavin_second: non-finite entries", u + 1);
                        }
                        double* cell = grid.cell(static_cast<int>(rp), static_cast<int>(sp), u + 1);
                        for (int i = 0; i < d; ++i) cell[i + d * (j + m * k)] = z[i];
                    }
                }
            }
        }
    }
    return grid;
}

}  // namespace msde
