#pragma once

#include <cstdint>
#include <vector>

#include "msde/integrate.hpp"

namespace msde {

/// Jacobian flow J(t_k) and its pathwise inverse K(t_k) along one trajectory.
struct FlowMatrices {
    TimeGrid grid;
    std::vector<Mat> J;  // n+1 matrices, d x d, J(0) = I
    std::vector<Mat> K;  // n+1 matrices, d x d, K(0) = I
    double flow_defect = 0.0;  // max_k ||K(t_k) J(t_k) - I||_F
};

/// J(t) = I + int grad b(X) J ds + int grad sigma(X) J dW, column-wise via the
/// generic linear solver.
std::vector<Mat> jacobian_flow(const SdeModel& model, const StatePath& xpath,
                               const BrownianPath& path);

/// K(t) = I - int K [grad b - sum_i (grad sigma^i)^2] ds - int K grad sigma dW
/// (left-multiplied form with the quadratic-variation correction).
std::vector<Mat> inverse_flow(const SdeModel& model, const StatePath& xpath,
                              const BrownianPath& path);

FlowMatrices compute_flow(const SdeModel& model, const StatePath& xpath, const BrownianPath& path);

/// J_s(t) = J(t) K(s); requires s_index <= t_index.
Mat fundamental_matrix(const FlowMatrices& flow, int s_index, int t_index);

/// Reference defect level C * sqrt(dt) * (1 + log(1/dt)) for the flow
/// identity at step size dt.
double flow_tol(double dt, double c_model = 1.0);

/// Lower-triangular grid of first-order Malliavin derivatives:
/// D[s][t] in R^{d x m} for s <= t. No storage exists for s > t.
class DerivativeGrid {
public:
    DerivativeGrid(int n_steps, int d, int m, std::size_t memory_cap_bytes = kDefaultMemoryCap);

    int n_steps() const { return n_; }
    int dim() const { return d_; }
    int noise_dim() const { return m_; }

    double* data(int s, int t);
    const double* data(int s, int t) const;

    Eigen::Map<Mat> block(int s, int t) {
        return Eigen::Map<Mat>(data(s, t), d_, m_);
    }
    Eigen::Map<const Mat> block(int s, int t) const {
        return Eigen::Map<const Mat>(data(s, t), d_, m_);
    }

    /// Max absolute entry-difference over the shared triangular support.
    double max_abs_diff(const DerivativeGrid& other) const;

    static std::size_t required_bytes(int n_steps, int d, int m);
    static constexpr std::size_t kDefaultMemoryCap = std::size_t(1) << 31;  // 2 GiB

private:
    std::size_t cell_index(int s, int t) const;
    int n_, d_, m_;
    std::vector<double> data_;
};

enum class FirstOrderMethod { Direct, Flow };

/// First-order Malliavin derivative grid. The direct method advances the
/// variational SDE per row s; the flow method evaluates J_s(t) sigma(X(s)).
DerivativeGrid malliavin_first(const SdeModel& model, const StatePath& xpath,
                               const BrownianPath& path, FirstOrderMethod method,
                               const FlowMatrices* flow = nullptr,
                               std::size_t memory_cap_bytes = DerivativeGrid::kDefaultMemoryCap);

/// Second-order grid on a coarsened (r, s) index subset. Entry (r, s, t) is
/// the d x m x m tensor D_{rs}^{jk} X(t), stored for t >= max(r, s).
class SecondDerivativeGrid {
public:
    SecondDerivativeGrid(int n_steps, int d, int m, int coarsening,
                         std::size_t memory_cap_bytes = DerivativeGrid::kDefaultMemoryCap);

    const std::vector<int>& nodes() const { return nodes_; }
    int n_steps() const { return n_; }
    int coarsening() const { return coarsening_; }

    /// Value of D_{rs}^{jk} X^i(t) for retained node indices; r, s are
    /// positions in nodes().
    double value(int r_pos, int s_pos, int t, int i, int j, int k) const;
    double* cell(int r_pos, int s_pos, int t);
    const double* cell(int r_pos, int s_pos, int t) const;

private:
    std::size_t cell_offset(int r_pos, int s_pos, int t) const;
    int n_, d_, m_, coarsening_;
    std::vector<int> nodes_;
    std::vector<std::size_t> pair_offsets_;
    std::vector<double> data_;
};

SecondDerivativeGrid malliavin_second(const SdeModel& model, const StatePath& xpath,
                                      const BrownianPath& path, const DerivativeGrid& first,
                                      int coarsening,
                                      std::size_t memory_cap_bytes =
                                          DerivativeGrid::kDefaultMemoryCap);

}  // namespace msde
