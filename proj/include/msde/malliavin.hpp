#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msde/variational.hpp"

namespace msde {

/// Malliavin covariance matrix at one grid node:
/// Q(t) = int_0^t D_s X D_s X^T ds = J(t) C(t) J(t)^T.
struct MalliavinMatrix {
    int t_index = 0;
    Mat Q;            // symmetrized before eigendecomposition
    Mat C;            // reduced covariance int K sigma sigma^T K^T ds
    Vec eigenvalues;  // ascending
};

MalliavinMatrix malliavin_matrix(const FlowMatrices& flow, const StatePath& xpath,
                                 const SdeModel& model, int t_index);

/// Oracle route: Riemann sum of D_s X D_s X^T directly from the grid.
Mat malliavin_matrix_from_grid(const DerivativeGrid& grid, int t_index, double dt);

struct SpectrumSummary {
    double min_eig = 0.0;
    double max_eig = 0.0;
    double condition = 0.0;
};

SpectrumSummary covariance_spectrum(const MalliavinMatrix& q);

/// Scale-relative threshold under which an eigenvalue counts as zero.
double rank_tol(double max_eig);

/// Ensemble summary: fraction of paths whose smallest eigenvalue clears the
/// scale-relative rank tolerance.
double nondegenerate_fraction(std::span<const SpectrumSummary> spectra);

/// Difference-quotient convergence report for the stochastic Gateaux
/// derivative: per epsilon, the mean over paths of
/// sup_t |(X(t)(w + eps h) - X(t)(w)) / eps - sum_s D_s X(t) hdot(s) ds|.
struct GateauxReport {
    std::vector<double> epsilons;
    std::vector<double> mean_sup_error;
    std::vector<double> quotient_sup_mean;  // mean of sup_t |quotient|, per epsilon
    double slope = 0.0;                     // fitted log-log slope of error vs epsilon
    int n_paths = 0;
    int n_excluded = 0;  // paths whose shifted solve diverged
};

GateauxReport gateaux_quotient_test(const SdeModel& model, const Vec& x0, const TimeGrid& grid,
                                    const CameronMartinDirection& h,
                                    const std::vector<double>& epsilons, int n_paths,
                                    std::uint64_t seed, Scheme scheme = Scheme::Implicit,
                                    int workers = 1);

/// Moment-bound fit: the smallest alpha making
/// 2^{(p-2)/2} (1 + |x|^p) e^{p alpha t} dominate the empirical E|X(t)|^p at
/// every node, plus a log-moment least-squares rate with residual.
struct MomentBoundRow {
    double p = 2.0;
    double sup_moment = 0.0;  // empirical E[sup_t |X(t)|^p]
    double alpha_hat = 0.0;   // smallest dominating constant (clamped at 0)
    double ls_alpha = 0.0;    // least-squares growth rate
    double ls_residual = 0.0; // RMS residual of the log-moment fit
};

std::vector<MomentBoundRow> moment_bound_report(std::span<const StatePath> ensemble, const Vec& x0,
                                                const std::vector<double>& p_list);

/// Streaming variant: integrates paths on the fly (chunked, deterministic
/// reduction), so large ensembles never hold full trajectories in memory.
std::vector<MomentBoundRow> moment_bound_scan(const SdeModel& model, const Vec& x0,
                                              const TimeGrid& grid, int n_paths,
                                              std::uint64_t seed,
                                              const std::vector<double>& p_list, Scheme scheme,
                                              int workers = 1);

/// One simulated path together with its Malliavin derivative grids.
struct PathBundle {
    BrownianPath noise;
    StatePath x;
    DerivativeGrid first;
    std::optional<SecondDerivativeGrid> second;
};

PathBundle make_path_bundle(const SdeModel& model, const TimeGrid& grid, const Vec& x0,
                            std::uint64_t stream_id, std::uint64_t seed, Scheme scheme,
                            int order = 1, int coarsening = 4);

/// Monte Carlo Sobolev-Malliavin norm estimate
/// ( E|X(t)|^p + sum_{i<=k} E[(int...int |D^i X(t)|^2)^{p/2}] )^{1/p}.
struct NormEstimate {
    int k = 1;
    double p = 2.0;
    double value = 0.0;
    int n_paths = 0;
    double std_error = 0.0;
};

NormEstimate sobolev_norm_estimate(std::span<const PathBundle> ensemble, int k, double p,
                                   int t_index);

/// Gaussian-kernel density estimate on a 512-point grid spanning the sample
/// range plus three bandwidths, with an informational smoothness diagnostic.
struct KdeResult {
    Vec x;
    Vec density;
    double bandwidth = 0.0;
    double max_second_derivative = 0.0;  // finite-difference, informational
};

KdeResult kde_density(std::span<const double> samples,
                      std::optional<double> bandwidth = std::nullopt);

}  // namespace msde
