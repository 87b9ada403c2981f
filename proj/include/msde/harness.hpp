#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "msde/malliavin.hpp"
#include "msde/model_zoo.hpp"

namespace msde {

/// Parsed experiment description (one JSON document or CLI flag set).
/// Unknown keys are rejected at parse time.
struct ExperimentConfig {
    int version = 1;
    std::string command;
    std::string model_name = "ginzburg_landau";
    ParamMap model_params;
    std::vector<double> x0;
    double horizon = 1.0;
    int steps = 512;
    int n_paths = 1;
    std::string scheme = "implicit";
    std::uint64_t seed = 0;
    int workers = 0;  // 0 = default worker count
    std::string out_path;

    // subcommand-specific options
    int order = 1;                  // malliavin
    std::string method = "flow";    // malliavin
    int coarsen = 4;                // malliavin order 2
    int depth = 6;                  // hormander
    double tol = 1e-6;              // hormander rank tolerance
    std::vector<double> epsilons = {1e-1, 1e-2, 1e-3};  // verify
    std::vector<double> p_list = {2.0, 4.0};            // verify
    int component = 0;              // density marginal

    /// Throws ConfigError on any violated invariant (including the step
    /// constraint dt <= min(1/(2L), T/100)).
    void validate() const;

    SdeModel make_model() const;
    Vec initial_state(const SdeModel& model) const;
    TimeGrid grid() const { return TimeGrid{horizon, steps}; }
    int effective_workers() const;

    /// Canonical key-sorted JSON rendering (basis of the config hash).
    std::string canonical_json() const;
};

ExperimentConfig parse_config_json(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string details;
};

struct RunManifest {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string version;
    double wall_seconds = 0.0;
    std::vector<SuiteResult> suites;
    std::vector<std::pair<std::string, std::uint64_t>> outputs;  // path, FNV-1a hash

    bool all_pass() const;
};

/// Dispatch to the subcommand, write outputs, and assemble the manifest.
RunManifest run_experiment(const ExperimentConfig& config);

std::string manifest_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest, const std::string& path);

// --- verification suites (shared between `verify` and the acceptance runner)

struct FlowIdentitySummary {
    double mean_defect_coarse = 0.0;
    double mean_defect_fine = 0.0;
    double worst_defect_coarse = 0.0;
    double worst_defect_fine = 0.0;
    double ratio = 0.0;  // coarse / fine mean defect
};

/// Mean and worst max_k ||K J - I||_F over an ensemble, at a coarse and a
/// refined grid driven by the same Brownian paths.
FlowIdentitySummary flow_identity_stats(const SdeModel& model, const Vec& x0, double T,
                                        int n_coarse, int n_fine, int n_ensemble,
                                        std::uint64_t seed, Scheme scheme, int workers);

SuiteResult flow_identity_suite(const SdeModel& model, const Vec& x0, double T, int steps,
                                int n_ensemble, std::uint64_t seed, Scheme scheme, int workers);

SuiteResult gateaux_suite(const SdeModel& model, const Vec& x0, const TimeGrid& grid,
                          const std::vector<double>& epsilons, int n_paths, std::uint64_t seed,
                          Scheme scheme, int workers);

struct CameronMartinCase {
    std::string name;
    CameronMartinCheck check;
    double target = 0.0;
    bool pass = false;
};

/// The three reference functionals F in {1, W(T), W(T)^2} with hdot == rate.
std::vector<CameronMartinCase> cameron_martin_cases(double rate, double T, int steps, int n_paths,
                                                    std::uint64_t seed, int workers);

SuiteResult cameron_martin_suite(double rate, double T, int steps, int n_paths,
                                 std::uint64_t seed, int workers);

struct MomentStabilityRow {
    double p = 2.0;
    double alpha_half = 0.0;  // fitted on n_paths/2
    double alpha_full = 0.0;  // fitted on n_paths
    bool stable = false;      // within 10% (absolute floor 0.01)
};

std::vector<MomentStabilityRow> moment_stability(const SdeModel& model, const Vec& x0,
                                                 const TimeGrid& grid, int n_paths,
                                                 const std::vector<double>& p_list, Scheme scheme,
                                                 std::uint64_t seed, int workers);

SuiteResult moment_suite(const SdeModel& model, const Vec& x0, const TimeGrid& grid, int n_paths,
                         const std::vector<double>& p_list, Scheme scheme, std::uint64_t seed,
                         int workers);

}  // namespace msde
