#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsreg/filters.hpp"
#include "nsreg/linop.hpp"
#include "nsreg/network.hpp"
#include "nsreg/regpipeline.hpp"

namespace nsreg {

enum class ProblemKind { Deconvolution, RandomRankDeficient };

/// Synthetic rank-deficient forward operators, deterministic per seed.
struct ProblemSpec {
    ProblemKind kind = ProblemKind::RandomRankDeficient;
    std::uint64_t seed = 0;
    int n = 96;                 // signal dimension (cols)
    // Deconvolution: circulant gaussian blur with keep_rows rows kept
    double kernel_width = 2.0;
    int keep_rows = 32;
    // RandomRankDeficient: m x n with log-spaced spectrum in [1e-2, 1]
    int m = 64;
    int rank = 48;
};

DenseOperator make_problem(const ProblemSpec& spec);

/// y + delta * xi/||xi|| with seeded gaussian xi; saturates ||out - y|| = delta.
Vector add_noise(const Vector& y, double delta, std::uint64_t seed);

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS of the fit residuals in log space
};

LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

enum class ProjectorMode { Exact, Approximate };

struct RateExperimentConfig {
    ProblemSpec problem;
    FilterSpec filter = FilterSpec::truncated_svd();
    double smoothness_mu = 0.5;
    double source_radius_rho = 1.0;
    double constant_d = 1.0;
    std::vector<double> delta_grid;  // strictly decreasing, >= 5 points, >= 3 decades
    int trials_per_delta = 20;
    std::string network_path;  // empty: zero base network
    ProjectorMode projector_mode = ProjectorMode::Exact;
    FilterSpec q_filter = FilterSpec::tikhonov();  // Approximate mode only
    double phi_exponent = 2.0;                     // phi(alpha) = alpha^exponent
    double slope_tolerance = 0.1;
    std::uint64_t seed = 0;
};

std::vector<double> default_delta_grid();

struct RatePoint {
    double delta = 0.0;
    double alpha = 0.0;
    double worst_error = 0.0;
    double mean_error = 0.0;
    double q_deviation = 0.0;  // ||Q - P_ker|| (Approximate mode; 0 otherwise)
};

struct RateReport {
    std::vector<RatePoint> points;
    double fitted_slope = 0.0;
    double expected_slope = 0.0;  // 2 mu / (2 mu + 1)
    double intercept = 0.0;
    double fit_residual = 0.0;
    double slope_tolerance = 0.1;
    bool pass = false;
};

/// Draws source elements of radius rho per trial, saturates the noise bound,
/// reconstructs with alpha = alpha_star(delta), aggregates the worst case per
/// delta and fits the log-log slope against 2 mu/(2 mu + 1). Rejects filters
/// failing verify_rate_conditions for the requested mu.
RateReport run_rate_experiment(const RateExperimentConfig& config, const DenseOperator& op,
                               const NullSpaceNetwork& phi);
RateReport run_rate_experiment(const RateExperimentConfig& config);

struct ConvergencePoint {
    double delta = 0.0;
    double sup_error = 0.0;
    double mean_error = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergencePoint> points;
    double initial_sup = 0.0;
    double final_sup = 0.0;
    bool monotone_within_slack = false;  // sup(next) <= 1.1 * sup(prev)
    bool final_below_tenth = false;
    bool pass = false;
};

/// Fixes y = A x for a source element x, then tracks the worst error against
/// A^M y over noise trials as delta shrinks.
ConvergenceReport run_convergence_experiment(const DenseOperator& op, const FilterSpec& filter,
                                             const NullSpaceNetwork& phi,
                                             const std::vector<double>& delta_grid, int trials,
                                             const ParamChoice& choice, std::uint64_t seed);

struct ConsistencyReport {
    double max_normalized_violation = 0.0;
    int samples = 0;
    bool exact_mode = true;
    bool pass = false;  // enforced only in exact mode
};

/// max_x ||A Phi x - A x|| / (||A|| (||x|| + ||N x||)) over random samples.
ConsistencyReport run_consistency_check(const DenseOperator& op, const NullSpaceNetwork& phi,
                                        int samples, std::uint64_t seed);

/// Raised when a serialized network does not match the operator it is applied to.
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Builds the operator and network a config describes; verifies the stored
/// operator hash when a network file is given.
struct RealizedExperiment {
    std::shared_ptr<const DenseOperator> op;
    NullSpaceNetwork phi;
};
RealizedExperiment realize(const RateExperimentConfig& config);

// Machine-readable outputs.
std::string rate_report_json(const RateReport& report);
std::string convergence_report_json(const ConvergenceReport& report);
std::string consistency_report_json(const ConsistencyReport& report);
std::string axiom_report_json(const AxiomReport& report);
std::string rate_condition_report_json(const RateConditionReport& report);
void write_rate_csv(const RateReport& report, const std::string& path);
void write_convergence_csv(const ConvergenceReport& report, const std::string& path);
void write_rate_svg(const RateReport& report, const std::string& path);

// Config (de)serialization for the CLI.
ProblemSpec problem_from_json(const std::string& text);
std::string problem_to_json(const ProblemSpec& spec);
RateExperimentConfig rate_config_from_json(const std::string& text);

}  // namespace nsreg
