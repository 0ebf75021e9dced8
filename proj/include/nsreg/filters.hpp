#pragma once

#include <string>
#include <vector>

#include "nsreg/linop.hpp"

namespace nsreg {

enum class FilterFamily { Tikhonov, TruncatedSvd, Landweber };

/// A regularizing filter family g_alpha selecting the classical reconstructor
/// B_alpha = g_alpha(A^T A) A^T.
///
/// Landweber is indexed by the same continuous parameter alpha as the other
/// families through k = ceil(1/alpha) iterations, with the step tau inside
/// the sum: g_alpha(lambda) = tau * sum_{j<k} (1 - tau*lambda)^j.
struct FilterSpec {
    FilterFamily family = FilterFamily::Tikhonov;
    double landweber_step = 1.0;  // tau; must satisfy tau * sigma_1^2 <= 1 at application
    std::string label;

    static FilterSpec tikhonov();
    static FilterSpec truncated_svd();
    static FilterSpec landweber(double step);
};

std::string filter_name(const FilterSpec& spec);

/// g_alpha(lambda) for alpha > 0, lambda >= 0.
double filter_value(const FilterSpec& spec, double alpha, double lambda);

/// B_alpha y = sum_i g_alpha(sigma_i^2) sigma_i <u_i, y> v_i. Output lies in
/// ker(A)^perp. Rejects a Landweber step with tau * sigma_1^2 > 1.
Vector reconstruct(const FilterSpec& spec, const DenseOperator& op, double alpha,
                   const Vector& y);

struct FilterCheck {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct AxiomReport {
    std::vector<FilterCheck> checks;
    bool pass = false;
};

struct RateConditionReport {
    std::vector<FilterCheck> checks;
    std::vector<double> alphas;        // the grid, decreasing
    std::vector<double> c1_by_alpha;   // max_lambda lambda^mu |1 - lambda g| / alpha^mu
    double mu = 0.0;
    bool pass = false;
};

/// Checks the two filter axioms on finite grids:
///   (a) sup |lambda g_alpha(lambda)| <= C with C = 2,
///   (b) g_alpha(lambda) -> 1/lambda at the smallest alpha in the grid
///       (relative tolerance 1e-3; exact for truncated SVD once alpha < lambda).
AxiomReport verify_filter_axioms(const FilterSpec& spec, double lambda_max,
                                 const std::vector<double>& alpha_grid,
                                 const std::vector<double>& lambda_grid);

/// Measures the rate-theorem constants:
///   c1(alpha) = max_lambda lambda^mu |1 - lambda g_alpha(lambda)| / alpha^mu,
///   c2        = max_alpha alpha * sup_lambda |g_alpha(lambda)|.
/// The mu-qualification passes iff c1 is nonincreasing within 5% over the
/// tail half of the alpha grid; c2 must stay below 2. Tikhonov fails the
/// qualification for mu > 1.
RateConditionReport verify_rate_conditions(const FilterSpec& spec, double mu,
                                           double lambda_max,
                                           const std::vector<double>& alpha_grid,
                                           const std::vector<double>& lambda_grid);

// Default grids used by the CLI and the acceptance suite.
std::vector<double> default_alpha_grid();                              // 1e-1 .. 1e-6
std::vector<double> default_axiom_lambda_grid(double lambda_max);      // {0} + 2 decades
std::vector<double> default_rate_lambda_grid(double lambda_max);       // {0} + 8 decades

}  // namespace nsreg
