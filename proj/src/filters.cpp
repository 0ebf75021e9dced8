#include "nsreg/filters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsreg/kernels.hpp"

namespace nsreg {

FilterSpec FilterSpec::tikhonov() { return {FilterFamily::Tikhonov, 1.0, "tikhonov"}; }
FilterSpec FilterSpec::truncated_svd() { return {FilterFamily::TruncatedSvd, 1.0, "tsvd"}; }
FilterSpec FilterSpec::landweber(double step) {
    if (!(step > 0.0)) throw std::invalid_argument("Landweber step must be positive");
    return {FilterFamily::Landweber, step, "landweber"};
}

std::string filter_name(const FilterSpec& spec) {
    switch (spec.family) {
        case FilterFamily::Tikhonov: return "tikhonov";
        case FilterFamily::TruncatedSvd: return "tsvd";
        case FilterFamily::Landweber: return "landweber";
    }
    return "?";
}

namespace {

long landweber_iterations(double alpha) {
    // beyond ~1e15 iterations the filter is 1/lambda to machine precision
    return static_cast<long>(std::ceil(std::min(1.0 / alpha, 1e15)));
}

// tau * sum_{j=0}^{k-1} (1 - tau*lambda)^j, evaluated in closed form.
double landweber_value(double tau, long k, double lambda) {
    if (lambda == 0.0) return tau * static_cast<double>(k);
    const double x = tau * lambda;
    const double base = 1.0 - x;
    double pk;
    if (base > 0.0) {
        // expm1/log1p keeps 1 - (1-x)^k accurate when k*x is tiny
        return -std::expm1(static_cast<double>(k) * std::log1p(-x)) / lambda;
    } else if (base == 0.0) {
        pk = (k == 0) ? 1.0 : 0.0;
    } else {
        const double mag = std::pow(-base, static_cast<double>(k));
        pk = (k % 2 == 0) ? mag : -mag;
    }
    return (1.0 - pk) / lambda;
}

}  // namespace

double filter_value(const FilterSpec& spec, double alpha, double lambda) {
    if (!(alpha > 0.0)) throw std::invalid_argument("filter_value: alpha must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("filter_value: lambda must be nonnegative");
    switch (spec.family) {
        case FilterFamily::Tikhonov:
            return 1.0 / (alpha + lambda);
        case FilterFamily::TruncatedSvd:
            return lambda < alpha ? 0.0 : 1.0 / lambda;
        case FilterFamily::Landweber:
            return landweber_value(spec.landweber_step, landweber_iterations(alpha), lambda);
    }
    return 0.0;
}

Vector reconstruct(const FilterSpec& spec, const DenseOperator& op, double alpha,
                   const Vector& y) {
    if (!(alpha > 0.0)) throw std::invalid_argument("reconstruct: alpha must be positive");
    if (static_cast<int>(y.size()) != op.rows())
        throw std::invalid_argument("reconstruct: dimension mismatch");
    const SvdFactorization& f = op.factorization();
    if (spec.family == FilterFamily::Landweber && f.numerical_rank > 0) {
        const double lmax = f.singular_values[0] * f.singular_values[0];
        // the boundary step tau = 1/sigma_1^2 is admissible; leave ulp slack
        if (spec.landweber_step * lmax > 1.0 + 1e-12)
            throw std::invalid_argument(
                "reconstruct: Landweber step exceeds 1/sigma_1^2 for this operator");
    }
    Vector c = kernels::matvec_transpose(f.left_vectors, y);
    for (int k = 0; k < f.numerical_rank; ++k) {
        const double s = f.singular_values[k];
        c[k] *= filter_value(spec, alpha, s * s) * s;
    }
    return kernels::matvec(f.right_vectors, c);
}

AxiomReport verify_filter_axioms(const FilterSpec& spec, double lambda_max,
                                 const std::vector<double>& alpha_grid,
                                 const std::vector<double>& lambda_grid) {
    if (alpha_grid.empty() || lambda_grid.empty())
        throw std::invalid_argument("verify_filter_axioms: empty grid");
    if (!(lambda_max > 0.0))
        throw std::invalid_argument("verify_filter_axioms: lambda_max must be positive");
    for (double l : lambda_grid)
        if (!(l >= 0.0 && l <= lambda_max))
            throw std::invalid_argument("verify_filter_axioms: lambda_grid outside [0, lambda_max]");

    AxiomReport report;

    // (a) sup |lambda g_alpha(lambda)| over both grids, bounded by C = 2.
    double bound = 0.0;
    for (double a : alpha_grid)
        for (double l : lambda_grid) bound = std::max(bound, std::abs(l * filter_value(spec, a, l)));
    report.checks.push_back({"bounded_lambda_g", bound, 2.0, bound <= 2.0});

    // (b) pointwise limit g_alpha(lambda) -> 1/lambda at the smallest alpha.
    const double alpha_min = *std::min_element(alpha_grid.begin(), alpha_grid.end());
    double worst_rel = 0.0;
    bool limit_pass = true;
    for (double l : lambda_grid) {
        if (!(l > 0.0)) continue;
        const double err = std::abs(filter_value(spec, alpha_min, l) - 1.0 / l);
        const double rel = err * l;
        worst_rel = std::max(worst_rel, rel);
        if (spec.family == FilterFamily::TruncatedSvd) {
            if (alpha_min < l && err != 0.0) limit_pass = false;
            if (alpha_min >= l) limit_pass = false;  // grid never reached the exact regime
        } else if (rel > 1e-3) {
            limit_pass = false;
        }
    }
    const double limit_threshold = spec.family == FilterFamily::TruncatedSvd ? 0.0 : 1e-3;
    report.checks.push_back({"pointwise_limit", worst_rel, limit_threshold, limit_pass});

    report.pass = true;
    for (const auto& c : report.checks) report.pass = report.pass && c.pass;
    return report;
}

RateConditionReport verify_rate_conditions(const FilterSpec& spec, double mu,
                                           double lambda_max,
                                           const std::vector<double>& alpha_grid,
                                           const std::vector<double>& lambda_grid) {
    if (!(mu > 0.0)) throw std::invalid_argument("verify_rate_conditions: mu must be positive");
    if (alpha_grid.empty() || lambda_grid.empty())
        throw std::invalid_argument("verify_rate_conditions: empty grid");
    if (!(lambda_max > 0.0))
        throw std::invalid_argument("verify_rate_conditions: lambda_max must be positive");
    for (double l : lambda_grid)
        if (!(l >= 0.0 && l <= lambda_max))
            throw std::invalid_argument(
                "verify_rate_conditions: lambda_grid outside [0, lambda_max]");

    RateConditionReport report;
    report.mu = mu;
    report.alphas = alpha_grid;
    std::sort(report.alphas.begin(), report.alphas.end(), std::greater<>());

    double c2 = 0.0;
    for (double a : report.alphas) {
        double c1 = 0.0;
        double gmax = 0.0;
        for (double l : lambda_grid) {
            const double g = filter_value(spec, a, l);
            gmax = std::max(gmax, std::abs(g));
            c1 = std::max(c1, std::pow(l, mu) * std::abs(1.0 - l * g));
        }
        report.c1_by_alpha.push_back(c1 / std::pow(a, mu));
        c2 = std::max(c2, a * gmax);
    }

    // Qualification: the c1 sequence must be nonincreasing within 5% on the
    // tail half of the alpha grid. Bounded c1 passes; alpha^{-p} growth fails.
    const std::size_t steps = report.c1_by_alpha.size() - 1;
    const std::size_t tail_start = steps / 2;
    double worst_ratio = 0.0;
    for (std::size_t i = tail_start; i < steps; ++i) {
        const double prev = report.c1_by_alpha[i];
        const double next = report.c1_by_alpha[i + 1];
        const double ratio = next <= prev + 1e-9 ? 1.0 : next / std::max(prev, 1e-300);
        worst_ratio = std::max(worst_ratio, ratio);
    }
    report.checks.push_back({"c1_qualification", worst_ratio, 1.05, worst_ratio <= 1.05});
    report.checks.push_back({"c2_bound", c2, 2.0, c2 <= 2.0});

    report.pass = true;
    for (const auto& c : report.checks) report.pass = report.pass && c.pass;
    return report;
}

std::vector<double> default_alpha_grid() {
    return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
}

namespace {
std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> g;
    g.reserve(points + 1);
    g.push_back(0.0);
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < points; ++i)
        g.push_back(std::min(hi, std::pow(10.0, llo + (lhi - llo) * i / (points - 1))));
    return g;
}
}  // namespace

std::vector<double> default_axiom_lambda_grid(double lambda_max) {
    return log_grid(1e-2 * lambda_max, lambda_max, 25);
}

std::vector<double> default_rate_lambda_grid(double lambda_max) {
    return log_grid(1e-8 * lambda_max, lambda_max, 33);
}

}  // namespace nsreg
