#include "nsreg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "nsreg/kernels.hpp"
#include "nsreg/rng.hpp"

namespace nsreg {

namespace {

// Haar-like orthonormal factor: seeded gaussian, modified Gram-Schmidt twice.
Matrix random_orthonormal(int rows, int cols, Rng& rng) {
    Matrix q(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) q(i, j) = rng.gaussian();
    for (int pass = 0; pass < 2; ++pass) {
        for (int k = 0; k < cols; ++k) {
            for (int j = 0; j < k; ++j) {
                double d = 0.0;
                for (int i = 0; i < rows; ++i) d += q(i, j) * q(i, k);
                for (int i = 0; i < rows; ++i) q(i, k) -= d * q(i, j);
            }
            double nrm = 0.0;
            for (int i = 0; i < rows; ++i) nrm += q(i, k) * q(i, k);
            nrm = std::sqrt(nrm);
            if (nrm == 0.0) throw std::runtime_error("random_orthonormal: degenerate draw");
            for (int i = 0; i < rows; ++i) q(i, k) /= nrm;
        }
    }
    return q;
}

}  // namespace

DenseOperator make_problem(const ProblemSpec& spec) {
    if (spec.kind == ProblemKind::RandomRankDeficient) {
        if (spec.m < 1 || spec.n < 1 || spec.rank < 1 || spec.rank >= std::min(spec.m, spec.n))
            throw std::invalid_argument(
                "make_problem: RandomRankDeficient requires 1 <= rank < min(m,n)");
        Rng rng(Rng::mix(spec.seed, 0x72616e6bULL));
        const Matrix u = random_orthonormal(spec.m, spec.rank, rng);
        const Matrix v = random_orthonormal(spec.n, spec.rank, rng);
        Vector sigma(spec.rank);
        for (int k = 0; k < spec.rank; ++k)
            sigma[k] = spec.rank > 1 ? std::pow(10.0, -2.0 * k / (spec.rank - 1)) : 1.0;
        Matrix a(spec.m, spec.n);
        for (int i = 0; i < spec.m; ++i)
            for (int j = 0; j < spec.n; ++j) {
                double s = 0.0;
                for (int k = 0; k < spec.rank; ++k) s += u(i, k) * sigma[k] * v(j, k);
                a(i, j) = s;
            }
        return DenseOperator(std::move(a));
    }

    // Deconvolution: circulant gaussian blur, rows subsampled without replacement.
    if (spec.n < 2 || spec.keep_rows < 1 || spec.keep_rows >= spec.n)
        throw std::invalid_argument("make_problem: Deconvolution requires 1 <= keep_rows < n");
    if (!(spec.kernel_width > 0.0))
        throw std::invalid_argument("make_problem: kernel_width must be positive");
    Vector kernel(spec.n);
    double ksum = 0.0;
    for (int d = 0; d < spec.n; ++d) {
        const int circ = std::min(d, spec.n - d);
        kernel[d] = std::exp(-0.5 * circ * circ / (spec.kernel_width * spec.kernel_width));
        ksum += kernel[d];
    }
    for (double& v : kernel) v /= ksum;

    Rng rng(Rng::mix(spec.seed, 0x64636f6eULL));
    std::vector<int> idx(spec.n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < spec.keep_rows; ++i) {
        const int j = i + static_cast<int>(rng.next_u64() % (spec.n - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<int> rows(idx.begin(), idx.begin() + spec.keep_rows);
    std::sort(rows.begin(), rows.end());

    Matrix a(spec.keep_rows, spec.n);
    for (int r = 0; r < spec.keep_rows; ++r)
        for (int j = 0; j < spec.n; ++j)
            a(r, j) = kernel[((j - rows[r]) % spec.n + spec.n) % spec.n];
    return DenseOperator(std::move(a));
}

Vector add_noise(const Vector& y, double delta, std::uint64_t seed) {
    if (!(delta > 0.0)) throw std::invalid_argument("add_noise: delta must be positive");
    if (y.empty()) throw std::invalid_argument("add_noise: empty data vector");
    Rng rng(Rng::mix(seed, 0x6e6f6973ULL));
    Vector xi = gaussian_vector(rng, static_cast<int>(y.size()));
    double n = norm2(xi);
    while (n == 0.0) {  // probability-0 guard
        xi = gaussian_vector(rng, static_cast<int>(y.size()));
        n = norm2(xi);
    }
    Vector out = y;
    axpy(delta / n, xi, out);
    return out;
}

LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3)
        throw std::invalid_argument("fit_loglog_slope: need at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(points.size());
    for (const auto& [d, e] : points) {
        if (!(d > 0.0) || !(e > 0.0))
            throw std::invalid_argument("fit_loglog_slope: points must be positive");
        const double x = std::log(d), y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    LogLogFit fit;
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_loglog_slope: degenerate abscissae");
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (const auto& [d, e] : points) {
        const double r = std::log(e) - (fit.slope * std::log(d) + fit.intercept);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

std::vector<double> default_delta_grid() {
    return {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
}

namespace {

void validate_delta_grid(const std::vector<double>& grid, int min_points, double min_span) {
    if (static_cast<int>(grid.size()) < min_points)
        throw std::invalid_argument("delta grid needs at least " + std::to_string(min_points) +
                                    " points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw std::invalid_argument("delta grid must be positive");
        if (i > 0 && !(grid[i] < grid[i - 1]))
            throw std::invalid_argument("delta grid must be strictly decreasing");
    }
    if (min_span > 1.0 && grid.front() / grid.back() < min_span)
        throw std::invalid_argument("delta grid must span at least 3 decades");
}

Vector draw_sphere(Rng& rng, int n, double radius) {
    Vector w = gaussian_vector(rng, n);
    double nw = norm2(w);
    while (nw == 0.0) {
        w = gaussian_vector(rng, n);
        nw = norm2(w);
    }
    return scaled(w, radius / nw);
}

}  // namespace

RateReport run_rate_experiment(const RateExperimentConfig& config, const DenseOperator& op,
                               const NullSpaceNetwork& phi) {
    validate_delta_grid(config.delta_grid, 5, 1e3);
    if (config.trials_per_delta < 1)
        throw std::invalid_argument("run_rate_experiment: trials_per_delta must be positive");
    if (!(config.smoothness_mu > 0.0) || !(config.source_radius_rho > 0.0))
        throw std::invalid_argument("run_rate_experiment: mu and rho must be positive");

    // Precondition: the filter must satisfy the rate conditions for this mu.
    const double lmax = operator_norm(op) * operator_norm(op);
    const RateConditionReport cond = verify_rate_conditions(
        config.filter, config.smoothness_mu, lmax, default_alpha_grid(),
        default_rate_lambda_grid(lmax));
    if (!cond.pass) {
        std::ostringstream msg;
        msg << "run_rate_experiment: filter '" << filter_name(config.filter)
            << "' fails the rate qualification at mu=" << config.smoothness_mu << ":";
        for (const auto& c : cond.checks)
            if (!c.pass)
                msg << " check " << c.name << " measured " << c.measured << " > threshold "
                    << c.threshold << ";";
        throw std::invalid_argument(msg.str());
    }

    if (op.content_hash() != phi.op()->content_hash())
        throw std::invalid_argument("run_rate_experiment: network/operator mismatch");
    op.factorization();  // populate the cache before the parallel region
    const ParamChoice choice{config.smoothness_mu, config.source_radius_rho, config.constant_d};
    MRegularizer reg(config.filter, phi.op(), NullSpaceNetwork(phi.base(), phi.op()));

    RateReport report;
    report.expected_slope = 2.0 * config.smoothness_mu / (2.0 * config.smoothness_mu + 1.0);
    report.slope_tolerance = config.slope_tolerance;

    for (std::size_t di = 0; di < config.delta_grid.size(); ++di) {
        const double delta = config.delta_grid[di];
        const double alpha = alpha_star(choice, delta);
        RatePoint point;
        point.delta = delta;
        point.alpha = alpha;

        ApproxProjector q;
        const bool approx = config.projector_mode == ProjectorMode::Approximate;
        if (approx) {
            const double phi_alpha = std::pow(alpha, config.phi_exponent);
            q = approx_projector(reg.op, config.q_filter, phi_alpha);
            point.q_deviation = q.deviation;
        }

        const int trials = config.trials_per_delta;
        std::vector<double> errors(trials);
        std::exception_ptr trial_error;
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < trials; ++t) {
            try {
                Rng wrng(Rng::mix(config.seed ^ 0x77ULL, di, static_cast<std::uint64_t>(t)));
                const Vector w = draw_sphere(wrng, op.cols(), config.source_radius_rho);
                const Vector x = source_element(op, phi, config.smoothness_mu, w);
                const Vector y = apply(op, x);
                const Vector y_delta =
                    add_noise(y, delta, Rng::mix(config.seed ^ 0x6eULL, di, t));
                const Vector xhat = approx ? reconstruct_two_step_approx(reg, alpha, q, y_delta)
                                           : reconstruct_two_step(reg, alpha, y_delta);
                errors[t] = norm2(vsub(xhat, x));
            } catch (...) {
#pragma omp critical(rate_trial_error)
                if (!trial_error) trial_error = std::current_exception();
            }
        }
        if (trial_error) std::rethrow_exception(trial_error);
        point.worst_error = *std::max_element(errors.begin(), errors.end());
        point.mean_error = std::accumulate(errors.begin(), errors.end(), 0.0) / trials;
        report.points.push_back(point);
    }

    std::vector<std::pair<double, double>> fit_points;
    for (const auto& p : report.points) fit_points.emplace_back(p.delta, p.worst_error);
    const LogLogFit fit = fit_loglog_slope(fit_points);
    report.fitted_slope = fit.slope;
    report.intercept = fit.intercept;
    report.fit_residual = fit.residual;
    report.pass = std::abs(report.fitted_slope - report.expected_slope) <= config.slope_tolerance;
    return report;
}

RealizedExperiment realize(const RateExperimentConfig& config) {
    auto op = std::make_shared<const DenseOperator>(make_problem(config.problem));
    if (config.network_path.empty())
        return {op, NullSpaceNetwork(make_zero_network(op->cols()), op)};
    NetworkFile file = load_network_json(config.network_path);
    if (!file.operator_hash.empty() && file.operator_hash != operator_hash_hex(*op))
        throw IntegrityError("network file '" + config.network_path +
                             "' was trained against a different operator (hash mismatch)");
    return {op, NullSpaceNetwork(std::move(file.net), op)};
}

RateReport run_rate_experiment(const RateExperimentConfig& config) {
    RealizedExperiment ex = realize(config);
    return run_rate_experiment(config, *ex.op, ex.phi);
}

ConvergenceReport run_convergence_experiment(const DenseOperator& op, const FilterSpec& filter,
                                             const NullSpaceNetwork& phi,
                                             const std::vector<double>& delta_grid, int trials,
                                             const ParamChoice& choice, std::uint64_t seed) {
    validate_delta_grid(delta_grid, 2, 0.0);
    if (trials < 1) throw std::invalid_argument("run_convergence_experiment: trials >= 1");
    if (op.content_hash() != phi.op()->content_hash())
        throw std::invalid_argument("run_convergence_experiment: network/operator mismatch");
    op.factorization();

    MRegularizer reg(filter, phi.op(), NullSpaceNetwork(phi.base(), phi.op()));

    // Fixed exact-data target: y = A x for a source element x.
    Rng wrng(Rng::mix(seed, 0x736f7572ULL));
    const Vector w = draw_sphere(wrng, op.cols(), choice.source_radius_rho);
    const Vector x_src = source_element(op, phi, choice.smoothness_mu, w);
    const Vector y = apply(op, x_src);
    const Vector reference = m_generalized_inverse(reg, y);

    ConvergenceReport report;
    for (std::size_t di = 0; di < delta_grid.size(); ++di) {
        const double delta = delta_grid[di];
        const double alpha = alpha_star(choice, delta);
        std::vector<double> errors(trials);
        std::exception_ptr trial_error;
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < trials; ++t) {
            try {
                const Vector y_delta = add_noise(y, delta, Rng::mix(seed ^ 0x63ULL, di, t));
                const Vector xhat = reconstruct_two_step(reg, alpha, y_delta);
                errors[t] = norm2(vsub(xhat, reference));
            } catch (...) {
#pragma omp critical(convergence_trial_error)
                if (!trial_error) trial_error = std::current_exception();
            }
        }
        if (trial_error) std::rethrow_exception(trial_error);
        ConvergencePoint p;
        p.delta = delta;
        p.sup_error = *std::max_element(errors.begin(), errors.end());
        p.mean_error = std::accumulate(errors.begin(), errors.end(), 0.0) / trials;
        report.points.push_back(p);
    }

    report.initial_sup = report.points.front().sup_error;
    report.final_sup = report.points.back().sup_error;
    report.monotone_within_slack = true;
    for (std::size_t i = 1; i < report.points.size(); ++i)
        if (report.points[i].sup_error > 1.1 * report.points[i - 1].sup_error)
            report.monotone_within_slack = false;
    report.final_below_tenth = report.final_sup < 0.1 * report.initial_sup;
    report.pass = report.monotone_within_slack && report.final_below_tenth;
    return report;
}

ConsistencyReport run_consistency_check(const DenseOperator& op, const NullSpaceNetwork& phi,
                                        int samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("run_consistency_check: samples >= 1");
    op.factorization();
    const double anorm = operator_norm(op);

    std::vector<double> violation(samples);
    std::exception_ptr sample_error;
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < samples; ++s) {
        try {
            Rng rng(Rng::mix(seed ^ 0x636f6eULL, static_cast<std::uint64_t>(s)));
            const Vector x = gaussian_vector(rng, op.cols());
            const Vector nx = forward(phi.base(), x);
            const Vector px = nsn_apply(phi, x);
            const double num = norm2(vsub(apply(op, px), apply(op, x)));
            const double den = anorm * (norm2(x) + norm2(nx));
            violation[s] = den > 0.0 ? num / den : 0.0;
        } catch (...) {
#pragma omp critical(consistency_sample_error)
            if (!sample_error) sample_error = std::current_exception();
        }
    }
    if (sample_error) std::rethrow_exception(sample_error);

    ConsistencyReport report;
    report.samples = samples;
    report.exact_mode = phi.exact_mode();
    report.max_normalized_violation = *std::max_element(violation.begin(), violation.end());
    report.pass = report.exact_mode ? report.max_normalized_violation <= 1e-9 : true;
    return report;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json checks_json(const std::vector<FilterCheck>& checks) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name},
                       {"measured", c.measured},
                       {"threshold", c.threshold},
                       {"pass", c.pass}});
    return arr;
}

}  // namespace

std::string rate_report_json(const RateReport& report) {
    nlohmann::json j;
    j["slope"] = report.fitted_slope;
    j["expected"] = report.expected_slope;
    j["intercept"] = report.intercept;
    j["fit_residual"] = report.fit_residual;
    j["slope_tolerance"] = report.slope_tolerance;
    j["pass"] = report.pass;
    j["points"] = nlohmann::json::array();
    for (const auto& p : report.points)
        j["points"].push_back({{"delta", p.delta},
                               {"alpha", p.alpha},
                               {"worst_error", p.worst_error},
                               {"mean_error", p.mean_error},
                               {"q_deviation", p.q_deviation}});
    return j.dump(2);
}

std::string convergence_report_json(const ConvergenceReport& report) {
    nlohmann::json j;
    j["initial_sup"] = report.initial_sup;
    j["final_sup"] = report.final_sup;
    j["monotone_within_slack"] = report.monotone_within_slack;
    j["final_below_tenth"] = report.final_below_tenth;
    j["pass"] = report.pass;
    j["points"] = nlohmann::json::array();
    for (const auto& p : report.points)
        j["points"].push_back(
            {{"delta", p.delta}, {"sup_error", p.sup_error}, {"mean_error", p.mean_error}});
    return j.dump(2);
}

std::string consistency_report_json(const ConsistencyReport& report) {
    nlohmann::json j;
    j["max_normalized_violation"] = report.max_normalized_violation;
    j["samples"] = report.samples;
    j["mode"] = report.exact_mode ? "exact" : "approximate";
    j["pass"] = report.pass;
    if (!report.exact_mode)
        j["note"] = "violation bound is not enforced in approximate-projector mode";
    return j.dump(2);
}

std::string axiom_report_json(const AxiomReport& report) {
    nlohmann::json j;
    j["checks"] = checks_json(report.checks);
    j["pass"] = report.pass;
    return j.dump(2);
}

std::string rate_condition_report_json(const RateConditionReport& report) {
    nlohmann::json j;
    j["mu"] = report.mu;
    j["checks"] = checks_json(report.checks);
    j["alphas"] = report.alphas;
    j["c1_by_alpha"] = report.c1_by_alpha;
    j["pass"] = report.pass;
    return j.dump(2);
}

void write_rate_csv(const RateReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "delta,worst_error,mean_error\n";
    f.precision(17);
    for (const auto& p : report.points)
        f << p.delta << ',' << p.worst_error << ',' << p.mean_error << '\n';
}

void write_convergence_csv(const ConvergenceReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "delta,sup_error,mean_error\n";
    f.precision(17);
    for (const auto& p : report.points)
        f << p.delta << ',' << p.sup_error << ',' << p.mean_error << '\n';
}

void write_rate_svg(const RateReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);

    const double width = 520, height = 400;
    const double ml = 64, mr = 24, mt = 24, mb = 48;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const auto& p : report.points) {
        xlo = std::min(xlo, std::log10(p.delta));
        xhi = std::max(xhi, std::log10(p.delta));
        ylo = std::min(ylo, std::log10(p.worst_error));
        yhi = std::max(yhi, std::log10(p.worst_error));
    }
    const double pad = 0.2;
    xlo -= pad, xhi += pad, ylo -= pad, yhi += pad;
    auto px = [&](double lx) { return ml + (lx - xlo) / (xhi - xlo) * (width - ml - mr); };
    auto py = [&](double ly) { return height - mb - (ly - ylo) / (yhi - ylo) * (height - mt - mb); };

    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    f << "<rect x='" << ml << "' y='" << mt << "' width='" << width - ml - mr << "' height='"
      << height - mt - mb << "' fill='none' stroke='black'/>\n";
    for (int d = static_cast<int>(std::ceil(xlo)); d <= static_cast<int>(std::floor(xhi)); ++d) {
        f << "<line x1='" << px(d) << "' y1='" << py(ylo) << "' x2='" << px(d) << "' y2='"
          << py(yhi) << "' stroke='#ddd'/>\n";
        f << "<text x='" << px(d) << "' y='" << height - mb + 18
          << "' font-size='11' text-anchor='middle'>1e" << d << "</text>\n";
    }
    for (int d = static_cast<int>(std::ceil(ylo)); d <= static_cast<int>(std::floor(yhi)); ++d) {
        f << "<line x1='" << px(xlo) << "' y1='" << py(d) << "' x2='" << px(xhi) << "' y2='"
          << py(d) << "' stroke='#ddd'/>\n";
        f << "<text x='" << ml - 6 << "' y='" << py(d) + 4
          << "' font-size='11' text-anchor='end'>1e" << d << "</text>\n";
    }
    // fitted line (the fit is in natural logs; convert the intercept)
    const double b10 = report.intercept / std::log(10.0);
    f << "<line x1='" << px(xlo) << "' y1='" << py(report.fitted_slope * xlo + b10) << "' x2='"
      << px(xhi) << "' y2='" << py(report.fitted_slope * xhi + b10)
      << "' stroke='#c33' stroke-width='1.5'/>\n";
    for (const auto& p : report.points)
        f << "<circle cx='" << px(std::log10(p.delta)) << "' cy='"
          << py(std::log10(p.worst_error)) << "' r='3.5' fill='#236'/>\n";
    std::ostringstream label;
    label.precision(4);
    label << "slope " << report.fitted_slope << " (expected " << report.expected_slope << ")";
    f << "<text x='" << ml + 10 << "' y='" << mt + 16 << "' font-size='12'>" << label.str()
      << "</text>\n";
    f << "<text x='" << (ml + width - mr) / 2 << "' y='" << height - 10
      << "' font-size='12' text-anchor='middle'>noise level</text>\n";
    f << "<text x='16' y='" << (mt + height - mb) / 2
      << "' font-size='12' text-anchor='middle' transform='rotate(-90 16 "
      << (mt + height - mb) / 2 << ")'>worst-case error</text>\n";
    f << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

namespace {

FilterSpec filter_from_name(const std::string& name, double landweber_step) {
    if (name == "tikhonov") return FilterSpec::tikhonov();
    if (name == "tsvd") return FilterSpec::truncated_svd();
    if (name == "landweber") return FilterSpec::landweber(landweber_step);
    throw std::invalid_argument("unknown filter '" + name + "'");
}

ProblemSpec problem_from(const nlohmann::json& j) {
    ProblemSpec spec;
    const std::string kind = j.value("kind", std::string("random_rank_deficient"));
    if (kind == "random_rank_deficient")
        spec.kind = ProblemKind::RandomRankDeficient;
    else if (kind == "deconvolution")
        spec.kind = ProblemKind::Deconvolution;
    else
        throw std::invalid_argument("unknown problem kind '" + kind + "'");
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.n = j.value("n", spec.n);
    spec.m = j.value("m", spec.m);
    spec.rank = j.value("rank", spec.rank);
    spec.keep_rows = j.value("keep_rows", spec.keep_rows);
    spec.kernel_width = j.value("kernel_width", spec.kernel_width);
    return spec;
}

}  // namespace

ProblemSpec problem_from_json(const std::string& text) {
    return problem_from(nlohmann::json::parse(text));
}

std::string problem_to_json(const ProblemSpec& spec) {
    nlohmann::json j;
    j["kind"] = spec.kind == ProblemKind::RandomRankDeficient ? "random_rank_deficient"
                                                              : "deconvolution";
    j["seed"] = spec.seed;
    j["n"] = spec.n;
    if (spec.kind == ProblemKind::RandomRankDeficient) {
        j["m"] = spec.m;
        j["rank"] = spec.rank;
    } else {
        j["keep_rows"] = spec.keep_rows;
        j["kernel_width"] = spec.kernel_width;
    }
    return j.dump(2);
}

RateExperimentConfig rate_config_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    RateExperimentConfig c;
    if (j.contains("problem")) c.problem = problem_from(j.at("problem"));
    c.filter = filter_from_name(j.value("filter", std::string("tsvd")),
                                j.value("landweber_step", 1.0));
    c.smoothness_mu = j.value("smoothness_mu", c.smoothness_mu);
    c.source_radius_rho = j.value("source_radius_rho", c.source_radius_rho);
    c.constant_d = j.value("constant_d", c.constant_d);
    c.delta_grid = j.value("delta_grid", default_delta_grid());
    c.trials_per_delta = j.value("trials_per_delta", c.trials_per_delta);
    c.network_path = j.value("network_path", c.network_path);
    const std::string mode = j.value("projector_mode", std::string("exact"));
    if (mode == "exact")
        c.projector_mode = ProjectorMode::Exact;
    else if (mode == "approximate")
        c.projector_mode = ProjectorMode::Approximate;
    else
        throw std::invalid_argument("unknown projector_mode '" + mode + "'");
    c.q_filter = filter_from_name(j.value("q_filter", std::string("tikhonov")),
                                  j.value("q_landweber_step", 1.0));
    c.phi_exponent = j.value("phi_exponent", c.phi_exponent);
    c.slope_tolerance = j.value("slope_tolerance", c.slope_tolerance);
    c.seed = j.value("seed", std::uint64_t{0});
    return c;
}

}  // namespace nsreg
