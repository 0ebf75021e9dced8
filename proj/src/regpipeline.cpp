#include "nsreg/regpipeline.hpp"

#include <cmath>
#include <stdexcept>

namespace nsreg {

MRegularizer::MRegularizer(FilterSpec f, std::shared_ptr<const DenseOperator> o,
                           NullSpaceNetwork p)
    : filter(std::move(f)), op(std::move(o)), phi(std::move(p)) {
    if (!op) throw std::invalid_argument("MRegularizer: null operator");
    if (phi.op()->content_hash() != op->content_hash())
        throw std::invalid_argument(
            "MRegularizer: network and regularizer refer to different operators");
}

double alpha_star(const ParamChoice& choice, double delta) {
    if (!(choice.smoothness_mu > 0.0 && choice.source_radius_rho > 0.0 &&
          choice.constant_d > 0.0))
        throw std::invalid_argument("alpha_star: ParamChoice fields must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("alpha_star: delta must be positive");
    const double exponent = 2.0 / (2.0 * choice.smoothness_mu + 1.0);
    return choice.constant_d * std::pow(delta / choice.source_radius_rho, exponent);
}

Vector m_generalized_inverse(const MRegularizer& reg, const Vector& y) {
    return nsn_apply(reg.phi, pinv_apply(*reg.op, y));
}

Vector reconstruct_two_step(const MRegularizer& reg, double alpha, const Vector& y_delta) {
    return nsn_apply(reg.phi, reconstruct(reg.filter, *reg.op, alpha, y_delta));
}

Vector source_element(const DenseOperator& op, const NullSpaceNetwork& phi, double mu,
                      const Vector& w) {
    return nsn_apply(phi, frac_power_apply(op, mu, w));
}

Vector ApproxProjector::operator()(const Vector& x) const {
    return vsub(x, reconstruct(filter, *op, phi_alpha, apply(*op, x)));
}

ApproxProjector approx_projector(std::shared_ptr<const DenseOperator> op,
                                 const FilterSpec& filter, double phi_alpha) {
    if (!op) throw std::invalid_argument("approx_projector: null operator");
    if (!(phi_alpha > 0.0))
        throw std::invalid_argument("approx_projector: phi_alpha must be positive");
    ApproxProjector q{std::move(op), filter, phi_alpha, 0.0};

    // ||Q - P_ker|| by power iteration on the (symmetric) difference map.
    const DenseOperator& a = *q.op;
    LinearMap diff;
    diff.rows = a.cols();
    diff.cols = a.cols();
    diff.apply = [&q, &a](const Vector& x) { return vsub(q(x), proj_ker(a, x)); };
    diff.apply_adjoint = diff.apply;
    q.deviation = spectral_norm(diff, nullptr, 1e-12).value;
    return q;
}

Vector reconstruct_two_step_approx(const MRegularizer& reg, double alpha,
                                   const ApproxProjector& q, const Vector& y_delta) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("reconstruct_two_step_approx: alpha must be positive");
    const Vector x1 = reconstruct(reg.filter, *reg.op, alpha, y_delta);
    const Vector n = forward(reg.phi.base(), x1);
    return vadd(x1, q(n));
}

Vector reconstruct_two_step_approx(const MRegularizer& reg, double alpha, double phi_alpha,
                                   const Vector& y_delta) {
    const ApproxProjector q = approx_projector(reg.op, reg.filter, phi_alpha);
    return reconstruct_two_step_approx(reg, alpha, q, y_delta);
}

}  // namespace nsreg
