#pragma once

#include <memory>

#include "nsreg/filters.hpp"
#include "nsreg/linop.hpp"
#include "nsreg/network.hpp"

namespace nsreg {

/// A filter-based reconstructor B_alpha paired with a null-space network:
/// R_alpha = Phi o B_alpha.
struct MRegularizer {
    FilterSpec filter;
    std::shared_ptr<const DenseOperator> op;
    NullSpaceNetwork phi;

    MRegularizer(FilterSpec f, std::shared_ptr<const DenseOperator> o, NullSpaceNetwork p);
};

/// A-priori parameter choice alpha* = d * (delta/rho)^(2/(2 mu + 1)).
struct ParamChoice {
    double smoothness_mu = 0.5;
    double source_radius_rho = 1.0;
    double constant_d = 1.0;
};

double alpha_star(const ParamChoice& choice, double delta);

/// A^M y = Phi(A^+ y): the data-consistent solution of the normal equation
/// selected by the network.
Vector m_generalized_inverse(const MRegularizer& reg, const Vector& y);

/// R_alpha(y) = Phi(B_alpha y).
Vector reconstruct_two_step(const MRegularizer& reg, double alpha, const Vector& y_delta);

/// Element of the source set: Phi((A^T A)^mu w); the caller controls the
/// radius through ||w||.
Vector source_element(const DenseOperator& op, const NullSpaceNetwork& phi, double mu,
                      const Vector& w);

/// Q = Id - B_{phi_alpha} A, the kernel-side approximation of P_ker, with its
/// measured spectral-norm deviation ||Q - P_ker|| (power iteration on the
/// difference map).
struct ApproxProjector {
    std::shared_ptr<const DenseOperator> op;
    FilterSpec filter;
    double phi_alpha = 0.0;
    double deviation = 0.0;

    Vector operator()(const Vector& x) const;
};

ApproxProjector approx_projector(std::shared_ptr<const DenseOperator> op,
                                 const FilterSpec& filter, double phi_alpha);

/// R_alpha(y) = x1 + Q(N(x1)) with x1 = B_alpha y and an explicit Q.
Vector reconstruct_two_step_approx(const MRegularizer& reg, double alpha,
                                   const ApproxProjector& q, const Vector& y_delta);
/// Convenience overload building Q from the regularizer's own filter.
Vector reconstruct_two_step_approx(const MRegularizer& reg, double alpha, double phi_alpha,
                                   const Vector& y_delta);

}  // namespace nsreg
