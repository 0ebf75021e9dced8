#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsreg/filters.hpp"
#include "nsreg/linop.hpp"

namespace nsreg {

enum class Activation { ReLU, Identity, LeakyReLU };

struct ActivationSpec {
    Activation kind = Activation::ReLU;
    double slope = 0.01;  // LeakyReLU only; must lie in (0,1] to stay 1-Lipschitz

    static ActivationSpec relu() { return {Activation::ReLU, 0.0}; }
    static ActivationSpec identity() { return {Activation::Identity, 0.0}; }
    static ActivationSpec leaky_relu(double slope) { return {Activation::LeakyReLU, slope}; }
};

double activate(const ActivationSpec& a, double z);
// Subgradient convention: ReLU' (0) = 0, LeakyReLU'(0) = slope.
double activate_derivative(const ActivationSpec& a, double z);

struct AffineLayer {
    Matrix weight;  // out_dim x in_dim
    Vector bias;    // out_dim
};

/// Layered feed-forward network: x -> act_L(W_L ... act_1(W_1 x + b_1) ...).
/// Input and output dimension coincide (the network acts on signal space).
class FeedForwardNet {
public:
    FeedForwardNet(std::vector<AffineLayer> layers, std::vector<ActivationSpec> activations);

    int depth() const { return static_cast<int>(layers_.size()); }
    int input_dim() const { return layers_.front().weight.cols(); }
    int output_dim() const { return layers_.back().weight.rows(); }

    const AffineLayer& layer(int l) const { return layers_[l]; }
    AffineLayer& layer(int l) { return layers_[l]; }
    const ActivationSpec& activation(int l) const { return activations_[l]; }

private:
    std::vector<AffineLayer> layers_;
    std::vector<ActivationSpec> activations_;
};

Vector forward(const FeedForwardNet& net, const Vector& x);

/// Per-layer pre-activations and activations, as needed by backpropagation.
struct ForwardTrace {
    std::vector<Vector> pre;  // pre[l] = W_l a_{l-1} + b_l
    std::vector<Vector> act;  // act[l] = sigma_l(pre[l]); act.back() is the output
};
ForwardTrace forward_trace(const FeedForwardNet& net, const Vector& x);

struct SpectralNormResult {
    double value = 0.0;
    Vector left;   // converged u with M v = value * u
    Vector right;  // converged v
    int iterations = 0;
};

/// Thrown when power iteration fails to converge; carries the best estimate.
class SpectralNormError : public std::runtime_error {
public:
    SpectralNormError(const std::string& what, SpectralNormResult best)
        : std::runtime_error(what), best_(std::move(best)) {}
    const SpectralNormResult& best_estimate() const { return best_; }

private:
    SpectralNormResult best_;
};

/// Matrix-free linear map, used for spectral norms of operator differences.
struct LinearMap {
    int rows = 0, cols = 0;
    std::function<Vector(const Vector&)> apply;
    std::function<Vector(const Vector&)> apply_adjoint;
};

/// Largest singular value by power iteration on M^T M, relative accuracy
/// 1e-8; at most 1e4 iterations. An optional warm-start vector speeds up
/// repeated calls on slowly changing matrices. Estimates at or below
/// abs_floor count as converged (the iteration cannot stabilize on maps that
/// are zero up to float noise).
SpectralNormResult spectral_norm(const Matrix& m, const Vector* warm_start = nullptr,
                                 double abs_floor = 0.0);
SpectralNormResult spectral_norm(const LinearMap& m, const Vector* warm_start = nullptr,
                                 double abs_floor = 0.0);

/// Product of the layer weight spectral norms; an upper Lipschitz bound since
/// every admitted activation is 1-Lipschitz.
double lipschitz_bound(const FeedForwardNet& net);

/// The projected wrapper Phi = Id + P_ker(A) o N. In approximate-projector
/// mode, P_ker is replaced by Q = Id - B_{phi_alpha} A.
class NullSpaceNetwork {
public:
    NullSpaceNetwork(FeedForwardNet base, std::shared_ptr<const DenseOperator> op);
    NullSpaceNetwork(FeedForwardNet base, std::shared_ptr<const DenseOperator> op,
                     FilterSpec approx_filter, double approx_phi_alpha);

    const FeedForwardNet& base() const { return base_; }
    FeedForwardNet& base() { return base_; }
    const std::shared_ptr<const DenseOperator>& op() const { return op_; }
    bool exact_mode() const { return exact_; }
    const FilterSpec& approx_filter() const { return approx_filter_; }
    double approx_phi_alpha() const { return approx_phi_alpha_; }

private:
    FeedForwardNet base_;
    std::shared_ptr<const DenseOperator> op_;
    bool exact_ = true;
    FilterSpec approx_filter_;
    double approx_phi_alpha_ = 0.0;
};

Vector nsn_apply(const NullSpaceNetwork& phi, const Vector& x);

/// Default experiment architecture: depth 3, hidden widths n, ReLU on hidden
/// layers, identity on the last layer (outputs must take signed values).
/// Weights uniform in +-sqrt(6/(fan_in+fan_out)), biases zero.
FeedForwardNet make_default_network(int n, std::uint64_t seed);

/// Single zero layer; the base of the identity null-space network.
FeedForwardNet make_zero_network(int n);

struct NetworkFile {
    FeedForwardNet net;
    std::uint64_t seed = 0;
    std::string operator_hash;
};

void save_network_json(const FeedForwardNet& net, std::uint64_t seed,
                       const std::string& operator_hash, const std::string& path);
NetworkFile load_network_json(const std::string& path);

std::string network_to_json(const FeedForwardNet& net, std::uint64_t seed,
                            const std::string& operator_hash);
NetworkFile network_from_json(const std::string& text);

}  // namespace nsreg
