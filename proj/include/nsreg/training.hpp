#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nsreg/filters.hpp"
#include "nsreg/linop.hpp"
#include "nsreg/network.hpp"

namespace nsreg {

struct TrainingSet {
    std::vector<Vector> phantoms;
    int count() const { return static_cast<int>(phantoms.size()); }
};

enum class TrainMode { ExactProjector, Regularized };

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 100;
    double reg_weight = 0.0;  // weight of the layer-norm product penalty
    std::uint64_t seed = 0;
    TrainMode mode = TrainMode::ExactProjector;
    double alpha = 0.0;        // Regularized mode only
    FilterSpec filter;         // Regularized mode only
};

struct LossBreakdown {
    double data_term = 0.0;
    double reg_term = 0.0;
    double total = 0.0;
};

/// (1/2) sum_n || x_n - Phi(P_{ker^perp} x_n) ||^2 + reg_weight * prod_l ||W_l||.
LossBreakdown loss_exact(const FeedForwardNet& net, const DenseOperator& op,
                         const TrainingSet& set, double reg_weight);

/// Same with P_{ker^perp} replaced by B_alpha A and P_ker by Id - B_alpha A.
LossBreakdown loss_regularized(const FeedForwardNet& net, const DenseOperator& op,
                               const FilterSpec& filter, double alpha,
                               const TrainingSet& set, double reg_weight);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

/// Exact gradient of the configured loss: reverse-mode through the projected
/// wrapper for the data term, u v^T subgradients scaled by the partial norm
/// products for the penalty. ReLU subgradient at 0 is 0.
Gradients grad(const FeedForwardNet& net, const DenseOperator& op, const TrainingSet& set,
               const TrainConfig& config);

class TrainingStalled : public std::runtime_error {
public:
    TrainingStalled(const std::string& what, std::vector<LossBreakdown> history)
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<LossBreakdown>& history() const { return history_; }

private:
    std::vector<LossBreakdown> history_;
};

struct TrainResult {
    FeedForwardNet net;
    std::vector<LossBreakdown> history;  // epochs+1 entries, first is the initial loss
};

/// Full-batch gradient descent, deterministic given the seed. Each epoch
/// halves the step (at most 20 times) until the total does not increase;
/// 20 consecutive failed halvings raise TrainingStalled with the history.
TrainResult train(FeedForwardNet net, const DenseOperator& op, const TrainingSet& set,
                  const TrainConfig& config);

/// Piecewise-constant random signals (3-6 plateaus, values in
/// [-amplitude, amplitude]); the default phantom class for experiments.
TrainingSet make_piecewise_phantoms(int n, int count, std::uint64_t seed,
                                    double amplitude = 1.0);

}  // namespace nsreg
