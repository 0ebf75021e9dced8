#include "nsreg/training.hpp"

#include <cmath>
#include <functional>

#include "nsreg/kernels.hpp"
#include "nsreg/rng.hpp"

namespace nsreg {

namespace {

using KernelSideMap = std::function<Vector(const Vector&)>;

// The kernel-side map K of the configured loss: P_ker exactly, or
// Id - B_alpha A in regularized mode. Both are symmetric.
KernelSideMap make_kernel_side_map(const DenseOperator& op, TrainMode mode,
                                   const FilterSpec& filter, double alpha) {
    if (mode == TrainMode::ExactProjector)
        return [&op](const Vector& v) { return proj_ker(op, v); };
    if (!(alpha > 0.0))
        throw std::invalid_argument("regularized loss: alpha must be positive");
    return [&op, filter, alpha](const Vector& v) {
        return vsub(v, reconstruct(filter, op, alpha, apply(op, v)));
    };
}

void check_set(const DenseOperator& op, const TrainingSet& set) {
    if (set.count() < 1) throw std::invalid_argument("training set must contain a phantom");
    for (const auto& x : set.phantoms)
        if (static_cast<int>(x.size()) != op.cols())
            throw std::invalid_argument("phantom dimension must equal cols(A)");
}

struct LayerNorms {
    std::vector<double> values;
    std::vector<Vector> left, right;
};

LayerNorms layer_norms(const FeedForwardNet& net, std::vector<Vector>* warm) {
    LayerNorms n;
    for (int l = 0; l < net.depth(); ++l) {
        const Vector* start = (warm && static_cast<int>(warm->size()) == net.depth())
                                  ? &(*warm)[l]
                                  : nullptr;
        SpectralNormResult r = spectral_norm(net.layer(l).weight, start);
        if (warm) {
            if (static_cast<int>(warm->size()) != net.depth()) warm->assign(net.depth(), {});
            (*warm)[l] = r.right;
        }
        n.values.push_back(r.value);
        n.left.push_back(std::move(r.left));
        n.right.push_back(std::move(r.right));
    }
    return n;
}

double norm_product(const std::vector<double>& values) {
    double p = 1.0;
    for (double v : values) p *= v;
    return p;
}

// Per-sample squared residuals, summed in sample order for bit-stable totals.
double data_term(const FeedForwardNet& net, const TrainingSet& set, const KernelSideMap& k) {
    const int count = set.count();
    std::vector<double> per_sample(count);
    std::exception_ptr sample_error;
#pragma omp parallel for schedule(static)
    for (int n = 0; n < count; ++n) {
        try {
            const Vector& x = set.phantoms[n];
            const Vector kx = k(x);
            const Vector z = vsub(x, kx);
            const Vector kn = k(forward(net, z));
            const Vector r = vsub(kx, kn);
            per_sample[n] = dot(r, r);
        } catch (...) {
#pragma omp critical(loss_sample_error)
            if (!sample_error) sample_error = std::current_exception();
        }
    }
    if (sample_error) std::rethrow_exception(sample_error);
    double s = 0.0;
    for (int n = 0; n < count; ++n) s += per_sample[n];
    return 0.5 * s;
}

LossBreakdown loss_with(const FeedForwardNet& net, const TrainingSet& set,
                        const KernelSideMap& k, double reg_weight,
                        std::vector<Vector>* warm) {
    LossBreakdown out;
    out.data_term = data_term(net, set, k);
    out.reg_term = reg_weight > 0.0
                       ? reg_weight * norm_product(layer_norms(net, warm).values)
                       : 0.0;
    out.total = out.data_term + out.reg_term;
    return out;
}

Gradients zero_gradients(const FeedForwardNet& net) {
    Gradients g;
    for (int l = 0; l < net.depth(); ++l) {
        g.weights.emplace_back(net.layer(l).weight.rows(), net.layer(l).weight.cols());
        g.biases.emplace_back(net.layer(l).bias.size(), 0.0);
    }
    return g;
}

void accumulate(Gradients& acc, const Gradients& g) {
    for (std::size_t l = 0; l < acc.weights.size(); ++l) {
        double* a = acc.weights[l].data();
        const double* b = g.weights[l].data();
        const std::size_t len =
            static_cast<std::size_t>(acc.weights[l].rows()) * acc.weights[l].cols();
        for (std::size_t i = 0; i < len; ++i) a[i] += b[i];
        axpy(1.0, g.biases[l], acc.biases[l]);
    }
}

// Reverse-mode pass for one sample; upstream is dLoss/d(network output).
void backprop_sample(const FeedForwardNet& net, const Vector& input, const ForwardTrace& trace,
                     Vector upstream, Gradients& g) {
    for (int l = net.depth() - 1; l >= 0; --l) {
        Vector delta = std::move(upstream);
        for (std::size_t i = 0; i < delta.size(); ++i)
            delta[i] *= activate_derivative(net.activation(l), trace.pre[l][i]);
        const Vector& a_prev = l > 0 ? trace.act[l - 1] : input;
        Matrix& gw = g.weights[l];
        for (int i = 0; i < gw.rows(); ++i) {
            const double d = delta[i];
            double* row = gw.data() + static_cast<std::size_t>(i) * gw.cols();
            for (int j = 0; j < gw.cols(); ++j) row[j] += d * a_prev[j];
        }
        axpy(1.0, delta, g.biases[l]);
        if (l > 0) upstream = kernels::matvec_transpose(net.layer(l).weight, delta);
    }
}

Gradients grad_with(const FeedForwardNet& net, const TrainingSet& set, const KernelSideMap& k,
                    double reg_weight, std::vector<Vector>* warm) {
    const int count = set.count();
    std::vector<Gradients> per_sample(count);
    std::exception_ptr sample_error;
#pragma omp parallel for schedule(static)
    for (int n = 0; n < count; ++n) {
        try {
            Gradients g = zero_gradients(net);
            const Vector& x = set.phantoms[n];
            const Vector kx = k(x);
            const Vector z = vsub(x, kx);
            const ForwardTrace trace = forward_trace(net, z);
            const Vector kn = k(trace.act.back());
            const Vector r = vsub(kx, kn);
            // d/d(output) of 0.5||kx - K output||^2 is -K r (K is symmetric)
            backprop_sample(net, z, trace, scaled(k(r), -1.0), g);
            per_sample[n] = std::move(g);
        } catch (...) {
#pragma omp critical(grad_sample_error)
            if (!sample_error) sample_error = std::current_exception();
        }
    }
    if (sample_error) std::rethrow_exception(sample_error);
    Gradients total = zero_gradients(net);
    for (int n = 0; n < count; ++n) accumulate(total, per_sample[n]);

    if (reg_weight > 0.0) {
        const LayerNorms norms = layer_norms(net, warm);
        for (int l = 0; l < net.depth(); ++l) {
            double partial = 1.0;
            for (int j = 0; j < net.depth(); ++j)
                if (j != l) partial *= norms.values[j];
            const double scale = reg_weight * partial;
            Matrix& gw = total.weights[l];
            const Vector& u = norms.left[l];
            const Vector& v = norms.right[l];
            if (u.empty() || v.empty()) continue;
            for (int i = 0; i < gw.rows(); ++i)
                for (int j = 0; j < gw.cols(); ++j) gw(i, j) += scale * u[i] * v[j];
        }
    }
    return total;
}

KernelSideMap map_for_config(const DenseOperator& op, const TrainConfig& config) {
    return make_kernel_side_map(op, config.mode, config.filter, config.alpha);
}

}  // namespace

LossBreakdown loss_exact(const FeedForwardNet& net, const DenseOperator& op,
                         const TrainingSet& set, double reg_weight) {
    check_set(op, set);
    const auto k = make_kernel_side_map(op, TrainMode::ExactProjector, {}, 0.0);
    return loss_with(net, set, k, reg_weight, nullptr);
}

LossBreakdown loss_regularized(const FeedForwardNet& net, const DenseOperator& op,
                               const FilterSpec& filter, double alpha,
                               const TrainingSet& set, double reg_weight) {
    check_set(op, set);
    const auto k = make_kernel_side_map(op, TrainMode::Regularized, filter, alpha);
    return loss_with(net, set, k, reg_weight, nullptr);
}

Gradients grad(const FeedForwardNet& net, const DenseOperator& op, const TrainingSet& set,
               const TrainConfig& config) {
    check_set(op, set);
    const auto k = map_for_config(op, config);
    return grad_with(net, set, k, config.reg_weight, nullptr);
}

TrainResult train(FeedForwardNet net, const DenseOperator& op, const TrainingSet& set,
                  const TrainConfig& config) {
    check_set(op, set);
    if (!(config.learning_rate > 0.0))
        throw std::invalid_argument("train: learning_rate must be positive");
    if (config.epochs < 1) throw std::invalid_argument("train: epochs must be positive");
    if (config.reg_weight < 0.0)
        throw std::invalid_argument("train: reg_weight must be nonnegative");

    const auto k = map_for_config(op, config);
    std::vector<Vector> warm;
    std::vector<LossBreakdown> history;
    LossBreakdown current = loss_with(net, set, k, config.reg_weight, &warm);
    history.push_back(current);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const Gradients g = grad_with(net, set, k, config.reg_weight, &warm);
        double step = config.learning_rate;
        bool accepted = false;
        for (int halving = 0; halving <= 20 && !accepted; ++halving) {
            FeedForwardNet candidate = net;
            for (int l = 0; l < candidate.depth(); ++l) {
                Matrix& w = candidate.layer(l).weight;
                const Matrix& gw = g.weights[l];
                double* wp = w.data();
                const double* gp = gw.data();
                const std::size_t len = static_cast<std::size_t>(w.rows()) * w.cols();
                for (std::size_t i = 0; i < len; ++i) wp[i] -= step * gp[i];
                axpy(-step, g.biases[l], candidate.layer(l).bias);
            }
            const LossBreakdown cl = loss_with(candidate, set, k, config.reg_weight, &warm);
            // tolerate float-resolution upticks so convergence plateaus do
            // not register as increases
            if (cl.total <= current.total + 1e-12 * std::max(current.total, 1e-300)) {
                net = std::move(candidate);
                current = cl;
                accepted = true;
            } else {
                step *= 0.5;
            }
        }
        if (!accepted)
            throw TrainingStalled("train: step size collapsed after 20 halvings", history);
        history.push_back(current);
    }
    return {std::move(net), std::move(history)};
}

TrainingSet make_piecewise_phantoms(int n, int count, std::uint64_t seed, double amplitude) {
    if (n < 1 || count < 1)
        throw std::invalid_argument("make_piecewise_phantoms: bad dimensions");
    TrainingSet set;
    for (int s = 0; s < count; ++s) {
        Rng rng(Rng::mix(seed, 0x7068616eULL, static_cast<std::uint64_t>(s)));
        const int plateaus = 3 + static_cast<int>(rng.next_u64() % 4);  // 3..6
        // distinct interior breakpoints
        std::vector<int> cuts{0, n};
        while (static_cast<int>(cuts.size()) < plateaus + 1) {
            const int c = 1 + static_cast<int>(rng.next_u64() % (n - 1));
            bool dup = false;
            for (int e : cuts) dup = dup || (e == c);
            if (!dup) cuts.push_back(c);
        }
        std::sort(cuts.begin(), cuts.end());
        Vector x(n);
        for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
            const double v = rng.uniform(-amplitude, amplitude);
            for (int i = cuts[p]; i < cuts[p + 1]; ++i) x[i] = v;
        }
        set.phantoms.push_back(std::move(x));
    }
    return set;
}

}  // namespace nsreg
