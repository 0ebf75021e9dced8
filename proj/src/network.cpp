#include "nsreg/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nsreg/kernels.hpp"
#include "nsreg/rng.hpp"

namespace nsreg {

double activate(const ActivationSpec& a, double z) {
    switch (a.kind) {
        case Activation::ReLU: return z > 0.0 ? z : 0.0;
        case Activation::Identity: return z;
        case Activation::LeakyReLU: return z > 0.0 ? z : a.slope * z;
    }
    return z;
}

double activate_derivative(const ActivationSpec& a, double z) {
    switch (a.kind) {
        case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Identity: return 1.0;
        case Activation::LeakyReLU: return z > 0.0 ? 1.0 : a.slope;
    }
    return 1.0;
}

FeedForwardNet::FeedForwardNet(std::vector<AffineLayer> layers,
                               std::vector<ActivationSpec> activations)
    : layers_(std::move(layers)), activations_(std::move(activations)) {
    if (layers_.empty()) throw std::invalid_argument("FeedForwardNet: needs at least one layer");
    if (activations_.size() != layers_.size())
        throw std::invalid_argument("FeedForwardNet: one activation per layer required");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& lay = layers_[l];
        if (!lay.weight.all_finite() || !nsreg::all_finite(lay.bias))
            throw std::invalid_argument("FeedForwardNet: non-finite layer parameters");
        if (static_cast<int>(lay.bias.size()) != lay.weight.rows())
            throw std::invalid_argument("FeedForwardNet: bias/weight dimension mismatch");
        if (l > 0 && layers_[l - 1].weight.rows() != lay.weight.cols())
            throw std::invalid_argument("FeedForwardNet: inconsistent layer chain");
        const auto& act = activations_[l];
        if (act.kind == Activation::LeakyReLU && !(act.slope > 0.0 && act.slope <= 1.0))
            throw std::invalid_argument("FeedForwardNet: LeakyReLU slope must lie in (0,1]");
    }
    if (layers_.front().weight.cols() != layers_.back().weight.rows())
        throw std::invalid_argument("FeedForwardNet: input and output dimension must agree");
}

Vector forward(const FeedForwardNet& net, const Vector& x) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw std::invalid_argument("forward: dimension mismatch");
    Vector a = x;
    for (int l = 0; l < net.depth(); ++l) {
        Vector z = kernels::matvec(net.layer(l).weight, a);
        axpy(1.0, net.layer(l).bias, z);
        for (double& v : z) v = activate(net.activation(l), v);
        a = std::move(z);
    }
    return a;
}

ForwardTrace forward_trace(const FeedForwardNet& net, const Vector& x) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw std::invalid_argument("forward_trace: dimension mismatch");
    ForwardTrace t;
    t.pre.resize(net.depth());
    t.act.resize(net.depth());
    const Vector* cur = &x;
    for (int l = 0; l < net.depth(); ++l) {
        Vector z = kernels::matvec(net.layer(l).weight, *cur);
        axpy(1.0, net.layer(l).bias, z);
        t.pre[l] = z;
        for (double& v : z) v = activate(net.activation(l), v);
        t.act[l] = std::move(z);
        cur = &t.act[l];
    }
    return t;
}

namespace {

SpectralNormResult power_iteration(const LinearMap& m, const Vector* warm_start,
                                   double abs_floor) {
    constexpr int kMaxIterations = 10000;
    constexpr double kVectorTol = 1e-9;

    Vector v;
    if (warm_start && static_cast<int>(warm_start->size()) == m.cols &&
        norm2(*warm_start) > 0.0) {
        v = scaled(*warm_start, 1.0 / norm2(*warm_start));
    } else {
        Rng rng(0x5eedULL);
        v = gaussian_vector(rng, m.cols);
        const double nv = norm2(v);
        v = scaled(v, 1.0 / nv);
    }

    SpectralNormResult res;
    res.right = v;
    for (int it = 1; it <= kMaxIterations; ++it) {
        Vector mv = m.apply(v);
        const double sigma = norm2(mv);
        if (sigma <= abs_floor && sigma > 0.0) {
            res.value = sigma;
            res.left = scaled(mv, 1.0 / sigma);
            res.right = v;
            res.iterations = it;
            return res;
        }
        if (sigma == 0.0) {
            // v is (numerically) annihilated; the norm along this direction is 0
            res.value = 0.0;
            res.left = Vector(m.rows, 0.0);
            res.right = v;
            res.iterations = it;
            return res;
        }
        Vector z = m.apply_adjoint(mv);
        const double nz = norm2(z);
        if (nz == 0.0) {
            res.value = sigma;
            res.left = scaled(mv, 1.0 / sigma);
            res.right = v;
            res.iterations = it;
            return res;
        }
        Vector v_next = scaled(z, 1.0 / nz);
        // sign-align with the previous iterate so the convergence test sees
        // the subspace, not an alternating sign
        if (dot(v_next, v) < 0.0) v_next = scaled(v_next, -1.0);
        const double delta = norm2(vsub(v_next, v));
        v = std::move(v_next);
        if (delta <= kVectorTol) {
            Vector mv2 = m.apply(v);
            const double s = norm2(mv2);
            res.value = s;
            res.left = s > 0.0 ? scaled(mv2, 1.0 / s) : Vector(m.rows, 0.0);
            res.right = v;
            res.iterations = it;
            return res;
        }
        res.value = sigma;
        res.left = scaled(mv, 1.0 / sigma);
        res.right = v;
        res.iterations = it;
    }
    throw SpectralNormError("spectral_norm: power iteration did not converge", res);
}

}  // namespace

SpectralNormResult spectral_norm(const Matrix& m, const Vector* warm_start,
                                 double abs_floor) {
    if (!m.all_finite()) throw std::invalid_argument("spectral_norm: non-finite entries");
    LinearMap map;
    map.rows = m.rows();
    map.cols = m.cols();
    map.apply = [&m](const Vector& x) { return kernels::matvec(m, x); };
    map.apply_adjoint = [&m](const Vector& y) { return kernels::matvec_transpose(m, y); };
    return power_iteration(map, warm_start, abs_floor);
}

SpectralNormResult spectral_norm(const LinearMap& m, const Vector* warm_start,
                                 double abs_floor) {
    return power_iteration(m, warm_start, abs_floor);
}

double lipschitz_bound(const FeedForwardNet& net) {
    double p = 1.0;
    for (int l = 0; l < net.depth(); ++l) p *= spectral_norm(net.layer(l).weight).value;
    return p;
}

NullSpaceNetwork::NullSpaceNetwork(FeedForwardNet base, std::shared_ptr<const DenseOperator> op)
    : base_(std::move(base)), op_(std::move(op)) {
    if (!op_) throw std::invalid_argument("NullSpaceNetwork: null operator");
    if (base_.input_dim() != op_->cols() || base_.output_dim() != op_->cols())
        throw std::invalid_argument("NullSpaceNetwork: base network dimension must equal cols(A)");
}

NullSpaceNetwork::NullSpaceNetwork(FeedForwardNet base, std::shared_ptr<const DenseOperator> op,
                                   FilterSpec approx_filter, double approx_phi_alpha)
    : NullSpaceNetwork(std::move(base), std::move(op)) {
    if (!(approx_phi_alpha > 0.0))
        throw std::invalid_argument("NullSpaceNetwork: phi_alpha must be positive");
    exact_ = false;
    approx_filter_ = std::move(approx_filter);
    approx_phi_alpha_ = approx_phi_alpha;
}

Vector nsn_apply(const NullSpaceNetwork& phi, const Vector& x) {
    const Vector n = forward(phi.base(), x);
    if (phi.exact_mode()) {
        return vadd(x, proj_ker(*phi.op(), n));
    }
    // Q = Id - B_{phi_alpha} A applied to the network output
    const Vector bn = reconstruct(phi.approx_filter(), *phi.op(), phi.approx_phi_alpha(),
                                  apply(*phi.op(), n));
    return vadd(x, vsub(n, bn));
}

FeedForwardNet make_default_network(int n, std::uint64_t seed) {
    Rng rng(Rng::mix(seed, 0x6e657477ULL));
    std::vector<AffineLayer> layers;
    std::vector<ActivationSpec> acts;
    for (int l = 0; l < 3; ++l) {
        AffineLayer lay;
        lay.weight = Matrix(n, n);
        lay.bias = Vector(n, 0.0);
        const double a = std::sqrt(6.0 / (n + n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) lay.weight(i, j) = rng.uniform(-a, a);
        layers.push_back(std::move(lay));
        acts.push_back(l + 1 < 3 ? ActivationSpec::relu() : ActivationSpec::identity());
    }
    return FeedForwardNet(std::move(layers), std::move(acts));
}

FeedForwardNet make_zero_network(int n) {
    std::vector<AffineLayer> layers(1);
    layers[0].weight = Matrix(n, n, 0.0);
    layers[0].bias = Vector(n, 0.0);
    return FeedForwardNet(std::move(layers), {ActivationSpec::identity()});
}

namespace {

nlohmann::json activation_to_json(const ActivationSpec& a) {
    switch (a.kind) {
        case Activation::ReLU: return {{"kind", "relu"}};
        case Activation::Identity: return {{"kind", "identity"}};
        case Activation::LeakyReLU: return {{"kind", "leaky_relu"}, {"slope", a.slope}};
    }
    return {};
}

ActivationSpec activation_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "relu") return ActivationSpec::relu();
    if (kind == "identity") return ActivationSpec::identity();
    if (kind == "leaky_relu") return ActivationSpec::leaky_relu(j.at("slope").get<double>());
    throw std::invalid_argument("unknown activation kind: " + kind);
}

}  // namespace

std::string network_to_json(const FeedForwardNet& net, std::uint64_t seed,
                            const std::string& operator_hash) {
    nlohmann::json j;
    std::vector<int> dims;
    dims.push_back(net.input_dim());
    for (int l = 0; l < net.depth(); ++l) dims.push_back(net.layer(l).weight.rows());
    j["dims"] = dims;
    j["seed"] = seed;
    j["operator_hash"] = operator_hash;
    j["activations"] = nlohmann::json::array();
    j["layers"] = nlohmann::json::array();
    for (int l = 0; l < net.depth(); ++l) {
        j["activations"].push_back(activation_to_json(net.activation(l)));
        nlohmann::json layer;
        layer["weight"] = net.layer(l).weight.storage();  // row-major
        layer["bias"] = net.layer(l).bias;
        j["layers"].push_back(std::move(layer));
    }
    return j.dump(2);
}

NetworkFile network_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const auto dims = j.at("dims").get<std::vector<int>>();
    if (dims.size() < 2) throw std::invalid_argument("network JSON: bad dims");
    std::vector<AffineLayer> layers;
    std::vector<ActivationSpec> acts;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int in = dims[l], out = dims[l + 1];
        const auto& jl = j.at("layers").at(l);
        const auto w = jl.at("weight").get<std::vector<double>>();
        const auto b = jl.at("bias").get<std::vector<double>>();
        if (static_cast<int>(w.size()) != in * out || static_cast<int>(b.size()) != out)
            throw std::invalid_argument("network JSON: layer size mismatch");
        AffineLayer lay;
        lay.weight = Matrix(out, in);
        std::copy(w.begin(), w.end(), lay.weight.data());
        lay.bias = b;
        layers.push_back(std::move(lay));
        acts.push_back(activation_from_json(j.at("activations").at(l)));
    }
    NetworkFile f{FeedForwardNet(std::move(layers), std::move(acts)),
                  j.value("seed", std::uint64_t{0}), j.value("operator_hash", std::string{})};
    return f;
}

void save_network_json(const FeedForwardNet& net, std::uint64_t seed,
                       const std::string& operator_hash, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write network file: " + path);
    f << network_to_json(net, seed, operator_hash) << '\n';
}

NetworkFile load_network_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open network file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return network_from_json(ss.str());
}

}  // namespace nsreg
