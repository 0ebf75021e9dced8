#include "nsreg/linop.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cstring>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "nsreg/kernels.hpp"

namespace nsreg {

struct DenseOperator::Cache {
    std::once_flag once;
    SvdFactorization fact;
};

DenseOperator::DenseOperator(Matrix entries, double rank_tol)
    : entries_(std::move(entries)), rank_tol_(rank_tol), cache_(std::make_shared<Cache>()) {
    if (entries_.rows() <= 0 || entries_.cols() <= 0)
        throw std::invalid_argument("DenseOperator: dimensions must be positive");
    if (!entries_.all_finite())
        throw std::invalid_argument("DenseOperator: rejected input, entries must be finite");
    if (!(rank_tol_ >= 0.0 && rank_tol_ < 1.0))
        throw std::invalid_argument("DenseOperator: rank_tol must lie in [0,1)");
}

const SvdFactorization& DenseOperator::factorization() const {
    std::call_once(cache_->once, [this] {
        const int m = rows(), n = cols();
        Eigen::MatrixXd a(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = entries_(i, j);
        Eigen::JacobiSVD<Eigen::MatrixXd> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = dec.singularValues();
        const double cutoff = sv.size() > 0 ? rank_tol_ * sv(0) : 0.0;
        int r = 0;
        while (r < sv.size() && sv(r) > cutoff && sv(r) > 0.0) ++r;

        SvdFactorization f;
        f.numerical_rank = r;
        f.left_vectors = Matrix(m, r);
        f.right_vectors = Matrix(n, r);
        f.singular_values.resize(r);
        for (int k = 0; k < r; ++k) {
            f.singular_values[k] = sv(k);
            for (int i = 0; i < m; ++i) f.left_vectors(i, k) = dec.matrixU()(i, k);
            for (int j = 0; j < n; ++j) f.right_vectors(j, k) = dec.matrixV()(j, k);
        }
        cache_->fact = std::move(f);
    });
    return cache_->fact;
}

std::uint64_t DenseOperator::content_hash() const {
    // FNV-1a over dims and the raw byte representation of the entries.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* p, std::size_t len) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::int64_t dims[2] = {rows(), cols()};
    feed(dims, sizeof(dims));
    feed(entries_.data(), sizeof(double) * static_cast<std::size_t>(rows()) * cols());
    return h;
}

const SvdFactorization& svd(const DenseOperator& op) { return op.factorization(); }

Vector apply(const DenseOperator& op, const Vector& x) {
    if (static_cast<int>(x.size()) != op.cols())
        throw std::invalid_argument("apply: dimension mismatch");
    return kernels::matvec(op.entries(), x);
}

Vector apply_adjoint(const DenseOperator& op, const Vector& y) {
    if (static_cast<int>(y.size()) != op.rows())
        throw std::invalid_argument("apply_adjoint: dimension mismatch");
    return kernels::matvec_transpose(op.entries(), y);
}

namespace {

// x = V diag(coeff) U^T y, summing over the retained triples.
Vector spectral_expand(const SvdFactorization& f, const Vector& coeffs) {
    return kernels::matvec(f.right_vectors, coeffs);
}

}  // namespace

Vector pinv_apply(const DenseOperator& op, const Vector& y) {
    if (static_cast<int>(y.size()) != op.rows())
        throw std::invalid_argument("pinv_apply: dimension mismatch");
    const SvdFactorization& f = op.factorization();
    Vector c = kernels::matvec_transpose(f.left_vectors, y);
    for (int k = 0; k < f.numerical_rank; ++k) c[k] /= f.singular_values[k];
    return spectral_expand(f, c);
}

Vector proj_ker(const DenseOperator& op, const Vector& x) {
    if (static_cast<int>(x.size()) != op.cols())
        throw std::invalid_argument("proj_ker: dimension mismatch");
    const SvdFactorization& f = op.factorization();
    Vector c = kernels::matvec_transpose(f.right_vectors, x);
    Vector vc = spectral_expand(f, c);
    return vsub(x, vc);
}

Vector frac_power_apply(const DenseOperator& op, double mu, const Vector& w) {
    if (!(mu > 0.0)) throw std::invalid_argument("frac_power_apply: mu must be positive");
    if (static_cast<int>(w.size()) != op.cols())
        throw std::invalid_argument("frac_power_apply: dimension mismatch");
    const SvdFactorization& f = op.factorization();
    Vector c = kernels::matvec_transpose(f.right_vectors, w);
    for (int k = 0; k < f.numerical_rank; ++k)
        c[k] *= std::pow(f.singular_values[k], 2.0 * mu);
    return spectral_expand(f, c);
}

double operator_norm(const DenseOperator& op) {
    const SvdFactorization& f = op.factorization();
    return f.numerical_rank > 0 ? f.singular_values[0] : 0.0;
}

std::string operator_hash_hex(const DenseOperator& op) {
    std::ostringstream s;
    s << "fnv1a:" << std::hex << op.content_hash();
    return s.str();
}

}  // namespace nsreg
