#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "nsreg/matrix.hpp"

namespace nsreg {

inline constexpr double kDefaultRankTol = 1e-12;

/// Retained spectral triples of a dense operator: A = U diag(sigma) V^T with
/// sigma_1 >= ... >= sigma_r > rank_tol * sigma_1.
struct SvdFactorization {
    Matrix left_vectors;      // m x r, orthonormal columns u_i
    Vector singular_values;   // r, strictly positive, nonincreasing
    Matrix right_vectors;     // n x r, orthonormal columns v_i
    int numerical_rank = 0;   // r
};

/// Dense m x n real operator with a lazily cached SVD. Immutable after
/// construction; cache population is compute-once and race-free, so instances
/// are safe for concurrent read-only use.
class DenseOperator {
public:
    explicit DenseOperator(Matrix entries, double rank_tol = kDefaultRankTol);

    int rows() const { return entries_.rows(); }
    int cols() const { return entries_.cols(); }
    const Matrix& entries() const { return entries_; }
    double rank_tol() const { return rank_tol_; }

    /// Computes the factorization on first use and caches it.
    const SvdFactorization& factorization() const;

    /// Bit-exact hash of (rows, cols, entries); used to tie serialized
    /// networks to the operator they were trained against.
    std::uint64_t content_hash() const;

private:
    struct Cache;
    Matrix entries_;
    double rank_tol_;
    std::shared_ptr<Cache> cache_;
};

const SvdFactorization& svd(const DenseOperator& op);

Vector apply(const DenseOperator& op, const Vector& x);          // A x
Vector apply_adjoint(const DenseOperator& op, const Vector& y);  // A^T y

/// Minimal-norm solution of the normal equation A^T A x = A^T y.
Vector pinv_apply(const DenseOperator& op, const Vector& y);

/// Orthogonal projection onto ker(A): x - V V^T x.
Vector proj_ker(const DenseOperator& op, const Vector& x);

/// (A^T A)^mu w on ker(A)^perp, zero on the numerical kernel; mu > 0.
Vector frac_power_apply(const DenseOperator& op, double mu, const Vector& w);

/// Largest retained singular value (0 for the zero operator).
double operator_norm(const DenseOperator& op);

std::string operator_hash_hex(const DenseOperator& op);

}  // namespace nsreg
