#include "nsreg/kernels.hpp"

#include <stdexcept>

namespace nsreg::kernels {

namespace serial {

void matvec(const Matrix& a, const double* x, double* y) {
    const int m = a.rows(), n = a.cols();
    const double* p = a.data();
    for (int i = 0; i < m; ++i) {
        const double* row = p + static_cast<std::size_t>(i) * n;
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

void matvec_transpose(const Matrix& a, const double* x, double* y) {
    const int m = a.rows(), n = a.cols();
    const double* p = a.data();
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += p[static_cast<std::size_t>(i) * n + j] * x[i];
        y[j] = s;
    }
}

}  // namespace serial

namespace parallel {

void matvec(const Matrix& a, const double* x, double* y) {
    const int m = a.rows(), n = a.cols();
    const double* p = a.data();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const double* row = p + static_cast<std::size_t>(i) * n;
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

void matvec_transpose(const Matrix& a, const double* x, double* y) {
    const int m = a.rows(), n = a.cols();
    const double* p = a.data();
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += p[static_cast<std::size_t>(i) * n + j] * x[i];
        y[j] = s;
    }
}

}  // namespace parallel

namespace {
// Below this many multiply-adds the omp fork/join overhead dominates.
constexpr long kParallelThreshold = 256 * 256;
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (static_cast<int>(x.size()) != a.cols())
        throw std::invalid_argument("matvec: dimension mismatch");
    Vector y(a.rows());
    if (static_cast<long>(a.rows()) * a.cols() >= kParallelThreshold)
        parallel::matvec(a, x.data(), y.data());
    else
        serial::matvec(a, x.data(), y.data());
    return y;
}

Vector matvec_transpose(const Matrix& a, const Vector& x) {
    if (static_cast<int>(x.size()) != a.rows())
        throw std::invalid_argument("matvec_transpose: dimension mismatch");
    Vector y(a.cols());
    if (static_cast<long>(a.rows()) * a.cols() >= kParallelThreshold)
        parallel::matvec_transpose(a, x.data(), y.data());
    else
        serial::matvec_transpose(a, x.data(), y.data());
    return y;
}

}  // namespace nsreg::kernels
