#pragma once

#include "nsreg/matrix.hpp"

namespace nsreg::kernels {

// Serial reference kernels. These are the ground truth the OpenMP variants
// are tested against and benchmarked against.
namespace serial {
void matvec(const Matrix& a, const double* x, double* y);            // y = A x
void matvec_transpose(const Matrix& a, const double* x, double* y);  // y = A^T x
}  // namespace serial

// OpenMP kernels. Each output element accumulates its sum in the same order
// as the serial reference, so results are bit-identical for any thread count.
namespace parallel {
void matvec(const Matrix& a, const double* x, double* y);
void matvec_transpose(const Matrix& a, const double* x, double* y);
}  // namespace parallel

// Facade used by the library: dispatches to the OpenMP kernels above a size
// threshold, to the serial reference below it. Output is identical either way.
Vector matvec(const Matrix& a, const Vector& x);
Vector matvec_transpose(const Matrix& a, const Vector& x);

}  // namespace nsreg::kernels
