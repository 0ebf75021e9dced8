#pragma once

#include <string>
#include <vector>

namespace nsreg {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0);

    static Matrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& storage() const { return data_; }

    Matrix transposed() const;
    bool all_finite() const;
    double frobenius_norm() const;
    double max_abs() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Basic vector helpers shared across modules.
double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
void axpy(double a, const Vector& x, Vector& y);  // y += a*x
Vector scaled(const Vector& x, double a);
Vector vsub(const Vector& a, const Vector& b);
Vector vadd(const Vector& a, const Vector& b);
bool all_finite(const Vector& v);

// Plain-text CSV operator I/O: one matrix row per line, comma-separated decimals.
Matrix load_matrix_csv(const std::string& path);
Matrix parse_matrix_csv(std::istream& in);
void save_matrix_csv(const Matrix& m, const std::string& path);

}  // namespace nsreg
