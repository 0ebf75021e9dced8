#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nsreg/kernels.hpp"
#include "nsreg/rng.hpp"

using namespace nsreg;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

}  // namespace

TEST_CASE("parallel matvec is bit-identical to the serial reference") {
    for (auto [m, n] : {std::pair{3, 5}, {64, 64}, {257, 129}, {512, 96}}) {
        const Matrix a = random_matrix(m, n, 1000 + m + n);
        Rng rng(m * 31 + n);
        const Vector x = gaussian_vector(rng, n);
        Vector ys(m), yp(m);
        kernels::serial::matvec(a, x.data(), ys.data());
        kernels::parallel::matvec(a, x.data(), yp.data());
        for (int i = 0; i < m; ++i) CHECK(ys[i] == yp[i]);

        const Vector y = gaussian_vector(rng, m);
        Vector zs(n), zp(n);
        kernels::serial::matvec_transpose(a, y.data(), zs.data());
        kernels::parallel::matvec_transpose(a, y.data(), zp.data());
        for (int j = 0; j < n; ++j) CHECK(zs[j] == zp[j]);
    }
}

TEST_CASE("facade matches the serial reference on both sides of the threshold") {
    for (auto [m, n] : {std::pair{4, 4}, {300, 200}}) {
        const Matrix a = random_matrix(m, n, 7 + m);
        Rng rng(n);
        const Vector x = gaussian_vector(rng, n);
        Vector ref(m);
        kernels::serial::matvec(a, x.data(), ref.data());
        const Vector got = kernels::matvec(a, x);
        for (int i = 0; i < m; ++i) CHECK(got[i] == ref[i]);
    }
}

TEST_CASE("matvec against a hand-computed product") {
    Matrix a(2, 3);
    a(0, 0) = 1, a(0, 1) = 2, a(0, 2) = 3;
    a(1, 0) = -1, a(1, 1) = 0, a(1, 2) = 4;
    const Vector x{1.0, -1.0, 2.0};
    const Vector y = kernels::matvec(a, x);
    CHECK(y[0] == doctest::Approx(5.0));
    CHECK(y[1] == doctest::Approx(7.0));
    const Vector z = kernels::matvec_transpose(a, {2.0, 1.0});
    CHECK(z[0] == doctest::Approx(1.0));
    CHECK(z[1] == doctest::Approx(4.0));
    CHECK(z[2] == doctest::Approx(10.0));
}

TEST_CASE("dimension mismatch is rejected") {
    const Matrix a = random_matrix(3, 4, 5);
    CHECK_THROWS_AS((void)kernels::matvec(a, Vector(3, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS((void)kernels::matvec_transpose(a, Vector(4, 0.0)), std::invalid_argument);
}
