#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nsreg/regpipeline.hpp"
#include "nsreg/rng.hpp"
#include "test_util.hpp"

using namespace nsreg;
using namespace nsreg::testutil;

namespace {

FeedForwardNet constant_base(int n, const Vector& c) {
    std::vector<AffineLayer> layers(1);
    layers[0].weight = Matrix(n, n, 0.0);
    layers[0].bias = c;
    return FeedForwardNet(std::move(layers), {ActivationSpec::identity()});
}

std::shared_ptr<const DenseOperator> shared_op(Matrix m) {
    return std::make_shared<const DenseOperator>(std::move(m));
}

}  // namespace

TEST_CASE("alpha_star a-priori parameter choice") {
    CHECK(alpha_star({0.5, 1.0, 1.0}, 0.01) == doctest::Approx(0.01));
    CHECK(alpha_star({1.0, 1.0, 1.0}, 0.001) == doctest::Approx(0.01));
    for (double mu : {0.3, 0.5, 1.0, 2.0})
        CHECK(alpha_star({mu, 0.37, 1.0}, 0.37) == doctest::Approx(1.0));

    CHECK_THROWS_AS((void)alpha_star({0.5, 1.0, 1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)alpha_star({0.5, 1.0, 1.0}, -1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)alpha_star({0.0, 1.0, 1.0}, 0.1), std::invalid_argument);
}

TEST_CASE("m_generalized_inverse on hand-checked cases") {
    auto row = shared_op(from_rows({{1, 1}}));

    // zero base: coincides with the Moore-Penrose inverse
    const MRegularizer plain(FilterSpec::tikhonov(), row,
                             NullSpaceNetwork(make_zero_network(2), row));
    const Vector x = m_generalized_inverse(plain, {2.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));

    // y = 0 with constant base c: A^M 0 = P_ker(c)
    const Vector c{1.0, 0.0};
    const MRegularizer constant(FilterSpec::tikhonov(), row,
                                NullSpaceNetwork(constant_base(2, c), row));
    const Vector z = m_generalized_inverse(constant, {0.0});
    CHECK(z[0] == doctest::Approx(0.5));
    CHECK(z[1] == doctest::Approx(-0.5));
}

TEST_CASE("m_generalized_inverse solves the normal equation exactly") {
    auto op = shared_op(random_rank_deficient(5, 8, 3, 10));
    const MRegularizer reg(FilterSpec::tikhonov(), op,
                           NullSpaceNetwork(make_default_network(8, 4), op));
    Rng rng(2);
    for (int t = 0; t < 10; ++t) {
        const Vector y = gaussian_vector(rng, 5);
        const Vector x = m_generalized_inverse(reg, y);
        // A^T A x = A^T y
        const Vector lhs = apply_adjoint(*op, nsreg::apply(*op, x));
        const Vector rhs = apply_adjoint(*op, y);
        CHECK(norm2(vsub(lhs, rhs)) <= 1e-9 * std::max(1.0, norm2(rhs)));
    }
}

TEST_CASE("two-step reconstruction on hand-checked cases") {
    auto op = shared_op(op_with_spectrum({1.0, 0.5, 0.25}, 5, 7, 3));
    const auto& f = svd(*op);
    const double sr2 = std::pow(f.singular_values[f.numerical_rank - 1], 2);
    Rng rng(17);

    // zero network: R_alpha = B_alpha
    const MRegularizer plain(FilterSpec::tikhonov(), op,
                             NullSpaceNetwork(make_zero_network(7), op));
    const Vector y = gaussian_vector(rng, 5);
    const Vector b = reconstruct(FilterSpec::tikhonov(), *op, 0.03, y);
    CHECK(norm2(vsub(reconstruct_two_step(plain, 0.03, y), b)) == 0.0);

    // TSVD below sigma_r^2 on noiseless range data reproduces A^M y
    const MRegularizer tsvd(FilterSpec::truncated_svd(), op,
                            NullSpaceNetwork(make_default_network(7, 5), op));
    const Vector x0 = gaussian_vector(rng, 7);
    const Vector y0 = nsreg::apply(*op, x0);
    const Vector via_alpha = reconstruct_two_step(tsvd, 0.5 * sr2, y0);
    const Vector via_pinv = m_generalized_inverse(tsvd, y0);
    CHECK(norm2(vsub(via_alpha, via_pinv)) <= 1e-10 * std::max(1.0, norm2(via_pinv)));

    // zero data and N(0) = 0 gives 0
    const Vector at_zero = reconstruct_two_step(plain, 0.1, Vector(5, 0.0));
    CHECK(norm2(at_zero) == 0.0);
}

TEST_CASE("regularizer construction rejects mismatched operators") {
    auto a = shared_op(random_rank_deficient(4, 6, 2, 1));
    auto b = shared_op(random_rank_deficient(4, 6, 2, 2));
    CHECK_THROWS_AS(
        MRegularizer(FilterSpec::tikhonov(), a, NullSpaceNetwork(make_zero_network(6), b)),
        std::invalid_argument);
}

TEST_CASE("source elements carry the prescribed ker-perp part") {
    auto diag = shared_op(from_rows({{2, 0}, {0, 0}}));
    const NullSpaceNetwork zero_phi(make_zero_network(2), diag);
    const Vector s = source_element(*diag, zero_phi, 1.0, {1.0, 0.0});
    CHECK(s[0] == doctest::Approx(4.0));
    CHECK(s[1] == doctest::Approx(0.0));

    const NullSpaceNetwork net_phi(make_default_network(2, 6), diag);
    CHECK(norm2(source_element(*diag, net_phi, 0.5, Vector(2, 0.0))) <= 1e-15);

    // trained-network case: ker-perp part equals the fractional power image
    auto op = shared_op(random_rank_deficient(5, 8, 3, 70));
    const NullSpaceNetwork phi(make_default_network(8, 7), op);
    Rng rng(8);
    const Vector w = gaussian_vector(rng, 8);
    const Vector x = source_element(*op, phi, 0.75, w);
    const Vector perp = vsub(x, proj_ker(*op, x));
    const Vector fp = frac_power_apply(*op, 0.75, w);
    CHECK(norm2(vsub(perp, fp)) <= 1e-9 * std::max(1.0, norm2(fp)));
}

TEST_CASE("approximate projector on the scalar operator") {
    auto one = shared_op(from_rows({{1}}));
    for (double alpha : {0.5, 0.1, 0.01}) {
        const ApproxProjector q = approx_projector(one, FilterSpec::tikhonov(), alpha);
        const Vector qx = q({1.0});
        CHECK(qx[0] == doctest::Approx(alpha / (1.0 + alpha)).epsilon(1e-10));
        CHECK(q.deviation == doctest::Approx(alpha / (1.0 + alpha)).epsilon(1e-7));
    }
    CHECK_THROWS_AS((void)approx_projector(one, FilterSpec::tikhonov(), 0.0),
                    std::invalid_argument);
}

TEST_CASE("approximate projector: TSVD regime is exact, kernel is fixed") {
    auto op = shared_op(op_with_spectrum({1.0, 0.6, 0.3}, 4, 6, 9));
    const auto& f = svd(*op);
    const double sr2 = std::pow(f.singular_values[f.numerical_rank - 1], 2);
    const ApproxProjector q = approx_projector(op, FilterSpec::truncated_svd(), 0.5 * sr2);
    CHECK(q.deviation <= 1e-10);
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        const Vector x = gaussian_vector(rng, 6);
        CHECK(norm2(vsub(q(x), proj_ker(*op, x))) <= 1e-10 * std::max(1.0, norm2(x)));
        // kernel elements are fixed by Q for any filter
        const Vector k = proj_ker(*op, x);
        const ApproxProjector qt = approx_projector(op, FilterSpec::tikhonov(), 0.05);
        CHECK(norm2(vsub(qt(k), k)) <= 1e-10 * std::max(1.0, norm2(k)));
    }
}

TEST_CASE("measured deviation equals the spectral formula") {
    auto op = shared_op(op_with_spectrum({1.0, 0.5, 0.2, 0.1}, 6, 9, 12));
    const auto& f = svd(*op);
    for (double phi_alpha : {0.3, 0.05, 1e-3}) {
        const ApproxProjector q = approx_projector(op, FilterSpec::tikhonov(), phi_alpha);
        double expect = 0.0;
        for (int k = 0; k < f.numerical_rank; ++k) {
            const double l = f.singular_values[k] * f.singular_values[k];
            expect = std::max(expect, phi_alpha / (phi_alpha + l));
        }
        CHECK(q.deviation == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("two-step approximate reconstruction and its deviation bound") {
    auto op = shared_op(op_with_spectrum({1.0, 0.5, 0.25, 0.125}, 6, 9, 21));
    const auto& f = svd(*op);
    const double sr2 = std::pow(f.singular_values[f.numerical_rank - 1], 2);
    const MRegularizer reg(FilterSpec::truncated_svd(), op,
                           NullSpaceNetwork(make_default_network(9, 3), op));
    Rng rng(5);
    const Vector y = gaussian_vector(rng, 6);

    // exactness regime: TSVD Q with phi_alpha below sigma_r^2
    const Vector a = reconstruct_two_step_approx(reg, 0.01, 0.5 * sr2, y);
    const Vector b = reconstruct_two_step(reg, 0.01, y);
    CHECK(norm2(vsub(a, b)) <= 1e-9 * std::max(1.0, norm2(b)));

    // zero network: Q never enters
    const MRegularizer plain(FilterSpec::truncated_svd(), op,
                             NullSpaceNetwork(make_zero_network(9), op));
    const Vector c = reconstruct_two_step_approx(plain, 0.01, 0.07, y);
    const Vector d = reconstruct(FilterSpec::truncated_svd(), *op, 0.01, y);
    CHECK(norm2(vsub(c, d)) <= 1e-12 * std::max(1.0, norm2(d)));

    // proof estimate: ||approx - exact|| <= ||Q - P_ker|| * ||N(B_alpha y)||
    const ApproxProjector q = approx_projector(op, FilterSpec::tikhonov(), 0.02);
    const Vector approx = reconstruct_two_step_approx(reg, 0.01, q, y);
    const Vector exact = reconstruct_two_step(reg, 0.01, y);
    const Vector x1 = reconstruct(FilterSpec::truncated_svd(), *op, 0.01, y);
    const double nbound = q.deviation * norm2(forward(reg.phi.base(), x1)) + 1e-9;
    CHECK(norm2(vsub(approx, exact)) <= nbound);
}

TEST_CASE("pointwise convergence of the two-step map toward A^M") {
    auto op = shared_op(op_with_spectrum({1.0, 0.7, 0.4}, 6, 8, 33));
    const MRegularizer reg(FilterSpec::tikhonov(), op,
                           NullSpaceNetwork(make_default_network(8, 11), op));
    Rng rng(29);
    const Vector y = gaussian_vector(rng, 6);
    const Vector target = m_generalized_inverse(reg, y);

    double prev = std::numeric_limits<double>::infinity();
    double last = 0.0;
    for (int k = 1; k <= 8; ++k) {
        const double alpha = std::pow(10.0, -k);
        last = norm2(vsub(reconstruct_two_step(reg, alpha, y), target));
        CHECK(last <= prev * (1.0 + 1e-9));
        prev = last;
    }
    CHECK(last <= 1e-6);

    // TSVD: exact once alpha < sigma_r^2
    const auto& f = svd(*op);
    const MRegularizer treg(FilterSpec::truncated_svd(), op, reg.phi);
    const double sr2 = std::pow(f.singular_values[f.numerical_rank - 1], 2);
    const Vector exact = reconstruct_two_step(treg, 0.5 * sr2, y);
    CHECK(norm2(vsub(exact, target)) <= 1e-10 * std::max(1.0, norm2(target)));
}

TEST_CASE("Lipschitz composition bound of the convergence proof") {
    auto op = shared_op(op_with_spectrum({1.0, 0.5, 0.25}, 5, 7, 44));
    const NullSpaceNetwork phi(make_default_network(7, 2), op);
    const MRegularizer reg(FilterSpec::tikhonov(), op, phi);
    const double lip = 1.0 + lipschitz_bound(phi.base());
    Rng rng(15);
    const Vector y = gaussian_vector(rng, 5);
    const Vector ydelta = vadd(y, scaled(gaussian_vector(rng, 5), 0.05));
    for (double alpha : {0.1, 0.01, 1e-3}) {
        const Vector lhs =
            vsub(reconstruct_two_step(reg, alpha, ydelta), m_generalized_inverse(reg, y));
        const Vector rhs =
            vsub(reconstruct(FilterSpec::tikhonov(), *op, alpha, ydelta), pinv_apply(*op, y));
        CHECK(norm2(lhs) <= lip * norm2(rhs) + 1e-9);
    }
}

TEST_CASE("ker-perp consistency of the two-step output") {
    auto op = shared_op(random_rank_deficient(6, 9, 4, 55));
    const MRegularizer reg(FilterSpec::tikhonov(), op,
                           NullSpaceNetwork(make_default_network(9, 13), op));
    Rng rng(31);
    for (int t = 0; t < 10; ++t) {
        const Vector y = gaussian_vector(rng, 6);
        const Vector xhat = reconstruct_two_step(reg, 0.05, y);
        const Vector perp = vsub(xhat, proj_ker(*op, xhat));
        const Vector b = reconstruct(FilterSpec::tikhonov(), *op, 0.05, y);
        CHECK(norm2(vsub(perp, b)) <= 1e-10 * std::max(1.0, norm2(b)));
    }
}
