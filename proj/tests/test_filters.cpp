#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nsreg/filters.hpp"
#include "nsreg/rng.hpp"
#include "test_util.hpp"

using namespace nsreg;
using namespace nsreg::testutil;

TEST_CASE("filter_value of the three built-in families") {
    const FilterSpec tikh = FilterSpec::tikhonov();
    CHECK(filter_value(tikh, 1.0, 1.0) == doctest::Approx(0.5));

    const FilterSpec tsvd = FilterSpec::truncated_svd();
    CHECK(filter_value(tsvd, 0.5, 0.25) == 0.0);
    CHECK(filter_value(tsvd, 0.5, 0.5) == doctest::Approx(2.0));

    // alpha = 0.5 maps to k = 2 iterations; tau * (1 + (1 - tau*lambda))
    const FilterSpec lw = FilterSpec::landweber(1.0);
    CHECK(filter_value(lw, 0.5, 0.5) == doctest::Approx(1.5));
    CHECK(filter_value(lw, 0.5, 0.0) == doctest::Approx(2.0));  // tau*k at lambda=0

    CHECK_THROWS_AS((void)filter_value(tikh, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)filter_value(tikh, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("landweber closed form agrees with the explicit sum") {
    const double tau = 0.7;
    for (double alpha : {1.0, 0.5, 0.2, 0.05}) {
        const long k = static_cast<long>(std::ceil(1.0 / alpha));
        for (double lambda : {0.0, 1e-6, 0.3, 1.0, 1.0 / tau}) {
            double sum = 0.0, pw = 1.0;
            for (long j = 0; j < k; ++j) {
                sum += pw;
                pw *= 1.0 - tau * lambda;
            }
            sum *= tau;
            CHECK(filter_value(FilterSpec::landweber(tau), alpha, lambda) ==
                  doctest::Approx(sum).epsilon(1e-12));
        }
    }
}

TEST_CASE("reconstruct on hand-checked cases") {
    const DenseOperator one(from_rows({{1}}));
    const Vector r = reconstruct(FilterSpec::tikhonov(), one, 1.0, {2.0});
    CHECK(r[0] == doctest::Approx(1.0));  // (1/(1+1)) * 1 * 2

    // TSVD below the smallest sigma^2 equals the pseudoinverse
    const DenseOperator op(random_rank_deficient(5, 7, 3, 41));
    const auto& f = svd(op);
    const double sr = f.singular_values[f.numerical_rank - 1];
    Rng rng(3);
    const Vector y = gaussian_vector(rng, 5);
    const Vector tsvd_x = reconstruct(FilterSpec::truncated_svd(), op, 0.5 * sr * sr, y);
    CHECK(norm2(vsub(tsvd_x, pinv_apply(op, y))) <= 1e-12 * norm2(pinv_apply(op, y)));

    CHECK(norm2(reconstruct(FilterSpec::tikhonov(), op, 0.1, Vector(5, 0.0))) == 0.0);
}

TEST_CASE("landweber step exceeding 1/sigma_1^2 is rejected at application") {
    const DenseOperator two(from_rows({{2}}));  // sigma_1^2 = 4
    CHECK_THROWS_AS(
        (void)reconstruct(FilterSpec::landweber(0.3), two, 0.5, {1.0}),
        std::invalid_argument);
    CHECK_NOTHROW((void)reconstruct(FilterSpec::landweber(0.25), two, 0.5, {1.0}));
}

TEST_CASE("reconstruct output has no kernel component and is linear in y") {
    const DenseOperator op(random_rank_deficient(6, 9, 4, 99));
    Rng rng(7);
    for (const FilterSpec& spec :
         {FilterSpec::tikhonov(), FilterSpec::truncated_svd(),
          FilterSpec::landweber(1.0 / (operator_norm(op) * operator_norm(op)))}) {
        const Vector y1 = gaussian_vector(rng, 6);
        const Vector y2 = gaussian_vector(rng, 6);
        const Vector x1 = reconstruct(spec, op, 0.05, y1);
        CHECK(norm2(proj_ker(op, x1)) <= 1e-10 * std::max(1.0, norm2(x1)));

        const Vector x2 = reconstruct(spec, op, 0.05, y2);
        Vector combo(6);
        for (int i = 0; i < 6; ++i) combo[i] = 2.0 * y1[i] - 3.0 * y2[i];
        const Vector xc = reconstruct(spec, op, 0.05, combo);
        Vector expect(9);
        for (int i = 0; i < 9; ++i) expect[i] = 2.0 * x1[i] - 3.0 * x2[i];
        CHECK(norm2(vsub(xc, expect)) <= 1e-10 * std::max(1.0, norm2(expect)));
    }
}

TEST_CASE("pointwise regularization: error against pinv decreases to 1e-6") {
    const DenseOperator op(random_rank_deficient(6, 8, 4, 2024));
    Rng rng(11);
    Vector x = gaussian_vector(rng, 8);
    x = scaled(x, 1.0 / norm2(x));
    const Vector y = nsreg::apply(op, x);  // y in ran(A)
    const Vector xdag = pinv_apply(op, y);
    const double lmax = operator_norm(op) * operator_norm(op);

    for (const FilterSpec& spec :
         {FilterSpec::tikhonov(), FilterSpec::landweber(1.0 / lmax)}) {
        double prev = std::numeric_limits<double>::infinity();
        double last = 0.0;
        for (int k = 1; k <= 10; ++k) {
            const double alpha = std::pow(10.0, -k);
            const double err = norm2(vsub(reconstruct(spec, op, alpha, y), xdag));
            CHECK(err <= prev * (1.0 + 1e-12));
            prev = err;
            last = err;
        }
        CHECK(last <= 1e-6);
    }

    const auto& f = svd(op);
    const double sr2 = std::pow(f.singular_values[f.numerical_rank - 1], 2);
    const Vector exact = reconstruct(FilterSpec::truncated_svd(), op, 0.5 * sr2, y);
    CHECK(norm2(vsub(exact, xdag)) <= 1e-12 * norm2(xdag));
}

TEST_CASE("axiom report on the built-ins") {
    const auto alphas = default_alpha_grid();
    const auto lambdas = default_axiom_lambda_grid(1.0);

    const AxiomReport tikh = verify_filter_axioms(FilterSpec::tikhonov(), 1.0, alphas, lambdas);
    CHECK(tikh.pass);
    REQUIRE(tikh.checks.size() == 2);
    CHECK(tikh.checks[0].measured < 1.0);  // lambda/(alpha+lambda) < 1 analytically

    const AxiomReport tsvd =
        verify_filter_axioms(FilterSpec::truncated_svd(), 1.0, alphas, lambdas);
    CHECK(tsvd.pass);
    CHECK(tsvd.checks[0].measured <= 1.0);  // |lambda g| is 0 or 1

    const AxiomReport lw =
        verify_filter_axioms(FilterSpec::landweber(1.0), 1.0, alphas, lambdas);
    CHECK(lw.pass);
    CHECK(lw.checks[0].measured <= 1.0);  // 1-(1-tau*lambda)^k <= 1

    CHECK_THROWS_AS(
        (void)verify_filter_axioms(FilterSpec::tikhonov(), 1.0, {}, lambdas),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)verify_filter_axioms(FilterSpec::tikhonov(), 1.0, alphas, {}),
        std::invalid_argument);

    // unique check names
    for (const auto& report : {tikh, tsvd, lw})
        for (std::size_t i = 0; i < report.checks.size(); ++i)
            for (std::size_t j = i + 1; j < report.checks.size(); ++j)
                CHECK(report.checks[i].name != report.checks[j].name);
}

TEST_CASE("rate conditions: qualification pattern across filters and mu") {
    const auto alphas = default_alpha_grid();
    const auto lambdas = default_rate_lambda_grid(1.0);

    for (double mu : {0.5, 1.0, 2.0}) {
        CHECK(verify_rate_conditions(FilterSpec::truncated_svd(), mu, 1.0, alphas, lambdas).pass);
        CHECK(verify_rate_conditions(FilterSpec::landweber(1.0), mu, 1.0, alphas, lambdas).pass);
    }
    CHECK(verify_rate_conditions(FilterSpec::tikhonov(), 0.5, 1.0, alphas, lambdas).pass);
    CHECK(verify_rate_conditions(FilterSpec::tikhonov(), 1.0, 1.0, alphas, lambdas).pass);

    const RateConditionReport bad =
        verify_rate_conditions(FilterSpec::tikhonov(), 2.0, 1.0, alphas, lambdas);
    CHECK_FALSE(bad.pass);
    // c1 grows like 1/alpha along the grid
    REQUIRE(bad.c1_by_alpha.size() >= 2);
    CHECK(bad.c1_by_alpha.back() > 100.0 * bad.c1_by_alpha.front());
    bool qualification_flagged = false;
    for (const auto& c : bad.checks)
        if (c.name == "c1_qualification" && !c.pass) qualification_flagged = true;
    CHECK(qualification_flagged);

    // Tikhonov mu=1: c1 <= 1 analytically
    const RateConditionReport ok =
        verify_rate_conditions(FilterSpec::tikhonov(), 1.0, 1.0, alphas, lambdas);
    for (double c1 : ok.c1_by_alpha) CHECK(c1 <= 1.0 + 1e-12);

    CHECK_THROWS_AS(
        (void)verify_rate_conditions(FilterSpec::tikhonov(), 0.0, 1.0, alphas, lambdas),
        std::invalid_argument);
}

TEST_CASE("lambda grids outside [0, lambda_max] are rejected") {
    const auto alphas = default_alpha_grid();
    CHECK_THROWS_AS(
        (void)verify_filter_axioms(FilterSpec::tikhonov(), 1.0, alphas, {0.5, 2.0}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)verify_rate_conditions(FilterSpec::tikhonov(), 1.0, 1.0, alphas, {-0.1, 0.5}),
        std::invalid_argument);
}

TEST_CASE("the boundary Landweber step 1/sigma_1^2 survives float noise") {
    // sigma_1 is 1 by construction but carries ulp noise after factorization
    const DenseOperator op(op_with_spectrum({1.0, 0.5, 0.25}, 6, 8, 77));
    const double tau = 1.0 / (operator_norm(op) * operator_norm(op));
    Rng rng(4);
    const Vector y = gaussian_vector(rng, 6);
    CHECK_NOTHROW((void)reconstruct(FilterSpec::landweber(1.0), op, 0.1, y));
    CHECK_NOTHROW((void)reconstruct(FilterSpec::landweber(tau), op, 0.1, y));
}

TEST_CASE("landweber stays finite for extreme alpha") {
    const FilterSpec lw = FilterSpec::landweber(1.0);
    const double g = filter_value(lw, 1e-20, 0.5);
    CHECK(std::isfinite(g));
    CHECK(g == doctest::Approx(2.0));  // 1/lambda in the deep-iteration limit
    CHECK(std::isfinite(filter_value(lw, 1e-20, 0.0)));
}
