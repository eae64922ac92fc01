#include "kgnls/errors.hpp"
#include "kgnls/spectral_core.hpp"
#include "oracle_values.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace kgnls;

TEST_CASE("lambda and nu reference values") {
    CHECK(lambda(7.0, 0) == doctest::Approx(49.0).epsilon(1e-15));
    CHECK(lambda(1.0, 1) == doctest::Approx(oracle::lambda_1_1).epsilon(1e-15));
    CHECK(lambda(10.0, 3) == doctest::Approx(oracle::lambda_10_3).epsilon(1e-15));
    CHECK(lambda(10.0, -3) == lambda(10.0, 3));
    CHECK(nu(0.3, 0) == 0.0);
    CHECK(nu(1.0, 1) == doctest::Approx(oracle::nu_1_1).epsilon(1e-15));
    CHECK(nu(0.01, 5) == doctest::Approx(oracle::nu_h001_5).epsilon(1e-15));
    CHECK(std::abs(nu(0.01, 5) - 12.5) <= 3.125);
    CHECK(bracket(2) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(lambda(0.0, 1), DomainError);
    CHECK_THROWS_AS(lambda(-1.0, 1), DomainError);
    CHECK_THROWS_AS(nu(0.0, 1), DomainError);
    CHECK_THROWS_AS(FrequencyTable(-2.0, 3), DomainError);
}

TEST_CASE("frequency identities on a log grid of h") {
    for (int e = 0; e <= 12; ++e) {
        const double h = std::pow(10.0, -0.5 * e);
        const double c = 1.0 / std::sqrt(h);
        for (int j = -200; j <= 200; ++j) {
            const double n = nu(h, j);
            CHECK(n >= 0.0);
            CHECK(n <= 0.5 * j * j);
            CHECK(0.5 * j * j - n <= 0.5 * h * std::pow(double(j), 4));
            CHECK(testutil::rel_err(lambda(c, j), 1.0 / h + n) < 1e-12 * (1.0 / h + n));
        }
    }
}

TEST_CASE("weight monotonicity and lambda gaps") {
    for (double c : {0.5, 2.0, 10.0, 100.0}) {
        FrequencyTable f(c, 50);
        for (int j = 0; j < 50; ++j) {
            CHECK(f.w(j) >= 1.0);
            CHECK(f.w(j) >= j / c);
            CHECK(f.w(j + 1) > f.w(j));
            CHECK(f.w(-j) == f.w(j));
            for (int i = 0; i < j; ++i) CHECK(f.lambda(j) - f.lambda(i) <= c * (j - i) * (1 + 1e-14));
        }
    }
}

TEST_CASE("weighted norm examples") {
    FrequencyTable f(2.0, 4);
    FourierState s(4);
    CHECK(weighted_norm(s, {0, 1, 1, 4}, f) == 0.0);
    s.z_at(0) = 1.0;
    CHECK(weighted_norm(s, {0.3, 2, 1, 4}, f) == doctest::Approx(1.0));
    FourierState t(4);
    t.z_at(2) = 1.0;
    CHECK(weighted_norm(t, {0, 1, 1, 4}, f) == doctest::Approx(oracle::norm_delta2).epsilon(1e-14));
    FourierState bad(5);
    CHECK_THROWS_AS(weighted_norm(bad, {0, 1, 1, 4}, f), ShapeError);
}

TEST_CASE("convolution identities") {
    const int M = 6;
    std::mt19937_64 rng(7);
    const CVec y = testutil::random_seq(rng, M);
    CVec d0(2 * M + 1, 0.0);
    d0[M] = 1.0;
    const CVec id = convolve(d0, y);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(id[i] - y[i]) < 1e-15);

    CVec da(2 * M + 1, 0.0), db(2 * M + 1, 0.0);
    da[M + 2] = 1.0;
    db[M - 5] = 1.0;
    const CVec ab = convolve(da, db);
    for (int j = -M; j <= M; ++j) CHECK(std::abs(ab[j + M] - (j == -3 ? 1.0 : 0.0)) < 1e-15);

    const CVec x = testutil::random_seq(rng, M);
    const CVec xy = convolve(x, y), yx = convolve(y, x);
    const CVec rr = convolve(reflect(x), reflect(y));
    const CVec rxy = reflect(xy);
    for (std::size_t i = 0; i < xy.size(); ++i) {
        CHECK(std::abs(xy[i] - yx[i]) < 1e-13);
        CHECK(std::abs(rr[i] - rxy[i]) < 1e-13);
    }
}

TEST_CASE("convolution bilinearity") {
    std::mt19937_64 rng(11);
    const int M = 5;
    const CVec x = testutil::random_seq(rng, M), y = testutil::random_seq(rng, M), u = testutil::random_seq(rng, M);
    const cplx a(0.3, -1.2);
    CVec xu(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xu[i] = x[i] + a * u[i];
    const CVec lhs = convolve(xu, y), c1 = convolve(x, y), c2 = convolve(u, y);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(lhs[i] - (c1[i] + a * c2[i])) < 1e-12);
}

TEST_CASE("algebra constant stable across c") {
    for (double beta : {0.0, 1.0}) {
        const SpaceParams params{0.0, 2.0, beta, 8};
        std::vector<double> K;
        for (double c : {1.0, 10.0, 100.0}) {
            FrequencyTable f(c, 8);
            std::mt19937_64 rng(3);
            // random directions of the weighted unit ball
            auto draw = [&] {
                CVec x = testutil::random_seq(rng, 8);
                for (int j = -8; j <= 8; ++j) x[j + 8] /= bracket(j) * bracket(j) * std::pow(f.w(j), beta);
                return x;
            };
            double worst = 0.0;
            for (int t = 0; t < 1000; ++t) {
                const CVec x = draw(), y = draw();
                const double r = weighted_norm(convolve(x, y), params, f) /
                                 (weighted_norm(x, params, f) * weighted_norm(y, params, f));
                worst = std::max(worst, r);
            }
            K.push_back(worst);
        }
        const auto [lo, hi] = std::minmax_element(K.begin(), K.end());
        CHECK(*hi / *lo < 2.0);
    }
}

TEST_CASE("compensated sum") {
    CompensatedSum s;
    s.add(1.0);
    for (int i = 0; i < 1000; ++i) s.add(1e-16);
    s.add(-1.0);
    CHECK(s.value() == doctest::Approx(1e-13).epsilon(1e-6));
}

TEST_CASE("real representation") {
    std::mt19937_64 rng(5);
    FourierState s = testutil::random_real_state(rng, 4, 1.0);
    CHECK(s.real_representation());
    s.zbar_at(2) += 1e-6;
    CHECK_FALSE(s.real_representation());
}
