#include "kgnls/errors.hpp"
#include "kgnls/hamiltonian.hpp"
#include "oracle_values.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace kgnls;

namespace {

double max_coeff(const PolyHamiltonian& H) { return H.empty() ? 0.0 : H.sup_coefficient(); }

// Random momentum-conserving monomials of the given degree on |j| <= M.
PolyHamiltonian random_poly(std::mt19937_64& rng, int degree, int M, int terms, bool gauge = false) {
    std::uniform_int_distribution<int> jd(-M, M), sd(0, 1);
    std::normal_distribution<double> g;
    PolyHamiltonian H;
    while (static_cast<int>(H.size()) < terms) {
        std::vector<int> j(static_cast<std::size_t>(degree)), s(static_cast<std::size_t>(degree));
        int mom = 0, gs = 0;
        for (int t = 0; t + 1 < degree; ++t) {
            j[t] = jd(rng);
            s[t] = sd(rng) ? 1 : -1;
            mom += s[t] * j[t];
            gs += s[t];
        }
        s.back() = gauge ? -gs : (sd(rng) ? 1 : -1);
        if (gauge && std::abs(s.back()) != 1) continue;
        j.back() = -s.back() * mom;
        if (std::abs(j.back()) > M) continue;
        H.add(j, s, {g(rng), g(rng)});
    }
    return H;
}

}  // namespace

TEST_CASE("monomial canonical form") {
    const Monomial a({2, 1, 1, 2}, {-1, 1, -1, 1});
    const Monomial b({1, 2, 2, 1}, {1, 1, -1, -1});
    CHECK(a == b);
    CHECK(a.momentum() == 0);
    CHECK(a.gauge_sum() == 0);
    CHECK(a.orderings() == 24.0);
    CHECK(Monomial({0, 0, 0, 0}, {1, 1, -1, -1}).orderings() == 6.0);
    CHECK(Monomial({1, 1, 1, 0}, {1, 1, -1, -1}).momentum() == 1);
}

TEST_CASE("build_P reference coefficients") {
    FrequencyTable f(10.0, 8);
    const PolyHamiltonian P = build_P(f, 8);
    CHECK(P.coefficient(Monomial({0, 0, 0, 0}, {1, 1, -1, -1})).real() == doctest::Approx(oracle::P_0000).epsilon(1e-14));
    CHECK(P.coefficient(Monomial({1, 2, -3, 0}, {1, 1, 1, 1})).real() ==
          doctest::Approx(oracle::P_pppp_12m30_c10).epsilon(1e-14));
    CHECK(P.coefficient(Monomial({1, 1, 2, 2}, {1, -1, 1, -1})).real() ==
          doctest::Approx(oracle::P_pmpm_1122_c10).epsilon(1e-14));
    CHECK(P.coefficient(Monomial({1, 1, 1, 0}, {1, 1, -1, -1})) == cplx{});
    // the per-ordering coefficient in the c -> infinity limit
    FrequencyTable far(1e8, 4);
    const std::vector<int> j{1, 2, -3, 0}, s{1, 1, 1, 1};
    CHECK(P_raw_coefficient(far, j, s) == doctest::Approx(1.0 / (32.0 * std::numbers::pi)).epsilon(1e-12));
    for (const auto& [m, a] : P.terms()) {
        CHECK(m.momentum() == 0);
        CHECK(a.imag() == 0.0);
    }
}

TEST_CASE("build_P_NLS") {
    const PolyHamiltonian Pn = build_P_NLS(6);
    CHECK(Pn.coefficient(Monomial({0, 0, 0, 0}, {1, 1, -1, -1})).real() ==
          doctest::Approx(3.0 / (16.0 * std::numbers::pi)).epsilon(1e-15));
    CHECK(Pn.coefficient(Monomial({1, 2, 1, 2}, {1, 1, -1, -1})).real() ==
          doctest::Approx(4 * 3.0 / (16.0 * std::numbers::pi)).epsilon(1e-15));
    for (const auto& [m, a] : Pn.terms()) CHECK(m.gauge_sum() == 0);
    CHECK(gauge_project(Pn).size() == Pn.size());

    // the Gauge part of P approaches P_NLS at rate h M^2
    FrequencyTable f6(1e6, 6), f8(1e8, 6);
    const double d6 = max_coeff(gauge_project(build_P(f6, 6)) - Pn);
    const double d8 = max_coeff(gauge_project(build_P(f8, 6)) - Pn);
    CHECK(d6 < 1.01e-12 * 36 * Pn.sup_coefficient());
    CHECK(d8 < 1e-12);
}

TEST_CASE("gauge projector") {
    FrequencyTable f(10.0, 5);
    const PolyHamiltonian P = build_P(f, 5);
    const PolyHamiltonian g1 = gauge_project(P);
    const PolyHamiltonian g2 = gauge_project(g1);
    CHECK(g1.size() == g2.size());
    CHECK(max_coeff(g1 - g2) == 0.0);
    CHECK(gauge_project(P - g1).empty());
}

TEST_CASE("split_P") {
    FrequencyTable f(10.0, 8);
    const PSplit sp = split_P(f, 8);
    CHECK(sp.reconstruction_residual < 1e-14);
    CHECK(gauge_project(sp.P_ng).empty());
    CHECK(sp.P_r.coefficient(Monomial({5, -5, 5, -5}, {1, 1, -1, -1})).real() ==
          doctest::Approx(oracle::P_r_5_c10).epsilon(1e-13));
    const PolyHamiltonian rebuilt = sp.P_nls + sp.P_ng + sp.P_r;
    CHECK(max_coeff(rebuilt - build_P(f, 8)) < 1e-14);
}

TEST_CASE("P_r scales like h") {
    std::vector<double> scaled;
    for (double c : {10.0, 100.0, 1000.0}) {
        FrequencyTable f(c, 6);
        scaled.push_back(split_P(f, 6).P_r.sup_coefficient() * c * c);
    }
    for (double s : scaled) CHECK(s / scaled.back() < 2.0);
    CHECK(std::abs(scaled[1] / scaled[2] - 1.0) < 0.1);
}

TEST_CASE("bracket with the quadratic part") {
    FrequencyTable f(3.0, 4);
    const PolyHamiltonian L = build_Lambda(f, 4);
    PolyHamiltonian act;
    act.add(Monomial({2, 2}, {1, -1}), 1.0);
    CHECK(poisson_bracket(L, act).empty());

    std::mt19937_64 rng(1);
    const PolyHamiltonian G = random_poly(rng, 4, 4, 30);
    const PolyHamiltonian B = poisson_bracket(L, G);
    for (const auto& [m, a] : G.terms()) {
        double sl = 0.0;
        for (int t = 0; t < 4; ++t) sl += m.sigma(t) * f.lambda(m.j(t));
        const cplx expect = cplx{0.0, 1.0} * sl * a;
        CHECK(std::abs(B.coefficient(m) - expect) < 1e-12 * std::abs(expect) + 1e-15);
    }
}

TEST_CASE("bracket antisymmetry and Jacobi") {
    std::mt19937_64 rng(2);
    BracketOptions wide;
    wide.max_degree = 8;
    for (int trial = 0; trial < 5; ++trial) {
        const PolyHamiltonian F = random_poly(rng, 4, 3, 12);
        const PolyHamiltonian G = random_poly(rng, 4, 3, 12);
        const PolyHamiltonian K = random_poly(rng, 2, 3, 6);
        CHECK(max_coeff(poisson_bracket(F, G) + poisson_bracket(G, F)) < 1e-13);
        CHECK(max_coeff(poisson_bracket(F, F)) < 1e-15);
        const PolyHamiltonian jac = poisson_bracket(F, poisson_bracket(G, K, wide), wide) +
                                    poisson_bracket(G, poisson_bracket(K, F, wide), wide) +
                                    poisson_bracket(K, poisson_bracket(F, G, wide), wide);
        CHECK(max_coeff(jac) < 1e-12);
    }
}

TEST_CASE("bracket preserves symmetries") {
    std::mt19937_64 rng(3);
    const PolyHamiltonian F = random_poly(rng, 4, 4, 20, true);
    const PolyHamiltonian G = random_poly(rng, 4, 4, 20, true);
    const PolyHamiltonian B = poisson_bracket(F, G);
    CHECK_FALSE(B.empty());
    for (const auto& [m, a] : B.terms()) {
        CHECK(m.momentum() == 0);
        CHECK(m.gauge_sum() == 0);
    }
}

TEST_CASE("bracket degree cutoff and budget") {
    std::mt19937_64 rng(4);
    const PolyHamiltonian F = random_poly(rng, 4, 3, 10);
    std::size_t dropped = 0;
    BracketOptions narrow;
    narrow.max_degree = 4;
    narrow.discarded = &dropped;
    CHECK(poisson_bracket(F, F - random_poly(rng, 4, 3, 10), narrow).empty());
    CHECK(dropped > 0);
    BracketOptions tiny;
    tiny.max_terms = 3;
    CHECK_THROWS_AS(poisson_bracket(F, random_poly(rng, 4, 3, 10), tiny), ResourceError);
}

TEST_CASE("vector field") {
    PolyHamiltonian H;
    H.add(Monomial({1, 1}, {1, -1}), 1.0);
    FourierState s(2);
    s.z_at(1) = 1.0;
    s.zbar_at(1) = 1.0;
    const FourierState X = vector_field(H, s);
    CHECK(std::abs(X.z_at(1) - cplx(0, -1)) < 1e-15);
    CHECK(std::abs(X.zbar_at(1) - cplx(0, 1)) < 1e-15);

    FrequencyTable f(2.0, 5);
    std::mt19937_64 rng(5);
    const FourierState r = testutil::random_real_state(rng, 5, 0.3);
    const FourierState XL = vector_field(build_Lambda(f, 5), r);
    for (int j = -5; j <= 5; ++j) CHECK(std::abs(XL.z_at(j) - cplx(0, -f.lambda(j)) * r.z_at(j)) < 1e-13);
}

TEST_CASE("vector field matches finite differences of H") {
    FrequencyTable f(4.0, 5);
    const PolyHamiltonian H = build_Lambda(f, 5) + build_P(f, 5);
    std::mt19937_64 rng(6);
    const FourierState s = testutil::random_state(rng, 5, 0.2);
    const FourierState v = testutil::random_state(rng, 5, 1.0);
    const FourierState X = vector_field(H, s);
    const double eps = 1e-5;
    FourierState sp = s, sm = s;
    for (std::size_t k = 0; k < s.size(); ++k) {
        sp.z[k] += eps * v.z[k];
        sp.zbar[k] += eps * v.zbar[k];
        sm.z[k] -= eps * v.z[k];
        sm.zbar[k] -= eps * v.zbar[k];
    }
    const cplx fd = (H.evaluate(sp) - H.evaluate(sm)) / (2 * eps);
    cplx dir = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
        dir += cplx(0, -1) * X.zbar[k] * v.z[k] + cplx(0, 1) * X.z[k] * v.zbar[k];
    CHECK(std::abs(fd - dir) < 1e-6 * std::abs(dir));
}

TEST_CASE("norm majorant dominates the vector field") {
    const int M = 4;
    FrequencyTable f(5.0, M);
    const PolyHamiltonian P = build_P(f, M);
    std::vector<double> b(2 * M + 1);
    for (int j = -M; j <= M; ++j) b[j + M] = 1.0 / std::sqrt(f.w(j));
    const SpaceParams params{0.0, 1.0, 0.0, M};
    std::mt19937_64 rng(8);
    int violations = 0;
    for (int t = 0; t < 1000; ++t) {
        const FourierState s = testutil::random_real_state(rng, M, 0.1);
        const double actual = weighted_norm(vector_field(P, s), params, f);
        if (vector_field_norm_bound(P, {b}, s, params, f) < actual * (1 - 1e-12)) ++violations;
    }
    CHECK(violations == 0);

    PolyHamiltonian mixed = P;
    mixed.add(Monomial({0, 0}, {1, -1}), 1.0);
    CHECK_THROWS_AS(vector_field_norm_bound(mixed, {b}, testutil::random_real_state(rng, M, 0.1), params, f),
                    UnsupportedError);
}

TEST_CASE("majorant scales like R^3 uniformly in c") {
    const int M = 4;
    std::vector<double> C;
    for (double c : {5.0, 50.0, 500.0}) {
        FrequencyTable f(c, M);
        const PolyHamiltonian P = build_P(f, M);
        std::vector<double> b(2 * M + 1);
        for (int j = -M; j <= M; ++j) b[j + M] = 1.0 / std::sqrt(f.w(j));
        const SpaceParams params{0.0, 1.0, 0.0, M};
        std::mt19937_64 rng(9);
        FourierState s = testutil::random_real_state(rng, M, 1.0);
        const double n = weighted_norm(s, params, f);
        for (std::size_t k = 0; k < s.size(); ++k) {
            s.z[k] /= n;
            s.zbar[k] /= n;
        }
        const double b1 = vector_field_norm_bound(P, {b}, s, params, f);
        for (std::size_t k = 0; k < s.size(); ++k) {
            s.z[k] *= 0.1;
            s.zbar[k] *= 0.1;
        }
        const double b2 = vector_field_norm_bound(P, {b}, s, params, f);
        CHECK(b2 / b1 == doctest::Approx(1e-3).epsilon(1e-10));
        C.push_back(b1);
    }
    CHECK(C[0] / C[2] < 2.0);
    CHECK(C[2] / C[0] < 2.0);
}

TEST_CASE("text round trip") {
    FrequencyTable f(7.0, 3);
    PolyHamiltonian H = build_P(f, 3);
    H.add(Monomial({1, -1}, {1, 1}), cplx(0.25, -1.5));
    std::stringstream ss;
    H.write_text(ss);
    const PolyHamiltonian back = PolyHamiltonian::read_text(ss);
    CHECK(back.size() == H.size());
    CHECK(max_coeff(back - H) == 0.0);
    std::istringstream broken("++-- 1 2 1\n");
    CHECK_THROWS_AS(PolyHamiltonian::read_text(broken), DomainError);
}

TEST_CASE("evaluate uses merged coefficients") {
    PolyHamiltonian H;
    H.add(Monomial({1, 1, 2, 2}, {1, -1, 1, -1}), 2.0);
    FourierState s(2);
    s.z_at(1) = {0.5, 0.1};
    s.zbar_at(1) = {0.3, 0.0};
    s.z_at(2) = 2.0;
    s.zbar_at(2) = {0.0, 1.0};
    const cplx expect = 2.0 * s.z_at(1) * s.zbar_at(1) * s.z_at(2) * s.zbar_at(2);
    CHECK(std::abs(H.evaluate(s) - expect) < 1e-15);
}
