#include "kgnls/errors.hpp"
#include "kgnls/psi_transform.hpp"
#include "oracle_values.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace kgnls;

namespace {

// u_t drawn on its natural scale c^2 |u|
RealFieldState random_field(std::mt19937_64& rng, int M, double c) {
    RealFieldState r(M);
    const CVec u = testutil::random_seq(rng, M), v = testutil::random_seq(rng, M, c * c);
    for (int j = 0; j <= M; ++j) {
        r.u_at(j) = u[j + M];
        r.v_at(j) = v[j + M];
        r.u_at(-j) = std::conj(r.u_at(j));
        r.v_at(-j) = std::conj(r.v_at(j));
    }
    r.u_at(0) = r.u_at(0).real();
    r.v_at(0) = r.v_at(0).real();
    return r;
}

}  // namespace

TEST_CASE("cosine initial data") {
    RealFieldState r(2);
    r.u_at(1) = 0.5;
    r.u_at(-1) = 0.5;
    const FourierState z = to_psi(r, 1.0);
    CHECK(z.z_at(1).real() == doctest::Approx(oracle::psi_cos_c1).epsilon(1e-15));
    CHECK(z.z_at(-1).real() == doctest::Approx(oracle::psi_cos_c1).epsilon(1e-15));
    CHECK(std::abs(z.z_at(0)) == 0.0);
    CHECK(z.real_representation());
    const FourierState zero = to_psi(RealFieldState(3), 4.0);
    for (const auto& x : zero.z) CHECK(x == cplx{});
}

TEST_CASE("symmetry violation is rejected") {
    RealFieldState r(2);
    r.u_at(1) = {0.5, 0.1};
    r.u_at(-1) = {0.5, 0.1};
    CHECK(r.symmetry_defect() > 0.1);
    CHECK_THROWS_AS(to_psi(r, 3.0), DomainError);
}

TEST_CASE("round trips and reality") {
    std::mt19937_64 rng(4);
    for (double c : {1.0, 10.0, 300.0}) {
        const RealFieldState r = random_field(rng, 6, c);
        const FourierState z = to_psi(r, c);
        CHECK(z.real_representation(1e-14));
        const RealFieldState back = from_psi(z, c);
        for (int j = -6; j <= 6; ++j) {
            CHECK(std::abs(back.u_at(j) - r.u_at(j)) < 1e-14 * (1 + std::abs(r.u_at(j))));
            CHECK(std::abs(back.v_at(j) - r.v_at(j)) < 1e-14 * c * c * (1 + std::abs(r.v_at(j)) / (c * c)));
        }
        CHECK(back.symmetry_defect() < 1e-13);

        const FourierState s = FourierState::real_from(testutil::random_seq(rng, 6));
        const FourierState again = to_psi(from_psi(s, c), c);
        for (std::size_t k = 0; k < s.size(); ++k) CHECK(std::abs(again.z[k] - s.z[k]) < 1e-13);
    }
}

TEST_CASE("single mode maps to a pair of real modes") {
    FourierState s(3);
    s.z_at(2) = {0.3, 0.4};
    s.zbar_at(2) = std::conj(s.z_at(2));
    const RealFieldState r = from_psi(s, 5.0);
    CHECK(std::abs(r.u_at(2)) > 0.0);
    CHECK(std::abs(r.u_at(-2) - std::conj(r.u_at(2))) < 1e-16);
    CHECK(std::abs(r.u_at(1)) == 0.0);
    CHECK(r.symmetry_defect() < 1e-15);
}

TEST_CASE("quadratic energy identity") {
    std::mt19937_64 rng(6);
    for (double c : {1.0, 7.0, 100.0}) {
        const RealFieldState r = random_field(rng, 8, c);
        const double E = kg_quadratic_energy(r, c);
        const cplx L = psi_quadratic_energy(to_psi(r, c), c);
        CHECK(L.real() == doctest::Approx(E).epsilon(1e-12));
        CHECK(std::abs(L.imag()) < 1e-12 * E);
    }
}
