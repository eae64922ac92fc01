#include "kgnls/birkhoff.hpp"
#include "kgnls/errors.hpp"
#include "oracle_values.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace kgnls;

namespace {

double max_coeff(const PolyHamiltonian& H) { return H.empty() ? 0.0 : H.sup_coefficient(); }

bool outside(const Monomial& m, const std::vector<int>& J) {
    for (int t = 0; t < m.degree(); ++t)
        if (std::find(J.begin(), J.end(), m.j(t)) != J.end()) return false;
    return true;
}

const std::vector<int> kJ{1, 2, 3};

}  // namespace

TEST_CASE("classification") {
    const std::vector<int> a{4, 4, 7, 7}, s{1, -1, 1, -1};
    CHECK(classify(a, s, kJ).in_IR);
    const std::vector<int> j2{1, 2, -3, 0}, s2{1, 1, 1, 1};
    const ResonanceClass r = classify(j2, s2, kJ);
    CHECK_FALSE(r.in_IR);
    CHECK(r.in_LJ);
    CHECK(r.gauge_sum == 4);
    const std::vector<int> j3{4, 5, 4, 5};
    CHECK_FALSE(classify(j3, s, kJ).in_LJ);
    FrequencyTable f(10.0, 8);
    const std::vector<int> j4{1, 1, 2, 2};
    const ResonanceClass ir = classify(j4, s, kJ, &f);
    CHECK(ir.in_IR);
    CHECK(ir.divisor == 0.0);
}

TEST_CASE("quartic cohomological equation at c = 10 and 1000") {
    for (double c : {10.0, 1000.0}) {
        FrequencyTable f(c, 8);
        const NormalFormResult nf = solve_cohomological_quartic(build_P(f, 8), f, kJ);
        CHECK(nf.residual < 1e-12);
        CHECK(nf.closed_form_error < 1e-12);
        CHECK(max_coeff(nf.G - nf.G_nls - nf.G_remainder) < 1e-15);
        for (const auto& [m, a] : nf.P_hat.terms()) CHECK(outside(m, kJ));
        for (const auto& [m, a] : nf.Lambda_plus.terms()) {
            CHECK(m.count(m.j(0), 1) == m.count(m.j(0), -1));
            CHECK(m.gauge_sum() == 0);
        }
    }
}

TEST_CASE("Lambda_plus closed form") {
    FrequencyTable f(10.0, 8);
    const NormalFormResult nf = solve_cohomological_quartic(build_P(f, 8), f, kJ);
    CHECK(nf.Lambda_plus.coefficient(Monomial({1, 1, 2, 2}, {1, -1, 1, -1})).real() ==
          doctest::Approx(oracle::Lplus_12_c10).epsilon(1e-13));
    CHECK(nf.Lambda_plus.coefficient(Monomial({1, 1, 1, 1}, {1, -1, 1, -1})).real() ==
          doctest::Approx(oracle::Lplus_11_c10).epsilon(1e-13));
    CHECK(lambda_plus_term(f, 1, 2) == doctest::Approx(0.5 * oracle::Lplus_12_c10).epsilon(1e-14));
    CHECK(lambda_plus_term_nls(1, 2) == doctest::Approx(3.0 / (8.0 * std::numbers::pi)).epsilon(1e-15));
    CHECK(lambda_plus_term_nls(2, 2) == doctest::Approx(3.0 / (16.0 * std::numbers::pi)).epsilon(1e-15));
    FrequencyTable far(1e7, 8);
    CHECK(lambda_plus_term(far, 2, 5) == doctest::Approx(lambda_plus_term_nls(2, 5)).epsilon(1e-12));
    CHECK(max_coeff(lambda_plus_closed_form(&far, kJ, 8) - lambda_plus_closed_form(nullptr, kJ, 8)) < 1e-12);
}

TEST_CASE("NLS cohomological equation") {
    const NormalFormResult nl = solve_cohomological_nls(build_P_NLS(8), kJ, 8);
    CHECK(nl.is_nls());
    CHECK(nl.residual < 1e-12);
    CHECK(nl.Lambda_plus.coefficient(Monomial({1, 1, 3, 3}, {1, -1, 1, -1})).real() ==
          doctest::Approx(3.0 / (4.0 * std::numbers::pi)).epsilon(1e-14));
    for (const auto& [m, a] : nl.G.terms()) CHECK(m.gauge_sum() == 0);
}

TEST_CASE("G_nls does not depend on c") {
    FrequencyTable f1(10.0, 6), f2(100.0, 6);
    const NormalFormResult a = solve_cohomological_quartic(build_P(f1, 6), f1, kJ);
    const NormalFormResult b = solve_cohomological_quartic(build_P(f2, 6), f2, kJ);
    CHECK(a.G_nls.size() == b.G_nls.size());
    CHECK(max_coeff(a.G_nls - b.G_nls) == 0.0);
}

TEST_CASE("remainder blocks scale like h") {
    const NormalFormResult nl = solve_cohomological_nls(build_P_NLS(6), kJ, 6);
    std::vector<double> ng, pr, dd;
    for (double c : {10.0, 100.0, 1000.0}) {
        FrequencyTable f(c, 6);
        const NormalFormResult kg = solve_cohomological_quartic(build_P(f, 6), f, kJ);
        const RemainderSplit rs = remainder_split(kg, nl);
        CHECK(rs.reconstruction_residual < 1e-14);
        for (const auto& [m, a] : rs.gauge_from_PR.terms()) CHECK(m.gauge_sum() == 0);
        for (const auto& [m, a] : rs.divisor_difference.terms()) CHECK(m.gauge_sum() == 0);
        for (const auto& [m, a] : rs.non_gauge.terms()) CHECK(m.gauge_sum() != 0);
        ng.push_back(rs.non_gauge.sup_coefficient() * c * c);
        pr.push_back(rs.gauge_from_PR.sup_coefficient() * c * c);
        dd.push_back(rs.divisor_difference.sup_coefficient() * c * c);
    }
    for (const auto* v : {&ng, &pr, &dd}) {
        CHECK(std::abs((*v)[1] / (*v)[2] - 1.0) < 0.1);
        CHECK((*v)[0] / (*v)[2] < 2.0);
    }
    FrequencyTable f(1e6, 6);
    const NormalFormResult kg = solve_cohomological_quartic(build_P(f, 6), f, kJ);
    CHECK(remainder_split(kg, nl).total.sup_coefficient() < 1e-9 * kg.G.sup_coefficient());
}

TEST_CASE("Lie transform at degree four and six") {
    const int M = 5;
    const PolyHamiltonian L = build_Lambda_NLS(M);
    const PolyHamiltonian P = build_P_NLS(M);
    const NormalFormResult nl = solve_cohomological_nls(P, kJ, M);
    const PolyHamiltonian H = L + P;

    CHECK(max_coeff(lie_transform(H, PolyHamiltonian{}) - H) == 0.0);

    const PolyHamiltonian T = lie_transform(H, nl.G);
    CHECK(max_coeff(T.degree_part(2) - L) == 0.0);
    CHECK(max_coeff(T.degree_part(4) - nl.Lambda_plus - nl.P_hat) < 1e-12 * P.sup_coefficient());
    for (const auto& [m, a] : T.terms()) {
        CHECK(m.momentum() == 0);
        CHECK(m.gauge_sum() == 0);
    }
    const PolyHamiltonian LG = poisson_bracket(L, nl.G);
    const PolyHamiltonian six = poisson_bracket(P, nl.G) + cplx{0.5} * poisson_bracket(LG, nl.G);
    CHECK(max_coeff(T.degree_part(6) - six) < 1e-12 * six.sup_coefficient());
}

TEST_CASE("KG Lie transform with the mass shift") {
    const int M = 5;
    const double c = 10.0;
    FrequencyTable f(c, M);
    const PolyHamiltonian P = build_P(f, M);
    const NormalFormResult kg = solve_cohomological_quartic(P, f, kJ);
    const PolyHamiltonian T = lie_transform(build_Lambda_nu(f, M) + P, kg.G, {}, c * c);
    CHECK(max_coeff(T.degree_part(2) - build_Lambda_nu(f, M)) < 1e-13);
    CHECK(max_coeff(T.degree_part(4) - kg.Lambda_plus - kg.P_hat) < 1e-12 * P.sup_coefficient());
}

TEST_CASE("divisor bounds") {
    const DivisorBoundsReport small = verify_divisor_bounds(kJ, {2.0, 5.0, 10.0, 50.0}, 40);
    CHECK(small.all_positive);
    for (const auto& r : small.rows) {
        CHECK(r.gauge_min > 0.0);
        CHECK(r.nongauge_min_over_c2 > 0.0);
        CHECK(r.gauge_witness.degree() == 4);
    }
    // once c exceeds the truncation the non-Gauge minimum sits at a fixed multiple of c^2
    const DivisorBoundsReport large = verify_divisor_bounds(kJ, {100.0, 400.0, 1600.0}, 40);
    CHECK(large.all_positive);
    CHECK(large.nongauge_spread < 0.05);
}
