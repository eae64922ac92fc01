#include "kgnls/birkhoff.hpp"

#include "kgnls/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace kgnls {

namespace {

constexpr double kPi = std::numbers::pi;

bool in_set(const std::vector<int>& J, int j) { return std::find(J.begin(), J.end(), j) != J.end(); }

bool pairing_exists(const int* j, const int* s) {
    std::array<int, 4> p{0, 1, 2, 3};
    do {
        if (j[p[0]] == j[p[1]] && j[p[2]] == j[p[3]] && s[p[0]] == -s[p[1]] && s[p[2]] == -s[p[3]]) return true;
    } while (std::next_permutation(p.begin(), p.end()));
    return false;
}

// sigma . lambda = L c^2 + sum sigma nu, evaluated without the c^2 cancellation
double kg_divisor(const Monomial& m, const FrequencyTable& freq) {
    double s = 0.0;
    for (int t = 0; t < m.degree(); ++t) s += m.sigma(t) * freq.nu(m.j(t));
    return m.gauge_sum() * freq.c() * freq.c() + s;
}

double nls_divisor(const Monomial& m) {
    double s = 0.0;
    for (int t = 0; t < m.degree(); ++t) s += 0.5 * m.sigma(t) * m.j(t) * m.j(t);
    return s;
}

std::string describe(const Monomial& m) {
    std::ostringstream os;
    os << m.sigma_string();
    for (int t = 0; t < m.degree(); ++t) os << ' ' << m.j(t);
    return os.str();
}

NormalFormResult solve_common(const PolyHamiltonian& P, const FrequencyTable* freq, const std::vector<int>& J, int M,
                              const NormalFormOptions& opts) {
    if (J.empty()) throw DomainError("normal form: empty tangential set");
    for (int j : J)
        if (j < -M || j > M) throw ShapeError("normal form: tangential index outside truncation");
    if (P.min_degree() != 4 || P.max_degree() != 4) throw UnsupportedError("normal form: P must be quartic");

    NormalFormResult r;
    r.J = J;
    r.c = freq ? freq->c() : 0.0;
    r.M = M;

    auto divisor = [&](const Monomial& m) { return freq ? kg_divisor(m, *freq) : nls_divisor(m); };

    double gmin = std::numeric_limits<double>::infinity();
    double ngmin = std::numeric_limits<double>::infinity();
    std::vector<std::pair<Monomial, cplx>> solvable;
    for (const auto& [m, a] : P.terms()) {
        if (m.momentum() != 0) throw UnsupportedError("normal form: monomial off the momentum shell: " + describe(m));
        const ResonanceClass rc = classify(m, J, freq);
        if (!rc.in_LJ) {
            r.P_hat.add(m, a);
            continue;
        }
        if (rc.in_IR) {
            r.Lambda_plus.add(m, a);
            continue;
        }
        const double d = std::abs(divisor(m));
        if (m.gauge_sum() == 0) gmin = std::min(gmin, d);
        else ngmin = std::min(ngmin, d / (r.c * r.c));
        solvable.emplace_back(m, a);
    }
    r.min_gauge_divisor = gmin;
    r.min_nongauge_divisor = ngmin;

    const double gfloor = opts.gauge_floor >= 0.0 ? opts.gauge_floor : 1e-8 * (std::isfinite(gmin) ? gmin : 0.0);
    const cplx I{0.0, 1.0};
    for (const auto& [m, a] : solvable) {
        const double d = divisor(m);
        if (m.gauge_sum() == 0) {
            if (!(std::abs(d) > gfloor) || d == 0.0)
                throw AnomalyError("normal form: Gauge divisor " + std::to_string(d) + " below floor at " + describe(m));
        } else if (!(std::abs(d) > opts.nongauge_floor * r.c * r.c)) {
            throw AnomalyError("normal form: non-Gauge divisor " + std::to_string(d) + " below floor at " + describe(m));
        }
        r.G.add(m, I * a / d);
    }

    // independent check through the bracket code path
    const double shift = freq ? r.c * r.c : 0.0;
    const PolyHamiltonian Lam = freq ? build_Lambda_nu(*freq, M) : build_Lambda_NLS(M);
    PolyHamiltonian R = poisson_bracket(Lam, r.G) + P - r.Lambda_plus - r.P_hat;
    if (shift != 0.0) R += shift * mass_bracket(r.G);
    const double psup = P.sup_coefficient();
    double res = 0.0;
    for (const auto& [m, a] : R.terms()) {
        const double ref = std::abs(P.coefficient(m));
        res = std::max(res, std::abs(a) / (ref > 0.0 ? ref : psup));
    }
    r.residual = res;

    const PolyHamiltonian closed = lambda_plus_closed_form(freq, J, M);
    double cf = 0.0;
    for (const auto& [m, a] : (r.Lambda_plus - closed).terms()) cf = std::max(cf, std::abs(a));
    r.closed_form_error = cf;

    if (opts.compute_P0) {
        BracketOptions bo;
        bo.discarded = &r.discarded_products;
        r.P0_terms = lie_transform(Lam + P, r.G, bo, shift).degree_part(6);
    }
    return r;
}

}  // namespace

ResonanceClass classify(std::span<const int> j, std::span<const int> sigma, const std::vector<int>& J,
                        const FrequencyTable* freq) {
    if (j.size() != 4 || sigma.size() != 4) throw ShapeError("classify: quartic tuples required");
    ResonanceClass rc;
    rc.in_IR = pairing_exists(j.data(), sigma.data());
    for (int x : j)
        if (in_set(J, x)) rc.in_LJ = true;
    int mom = 0;
    for (std::size_t t = 0; t < 4; ++t) {
        rc.gauge_sum += sigma[t];
        mom += sigma[t] * j[t];
    }
    if (mom != 0) rc.in_LJ = false;
    const Monomial m(j, sigma);
    rc.divisor = freq ? kg_divisor(m, *freq) : nls_divisor(m);
    return rc;
}

ResonanceClass classify(const Monomial& m, const std::vector<int>& J, const FrequencyTable* freq) {
    const auto j = m.jvec();
    const auto s = m.sigvec();
    return classify(j, s, J, freq);
}

double lambda_plus_term(const FrequencyTable& freq, int i, int j) {
    const double N = 3.0 / (8.0 * kPi) * (i == j ? 1.0 : 2.0);
    return 0.5 * N / (freq.w(i) * freq.w(j));
}

double lambda_plus_term_nls(int i, int j) { return 0.5 * 3.0 / (8.0 * kPi) * (i == j ? 1.0 : 2.0); }

PolyHamiltonian lambda_plus_closed_form(const FrequencyTable* freq, const std::vector<int>& J, int M) {
    PolyHamiltonian L;
    for (int i = -M; i <= M; ++i)
        for (int j = -M; j <= M; ++j) {
            if (!in_set(J, i) && !in_set(J, j)) continue;
            const double a = freq ? lambda_plus_term(*freq, i, j) : lambda_plus_term_nls(i, j);
            L.add(Monomial({i, i, j, j}, {1, -1, 1, -1}), a);
        }
    return L;
}

NormalFormResult solve_cohomological_quartic(const PolyHamiltonian& P, const FrequencyTable& freq, const std::vector<int>& J,
                                             const NormalFormOptions& opts) {
    NormalFormResult r = solve_common(P, &freq, J, freq.M(), opts);
    if (opts.compute_G_nls) {
        NormalFormOptions o = opts;
        o.compute_P0 = false;
        o.compute_G_nls = false;
        r.G_nls = solve_common(build_P_NLS(freq.M()), nullptr, J, freq.M(), o).G;
        r.G_remainder = r.G - r.G_nls;
    }
    return r;
}

NormalFormResult solve_cohomological_nls(const PolyHamiltonian& P_nls, const std::vector<int>& J, int M,
                                         const NormalFormOptions& opts) {
    if (gauge_project(P_nls).size() != P_nls.size()) throw UnsupportedError("solve_cohomological_nls: P is not Gauge invariant");
    NormalFormResult r = solve_common(P_nls, nullptr, J, M, opts);
    r.G_nls = r.G;
    return r;
}

RemainderSplit remainder_split(const NormalFormResult& kg, const NormalFormResult& nls) {
    if (kg.M != nls.M || kg.J != nls.J) throw ShapeError("remainder_split: truncations or tangential sets differ");
    if (kg.is_nls() || !nls.is_nls()) throw DomainError("remainder_split: expects a KG result and an NLS result");
    const FrequencyTable freq(kg.c, kg.M);
    const cplx I{0.0, 1.0};
    RemainderSplit out;
    out.total = kg.G - nls.G;
    for (const auto& [m, g] : kg.G.terms()) {
        if (m.gauge_sum() != 0) {
            out.non_gauge.add(m, g);
            continue;
        }
        const double d = kg_divisor(m, freq);
        const double dn = nls_divisor(m);
        const cplx p = -I * g * d;
        const cplx pn = -I * nls.G.coefficient(m) * dn;
        out.gauge_from_PR.add(m, I * (p - pn) / d);
        out.divisor_difference.add(m, I * pn * (1.0 / d - 1.0 / dn));
    }
    const PolyHamiltonian back = out.total - out.non_gauge - out.gauge_from_PR - out.divisor_difference;
    out.reconstruction_residual = back.sup_coefficient();
    return out;
}

PolyHamiltonian lie_transform(const PolyHamiltonian& H, const PolyHamiltonian& G, const BracketOptions& opts,
                              double mass_shift) {
    PolyHamiltonian out = H.filter([&](const Monomial& m, cplx) { return m.degree() <= opts.max_degree; });
    PolyHamiltonian T = out;
    for (int k = 1; k <= opts.max_degree + 1; ++k) {
        PolyHamiltonian next = poisson_bracket(T, G, opts);
        if (k == 1 && mass_shift != 0.0) {
            next += mass_shift * mass_bracket(G).filter([&](const Monomial& m, cplx) { return m.degree() <= opts.max_degree; });
        }
        if (next.empty()) break;
        next *= 1.0 / k;
        out += next;
        T = std::move(next);
    }
    return out;
}

DivisorBoundsReport verify_divisor_bounds(const std::vector<int>& J, const std::vector<double>& c_list, int Mmax) {
    static constexpr int patterns[5][4] = {
        {1, 1, 1, 1}, {1, 1, 1, -1}, {1, 1, -1, -1}, {1, -1, -1, -1}, {-1, -1, -1, -1}};
    DivisorBoundsReport rep;
    rep.J = J;
    rep.Mmax = Mmax;
    rep.all_positive = true;
    for (double c : c_list) {
        const FrequencyTable freq(c, Mmax);
        DivisorBoundsRow row;
        row.c = c;
        row.gauge_min = std::numeric_limits<double>::infinity();
        row.nongauge_min_over_c2 = std::numeric_limits<double>::infinity();
        for (const auto& sg : patterns) {
            const int L = sg[0] + sg[1] + sg[2] + sg[3];
            for (int j1 = -Mmax; j1 <= Mmax; ++j1)
                for (int j2 = -Mmax; j2 <= Mmax; ++j2)
                    for (int j3 = -Mmax; j3 <= Mmax; ++j3) {
                        const int j4 = -sg[3] * (sg[0] * j1 + sg[1] * j2 + sg[2] * j3);
                        if (j4 < -Mmax || j4 > Mmax) continue;
                        const int jj[4] = {j1, j2, j3, j4};
                        if (!in_set(J, j1) && !in_set(J, j2) && !in_set(J, j3) && !in_set(J, j4)) continue;
                        if (pairing_exists(jj, sg)) continue;
                        double s = 0.0;
                        for (int t = 0; t < 4; ++t) s += sg[t] * freq.nu(jj[t]);
                        const double d = std::abs(L * c * c + s);
                        ++row.scanned;
                        if (L == 0) {
                            if (d < row.gauge_min) {
                                row.gauge_min = d;
                                row.gauge_witness = Monomial(std::span<const int>(jj, 4), std::span<const int>(sg, 4));
                            }
                        } else if (d / (c * c) < row.nongauge_min_over_c2) {
                            row.nongauge_min_over_c2 = d / (c * c);
                            row.nongauge_witness = Monomial(std::span<const int>(jj, 4), std::span<const int>(sg, 4));
                        }
                    }
        }
        if (!(row.gauge_min > 0.0) || !(row.nongauge_min_over_c2 > 0.0)) rep.all_positive = false;
        rep.rows.push_back(row);
    }
    if (!rep.rows.empty()) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& r : rep.rows) {
            lo = std::min(lo, r.nongauge_min_over_c2);
            hi = std::max(hi, r.nongauge_min_over_c2);
        }
        rep.nongauge_spread = hi / lo - 1.0;
    }
    return rep;
}

void NormalFormResult::write_json_header(std::ostream& os) const {
    nlohmann::json j;
    j["J"] = J;
    j["c"] = c;
    j["M"] = M;
    j["system"] = is_nls() ? "NLS" : "KG";
    j["residual"] = residual;
    j["closed_form_error"] = closed_form_error;
    j["min_gauge_divisor"] = min_gauge_divisor;
    j["min_nongauge_divisor_over_c2"] = std::isfinite(min_nongauge_divisor) ? nlohmann::json(min_nongauge_divisor) : nlohmann::json();
    j["terms"] = {{"G", G.size()}, {"Lambda_plus", Lambda_plus.size()}, {"P_hat", P_hat.size()}, {"P0", P0_terms.size()}};
    j["discarded_products"] = discarded_products;
    os << j.dump(2) << '\n';
}

}  // namespace kgnls
