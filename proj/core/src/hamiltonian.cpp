#include "kgnls/hamiltonian.hpp"

#include "kgnls/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace kgnls {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

cplx slot_value(std::int32_t s, const FourierState& st) {
    const int j = Monomial::slot_j(s);
    if (j < -st.M || j > st.M) return {};
    return Monomial::slot_sigma(s) > 0 ? st.z_at(j) : st.zbar_at(j);
}

}  // namespace

Monomial::Monomial(std::span<const int> j, std::span<const int> sigma) {
    if (j.size() != sigma.size()) throw ShapeError("Monomial: index and sign vectors differ in length");
    if (j.size() > static_cast<std::size_t>(kMaxDegree)) throw ResourceError("Monomial: degree exceeds " + std::to_string(kMaxDegree));
    deg_ = static_cast<std::uint8_t>(j.size());
    for (std::size_t t = 0; t < j.size(); ++t) {
        if (sigma[t] != 1 && sigma[t] != -1) throw DomainError("Monomial: signs must be +1 or -1");
        slots_[t] = encode(j[t], sigma[t]);
    }
    std::sort(slots_.begin(), slots_.begin() + deg_);
}

Monomial::Monomial(std::initializer_list<int> j, std::initializer_list<int> sigma)
    : Monomial(std::span<const int>(j.begin(), j.size()), std::span<const int>(sigma.begin(), sigma.size())) {}

Monomial Monomial::from_slots(std::span<const std::int32_t> s) {
    if (s.size() > static_cast<std::size_t>(kMaxDegree)) throw ResourceError("Monomial: degree exceeds " + std::to_string(kMaxDegree));
    Monomial m;
    m.deg_ = static_cast<std::uint8_t>(s.size());
    std::copy(s.begin(), s.end(), m.slots_.begin());
    std::sort(m.slots_.begin(), m.slots_.begin() + m.deg_);
    return m;
}

Monomial Monomial::from_sigma_string(const std::string& sigma, std::span<const int> j) {
    std::vector<int> sg;
    for (char ch : sigma) {
        if (ch == '+') sg.push_back(1);
        else if (ch == '-') sg.push_back(-1);
        else throw DomainError("Monomial: bad sign character '" + std::string(1, ch) + "'");
    }
    return Monomial(j, sg);
}

int Monomial::momentum() const noexcept {
    int s = 0;
    for (int t = 0; t < deg_; ++t) s += sigma(t) * j(t);
    return s;
}

int Monomial::gauge_sum() const noexcept {
    int s = 0;
    for (int t = 0; t < deg_; ++t) s += sigma(t);
    return s;
}

int Monomial::count(int jj, int sg) const noexcept {
    const auto code = encode(jj, sg);
    return static_cast<int>(std::count(slots_.begin(), slots_.begin() + deg_, code));
}

std::vector<int> Monomial::jvec() const {
    std::vector<int> v(deg_);
    for (int t = 0; t < deg_; ++t) v[static_cast<std::size_t>(t)] = j(t);
    return v;
}

std::vector<int> Monomial::sigvec() const {
    std::vector<int> v(deg_);
    for (int t = 0; t < deg_; ++t) v[static_cast<std::size_t>(t)] = sigma(t);
    return v;
}

std::string Monomial::sigma_string() const {
    std::string s;
    for (int t = 0; t < deg_; ++t) s += sigma(t) > 0 ? '+' : '-';
    return s;
}

double Monomial::orderings() const {
    double r = factorial(deg_);
    int t = 0;
    while (t < deg_) {
        int u = t;
        while (u < deg_ && slots_[static_cast<std::size_t>(u)] == slots_[static_cast<std::size_t>(t)]) ++u;
        r /= factorial(u - t);
        t = u;
    }
    return r;
}

void PolyHamiltonian::add(const Monomial& m, cplx coefficient) {
    auto [it, inserted] = terms_.try_emplace(m, coefficient);
    if (!inserted) it->second += coefficient;
    if (std::abs(it->second) < kPrune) terms_.erase(it);
}

void PolyHamiltonian::add(std::span<const int> j, std::span<const int> sigma, cplx coefficient) {
    add(Monomial(j, sigma), coefficient);
}

cplx PolyHamiltonian::coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? cplx{} : it->second;
}

int PolyHamiltonian::min_degree() const {
    int d = Monomial::kMaxDegree + 1;
    for (const auto& kv : terms_) d = std::min(d, kv.first.degree());
    return terms_.empty() ? 0 : d;
}

int PolyHamiltonian::max_degree() const {
    int d = 0;
    for (const auto& kv : terms_) d = std::max(d, kv.first.degree());
    return d;
}

bool PolyHamiltonian::homogeneous() const { return min_degree() == max_degree(); }

double PolyHamiltonian::sup_coefficient() const {
    double s = 0.0;
    for (const auto& kv : terms_) s = std::max(s, std::abs(kv.second));
    return s;
}

PolyHamiltonian PolyHamiltonian::degree_part(int n) const {
    return filter([n](const Monomial& m, cplx) { return m.degree() == n; });
}

cplx PolyHamiltonian::evaluate(const FourierState& state) const {
    cplx sum{};
    for (const auto& [m, a] : terms_) {
        cplx p = a;
        for (auto s : m.slots()) p *= slot_value(s, state);
        sum += p;
    }
    return sum;
}

PolyHamiltonian& PolyHamiltonian::operator+=(const PolyHamiltonian& other) {
    for (const auto& [m, a] : other.terms_) add(m, a);
    return *this;
}

PolyHamiltonian& PolyHamiltonian::operator-=(const PolyHamiltonian& other) {
    for (const auto& [m, a] : other.terms_) add(m, -a);
    return *this;
}

PolyHamiltonian& PolyHamiltonian::operator*=(cplx s) {
    for (auto it = terms_.begin(); it != terms_.end();) {
        it->second *= s;
        if (std::abs(it->second) < kPrune) it = terms_.erase(it);
        else ++it;
    }
    return *this;
}

void PolyHamiltonian::write_text(std::ostream& os) const {
    std::ostringstream line;
    for (const auto& [m, a] : terms_) {
        line.str("");
        line << m.sigma_string();
        for (int t = 0; t < m.degree(); ++t) line << ' ' << m.j(t);
        line << std::setprecision(17) << ' ' << a.real();
        if (a.imag() != 0.0) line << ' ' << a.imag();
        os << line.str() << '\n';
    }
}

PolyHamiltonian PolyHamiltonian::read_text(std::istream& is) {
    PolyHamiltonian H;
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        if (raw.empty() || raw[0] == '#') continue;
        std::istringstream in(raw);
        std::string sig;
        in >> sig;
        std::vector<int> j(sig.size());
        for (auto& x : j)
            if (!(in >> x)) throw DomainError("read_text: line " + std::to_string(lineno) + ": missing index");
        double re = 0.0, im = 0.0;
        if (!(in >> re)) throw DomainError("read_text: line " + std::to_string(lineno) + ": missing coefficient");
        if (!(in >> im)) im = 0.0;
        H.add(Monomial::from_sigma_string(sig, j), {re, im});
    }
    return H;
}

double P_raw_coefficient(const FrequencyTable& freq, std::span<const int> j, std::span<const int> sigma) {
    if (j.size() != 4 || sigma.size() != 4) throw ShapeError("P_raw_coefficient: quartic tuples required");
    int mom = 0, plus = 0;
    double wprod = 1.0;
    for (std::size_t t = 0; t < 4; ++t) {
        mom += sigma[t] * j[t];
        plus += sigma[t] > 0 ? 1 : 0;
        wprod *= freq.w(j[t]);
    }
    if (mom != 0) return 0.0;
    static constexpr double binom4[5] = {1, 4, 6, 4, 1};
    return binom4[plus] / (32.0 * kPi * std::sqrt(wprod));
}

namespace {

// Iterates canonical quartic monomials on |j| <= M with zero momentum.
template <class F>
void for_each_quartic(int M, bool gauge_only, F&& f) {
    static constexpr int patterns[5][4] = {
        {1, 1, 1, 1}, {1, 1, 1, -1}, {1, 1, -1, -1}, {1, -1, -1, -1}, {-1, -1, -1, -1}};
    for (const auto& sg : patterns) {
        const int gsum = sg[0] + sg[1] + sg[2] + sg[3];
        if (gauge_only && gsum != 0) continue;
        for (int j1 = -M; j1 <= M; ++j1)
            for (int j2 = -M; j2 <= M; ++j2)
                for (int j3 = -M; j3 <= M; ++j3) {
                    const int j4 = -sg[3] * (sg[0] * j1 + sg[1] * j2 + sg[2] * j3);
                    if (j4 < -M || j4 > M) continue;
                    const int jj[4] = {j1, j2, j3, j4};
                    // keep one representative per multiset: non-decreasing j inside each sign block
                    bool canonical = true;
                    for (int t = 0; t + 1 < 4; ++t)
                        if (sg[t] == sg[t + 1] && jj[t] > jj[t + 1]) canonical = false;
                    if (!canonical) continue;
                    f(Monomial(std::span<const int>(jj, 4), std::span<const int>(sg, 4)));
                }
    }
}

}  // namespace

PolyHamiltonian build_P(const FrequencyTable& freq, int M) {
    if (M < 1) throw DomainError("build_P: M must be >= 1");
    if (M > freq.M()) throw ShapeError("build_P: M exceeds frequency table");
    PolyHamiltonian P;
    for_each_quartic(M, false, [&](const Monomial& m) {
        double wprod = 1.0;
        for (int t = 0; t < 4; ++t) wprod *= freq.w(m.j(t));
        P.add(m, m.orderings() / (32.0 * kPi * std::sqrt(wprod)));
    });
    return P;
}

PolyHamiltonian build_P_NLS(int M) {
    if (M < 1) throw DomainError("build_P_NLS: M must be >= 1");
    PolyHamiltonian P;
    for_each_quartic(M, true, [&](const Monomial& m) { P.add(m, m.orderings() / (32.0 * kPi)); });
    return P;
}

PolyHamiltonian build_Lambda(const FrequencyTable& freq, int M) {
    if (M > freq.M()) throw ShapeError("build_Lambda: M exceeds frequency table");
    PolyHamiltonian L;
    for (int j = -M; j <= M; ++j) L.add(Monomial({j, j}, {1, -1}), freq.lambda(j));
    return L;
}

PolyHamiltonian build_Lambda_NLS(int M) {
    PolyHamiltonian L;
    for (int j = -M; j <= M; ++j)
        if (j != 0) L.add(Monomial({j, j}, {1, -1}), 0.5 * j * j);
    return L;
}

PolyHamiltonian build_Lambda_nu(const FrequencyTable& freq, int M) {
    if (M > freq.M()) throw ShapeError("build_Lambda_nu: M exceeds frequency table");
    PolyHamiltonian L;
    for (int j = -M; j <= M; ++j) L.add(Monomial({j, j}, {1, -1}), freq.nu(j));
    return L;
}

PolyHamiltonian mass_bracket(const PolyHamiltonian& H) {
    PolyHamiltonian out;
    for (const auto& [m, a] : H.terms())
        if (m.gauge_sum() != 0) out.add(m, cplx{0.0, 1.0} * static_cast<double>(m.gauge_sum()) * a);
    return out;
}

PolyHamiltonian gauge_project(const PolyHamiltonian& H) {
    return H.filter([](const Monomial& m, cplx) { return m.gauge_sum() == 0; });
}

PSplit split_P(const FrequencyTable& freq, int M) {
    PSplit out;
    const PolyHamiltonian P = build_P(freq, M);
    const PolyHamiltonian PG = gauge_project(P);
    out.P_nls = build_P_NLS(M);
    out.P_ng = P - PG;
    out.P_r = PG - out.P_nls;
    double res = 0.0;
    for (const auto& [m, a] : P.terms())
        res = std::max(res, std::abs(a - out.P_nls.coefficient(m) - out.P_ng.coefficient(m) - out.P_r.coefficient(m)));
    out.reconstruction_residual = res;
    return out;
}

PolyHamiltonian poisson_bracket(const PolyHamiltonian& F, const PolyHamiltonian& G, const BracketOptions& opts) {
    using Entry = const std::pair<const Monomial, cplx>*;
    std::unordered_map<std::int32_t, std::vector<Entry>> by_slot;
    for (const auto& e : G.terms()) {
        const auto sl = e.first.slots();
        for (std::size_t t = 0; t < sl.size(); ++t)
            if (t == 0 || sl[t] != sl[t - 1]) by_slot[sl[t]].push_back(&e);
    }

    std::map<Monomial, cplx> acc;
    std::array<std::int32_t, 2 * Monomial::kMaxDegree> buf{};
    const cplx I{0.0, 1.0};
    for (const auto& [m1, a] : F.terms()) {
        const auto s1 = m1.slots();
        for (std::size_t t = 0; t < s1.size(); ++t) {
            if (t > 0 && s1[t] == s1[t - 1]) continue;
            const std::int32_t s = s1[t];
            const std::int32_t conj = s ^ 1;
            auto it = by_slot.find(conj);
            if (it == by_slot.end()) continue;
            const int n1 = static_cast<int>(std::count(s1.begin(), s1.end(), s));
            const double sign = (s & 1) ? -1.0 : 1.0;
            for (Entry e : it->second) {
                const Monomial& m2 = e->first;
                const int deg = m1.degree() + m2.degree() - 2;
                if (deg > opts.max_degree) {
                    if (opts.discarded) ++*opts.discarded;
                    continue;
                }
                const auto s2 = m2.slots();
                const int n2 = static_cast<int>(std::count(s2.begin(), s2.end(), conj));
                std::size_t k = 0;
                bool skipped = false;
                for (auto x : s1) {
                    if (x == s && !skipped) { skipped = true; continue; }
                    buf[k++] = x;
                }
                skipped = false;
                for (auto x : s2) {
                    if (x == conj && !skipped) { skipped = true; continue; }
                    buf[k++] = x;
                }
                const Monomial prod = Monomial::from_slots(std::span<const std::int32_t>(buf.data(), k));
                acc[prod] += I * a * e->second * (sign * n1 * n2);
                if (acc.size() > opts.max_terms)
                    throw ResourceError("poisson_bracket: result exceeds " + std::to_string(opts.max_terms) + " monomials");
            }
        }
    }
    PolyHamiltonian out;
    for (const auto& [m, c] : acc) out.add(m, c);
    return out;
}

FourierState vector_field(const PolyHamiltonian& H, const FourierState& state) {
    FourierState X(state.M);
    const cplx I{0.0, 1.0};
    for (const auto& [m, a] : H.terms()) {
        const auto sl = m.slots();
        for (std::size_t t = 0; t < sl.size(); ++t) {
            if (t > 0 && sl[t] == sl[t - 1]) continue;
            const int j = Monomial::slot_j(sl[t]);
            if (j < -state.M || j > state.M) continue;
            const auto n = std::count(sl.begin(), sl.end(), sl[t]);
            cplx d = a * static_cast<double>(n);
            for (std::size_t u = 0; u < sl.size(); ++u)
                if (u != t) d *= slot_value(sl[u], state);
            if (Monomial::slot_sigma(sl[t]) < 0)
                X.z_at(j) += -I * d;
            else
                X.zbar_at(j) += I * d;
        }
    }
    return X;
}

double vector_field_norm_bound(const PolyHamiltonian& H, const std::vector<std::vector<double>>& b,
                               const FourierState& state, const SpaceParams& params, const FrequencyTable& freq) {
    if (H.empty()) return 0.0;
    if (!H.homogeneous()) throw UnsupportedError("vector_field_norm_bound: Hamiltonian is not homogeneous");
    const int n = H.max_degree();
    const int M = state.M;
    const std::size_t len = static_cast<std::size_t>(2 * M + 1);
    if (b.size() != 1 && b.size() != static_cast<std::size_t>(n))
        throw UnsupportedError("vector_field_norm_bound: need one weight sequence or one per slot");
    for (const auto& bt : b) {
        if (bt.size() != len) throw ShapeError("vector_field_norm_bound: weight length differs from state");
        for (double x : bt)
            if (!(x > 0.0)) throw UnsupportedError("vector_field_norm_bound: weights must be positive");
    }
    auto weight = [&](int t, int j) -> double {
        if (j < -M || j > M) return 0.0;
        const auto& bt = b.size() == 1 ? b[0] : b[static_cast<std::size_t>(t)];
        return bt[static_cast<std::size_t>(j + M)];
    };

    // sup of per-ordering coefficients F_raw with sum over orderings matching the merged coefficient
    double Finf = 0.0;
    for (const auto& [m, a] : H.terms()) {
        if (m.momentum() != 0) throw UnsupportedError("vector_field_norm_bound: monomial off the momentum shell");
        std::vector<std::int32_t> perm(m.slots().begin(), m.slots().end());
        const double scale = std::abs(a) / m.orderings();
        do {
            double bp = 1.0;
            for (int t = 0; t < n; ++t) {
                const double wt = weight(t, Monomial::slot_j(perm[static_cast<std::size_t>(t)]));
                bp *= wt;
            }
            if (bp > 0.0) Finf = std::max(Finf, scale / bp);
        } while (b.size() > 1 && std::next_permutation(perm.begin(), perm.end()));
    }

    // What[t]_i = b_i |z_i| + b_{-i} |zbar_{-i}|
    std::vector<CVec> what(b.size() == 1 ? 1 : static_cast<std::size_t>(n), CVec(len));
    for (std::size_t t = 0; t < what.size(); ++t)
        for (int i = -M; i <= M; ++i)
            what[t][static_cast<std::size_t>(i + M)] = weight(static_cast<int>(t), i) * std::abs(state.z_at(i)) +
                                                       weight(static_cast<int>(t), -i) * std::abs(state.zbar_at(-i));
    auto wk = [&](int k) -> const CVec& { return what.size() == 1 ? what[0] : what[static_cast<std::size_t>(k)]; };

    std::vector<double> Sz(len, 0.0), Szb(len, 0.0);
    for (int t = 0; t < n; ++t) {
        CVec conv;
        bool first = true;
        for (int k = 0; k < n; ++k) {
            if (k == t) continue;
            if (first) {
                conv = wk(k);
                first = false;
            } else {
                const int r = radius_of(conv.size()) + M;
                conv = convolve(conv, wk(k), r);
            }
        }
        if (first) conv = CVec(len, cplx{1.0, 0.0});
        const int R = radius_of(conv.size());
        auto at = [&](int i) { return (i < -R || i > R) ? 0.0 : conv[static_cast<std::size_t>(i + R)].real(); };
        for (int q = -M; q <= M; ++q) {
            const double bq = weight(t, q);
            Sz[static_cast<std::size_t>(q + M)] += bq * at(q);
            Szb[static_cast<std::size_t>(q + M)] += bq * at(-q);
        }
    }
    FourierState S(M);
    for (std::size_t k = 0; k < len; ++k) {
        S.z[k] = Finf * Sz[k];
        S.zbar[k] = Finf * Szb[k];
    }
    return weighted_norm(S, params, freq);
}

}  // namespace kgnls
