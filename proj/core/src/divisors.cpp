#include "kgnls/divisors.hpp"

#include "kgnls/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace kgnls {

namespace {

constexpr std::size_t kBlock = 4096;
constexpr double kWilsonZ = 1.959963984540054;

int sgn(int x) { return (x > 0) - (x < 0); }

bool in_J(const std::vector<int>& J, int n) { return std::find(J.begin(), J.end(), n) != J.end(); }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Affine form |d0 + g.(xi - center)| scaled by 1/base, for quick sample loops.
struct Affine {
    double d0 = 0.0;
    Eigen::VectorXd g;
    double base = 1.0;
    const IndexPair* pair = nullptr;  // set when corrections must be evaluated per sample
};

double box_lower_bound(const FrequencyModel& m, const Affine& a, double corr_sup, const IndexPair& p) {
    const Eigen::VectorXd half = 0.5 * (m.xi_hi - m.xi_lo);
    const double slack = a.g.cwiseAbs().dot(half) + corr_sup * (p.k_norm1() + p.ell_norm1());
    return std::abs(a.d0) - slack;
}

Affine make_affine(const FrequencyModel& m, const IndexPair& p, double base, bool nls) {
    Affine a;
    const Eigen::VectorXd center = m.box_center();
    if (nls) {
        double s = 0.0;
        Eigen::VectorXd kv(m.N());
        for (int i = 0; i < m.N(); ++i) {
            const double j = m.J[static_cast<std::size_t>(i)];
            kv[i] = p.k[static_cast<std::size_t>(i)];
            s += 0.5 * kv[i] * j * j;
        }
        a.g = m.A_nls * kv;
        for (const auto& [n, v] : p.ell) {
            s += 0.5 * v * static_cast<double>(n) * n;
            a.g.array() += m.B_nls(0, 0) * v;
        }
        a.d0 = s + a.g.dot(center);
    } else {
        const DivisorParts parts = divisor_parts(m, center, p);
        a.g = divisor_gradient(m, p);
        a.d0 = parts.Lc2 + (parts.nu_part + parts.xi_part);
    }
    a.base = base;
    return a;
}

double eval_ratio(const FrequencyModel& m, const Affine& a, const Eigen::VectorXd& xi, const Eigen::VectorXd& center) {
    double d = a.d0 + a.g.dot(xi - center);
    if (a.pair) d += divisor_parts(m, xi, *a.pair).correction;
    return std::abs(d) / a.base;
}

template <class F>
void parallel_blocks(std::size_t nblocks, int workers, F&& f) {
    if (workers <= 1 || nblocks <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b) f(b);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t b = static_cast<std::size_t>(t); b < nblocks; b += static_cast<std::size_t>(workers)) f(b);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

SFamily family(SClass s) {
    switch (s) {
        case SClass::Zero: return SFamily::Zero;
        case SClass::S0: return SFamily::S0;
        case SClass::S1:
        case SClass::S2:
        case SClass::S4:
        case SClass::S5: return SFamily::Minus;
        default: return SFamily::Plus;
    }
}

std::string to_string(SClass s) {
    switch (s) {
        case SClass::Zero: return "zero";
        case SClass::S0: return "S0";
        case SClass::S1: return "S1";
        case SClass::S2: return "S2";
        case SClass::S4: return "S4";
        case SClass::S5: return "S5";
        case SClass::S6: return "S6";
        case SClass::S7: return "S7";
        case SClass::S8: return "S8";
    }
    return "?";
}

int IndexPair::k_norm1() const {
    int s = 0;
    for (int x : k) s += std::abs(x);
    return s;
}

int IndexPair::ell_norm1() const {
    int s = 0;
    for (const auto& e : ell) s += std::abs(e.second);
    return s;
}

IndexPair make_index_pair(const std::vector<int>& k, SparseEll ell, const std::vector<int>& J, double c) {
    if (k.size() != J.size()) throw ShapeError("make_index_pair: k and J differ in length");
    std::sort(ell.begin(), ell.end());
    ell.erase(std::remove_if(ell.begin(), ell.end(), [](const auto& e) { return e.second == 0; }), ell.end());
    for (std::size_t a = 1; a < ell.size(); ++a)
        if (ell[a].first == ell[a - 1].first) throw DomainError("make_index_pair: repeated index in ell");
    IndexPair p;
    p.k = k;
    p.ell = std::move(ell);
    for (std::size_t i = 0; i < k.size(); ++i) {
        p.momentum += J[i] * k[i];
        p.L += k[i];
    }
    for (const auto& [n, v] : p.ell) {
        if (in_J(J, n)) throw DomainError("make_index_pair: ell supported on a tangential index");
        p.momentum += n * v;
        p.L += v;
    }
    if (p.k_norm1() + p.ell_norm1() == 0) throw DomainError("make_index_pair: k and ell both vanish");
    p.in_Z2 = p.ell_norm1() <= 2;
    p.in_ZM = p.in_Z2 && p.momentum == 0;
    p.in_ZG = p.in_ZM && p.L == 0;
    p.sclass = classify_pair(p, c);
    return p;
}

void ResonantQuery::validate() const {
    if (!(alpha > 0.0)) throw DomainError("ResonantQuery: alpha must be positive");
    if (!(tau >= 1.0)) throw DomainError("ResonantQuery: tau must be >= 1");
    if (!(theta >= 0.0 && theta < 1.0)) throw DomainError("ResonantQuery: theta must lie in [0,1)");
    if (samples == 0) throw DomainError("ResonantQuery: zero samples");
}

std::vector<SparseEll> enumerate_ell(const std::vector<int>& k, const std::vector<int>& J, int support_radius) {
    if (k.size() != J.size()) throw ShapeError("enumerate_ell: k and J differ in length");
    int m = 0;
    for (std::size_t i = 0; i < k.size(); ++i) m += J[i] * k[i];
    const int Rs = support_radius;
    auto ok = [&](int n) { return n >= -Rs && n <= Rs && !in_J(J, n); };

    std::vector<SparseEll> out;
    if (m == 0) out.push_back({});
    for (int s : {1, -1}) {
        const int a = -s * m;
        if (ok(a)) out.push_back({{a, s}});
    }
    if (m % 2 == 0)
        for (int s : {1, -1}) {
            const int a = -s * m / 2;
            if (ok(a)) out.push_back({{a, 2 * s}});
        }
    for (int a = -Rs; a <= Rs; ++a) {
        if (!ok(a)) continue;
        for (int s1 : {1, -1})
            for (int s2 : {1, -1}) {
                const int b = -s2 * (m + s1 * a);
                if (b > a && ok(b)) out.push_back({{a, s1}, {b, s2}});
            }
    }
    std::sort(out.begin(), out.end(), [](const SparseEll& x, const SparseEll& y) {
        if (x.size() != y.size()) return x.size() < y.size();
        return x < y;
    });
    return out;
}

std::vector<std::vector<int>> enumerate_k(int N, int kmin, int kmax) {
    std::vector<std::vector<int>> out;
    std::vector<int> k(static_cast<std::size_t>(N), -kmax);
    if (N <= 0 || kmax < 0) return out;
    while (true) {
        int n1 = 0;
        for (int x : k) n1 += std::abs(x);
        if (n1 >= kmin && n1 <= kmax) out.push_back(k);
        int pos = N - 1;
        while (pos >= 0 && k[static_cast<std::size_t>(pos)] == kmax) {
            k[static_cast<std::size_t>(pos)] = -kmax;
            --pos;
        }
        if (pos < 0) break;
        ++k[static_cast<std::size_t>(pos)];
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        int na = 0, nb = 0;
        for (int x : a) na += std::abs(x);
        for (int x : b) nb += std::abs(x);
        return na < nb;
    });
    return out;
}

SClass classify_pair(const IndexPair& p, double c) {
    if (p.ell.empty()) return SClass::Zero;
    if (p.ell.size() == 1) return SClass::S0;
    int i = p.ell[0].first, j = p.ell[1].first;
    int li = p.ell[0].second, lj = p.ell[1].second;
    if (i == 0 || j == 0) return SClass::S0;
    if (std::abs(i) > std::abs(j)) {
        std::swap(i, j);
        std::swap(li, lj);
    }
    if (li * lj < 0) {
        if (sgn(i) != sgn(j)) return SClass::S1;
        if (2 * std::abs(i) <= std::abs(j)) return SClass::S2;
        return std::abs(i) >= c * c * c ? SClass::S5 : SClass::S4;
    }
    if (p.L == 0 || sgn(p.L) == sgn(li)) return SClass::S6;
    return sgn(i) == sgn(j) ? SClass::S7 : SClass::S8;
}

DivisorParts divisor_parts(const FrequencyModel& m, const Eigen::VectorXd& xi, const IndexPair& p) {
    if (static_cast<int>(p.k.size()) != m.N()) throw ShapeError("divisor: k has wrong dimension");
    if (xi.size() != m.N()) throw ShapeError("divisor: xi has wrong dimension");
    DivisorParts d;
    d.Lc2 = p.L * m.c * m.c;
    for (int i = 0; i < m.N(); ++i) d.nu_part += p.k[static_cast<std::size_t>(i)] * m.nu_J[i];
    for (const auto& [n, v] : p.ell) d.nu_part += v * m.nu(n);
    d.xi_part = divisor_gradient(m, p).dot(xi);
    if (!m.delta.empty() || !m.Delta.empty()) {
        const Eigen::VectorXd dl = m.delta.eval(xi, m.N());
        for (int i = 0; i < m.N(); ++i) d.correction += p.k[static_cast<std::size_t>(i)] * dl[i];
        if (!m.Delta.empty()) {
            const Eigen::VectorXd DL = m.Delta.eval(xi, static_cast<Eigen::Index>(m.normal.size()));
            for (const auto& [n, v] : p.ell) {
                const int pos = m.normal_position(n);
                if (pos >= 0) d.correction += v * DL[pos];
            }
        }
    }
    return d;
}

Eigen::VectorXd divisor_gradient(const FrequencyModel& m, const IndexPair& p) {
    return melnikov_vector(m, p.k, p.ell);
}

double divisor(const FrequencyModel& m, const Eigen::VectorXd& xi, const IndexPair& p, bool check) {
    if (check && !m.in_box(xi)) throw DomainError("divisor: xi outside the amplitude box");
    return divisor_parts(m, xi, p).total();
}

double divisor_nls(const FrequencyModel& m, const Eigen::VectorXd& xi, const IndexPair& p, bool check) {
    if (check && !m.in_box(xi)) throw DomainError("divisor_nls: xi outside the amplitude box");
    Affine a = make_affine(m, p, 1.0, true);
    return a.d0 + a.g.dot(xi - m.box_center());
}

double k_bracket(const std::vector<int>& k) {
    int s = 0;
    for (int x : k) s += std::abs(x);
    return std::max(1, s);
}

double ell_weight(const FrequencyModel& m, const SparseEll& ell) {
    if (ell.empty()) return 1.0;
    double w = std::numeric_limits<double>::infinity();
    for (const auto& e : ell) w = std::min(w, m.w(e.first));
    return w;
}

double resonance_threshold(const FrequencyModel& m, const IndexPair& p, const ResonantQuery& q) {
    return q.alpha / (std::pow(k_bracket(p.k), q.tau) * std::pow(ell_weight(m, p.ell), q.theta));
}

MeasureEstimate wilson_interval(std::size_t hits, std::size_t n) {
    MeasureEstimate e;
    e.hits = hits;
    e.samples = n;
    if (n == 0) throw DomainError("wilson_interval: zero samples");
    const double z = kWilsonZ;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double denom = 1.0 + z * z / nn;
    const double center = (p + z * z / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
    e.fraction = p;
    e.ci_lo = std::max(0.0, center - half);
    e.ci_hi = std::min(1.0, center + half);
    return e;
}

std::vector<Eigen::VectorXd> sample_box(const FrequencyModel& m, std::size_t n, std::uint64_t seed) {
    std::vector<Eigen::VectorXd> out(n, Eigen::VectorXd(m.N()));
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    for (std::size_t b = 0; b < nblocks; ++b) {
        std::mt19937_64 gen(splitmix64(seed ^ splitmix64(b + 1)));
        const std::size_t hi = std::min(n, (b + 1) * kBlock);
        for (std::size_t s = b * kBlock; s < hi; ++s)
            for (int i = 0; i < m.N(); ++i) {
                const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
                out[s][i] = m.xi_lo[i] + u * (m.xi_hi[i] - m.xi_lo[i]);
            }
    }
    return out;
}

std::vector<MeasureEstimate> measure_sweep(const FrequencyModel& m, const std::vector<IndexPair>& pairs,
                                           const std::vector<double>& alphas, const ResonantQuery& q) {
    q.validate();
    if (alphas.empty()) return {};
    const double amax = *std::max_element(alphas.begin(), alphas.end());
    const bool corrected = !m.delta.empty() || !m.Delta.empty();
    const double corr_sup = std::max(m.delta.sup(), m.Delta.sup());

    std::vector<Affine> forms;
    for (const auto& p : pairs) {
        ResonantQuery unit = q;
        unit.alpha = 1.0;
        Affine a = make_affine(m, p, resonance_threshold(m, p, unit), false);
        if (corrected) a.pair = &p;
        if (box_lower_bound(m, a, corr_sup, p) / a.base >= amax) continue;
        forms.push_back(std::move(a));
    }

    const auto samples = sample_box(m, q.samples, q.seed);
    const Eigen::VectorXd center = m.box_center();
    std::vector<double> ratio(samples.size(), std::numeric_limits<double>::infinity());
    const std::size_t nblocks = (samples.size() + kBlock - 1) / kBlock;
    parallel_blocks(nblocks, q.workers, [&](std::size_t b) {
        const std::size_t hi = std::min(samples.size(), (b + 1) * kBlock);
        for (std::size_t s = b * kBlock; s < hi; ++s)
            for (const auto& a : forms) ratio[s] = std::min(ratio[s], eval_ratio(m, a, samples[s], center));
    });

    std::vector<MeasureEstimate> out;
    for (double alpha : alphas) {
        std::size_t hits = 0;
        for (double r : ratio) hits += r < alpha ? 1 : 0;
        MeasureEstimate e = wilson_interval(hits, samples.size());
        e.alpha = alpha;
        out.push_back(e);
    }
    return out;
}

MeasureEstimate measure_estimate_mc(const FrequencyModel& m, const std::vector<int>& k, const ResonantQuery& q) {
    std::vector<IndexPair> pairs;
    bool kzero = std::all_of(k.begin(), k.end(), [](int x) { return x == 0; });
    for (auto& ell : enumerate_ell(k, m.J, m.M)) {
        if (kzero && ell.empty()) continue;
        pairs.push_back(make_index_pair(k, std::move(ell), m.J, m.c));
    }
    return measure_sweep(m, pairs, {q.alpha}, q).front();
}

double x_L(int L) {
    const double a = 0.5 * std::abs(L);
    return std::sqrt(a * (a + 2.0));
}

NonGaugeReport nongauge_scan(const FrequencyModel& m, double kappa, int kmax_cap) {
    NonGaugeReport rep;
    rep.c = m.c;
    rep.kmax = static_cast<int>(std::floor(kappa * std::sqrt(m.c)));
    if (kmax_cap > 0) rep.kmax = std::min(rep.kmax, kmax_cap);
    rep.support_radius = static_cast<int>(std::floor(m.c / 2.0));
    rep.min_over_c2 = std::numeric_limits<double>::infinity();
    rep.s8_min_over_c2 = std::numeric_limits<double>::infinity();

    const int N = m.N();
    std::vector<Eigen::VectorXd> corners;
    for (int mask = 0; mask < (1 << N); ++mask) {
        Eigen::VectorXd x(N);
        for (int i = 0; i < N; ++i) x[i] = (mask >> i) & 1 ? m.xi_hi[i] : m.xi_lo[i];
        corners.push_back(x);
    }
    int Jmax = 0;
    for (int j : m.J) Jmax = std::max(Jmax, std::abs(j));
    const double c2 = m.c * m.c;

    for (const auto& k : enumerate_k(N, 0, rep.kmax)) {
        const bool kzero = std::all_of(k.begin(), k.end(), [](int x) { return x == 0; });
        for (auto& ell : enumerate_ell(k, m.J, rep.support_radius)) {
            if (kzero && ell.empty()) continue;
            IndexPair p = make_index_pair(k, std::move(ell), m.J, m.c);
            if (p.L == 0) continue;
            const DivisorParts base = divisor_parts(m, Eigen::VectorXd::Zero(N), p);
            const Eigen::VectorXd g = divisor_gradient(m, p);
            double best = std::numeric_limits<double>::infinity();
            int best_corner = 0;
            for (std::size_t cn = 0; cn < corners.size(); ++cn) {
                const double d = std::abs(base.Lc2 + (base.nu_part + g.dot(corners[cn]))) / c2;
                if (d < best) {
                    best = d;
                    best_corner = static_cast<int>(cn);
                }
            }
            ++rep.scanned;
            auto it = rep.class_min_over_c2.find(p.sclass);
            if (it == rep.class_min_over_c2.end()) rep.class_min_over_c2[p.sclass] = best;
            else it->second = std::min(it->second, best);
            if (p.sclass == SClass::S8) {
                ++rep.s8_pairs;
                rep.s8_min_over_c2 = std::min(rep.s8_min_over_c2, best);
                const double target = m.c * x_L(p.L);
                const double window = Jmax * p.k_norm1() + 1.0;
                for (const auto& e : p.ell)
                    if (std::abs(std::abs(e.first) - target) <= window) {
                        ++rep.s8_near_xL;
                        break;
                    }
            }
            if (best < rep.min_over_c2) {
                rep.min_over_c2 = best;
                rep.witness = p;
                rep.witness_xi = corners[static_cast<std::size_t>(best_corner)];
            }
        }
    }
    return rep;
}

ExcisionResult cantor_excision(const FrequencyModel& m, const ResonantQuery& q, int K_cut, int kmax) {
    q.validate();
    if (K_cut < 0) throw DomainError("cantor_excision: K_cut must be >= 0");
    ExcisionResult res;
    const bool corrected = !m.delta.empty() || !m.Delta.empty();
    const double corr_sup = std::max(m.delta.sup(), m.Delta.sup());

    std::vector<IndexPair> store;
    std::vector<std::pair<std::size_t, bool>> refs;  // (pair index, nls)
    for (const auto& k : enumerate_k(m.N(), K_cut + 1, kmax))
        for (auto& ell : enumerate_ell(k, m.J, m.M)) {
            store.push_back(make_index_pair(k, std::move(ell), m.J, m.c));
            ++res.kg_sets;
            refs.emplace_back(store.size() - 1, false);
            if (store.back().in_ZG) {
                ++res.nls_sets;
                refs.emplace_back(store.size() - 1, true);
            }
        }

    std::vector<Affine> forms;
    for (const auto& [idx, nls] : refs) {
        const IndexPair& p = store[idx];
        const double base = nls ? 1.0 / std::pow(k_bracket(p.k), q.tau) : resonance_threshold(m, p, ResonantQuery{1.0, q.tau, q.theta});
        Affine a = make_affine(m, p, base, nls);
        if (corrected && !nls) a.pair = &p;
        if (box_lower_bound(m, a, nls ? 0.0 : corr_sup, p) / a.base >= q.alpha) continue;
        forms.push_back(std::move(a));
    }

    res.samples = sample_box(m, q.samples, q.seed);
    res.kept.assign(res.samples.size(), 1);
    const Eigen::VectorXd center = m.box_center();
    const std::size_t nblocks = (res.samples.size() + kBlock - 1) / kBlock;
    parallel_blocks(nblocks, q.workers, [&](std::size_t b) {
        const std::size_t hi = std::min(res.samples.size(), (b + 1) * kBlock);
        for (std::size_t s = b * kBlock; s < hi; ++s)
            for (const auto& a : forms)
                if (eval_ratio(m, a, res.samples[s], center) < q.alpha) {
                    res.kept[s] = 0;
                    break;
                }
    });
    std::size_t hits = 0;
    for (char k : res.kept) hits += k ? 0 : 1;
    const MeasureEstimate e = wilson_interval(hits, res.samples.size());
    res.excised_fraction = e.fraction;
    res.ci_lo = e.ci_lo;
    res.ci_hi = e.ci_hi;
    return res;
}

}  // namespace kgnls
