#include "kgnls/frequencies.hpp"

#include "kgnls/divisors.hpp"
#include "kgnls/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>

namespace kgnls {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kN_diag = 3.0 / (8.0 * kPi);
constexpr double kN_off = 3.0 / (4.0 * kPi);

void check_dim(const FrequencyModel& m, const Eigen::VectorXd& xi) {
    if (xi.size() != m.N()) throw ShapeError("frequency map: xi has wrong dimension");
}

void check_box(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check) {
    check_dim(m, xi);
    if (check && !m.in_box(xi)) throw DomainError("frequency map: xi outside the amplitude box");
}

}  // namespace

Eigen::VectorXd TabulatedCorrection::eval(const Eigen::VectorXd& at, Eigen::Index dim) const {
    if (xi.empty()) return Eigen::VectorXd::Zero(dim);
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < xi.size(); ++s) {
        const double d = (xi[s] - at).squaredNorm();
        if (d < bd) {
            bd = d;
            best = s;
        }
    }
    return values[best];
}

double TabulatedCorrection::lipschitz() const {
    double L = 0.0;
    for (std::size_t a = 0; a < xi.size(); ++a)
        for (std::size_t b = a + 1; b < xi.size(); ++b) {
            const double dx = (xi[a] - xi[b]).lpNorm<Eigen::Infinity>();
            if (dx > 0.0) L = std::max(L, (values[a] - values[b]).lpNorm<Eigen::Infinity>() / dx);
        }
    return L;
}

double TabulatedCorrection::sup() const {
    double s = 0.0;
    for (const auto& v : values) s = std::max(s, v.lpNorm<Eigen::Infinity>());
    return s;
}

int FrequencyModel::normal_position(int n) const {
    auto it = std::lower_bound(normal.begin(), normal.end(), n);
    if (it == normal.end() || *it != n) return -1;
    return static_cast<int>(it - normal.begin());
}

bool FrequencyModel::in_box(const Eigen::VectorXd& xi, double rel_tol) const {
    if (xi.size() != N()) return false;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        const double tol = rel_tol * xi_hi[i];
        if (xi[i] < xi_lo[i] - tol || xi[i] > xi_hi[i] + tol) return false;
    }
    return true;
}

double FrequencyModel::w(int n) const { return 1.0 + h * kgnls::nu(h, n); }
double FrequencyModel::nu(int n) const { return kgnls::nu(h, n); }
double FrequencyModel::B_row_entry(int n, int i) const { return kN_off / (w(n) * w_J[i]); }

FrequencyModel build_model(double c, const std::vector<int>& J, int M, double R) {
    if (!(c > 0.0)) throw DomainError("build_model: c must be positive");
    if (!(R > 0.0)) throw DomainError("build_model: R must be positive");
    if (J.size() < 3) throw DomainError("build_model: need N = #J >= 3");
    std::set<int> uniq(J.begin(), J.end());
    if (uniq.size() != J.size()) throw DomainError("build_model: repeated tangential index");
    for (int j : J)
        if (j < -M || j > M) throw ShapeError("build_model: tangential index outside truncation");

    FrequencyModel m;
    m.c = c;
    m.h = 1.0 / (c * c);
    m.R = R;
    m.M = M;
    m.J = J;
    for (int n = -M; n <= M; ++n)
        if (!uniq.count(n)) m.normal.push_back(n);
    const int N = static_cast<int>(J.size());
    const auto Nn = static_cast<Eigen::Index>(m.normal.size());
    m.nu_J.resize(N);
    m.w_J.resize(N);
    for (int i = 0; i < N; ++i) {
        m.nu_J[i] = kgnls::nu(m.h, J[static_cast<std::size_t>(i)]);
        m.w_J[i] = 1.0 + m.h * m.nu_J[i];
    }
    m.A.resize(N, N);
    m.A_nls.resize(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double Nij = i == j ? kN_diag : kN_off;
            m.A_nls(i, j) = Nij;
            m.A(i, j) = Nij / (m.w_J[i] * m.w_J[j]);
        }
    m.B.resize(Nn, N);
    m.B_nls.resize(Nn, N);
    for (Eigen::Index r = 0; r < Nn; ++r)
        for (int i = 0; i < N; ++i) {
            m.B(r, i) = m.B_row_entry(m.normal[static_cast<std::size_t>(r)], i);
            m.B_nls(r, i) = kN_off;
        }
    m.xi_lo = Eigen::VectorXd::Constant(N, 0.5 * R * R);
    m.xi_hi = Eigen::VectorXd::Constant(N, 1.5 * R * R);
    return m;
}

Eigen::VectorXd omega0_shifted(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check) {
    check_box(m, xi, check);
    return m.nu_J + m.A * xi;
}

Eigen::VectorXd omega0(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check) {
    return (omega0_shifted(m, xi, check).array() + m.c * m.c).matrix();
}

Eigen::VectorXd omega0_nls(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check) {
    check_box(m, xi, check);
    Eigen::VectorXd out = m.A_nls * xi;
    for (int i = 0; i < m.N(); ++i) {
        const double j = m.J[static_cast<std::size_t>(i)];
        out[i] += 0.5 * j * j;
    }
    return out;
}

Eigen::VectorXd Omega0_shifted(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check) {
    check_box(m, xi, check);
    Eigen::VectorXd out = m.B * xi;
    for (std::size_t r = 0; r < m.normal.size(); ++r) out[static_cast<Eigen::Index>(r)] += m.nu(m.normal[r]);
    return out;
}

Eigen::VectorXd Omega0(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check) {
    return (Omega0_shifted(m, xi, check).array() + m.c * m.c).matrix();
}

Eigen::VectorXd Omega0_nls(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check) {
    check_box(m, xi, check);
    Eigen::VectorXd out = m.B_nls * xi;
    for (std::size_t r = 0; r < m.normal.size(); ++r) {
        const double n = m.normal[r];
        out[static_cast<Eigen::Index>(r)] += 0.5 * n * n;
    }
    return out;
}

double Omega0_at(const FrequencyModel& m, int n, const Eigen::VectorXd& xi, bool shifted) {
    check_dim(m, xi);
    if (std::find(m.J.begin(), m.J.end(), n) != m.J.end()) throw DomainError("Omega0_at: index is tangential");
    double s = m.nu(n);
    for (int i = 0; i < m.N(); ++i) s += m.B_row_entry(n, i) * xi[i];
    return shifted ? s : m.c * m.c + s;
}

Eigen::MatrixXd bateman_inverse(const FrequencyModel& m) {
    const double N = m.N();
    Eigen::MatrixXd out = (2.0 / (2.0 * N - 1.0)) * m.w_J * m.w_J.transpose();
    out.diagonal() -= m.w_J.cwiseProduct(m.w_J);
    return (8.0 * kPi / 3.0) * out;
}

double bateman_norm_bound(const FrequencyModel& m) {
    const double N = m.N();
    const double wmax = m.w_J.lpNorm<Eigen::Infinity>();
    return (8.0 * kPi / 3.0) * (4.0 * N - 1.0) / (2.0 * N - 1.0) * wmax * wmax;
}

Eigen::VectorXd solve_first_melnikov(const FrequencyModel& m, const SparseEll& ell) {
    int l1 = 0;
    double s = 0.0;
    for (const auto& [n, v] : ell) {
        if (std::find(m.J.begin(), m.J.end(), n) != m.J.end()) throw DomainError("solve_first_melnikov: ell supported on J");
        l1 += std::abs(v);
        s += v / m.w(n);
    }
    if (l1 > 2) throw DomainError("solve_first_melnikov: |ell|_1 must be <= 2");
    const double N = m.N();
    return (2.0 * s / (1.0 - 2.0 * N)) * m.w_J;
}

Eigen::VectorXd melnikov_vector(const FrequencyModel& m, const std::vector<int>& k, const SparseEll& ell) {
    if (static_cast<int>(k.size()) != m.N()) throw ShapeError("melnikov_vector: k has wrong dimension");
    Eigen::VectorXd kv(m.N());
    for (int i = 0; i < m.N(); ++i) kv[i] = k[static_cast<std::size_t>(i)];
    Eigen::VectorXd out = m.A * kv;
    for (const auto& [n, v] : ell)
        for (int i = 0; i < m.N(); ++i) out[i] += m.B_row_entry(n, i) * v;
    return out;
}

MelnikovReport first_melnikov_lower_bound(const FrequencyModel& m, int kmax) {
    MelnikovReport rep;
    int Jmax = 0;
    for (int j : m.J) Jmax = std::max(Jmax, std::abs(j));
    rep.h_hypothesis = m.h <= 49.0 / (576.0 * Jmax * Jmax);
    if (!rep.h_hypothesis)
        std::fprintf(stderr, "first_melnikov_lower_bound: h = %g exceeds 49/(576 J^2), scanning anyway\n", m.h);
    rep.min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& k : enumerate_k(m.N(), 1, kmax)) {
        int k1 = 0;
        for (int x : k) k1 += std::abs(x);
        for (const auto& ell : enumerate_ell(k, m.J, m.M)) {
            const double r = melnikov_vector(m, k, ell).lpNorm<1>() / k1;
            ++rep.scanned;
            if (r < rep.min_ratio) {
                rep.min_ratio = r;
                rep.k_witness = k;
                rep.ell_witness = ell;
            }
        }
    }
    return rep;
}

AsymptoticsReport asymptotics_check(const FrequencyModel& m, const std::vector<std::pair<int, int>>& pairs) {
    AsymptoticsReport rep;
    const double c3 = m.c * m.c * m.c;
    const Eigen::VectorXd xi = m.box_center();
    auto admissible = [&](int i, int j) {
        return c3 < std::abs(i) && std::abs(i) < std::abs(j) && m.normal_position(i) >= 0 && m.normal_position(j) >= 0;
    };
    auto eval = [&](int i, int j) {
        // difference of the shifted frequencies, so c^2 never enters
        const double num = Omega0_at(m, j, xi, true) - Omega0_at(m, i, xi, true);
        AsymptoticsRow row{i, j, 0.0, 0.0};
        row.deviation = std::abs(num / (m.c * (std::abs(j) - std::abs(i))) - 1.0);
        row.scaled = row.deviation * m.w(i) * m.w(i);
        rep.rows.push_back(row);
        rep.constant = std::max(rep.constant, row.scaled);
    };
    if (pairs.empty()) {
        for (int i : m.normal)
            for (int j : m.normal)
                if (admissible(i, j)) eval(i, j);
    } else {
        for (const auto& [i, j] : pairs)
            if (admissible(i, j)) eval(i, j);
    }
    rep.empty = rep.rows.empty();
    return rep;
}

namespace {

std::string hex_bits(double x) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(x)));
    return buf;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& a) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(hex_bits(a(r, c)));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json matrix_values(const Eigen::MatrixXd& a) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

void export_json(const FrequencyModel& m, std::ostream& os) {
    nlohmann::json j;
    j["c"] = m.c;
    j["h"] = m.h;
    j["h_hex"] = hex_bits(m.h);
    j["R"] = m.R;
    j["M"] = m.M;
    j["J"] = m.J;
    j["normal"] = m.normal;
    j["A"] = matrix_values(m.A);
    j["A_hex"] = matrix_json(m.A);
    j["B"] = matrix_values(m.B);
    j["B_hex"] = matrix_json(m.B);
    j["A_nls_hex"] = matrix_json(m.A_nls);
    j["B_nls_hex"] = matrix_json(m.B_nls);
    j["xi_lo"] = std::vector<double>(m.xi_lo.data(), m.xi_lo.data() + m.xi_lo.size());
    j["xi_hi"] = std::vector<double>(m.xi_hi.data(), m.xi_hi.data() + m.xi_hi.size());
    j["corrections"] = {{"delta_samples", m.delta.xi.size()},
                        {"delta_lipschitz", m.delta.lipschitz()},
                        {"Delta_samples", m.Delta.xi.size()},
                        {"Delta_lipschitz", m.Delta.lipschitz()}};
    os << j.dump(2) << '\n';
}

}  // namespace kgnls
