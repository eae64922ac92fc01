#include "kgnls/torus_lab.hpp"

#include "kgnls/errors.hpp"
#include "kgnls/kam_schedule.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <thread>

namespace kgnls {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};

// (x * y)_m for |m| <= Mo; x has radius Mx, y radius My.
CVec conv(const CVec& x, int Mx, const CVec& y, int My, int Mo) {
    CVec out(static_cast<std::size_t>(2 * Mo + 1));
    for (int m = -Mo; m <= Mo; ++m) {
        cplx s{};
        const int lo = std::max(-My, m - Mx);
        const int hi = std::min(My, m + Mx);
        for (int k = lo; k <= hi; ++k) s += x[static_cast<std::size_t>(m - k + Mx)] * y[static_cast<std::size_t>(k + My)];
        out[static_cast<std::size_t>(m + Mo)] = s;
    }
    return out;
}

CVec reversed_bar(const FourierState& s) {
    // r_k = zbar_{-k}
    CVec r(s.zbar.rbegin(), s.zbar.rend());
    return r;
}

CVec dressed_field(const TruncatedSystem& sys, const FourierState& s) {
    CVec phi(s.z.size());
    for (int k = -s.M; k <= s.M; ++k) phi[static_cast<std::size_t>(k + s.M)] = sys.dress[static_cast<std::size_t>(k + s.M)] * (s.z_at(k) + s.zbar_at(-k));
    return phi;
}

void check_state(const TruncatedSystem& sys, const FourierState& s) {
    if (s.M != sys.M || s.z.size() != s.zbar.size()) throw ShapeError("torus_lab: state truncation differs from the system");
}

int ipow(int b, int e) {
    int r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

long double reduce_phase(long double x) {
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    x = std::fmod(x, two_pi);
    return x < 0 ? x + two_pi : x;
}

}  // namespace

TruncatedSystem TruncatedSystem::kg(double c, int M) {
    if (!(c > 0.0)) throw DomainError("TruncatedSystem: c must be positive");
    if (M < 0) throw ShapeError("TruncatedSystem: negative truncation");
    TruncatedSystem s;
    s.kind = SystemKind::KG;
    s.c = c;
    s.M = M;
    const FrequencyTable f(c, M);
    for (int j = -M; j <= M; ++j) {
        s.lin.push_back(f.lambda(j));
        s.nu.push_back(f.nu(j));
        s.dress.push_back(1.0 / std::sqrt(f.w(j)));
    }
    return s;
}

TruncatedSystem TruncatedSystem::nls(int M) {
    if (M < 0) throw ShapeError("TruncatedSystem: negative truncation");
    TruncatedSystem s;
    s.kind = SystemKind::NLS;
    s.M = M;
    for (int j = -M; j <= M; ++j) {
        s.lin.push_back(0.5 * j * j);
        s.nu.push_back(0.5 * j * j);
        s.dress.push_back(1.0);
    }
    return s;
}

double TruncatedSystem::fastest() const { return *std::max_element(lin.begin(), lin.end()); }

FourierState nonlinear_rhs(const TruncatedSystem& sys, const FourierState& s) {
    check_state(sys, s);
    const int M = s.M;
    FourierState out(M);
    if (sys.coupling == 0.0) return out;
    if (sys.kind == SystemKind::KG) {
        const CVec phi = dressed_field(sys, s);
        const CVec phi2 = conv(phi, M, phi, M, 2 * M);
        const CVec phi3 = conv(phi2, 2 * M, phi, M, M);
        const double g = sys.coupling / (8.0 * kPi);
        for (int m = -M; m <= M; ++m) {
            const double d = sys.dress[static_cast<std::size_t>(m + M)];
            out.z_at(m) = -kI * g * d * phi3[static_cast<std::size_t>(m + M)];
            out.zbar_at(m) = kI * g * d * phi3[static_cast<std::size_t>(-m + M)];
        }
    } else {
        const CVec r = reversed_bar(s);
        const CVec zz = conv(s.z, M, s.z, M, 2 * M);
        const CVec zr = conv(s.z, M, r, M, 2 * M);
        const CVec a = conv(zz, 2 * M, r, M, M);
        const CVec b = conv(zr, 2 * M, r, M, M);
        const double g = sys.coupling * 3.0 / (8.0 * kPi);
        for (int m = -M; m <= M; ++m) {
            out.z_at(m) = -kI * g * a[static_cast<std::size_t>(m + M)];
            out.zbar_at(m) = kI * g * b[static_cast<std::size_t>(-m + M)];
        }
    }
    return out;
}

FourierState nonlinear_jvp(const TruncatedSystem& sys, const FourierState& s, const FourierState& ds) {
    check_state(sys, s);
    check_state(sys, ds);
    const int M = s.M;
    FourierState out(M);
    if (sys.coupling == 0.0) return out;
    if (sys.kind == SystemKind::KG) {
        const CVec phi = dressed_field(sys, s);
        const CVec dphi = dressed_field(sys, ds);
        const CVec phi2 = conv(phi, M, phi, M, 2 * M);
        const CVec d3 = conv(phi2, 2 * M, dphi, M, M);
        const double g = 3.0 * sys.coupling / (8.0 * kPi);
        for (int m = -M; m <= M; ++m) {
            const double d = sys.dress[static_cast<std::size_t>(m + M)];
            out.z_at(m) = -kI * g * d * d3[static_cast<std::size_t>(m + M)];
            out.zbar_at(m) = kI * g * d * d3[static_cast<std::size_t>(-m + M)];
        }
    } else {
        const CVec r = reversed_bar(s);
        const CVec dr = reversed_bar(ds);
        const CVec zz = conv(s.z, M, s.z, M, 2 * M);
        const CVec zdz = conv(s.z, M, ds.z, M, 2 * M);
        const CVec zr = conv(s.z, M, r, M, 2 * M);
        const CVec rr = conv(r, M, r, M, 2 * M);
        const CVec a1 = conv(zdz, 2 * M, r, M, M);
        const CVec a2 = conv(zz, 2 * M, dr, M, M);
        const CVec b1 = conv(rr, 2 * M, ds.z, M, M);
        const CVec b2 = conv(zr, 2 * M, dr, M, M);
        const double g = sys.coupling * 3.0 / (8.0 * kPi);
        for (int m = -M; m <= M; ++m) {
            const auto i = static_cast<std::size_t>(m + M);
            const auto k = static_cast<std::size_t>(-m + M);
            out.z_at(m) = -kI * g * (2.0 * a1[i] + a2[i]);
            out.zbar_at(m) = kI * g * (b1[k] + 2.0 * b2[k]);
        }
    }
    return out;
}

FourierState rhs(const TruncatedSystem& sys, const FourierState& s) {
    FourierState out = nonlinear_rhs(sys, s);
    for (int j = -s.M; j <= s.M; ++j) {
        const double l = sys.lin[static_cast<std::size_t>(j + s.M)];
        out.z_at(j) += -kI * l * s.z_at(j);
        out.zbar_at(j) += kI * l * s.zbar_at(j);
    }
    return out;
}

FourierState kg_rhs(const TruncatedSystem& sys, const FourierState& s) {
    if (sys.kind != SystemKind::KG) throw DomainError("kg_rhs: system is not Klein-Gordon");
    return rhs(sys, s);
}

FourierState nls_rhs(const TruncatedSystem& sys, const FourierState& s) {
    if (sys.kind != SystemKind::NLS) throw DomainError("nls_rhs: system is not NLS");
    return rhs(sys, s);
}

cplx hamiltonian(const TruncatedSystem& sys, const FourierState& s) {
    check_state(sys, s);
    const int M = s.M;
    cplx quad{};
    for (int j = -M; j <= M; ++j) quad += sys.lin[static_cast<std::size_t>(j + M)] * s.z_at(j) * s.zbar_at(j);
    cplx quart{};
    if (sys.kind == SystemKind::KG) {
        const CVec phi = dressed_field(sys, s);
        const CVec phi2 = conv(phi, M, phi, M, 2 * M);
        for (int k = -2 * M; k <= 2 * M; ++k) quart += phi2[static_cast<std::size_t>(k + 2 * M)] * phi2[static_cast<std::size_t>(-k + 2 * M)];
        quart /= 32.0 * kPi;
    } else {
        const CVec r = reversed_bar(s);
        const CVec zz = conv(s.z, M, s.z, M, 2 * M);
        const CVec rr = conv(r, M, r, M, 2 * M);
        for (int k = -2 * M; k <= 2 * M; ++k) quart += zz[static_cast<std::size_t>(k + 2 * M)] * rr[static_cast<std::size_t>(-k + 2 * M)];
        quart *= 6.0 / (32.0 * kPi);
    }
    return quad + sys.coupling * quart;
}

double mass(const FourierState& s) {
    CompensatedSum acc;
    for (std::size_t k = 0; k < s.z.size(); ++k) acc.add((s.z[k] * s.zbar[k]).real());
    return acc.value();
}

double momentum(const FourierState& s) {
    CompensatedSum acc;
    for (int j = -s.M; j <= s.M; ++j) acc.add(j * (s.z_at(j) * s.zbar_at(j)).real());
    return acc.value();
}

SimulationRecord integrate(const TruncatedSystem& sys, const FourierState& z0, double T, const IntegrateOptions& opts) {
    check_state(sys, z0);
    if (!(T >= 0.0)) throw DomainError("integrate: negative horizon");
    const double lmax = sys.fastest();
    double dt = opts.dt > 0.0 ? opts.dt : (lmax > 0.0 ? 0.05 / lmax : 0.05);
    SimulationRecord rec;
    if (dt * lmax > 0.1) {
        if (opts.strict) throw DomainError("integrate: dt * lambda_M exceeds 0.1");
        rec.warnings.push_back("dt * lambda_M exceeds 0.1");
    }
    const std::size_t steps = T > 0.0 ? static_cast<std::size_t>(std::ceil(T / dt - 1e-9)) : 0;
    if (steps > 0) dt = T / static_cast<double>(steps);
    rec.dt = dt;

    const int M = sys.M;
    std::vector<cplx> rot(static_cast<std::size_t>(2 * M + 1));
    for (int j = -M; j <= M; ++j) rot[static_cast<std::size_t>(j + M)] = std::exp(-kI * sys.lin[static_cast<std::size_t>(j + M)] * (0.5 * dt));

    auto record = [&](double t, const FourierState& s) {
        rec.times.push_back(t);
        rec.states.push_back(s);
        rec.energy.push_back(hamiltonian(sys, s).real());
        rec.mass.push_back(mass(s));
        rec.momentum.push_back(momentum(s));
    };
    auto rotate = [&](FourierState& s) {
        for (std::size_t k = 0; k < s.z.size(); ++k) {
            s.z[k] *= rot[k];
            s.zbar[k] *= std::conj(rot[k]);
        }
    };
    auto axpy = [](const FourierState& a, double h, const FourierState& b) {
        FourierState r = a;
        for (std::size_t k = 0; k < r.z.size(); ++k) {
            r.z[k] += h * b.z[k];
            r.zbar[k] += h * b.zbar[k];
        }
        return r;
    };

    FourierState s = z0;
    record(0.0, s);
    const std::size_t every = std::max<std::size_t>(1, opts.record_every);
    for (std::size_t n = 1; n <= steps; ++n) {
        rotate(s);
        const FourierState k1 = nonlinear_rhs(sys, s);
        const FourierState k2 = nonlinear_rhs(sys, axpy(s, 0.5 * dt, k1));
        const FourierState k3 = nonlinear_rhs(sys, axpy(s, 0.5 * dt, k2));
        const FourierState k4 = nonlinear_rhs(sys, axpy(s, dt, k3));
        for (std::size_t k = 0; k < s.z.size(); ++k) {
            s.z[k] += dt / 6.0 * (k1.z[k] + 2.0 * k2.z[k] + 2.0 * k3.z[k] + k4.z[k]);
            s.zbar[k] += dt / 6.0 * (k1.zbar[k] + 2.0 * k2.zbar[k] + 2.0 * k3.zbar[k] + k4.zbar[k]);
        }
        rotate(s);
        if (n % every == 0 || n == steps) record(static_cast<double>(n) * dt, s);
    }
    return rec;
}

FourierState flow_time1(const PolyHamiltonian& G, const FourierState& z, double tol) {
    namespace ode = boost::numeric::odeint;
    using State = std::vector<cplx>;
    if (G.empty()) return z;
    const int M = z.M;
    const std::size_t n = z.z.size();
    State x(2 * n);
    std::copy(z.z.begin(), z.z.end(), x.begin());
    std::copy(z.zbar.begin(), z.zbar.end(), x.begin() + static_cast<std::ptrdiff_t>(n));
    auto f = [&](const State& y, State& dy, double) {
        FourierState s(M);
        std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), s.z.begin());
        std::copy(y.begin() + static_cast<std::ptrdiff_t>(n), y.end(), s.zbar.begin());
        for (const auto& v : y)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || std::abs(v) > 1e3)
                throw DivergenceError("flow_time1: trajectory left the analyticity ball");
        const FourierState X = vector_field(G, s);
        std::copy(X.z.begin(), X.z.end(), dy.begin());
        std::copy(X.zbar.begin(), X.zbar.end(), dy.begin() + static_cast<std::ptrdiff_t>(n));
    };
    ode::integrate_adaptive(ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<State>()), f, x, 0.0, 1.0, 1e-2);
    FourierState out(M);
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), out.z.begin());
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(n), x.end(), out.zbar.begin());
    return out;
}

FourierState normal_form_torus(const Eigen::VectorXd& xi, const std::vector<int>& J, const Eigen::VectorXd& theta,
                               const PolyHamiltonian& G, int M, double tol) {
    if (xi.size() != static_cast<Eigen::Index>(J.size()) || theta.size() != xi.size())
        throw ShapeError("normal_form_torus: xi, theta and J differ in length");
    FourierState z(M);
    for (std::size_t k = 0; k < J.size(); ++k) {
        if (J[k] < -M || J[k] > M) throw ShapeError("normal_form_torus: tangential index outside the truncation");
        if (!(xi[static_cast<Eigen::Index>(k)] > 0.0)) throw DomainError("normal_form_torus: actions must be positive");
        const cplx v = std::sqrt(xi[static_cast<Eigen::Index>(k)]) * std::exp(kI * theta[static_cast<Eigen::Index>(k)]);
        z.z_at(J[k]) = v;
        z.zbar_at(J[k]) = std::conj(v);
    }
    return flow_time1(G, z, tol);
}

namespace {

double diff_norm(const FourierState& a, const FourierState& b, const SpaceParams& params) {
    FourierState d(a.M);
    for (std::size_t k = 0; k < d.z.size(); ++k) {
        d.z[k] = a.z[k] - b.z[k];
        d.zbar[k] = a.zbar[k] - b.zbar[k];
    }
    return weighted_norm(d, params, FrequencyTable(1.0, a.M));
}

}  // namespace

double normal_form_displacement(const PolyHamiltonian& G, const Eigen::VectorXd& xi, const std::vector<int>& J,
                                const Eigen::VectorXd& theta, int M, const SpaceParams& params) {
    if (params.beta != 0.0) throw UnsupportedError("normal_form_displacement: beta weights are not supported");
    const FourierState z0 = normal_form_torus(xi, J, theta, PolyHamiltonian{}, M);
    return diff_norm(normal_form_torus(xi, J, theta, G, M), z0, params);
}

double normal_form_map_difference(const PolyHamiltonian& Ga, const PolyHamiltonian& Gb, const Eigen::VectorXd& xi,
                                  const std::vector<int>& J, const Eigen::VectorXd& theta, int M, const SpaceParams& params) {
    if (params.beta != 0.0) throw UnsupportedError("normal_form_map_difference: beta weights are not supported");
    return diff_norm(normal_form_torus(xi, J, theta, Ga, M), normal_form_torus(xi, J, theta, Gb, M), params);
}

int TorusEmbedding::harmonics() const { return ipow(2 * Q + 1, N()); }

std::vector<int> TorusEmbedding::harmonic(int col) const {
    std::vector<int> q(J.size());
    for (std::size_t i = 0; i < J.size(); ++i) {
        q[i] = col % (2 * Q + 1) - Q;
        col /= 2 * Q + 1;
    }
    return q;
}

int TorusEmbedding::column(const std::vector<int>& q) const {
    int col = 0;
    for (std::size_t i = q.size(); i-- > 0;) {
        if (std::abs(q[i]) > Q) return -1;
        col = col * (2 * Q + 1) + (q[i] + Q);
    }
    return col;
}

FourierState TorusEmbedding::at(const Eigen::VectorXd& theta) const {
    if (theta.size() != N()) throw ShapeError("TorusEmbedding: angle vector has wrong dimension");
    FourierState s(M);
    const int C = harmonics();
    std::vector<cplx> ph(static_cast<std::size_t>(C));
    for (int col = 0; col < C; ++col) {
        const auto q = harmonic(col);
        double a = 0.0;
        for (int i = 0; i < N(); ++i) a += q[static_cast<std::size_t>(i)] * theta[i];
        ph[static_cast<std::size_t>(col)] = std::exp(-kI * a);
    }
    for (int n = -M; n <= M; ++n) {
        cplx v{};
        for (int col = 0; col < C; ++col) v += coef(n + M, col) * ph[static_cast<std::size_t>(col)];
        s.z_at(n) = v;
        s.zbar_at(n) = std::conj(v);
    }
    return s;
}

TorusEmbedding TorusEmbedding::shifted(const Eigen::VectorXd& phi) const {
    if (phi.size() != N()) throw ShapeError("TorusEmbedding: shift has wrong dimension");
    TorusEmbedding out = *this;
    for (int col = 0; col < harmonics(); ++col) {
        const auto q = harmonic(col);
        double a = 0.0;
        for (int i = 0; i < N(); ++i) a += q[static_cast<std::size_t>(i)] * phi[i];
        out.coef.col(col) *= std::exp(-kI * a);
    }
    return out;
}

Eigen::VectorXd normal_form_frequency(const TruncatedSystem& sys, const std::vector<int>& J, const Eigen::VectorXd& xi) {
    const auto N = static_cast<Eigen::Index>(J.size());
    if (xi.size() != N) throw ShapeError("normal_form_frequency: xi and J differ in length");
    Eigen::VectorXd om(N);
    for (Eigen::Index k = 0; k < N; ++k) {
        const auto jk = static_cast<std::size_t>(J[static_cast<std::size_t>(k)] + sys.M);
        double v = sys.nu[jk];
        for (Eigen::Index i = 0; i < N; ++i) {
            const auto ji = static_cast<std::size_t>(J[static_cast<std::size_t>(i)] + sys.M);
            const double Nij = 3.0 / (8.0 * kPi) * (i == k ? 1.0 : 2.0);
            v += sys.coupling * Nij * xi[i] * sys.dress[ji] * sys.dress[ji] * sys.dress[jk] * sys.dress[jk];
        }
        om[k] = v;
    }
    return om;
}

namespace {

void check_J(const TruncatedSystem& sys, const std::vector<int>& J, const Eigen::VectorXd& xi, int Q) {
    if (J.empty()) throw DomainError("torus: empty tangential set");
    if (xi.size() != static_cast<Eigen::Index>(J.size())) throw ShapeError("torus: xi and J differ in length");
    if (Q < 1) throw DomainError("torus: need at least one harmonic");
    for (std::size_t k = 0; k < J.size(); ++k) {
        if (J[k] < -sys.M || J[k] > sys.M) throw ShapeError("torus: tangential index outside the truncation");
        if (!(xi[static_cast<Eigen::Index>(k)] > 0.0)) throw DomainError("torus: actions must be positive");
    }
}

// Angle grid with 2Q+1 points per dimension.
std::vector<Eigen::VectorXd> angle_grid(int N, int Q) {
    const int P = 2 * Q + 1;
    const int total = ipow(P, N);
    std::vector<Eigen::VectorXd> g;
    g.reserve(static_cast<std::size_t>(total));
    for (int idx = 0; idx < total; ++idx) {
        Eigen::VectorXd th(N);
        int r = idx;
        for (int i = 0; i < N; ++i) {
            th[i] = 2.0 * kPi * (r % P) / P;
            r /= P;
        }
        g.push_back(th);
    }
    return g;
}

// e^{+i q.theta_p} / P^N, rows grid points, columns harmonics.
Eigen::MatrixXcd dft_matrix(const TorusEmbedding& e, const std::vector<Eigen::VectorXd>& grid) {
    const int C = e.harmonics();
    Eigen::MatrixXcd D(static_cast<Eigen::Index>(grid.size()), C);
    for (std::size_t p = 0; p < grid.size(); ++p)
        for (int col = 0; col < C; ++col) {
            const auto q = e.harmonic(col);
            double a = 0.0;
            for (int i = 0; i < e.N(); ++i) a += q[static_cast<std::size_t>(i)] * grid[p][i];
            D(static_cast<Eigen::Index>(p), col) = std::exp(kI * a) / static_cast<double>(grid.size());
        }
    return D;
}

double divisor_nq(const TorusEmbedding& e, const TruncatedSystem& sys, int n, const std::vector<int>& q) {
    int sq = 0;
    double wq = 0.0;
    for (int i = 0; i < e.N(); ++i) {
        sq += q[static_cast<std::size_t>(i)];
        wq += q[static_cast<std::size_t>(i)] * e.omega_hat[i];
    }
    return sys.shift() * (sq - 1) + (wq - sys.nu[static_cast<std::size_t>(n + sys.M)]);
}

// rho(n, q) = d(n, q) c(n, q) - i DFT(N_z(U))
Eigen::MatrixXcd residual_matrix(const TorusEmbedding& e, const TruncatedSystem& sys, const std::vector<Eigen::VectorXd>& grid,
                                 const Eigen::MatrixXcd& D, std::vector<FourierState>* states = nullptr) {
    const int R = 2 * e.M + 1;
    Eigen::MatrixXcd Nz(static_cast<Eigen::Index>(grid.size()), R);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const FourierState s = e.at(grid[p]);
        const FourierState f = nonlinear_rhs(sys, s);
        for (int r = 0; r < R; ++r) Nz(static_cast<Eigen::Index>(p), r) = f.z[static_cast<std::size_t>(r)];
        if (states) states->push_back(s);
    }
    Eigen::MatrixXcd rho = -kI * (D.transpose() * Nz).transpose();  // R x C
    for (int col = 0; col < e.harmonics(); ++col) {
        const auto q = e.harmonic(col);
        for (int n = -e.M; n <= e.M; ++n) rho(n + e.M, col) += divisor_nq(e, sys, n, q) * e.coef(n + e.M, col);
    }
    return rho;
}

}  // namespace

TorusEmbedding linear_seed(const TruncatedSystem& sys, const std::vector<int>& J, const Eigen::VectorXd& xi, int Q) {
    check_J(sys, J, xi, Q);
    TorusEmbedding e;
    e.J = J;
    e.M = sys.M;
    e.Q = Q;
    e.xi = xi;
    e.omega_hat = normal_form_frequency(sys, J, xi);
    e.coef = Eigen::MatrixXcd::Zero(2 * sys.M + 1, e.harmonics());
    for (int k = 0; k < e.N(); ++k) {
        std::vector<int> q(J.size(), 0);
        q[static_cast<std::size_t>(k)] = 1;
        e.coef(J[static_cast<std::size_t>(k)] + sys.M, e.column(q)) = std::sqrt(xi[k]);
    }
    return e;
}

TorusEmbedding normal_form_seed(const TruncatedSystem& sys, const std::vector<int>& J, const Eigen::VectorXd& xi, int Q,
                                const PolyHamiltonian& G) {
    TorusEmbedding e = linear_seed(sys, J, xi, Q);
    const auto grid = angle_grid(e.N(), Q);
    const Eigen::MatrixXcd D = dft_matrix(e, grid);
    Eigen::MatrixXcd Z(static_cast<Eigen::Index>(grid.size()), 2 * sys.M + 1);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const FourierState s = normal_form_torus(xi, J, -grid[p], G, sys.M);
        for (int r = 0; r < 2 * sys.M + 1; ++r) Z(static_cast<Eigen::Index>(p), r) = s.z[static_cast<std::size_t>(r)];
    }
    e.coef = (D.transpose() * Z).transpose();
    return e;
}

double invariance_defect(const TorusEmbedding& emb, const TruncatedSystem& sys) {
    if (emb.M != sys.M) throw ShapeError("invariance_defect: truncation mismatch");
    const auto grid = angle_grid(emb.N(), emb.Q);
    return residual_matrix(emb, sys, grid, dft_matrix(emb, grid)).cwiseAbs().maxCoeff();
}

RefineReport refine_torus(const TorusEmbedding& seed, const TruncatedSystem& sys, const RefineOptions& opts) {
    if (seed.M != sys.M) throw ShapeError("refine_torus: truncation mismatch");
    RefineReport rep;
    rep.torus = seed;
    TorusEmbedding& e = rep.torus;
    const int N = e.N();
    const int R = 2 * e.M + 1;
    const int C = e.harmonics();
    const bool free_omega = opts.mode == TorusMode::FixedAmplitude;
    const auto grid = angle_grid(N, e.Q);
    const Eigen::MatrixXcd D = dft_matrix(e, grid);
    const Eigen::Index nunk = 2 * R * C + (free_omega ? N : 0);
    const Eigen::Index neq = 2 * R * C + N + (free_omega ? N : 0);
    const auto P = static_cast<Eigen::Index>(grid.size());

    std::vector<int> anchor(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
        std::vector<int> q(static_cast<std::size_t>(N), 0);
        q[static_cast<std::size_t>(k)] = 1;
        anchor[static_cast<std::size_t>(k)] = e.column(q);
    }

    TorusEmbedding prev = e;
    for (int it = 0;; ++it) {
        std::vector<FourierState> states;
        const Eigen::MatrixXcd rho = residual_matrix(e, sys, grid, D, &states);
        const double defect = rho.cwiseAbs().maxCoeff();
        rep.history.push_back(defect);
        if (!std::isfinite(defect)) {
            rep.message = "defect is not finite";
            return rep;
        }
        const std::size_t h = rep.history.size();
        if (h >= 2 && rep.history[h - 2] < opts.basin && defect > rep.history[h - 2]) {
            if (rep.converged) {
                // polishing step made things worse: keep the previous iterate
                rep.history.pop_back();
                e = prev;
                return rep;
            }
            rep.message = "defect increased inside the basin";
        }
        if (rep.converged) return rep;
        if (defect < opts.tol) rep.converged = true;  // one more polishing step
        if (it >= opts.max_iter) {
            if (!rep.converged) rep.message = "no convergence within max_iter";
            return rep;
        }

        // row scaling keeps the c^2-sized divisors from dominating
        Eigen::MatrixXd scale(R, C);
        for (int col = 0; col < C; ++col) {
            const auto q = e.harmonic(col);
            for (int n = -e.M; n <= e.M; ++n) scale(n + e.M, col) = 1.0 / std::max(1.0, std::abs(divisor_nq(e, sys, n, q)));
        }

        // per grid point: dN_z/dz and dN_z/dzbar
        std::vector<Eigen::MatrixXcd> Jz(static_cast<std::size_t>(P)), Jb(static_cast<std::size_t>(P));
        for (Eigen::Index p = 0; p < P; ++p) {
            Jz[static_cast<std::size_t>(p)].resize(R, R);
            Jb[static_cast<std::size_t>(p)].resize(R, R);
            for (int r = 0; r < R; ++r) {
                FourierState dz(e.M);
                dz.z[static_cast<std::size_t>(r)] = 1.0;
                const FourierState a = nonlinear_jvp(sys, states[static_cast<std::size_t>(p)], dz);
                FourierState db(e.M);
                db.zbar[static_cast<std::size_t>(r)] = 1.0;
                const FourierState b = nonlinear_jvp(sys, states[static_cast<std::size_t>(p)], db);
                for (int s = 0; s < R; ++s) {
                    Jz[static_cast<std::size_t>(p)](s, r) = a.z[static_cast<std::size_t>(s)];
                    Jb[static_cast<std::size_t>(p)](s, r) = b.z[static_cast<std::size_t>(s)];
                }
            }
        }

        Eigen::MatrixXd Jac = Eigen::MatrixXd::Zero(neq, nunk);
        Eigen::VectorXd rhs_vec = Eigen::VectorXd::Zero(neq);
        auto row_of = [&](int r, int col) { return 2 * (static_cast<Eigen::Index>(col) * R + r); };
        for (int col = 0; col < C; ++col)
            for (int r = 0; r < R; ++r) {
                const Eigen::Index row = row_of(r, col);
                rhs_vec[row] = scale(r, col) * rho(r, col).real();
                rhs_vec[row + 1] = scale(r, col) * rho(r, col).imag();
            }

        // column for unknown (r0, col0, part): delta U_z(p) = dc e^{-i q0 theta_p}, delta U_zbar = conj
        Eigen::MatrixXcd dN(P, R);
        for (int col0 = 0; col0 < C; ++col0) {
            const auto q0 = e.harmonic(col0);
            const auto qd = divisor_nq(e, sys, 0, q0) + sys.nu[static_cast<std::size_t>(e.M)];  // divisor without nu_n
            for (int r0 = 0; r0 < R; ++r0)
                for (int part = 0; part < 2; ++part) {
                    const cplx dc = part == 0 ? cplx{1.0, 0.0} : kI;
                    for (Eigen::Index p = 0; p < P; ++p) {
                        // D(p, col0) = e^{+i q0 theta_p} / P
                        const cplx e_plus = D(p, col0) * static_cast<double>(P);
                        const cplx e_minus = std::conj(e_plus);
                        dN.row(p) = (Jz[static_cast<std::size_t>(p)].col(r0) * (dc * e_minus) +
                                     Jb[static_cast<std::size_t>(p)].col(r0) * (std::conj(dc) * e_plus))
                                        .transpose();
                    }
                    Eigen::MatrixXcd drho = -kI * (D.transpose() * dN).transpose();
                    drho(r0, col0) += (qd - sys.nu[static_cast<std::size_t>(r0)]) * dc;
                    const Eigen::Index ucol = row_of(r0, col0) + part;
                    for (int col = 0; col < C; ++col)
                        for (int r = 0; r < R; ++r) {
                            const Eigen::Index row = row_of(r, col);
                            Jac(row, ucol) = scale(r, col) * drho(r, col).real();
                            Jac(row + 1, ucol) = scale(r, col) * drho(r, col).imag();
                        }
                }
        }
        if (free_omega)
            for (int i = 0; i < N; ++i) {
                const Eigen::Index ucol = 2 * R * C + i;
                for (int col = 0; col < C; ++col) {
                    const int qi = e.harmonic(col)[static_cast<std::size_t>(i)];
                    for (int r = 0; r < R; ++r) {
                        const cplx d = static_cast<double>(qi) * e.coef(r, col);
                        Jac(row_of(r, col), ucol) = scale(r, col) * d.real();
                        Jac(row_of(r, col) + 1, ucol) = scale(r, col) * d.imag();
                    }
                }
            }
        // phase and amplitude conditions on the anchor coefficients
        for (int k = 0; k < N; ++k) {
            const int r = e.J[static_cast<std::size_t>(k)] + e.M;
            const int col = anchor[static_cast<std::size_t>(k)];
            const Eigen::Index row = 2 * R * C + k;
            Jac(row, row_of(r, col) + 1) = 1.0;
            rhs_vec[row] = e.coef(r, col).imag();
            if (free_omega) {
                const Eigen::Index row2 = 2 * R * C + N + k;
                Jac(row2, row_of(r, col)) = 1.0;
                rhs_vec[row2] = e.coef(r, col).real() - std::sqrt(e.xi[k]);
            }
        }

        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Jac);
        if (qr.rank() < nunk) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(Jac);
            rep.smallest_singular_value = svd.singularValues().minCoeff();
            rep.message = "singular collocation matrix";
            return rep;
        }
        const Eigen::VectorXd step = qr.solve(rhs_vec);
        prev = e;
        for (int col = 0; col < C; ++col)
            for (int r = 0; r < R; ++r) e.coef(r, col) -= cplx(step[row_of(r, col)], step[row_of(r, col) + 1]);
        if (free_omega)
            for (int i = 0; i < N; ++i) e.omega_hat[i] -= step[2 * R * C + i];
        ++rep.iterations;
    }
}

FourierState torus_state(const TorusEmbedding& emb, const TruncatedSystem& sys, const Eigen::VectorXd& theta0, double t) {
    if (theta0.size() != emb.N()) throw ShapeError("torus_state: angle vector has wrong dimension");
    Eigen::VectorXd th(emb.N());
    for (int i = 0; i < emb.N(); ++i) {
        const long double om = static_cast<long double>(sys.shift()) + static_cast<long double>(emb.omega_hat[i]);
        th[i] = static_cast<double>(reduce_phase(static_cast<long double>(theta0[i]) + om * static_cast<long double>(t)));
    }
    return emb.at(th);
}

namespace {

// e^{i shift t} z(t) evaluated harmonic by harmonic so that the c^2 phases cancel exactly.
FourierState gauged_torus_state(const TorusEmbedding& e, const TruncatedSystem& sys, const Eigen::VectorXd& theta0, double t) {
    FourierState s(e.M);
    const long double lt = t;
    for (int col = 0; col < e.harmonics(); ++col) {
        const auto q = e.harmonic(col);
        long double ph = 0.0L;
        int sq = 0;
        for (int i = 0; i < e.N(); ++i) {
            ph += q[static_cast<std::size_t>(i)] * (static_cast<long double>(theta0[i]) + static_cast<long double>(e.omega_hat[i]) * lt);
            sq += q[static_cast<std::size_t>(i)];
        }
        ph += static_cast<long double>(sq - 1) * static_cast<long double>(sys.shift()) * lt;
        const cplx f = std::exp(-kI * static_cast<double>(reduce_phase(ph)));
        for (int n = -e.M; n <= e.M; ++n) s.z_at(n) += e.coef(n + e.M, col) * f;
    }
    for (std::size_t k = 0; k < s.z.size(); ++k) s.zbar[k] = std::conj(s.z[k]);
    return s;
}

double state_distance(const FourierState& a, const FourierState& b, const SpaceParams& params, double sigma) {
    SpaceParams q = params;
    q.p = params.p - 4.0 * sigma;
    FourierState d(a.M);
    for (std::size_t k = 0; k < d.z.size(); ++k) {
        d.z[k] = a.z[k] - b.z[k];
        d.zbar[k] = a.zbar[k] - b.zbar[k];
    }
    return weighted_norm(d, q, FrequencyTable(1.0, a.M));
}

}  // namespace

DistanceTrace gauge_distance(const SimulationRecord& kg, const SimulationRecord& nls, double c, const SpaceParams& params,
                             double sigma) {
    if (kg.times.size() != nls.times.size()) throw DomainError("gauge_distance: time grids differ");
    if (params.beta != 0.0) throw UnsupportedError("gauge_distance: beta weights are not supported");
    DistanceTrace tr;
    for (std::size_t i = 0; i < kg.times.size(); ++i) {
        const double t = kg.times[i];
        if (std::abs(t - nls.times[i]) > 1e-12 * std::max(1.0, std::abs(t))) throw DomainError("gauge_distance: time grids differ");
        FourierState g = kg.states[i];
        if (g.M != nls.states[i].M) throw ShapeError("gauge_distance: truncations differ");
        const cplx f = std::exp(kI * static_cast<double>(reduce_phase(static_cast<long double>(c) * c * t)));
        for (std::size_t k = 0; k < g.z.size(); ++k) {
            g.z[k] *= f;
            g.zbar[k] *= std::conj(f);
        }
        const double d = state_distance(g, nls.states[i], params, sigma);
        tr.times.push_back(t);
        tr.values.push_back(d);
        tr.sup = std::max(tr.sup, d);
    }
    return tr;
}

DistanceTrace torus_gauge_distance(const TorusEmbedding& kg, const TruncatedSystem& kg_sys, const TorusEmbedding& nls,
                                   const TruncatedSystem& nls_sys, const Eigen::VectorXd& theta0, double T,
                                   std::size_t samples, const SpaceParams& params, double sigma) {
    if (kg.M != nls.M) throw ShapeError("torus_gauge_distance: truncations differ");
    if (samples < 2) throw DomainError("torus_gauge_distance: need at least two samples");
    DistanceTrace tr;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(samples - 1);
        const double d = state_distance(gauged_torus_state(kg, kg_sys, theta0, t), gauged_torus_state(nls, nls_sys, theta0, t), params, sigma);
        tr.times.push_back(t);
        tr.values.push_back(d);
        tr.sup = std::max(tr.sup, d);
    }
    return tr;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need at least two matching points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("loglog_slope: non-positive data");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScalingReport scaling_study(double R, const std::vector<double>& c_list, const std::vector<double>& sigmas,
                            const ScalingOptions& opts) {
    if (!(R > 0.0 && R < 1.0)) throw DomainError("scaling_study: R outside (0,1)");
    for (double s : sigmas)
        if (!(s >= 0.0 && s <= 1.0)) throw DomainError("scaling_study: sigma outside [0,1]");
    ScalingReport rep;
    rep.R = R;
    rep.sigmas = sigmas;
    const auto N = static_cast<Eigen::Index>(opts.J.size());
    const Eigen::VectorXd xi = Eigen::VectorXd::Constant(N, R * R);

    const TruncatedSystem nls_sys = TruncatedSystem::nls(opts.M);
    const RefineReport nls = refine_torus(linear_seed(nls_sys, opts.J, xi, opts.Q), nls_sys, {TorusMode::FixedAmplitude});
    const double c_adm = std::pow(R, -73.0 / 72.0);
    const Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(N);

    struct Cell {
        bool admissible = false, converged = false;
        double kg_defect = 0.0;
        std::vector<double> dist;
    };
    std::vector<Cell> cells(c_list.size());
    auto work = [&](std::size_t i) {
        const double c = c_list[i];
        Cell& cell = cells[i];
        cell.admissible = c >= c_adm;
        if (!cell.admissible) return;
        const TruncatedSystem kg_sys = TruncatedSystem::kg(c, opts.M);
        // invert the first-order frequency map at the NLS frequency
        Eigen::MatrixXd A(N, N);
        Eigen::VectorXd base = normal_form_frequency(kg_sys, opts.J, Eigen::VectorXd::Zero(N));
        for (Eigen::Index k = 0; k < N; ++k) {
            Eigen::VectorXd ek = Eigen::VectorXd::Zero(N);
            ek[k] = 1.0;
            A.col(k) = normal_form_frequency(kg_sys, opts.J, ek) - base;
        }
        Eigen::VectorXd xi_kg = A.lu().solve(nls.torus.omega_hat - base);
        if ((xi_kg.array() <= 0.0).any()) return;
        TorusEmbedding seed = linear_seed(kg_sys, opts.J, xi_kg, opts.Q);
        seed.omega_hat = nls.torus.omega_hat;
        const RefineReport kg = refine_torus(seed, kg_sys, {TorusMode::FixedFrequency});
        cell.converged = kg.converged && nls.converged;
        cell.kg_defect = kg.history.empty() ? 0.0 : kg.history.back();
        for (double s : sigmas)
            cell.dist.push_back(
                torus_gauge_distance(kg.torus, kg_sys, nls.torus, nls_sys, theta0, opts.T, opts.samples, opts.params, s).sup);
    };
    if (opts.workers <= 1) {
        for (std::size_t i = 0; i < c_list.size(); ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < opts.workers; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t i = static_cast<std::size_t>(t); i < c_list.size(); i += static_cast<std::size_t>(opts.workers)) work(i);
            });
        for (auto& th : pool) th.join();
    }

    for (std::size_t si = 0; si < sigmas.size(); ++si) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < c_list.size(); ++i) {
            ScalingRow row;
            row.c = c_list[i];
            row.sigma = sigmas[si];
            row.admissible = cells[i].admissible;
            row.converged = cells[i].converged;
            row.kg_defect = cells[i].kg_defect;
            row.nls_defect = nls.history.empty() ? 0.0 : nls.history.back();
            if (row.admissible) row.predicted = predicted_bounds(R, row.c, row.sigma).distance;
            if (!cells[i].dist.empty()) row.distance = cells[i].dist[si];
            if (row.admissible && row.converged && row.distance > 0.0) {
                xs.push_back(row.c);
                ys.push_back(row.distance);
            }
            rep.rows.push_back(row);
        }
        rep.slopes.push_back(xs.size() >= 2 ? loglog_slope(xs, ys) : std::nan(""));
    }
    return rep;
}

void write_frames(const SimulationRecord& rec, std::ostream& os) {
    const std::int32_t M = rec.states.empty() ? 0 : rec.states.front().M;
    const std::uint64_t count = rec.states.size();
    os.write(reinterpret_cast<const char*>(&M), sizeof M);
    os.write(reinterpret_cast<const char*>(&count), sizeof count);
    for (std::size_t i = 0; i < rec.states.size(); ++i) {
        os.write(reinterpret_cast<const char*>(&rec.times[i]), sizeof(double));
        const auto& s = rec.states[i];
        os.write(reinterpret_cast<const char*>(s.z.data()), static_cast<std::streamsize>(s.z.size() * sizeof(cplx)));
        os.write(reinterpret_cast<const char*>(s.zbar.data()), static_cast<std::streamsize>(s.zbar.size() * sizeof(cplx)));
    }
}

void write_scaling_csv(const ScalingReport& rep, std::ostream& os) {
    os << "R,c,sigma,distance,predicted,admissible,converged,kg_defect,nls_defect\n";
    char buf[256];
    for (const auto& r : rep.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%.3g,%.3g\n", rep.R, r.c, r.sigma, r.distance, r.predicted,
                      int(r.admissible), int(r.converged), r.kg_defect, r.nls_defect);
        os << buf;
    }
}

}  // namespace kgnls
