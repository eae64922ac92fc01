#pragma once

#include "kgnls/hamiltonian.hpp"
#include "kgnls/spectral_core.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace kgnls {

enum class SystemKind { KG, NLS };

struct TruncatedSystem {
    SystemKind kind = SystemKind::NLS;
    double c = 0.0;  // KG only
    int M = 0;
    double coupling = 1.0;     // 0 switches the cubic term off
    std::vector<double> lin;   // lambda_j (KG) or j^2/2 (NLS), index j + M
    std::vector<double> nu;    // lin minus the c^2 shift
    std::vector<double> dress; // w_j^(-1/2) (KG), 1 (NLS)

    static TruncatedSystem kg(double c, int M);
    static TruncatedSystem nls(int M);

    double shift() const { return kind == SystemKind::KG ? c * c : 0.0; }
    double fastest() const;
};

// Cubic part of the vector field only.
FourierState nonlinear_rhs(const TruncatedSystem& sys, const FourierState& s);
// Derivative of nonlinear_rhs at s along ds.
FourierState nonlinear_jvp(const TruncatedSystem& sys, const FourierState& s, const FourierState& ds);
FourierState kg_rhs(const TruncatedSystem& sys, const FourierState& s);
FourierState nls_rhs(const TruncatedSystem& sys, const FourierState& s);
FourierState rhs(const TruncatedSystem& sys, const FourierState& s);

cplx hamiltonian(const TruncatedSystem& sys, const FourierState& s);
double mass(const FourierState& s);      // Re sum z_j zbar_j
double momentum(const FourierState& s);  // Re sum j z_j zbar_j

struct IntegrateOptions {
    double dt = 0.0;            // 0: 0.05 / lambda_M
    std::size_t record_every = 1;
    bool strict = false;        // refuse steps with dt lambda_M > 0.1
};

struct SimulationRecord {
    std::vector<double> times;
    std::vector<FourierState> states;
    std::vector<double> energy;
    std::vector<double> mass;
    std::vector<double> momentum;
    std::vector<double> distance;
    double dt = 0.0;
    std::vector<std::string> warnings;
};

// Strang splitting: exact linear rotation, one RK4 step for the cubic flow.
SimulationRecord integrate(const TruncatedSystem& sys, const FourierState& z0, double T, const IntegrateOptions& opts = {});

// Time-1 flow of X_G (Dormand-Prince, tolerance tol).
FourierState flow_time1(const PolyHamiltonian& G, const FourierState& z, double tol = 1e-12);

// z_j = sqrt(xi_j) e^{i theta_j} on J pushed through the time-1 flow of G.
FourierState normal_form_torus(const Eigen::VectorXd& xi, const std::vector<int>& J, const Eigen::VectorXd& theta,
                               const PolyHamiltonian& G, int M, double tol = 1e-12);

// || T0(z) - z || and || T0_a(z) - T0_b(z) || on the torus point z_j = sqrt(xi_j) e^{i theta_j}.
double normal_form_displacement(const PolyHamiltonian& G, const Eigen::VectorXd& xi, const std::vector<int>& J,
                                const Eigen::VectorXd& theta, int M, const SpaceParams& params);
double normal_form_map_difference(const PolyHamiltonian& Ga, const PolyHamiltonian& Gb, const Eigen::VectorXd& xi,
                                  const std::vector<int>& J, const Eigen::VectorXd& theta, int M, const SpaceParams& params);

// z_n(theta) = sum_q coef(n, q) e^{-i q.theta}, zbar = conj(z).
struct TorusEmbedding {
    std::vector<int> J;
    int M = 0;
    int Q = 0;
    Eigen::VectorXd omega_hat;  // frequency minus the system's c^2 shift
    Eigen::MatrixXcd coef;      // rows n + M, columns harmonic index
    Eigen::VectorXd xi;         // target actions for the amplitude conditions

    int N() const { return static_cast<int>(J.size()); }
    int harmonics() const;
    std::vector<int> harmonic(int col) const;
    int column(const std::vector<int>& q) const;  // -1 when |q|_inf > Q
    FourierState at(const Eigen::VectorXd& theta) const;
    // rotate angles: coef(n,q) *= e^{-i q.phi}
    TorusEmbedding shifted(const Eigen::VectorXd& phi) const;
};

// Torus z_j = sqrt(xi_j) e^{-i theta_j} with the first-order normal-form frequency.
TorusEmbedding linear_seed(const TruncatedSystem& sys, const std::vector<int>& J, const Eigen::VectorXd& xi, int Q);
// Same actions and frequency, embedding sampled from normal_form_torus and transformed to harmonics.
TorusEmbedding normal_form_seed(const TruncatedSystem& sys, const std::vector<int>& J, const Eigen::VectorXd& xi, int Q,
                                const PolyHamiltonian& G);
// First-order frequency lambda_j + sum_i N_ij xi_i / (w_i w_j).
Eigen::VectorXd normal_form_frequency(const TruncatedSystem& sys, const std::vector<int>& J, const Eigen::VectorXd& xi);

enum class TorusMode { FixedAmplitude, FixedFrequency };

struct RefineOptions {
    TorusMode mode = TorusMode::FixedAmplitude;
    int max_iter = 25;
    double tol = 1e-10;
    double basin = 1e-4;  // monotone decrease is required below this defect
};

struct RefineReport {
    TorusEmbedding torus;
    bool converged = false;
    int iterations = 0;
    std::vector<double> history;  // defect before each step and after the last one
    double smallest_singular_value = -1.0;  // filled on failure
    std::string message;
};

// sup over (n, q) of the coefficient-space invariance residual.
double invariance_defect(const TorusEmbedding& emb, const TruncatedSystem& sys);
RefineReport refine_torus(const TorusEmbedding& seed, const TruncatedSystem& sys, const RefineOptions& opts = {});

// State at time t on the torus, angles theta0 + omega t with the phase reduced in long double.
FourierState torus_state(const TorusEmbedding& emb, const TruncatedSystem& sys, const Eigen::VectorXd& theta0, double t);

struct DistanceTrace {
    std::vector<double> times;
    std::vector<double> values;
    double sup = 0.0;
};
// || e^{i c^2 t} psi_kg - phi_nls || at exponent p - 4 sigma.
DistanceTrace gauge_distance(const SimulationRecord& kg, const SimulationRecord& nls, double c, const SpaceParams& params,
                             double sigma);
DistanceTrace torus_gauge_distance(const TorusEmbedding& kg, const TruncatedSystem& kg_sys, const TorusEmbedding& nls,
                                   const TruncatedSystem& nls_sys, const Eigen::VectorXd& theta0, double T,
                                   std::size_t samples, const SpaceParams& params, double sigma);

struct ScalingRow {
    double c = 0.0;
    double sigma = 0.0;
    double distance = 0.0;
    double predicted = 0.0;
    bool admissible = false;
    bool converged = false;
    double kg_defect = 0.0;
    double nls_defect = 0.0;
};
struct ScalingReport {
    double R = 0.0;
    std::vector<ScalingRow> rows;
    std::vector<double> sigmas;
    std::vector<double> slopes;  // fitted slope in log c per sigma
};
struct ScalingOptions {
    std::vector<int> J{1};
    int M = 8;
    int Q = 4;
    double T = 1000.0;
    std::size_t samples = 2001;
    SpaceParams params{};
    int workers = 1;
};
ScalingReport scaling_study(double R, const std::vector<double>& c_list, const std::vector<double>& sigmas,
                            const ScalingOptions& opts = {});

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_frames(const SimulationRecord& rec, std::ostream& os);
void write_scaling_csv(const ScalingReport& rep, std::ostream& os);

}  // namespace kgnls
