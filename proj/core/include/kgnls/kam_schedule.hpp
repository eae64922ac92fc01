#pragma once

#include <iosfwd>
#include <vector>

namespace kgnls {

struct ScheduleParams {
    int N = 3;
    double tau = 1.0;
    double varsigma = 1.0 / 36.0;
    double s0 = 2.0;
    double sigma0 = 2.0 / 40.0;
    double C1 = 1.0;
    double K1 = 0.0;  // 0: minimal K1 with K1^(tau+1) > 1/rho_star
    double r0 = 1e-3;
    double rho_star = 1e-2;

    double mu() const { return 2.0 * tau + N + 3.0; }
    double theta() const { return 0.5 - 3.0 * varsigma; }
    void validate() const;
};

struct Exponents {
    double a0 = 0.0;
    double a1 = 0.0;
    double theta = 0.0;
    double alpha0 = 0.0;
    double alpha1 = 0.0;
};
Exponents init_exponents(double varsigma, double r0);

// Minimal integer K1 with K1^(tau+1) > 1/rho.
double minimal_K1(double tau, double rho);

struct KamSchedule {
    // index nu = 0..nu_max
    std::vector<double> sigma, alpha, K, log_eps, eta, s, log_r;
    double tail_ratio = 0.0;  // sum_{nu>12} eta^3 / sum_{1<=nu<=12} eta^3

    std::size_t size() const { return sigma.size(); }
};

struct SmallnessReport {
    double ratio0 = 0.0;  // eps0 / alpha0
    double ratio1 = 0.0;  // eps1 / alpha1
    double rho_star = 0.0;
    bool passes = false;
    double R = 0.0;                 // r0^(2/3)
    double predicted_exponent = 0.0;  // eps0/alpha0 ~ R^(1/2 - 9 varsigma/2) when eps0 ~ r0^2
    double predicted_ratio0 = 0.0;
};

// eps1 < 0 seeds eps1 = (eps0/alpha0)^(1/3) eps0.
SmallnessReport smallness_check(const ScheduleParams& p, double eps0, double eps1 = -1.0);
KamSchedule generate(const ScheduleParams& p, double eps0, double eps1 = -1.0, int nu_max = 12);

// Asymptotic growth of log eps from second differences over [nu_lo, nu_hi].
double log_growth_factor(const KamSchedule& s, int nu_lo = 4, int nu_hi = 12);

struct PredictedBounds {
    double distance = 0.0;
    double measure = 0.0;
    double c_admissible = 0.0;
};
// Unit constants unless overridden.
PredictedBounds predicted_bounds(double R, double c, double sigma, double K = 1.0, double C = 1.0);

// rows nu >= first
void write_csv(const KamSchedule& s, std::ostream& os, std::size_t first = 0);
void write_predictions_json(const PredictedBounds& b, double R, double c, double sigma, std::ostream& os);

}  // namespace kgnls
