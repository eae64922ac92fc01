#include "kgnls/kam_schedule.hpp"

#include "kgnls/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace kgnls {

void ScheduleParams::validate() const {
    if (N < 1) throw DomainError("ScheduleParams: N must be positive");
    if (!(tau >= 1.0)) throw DomainError("ScheduleParams: tau must be >= 1");
    if (!(varsigma > 0.0 && varsigma < 1.0 / 18.0)) throw DomainError("ScheduleParams: varsigma outside (0, 1/18)");
    if (!(s0 > 0.0 && sigma0 > 0.0 && 10.0 * sigma0 < s0)) throw DomainError("ScheduleParams: need 0 < 10 sigma0 < s0");
    if (!(C1 > 0.0)) throw DomainError("ScheduleParams: C1 must be positive");
    if (K1 < 0.0) throw DomainError("ScheduleParams: K1 must be >= 0");
    if (!(r0 > 0.0 && r0 < 1.0)) throw DomainError("ScheduleParams: r0 must lie in (0,1)");
    if (!(rho_star > 0.0)) throw DomainError("ScheduleParams: rho_star must be positive");
}

Exponents init_exponents(double varsigma, double r0) {
    if (!(varsigma > 0.0 && varsigma < 1.0 / 18.0)) throw DomainError("init_exponents: varsigma outside (0, 1/18)");
    if (!(r0 > 0.0)) throw DomainError("init_exponents: r0 must be positive");
    Exponents e;
    e.a0 = 5.0 / 3.0 + 3.0 * varsigma;
    e.a1 = 2.0 + varsigma;
    e.theta = 0.5 - 3.0 * varsigma;
    e.alpha0 = std::pow(r0, e.a0);
    e.alpha1 = std::pow(r0, e.a1);
    return e;
}

double minimal_K1(double tau, double rho) {
    const double target = 1.0 / rho;
    double K = std::floor(std::pow(target, 1.0 / (tau + 1.0)));
    while (std::pow(K, tau + 1.0) <= target) K += 1.0;
    return std::max(K, 1.0);
}

SmallnessReport smallness_check(const ScheduleParams& p, double eps0, double eps1) {
    p.validate();
    const Exponents e = init_exponents(p.varsigma, p.r0);
    if (eps1 < 0.0) eps1 = std::cbrt(eps0 / e.alpha0) * eps0;
    SmallnessReport r;
    r.ratio0 = eps0 / e.alpha0;
    r.ratio1 = eps1 / e.alpha1;
    r.rho_star = p.rho_star;
    r.passes = r.ratio0 + r.ratio1 < p.rho_star;
    r.R = std::pow(p.r0, 2.0 / 3.0);
    r.predicted_exponent = 0.5 - 4.5 * p.varsigma;
    r.predicted_ratio0 = std::pow(r.R, r.predicted_exponent);
    return r;
}

namespace {

struct Step {
    double log_eps, log_alpha, log_sigma;
};

double log_eps_next(const ScheduleParams& p, const Step& s) {
    return std::log(p.C1) + (4.0 / 3.0) * s.log_eps - (s.log_alpha + p.mu() * s.log_sigma) / 3.0;
}

double log_alpha_at(double alpha1, int nu) { return std::log(0.5 * alpha1 * (1.0 + std::pow(2.0, 1.0 - nu))); }

}  // namespace

KamSchedule generate(const ScheduleParams& p, double eps0, double eps1, int nu_max) {
    p.validate();
    if (!(eps0 > 0.0)) throw DomainError("generate: eps0 must be positive");
    if (nu_max < 1) throw DomainError("generate: nu_max must be >= 1");
    const Exponents e = init_exponents(p.varsigma, p.r0);
    if (eps1 < 0.0) eps1 = std::cbrt(eps0 / e.alpha0) * eps0;
    const SmallnessReport sm = smallness_check(p, eps0, eps1);
    if (!sm.passes) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "schedule: smallness fails, eps0/alpha0 + eps1/alpha1 = %.3g >= rho_star = %.3g",
                      sm.ratio0 + sm.ratio1, p.rho_star);
        throw DivergenceError(buf);
    }
    const double K1 = p.K1 > 0.0 ? p.K1 : minimal_K1(p.tau, p.rho_star);
    const double mu = p.mu();

    KamSchedule out;
    auto push = [&](int nu, double log_eps, double log_alpha) {
        const double log_sigma = std::log(p.sigma0) - nu * std::log(2.0);
        out.sigma.push_back(std::exp(log_sigma));
        out.alpha.push_back(std::exp(log_alpha));
        out.K.push_back(nu == 0 ? 0.0 : std::ldexp(K1, nu - 1));
        out.log_eps.push_back(log_eps);
        out.eta.push_back(std::exp((log_eps - log_alpha - mu * log_sigma) / 3.0));
        if (nu == 0) {
            out.s.push_back(p.s0);
            out.log_r.push_back(std::log(p.r0));
        } else {
            out.s.push_back(out.s.back() - 5.0 * out.sigma[static_cast<std::size_t>(nu - 1)]);
            out.log_r.push_back(out.log_r.back() + std::log(out.eta[static_cast<std::size_t>(nu - 1)]));
        }
        if (!(out.s.back() > 0.0)) throw DivergenceError("schedule: analyticity strip s_nu exhausted");
    };
    push(0, std::log(eps0), std::log(e.alpha0));
    push(1, std::log(eps1), log_alpha_at(e.alpha1, 1));

    double head = 0.0, tail = 0.0;
    Step cur{std::log(eps1), log_alpha_at(e.alpha1, 1), std::log(p.sigma0) - std::log(2.0)};
    const int horizon = std::max(nu_max, 40);
    for (int nu = 1; nu <= horizon; ++nu) {
        const double eta3 = std::exp(cur.log_eps - cur.log_alpha - mu * cur.log_sigma);
        (nu <= 12 ? head : tail) += eta3;
        if (nu == horizon) break;
        Step next{log_eps_next(p, cur), log_alpha_at(e.alpha1, nu + 1), cur.log_sigma - std::log(2.0)};
        if (next.log_eps >= cur.log_eps) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "schedule: eps increases at step %d (eta_nu^3 = %.3g, need C1 eta_nu < 1)", nu, eta3);
            throw DivergenceError(buf);
        }
        cur = next;
        if (nu + 1 <= nu_max) push(nu + 1, cur.log_eps, cur.log_alpha);
    }
    out.tail_ratio = head > 0.0 ? tail / head : 0.0;
    return out;
}

double log_growth_factor(const KamSchedule& s, int nu_lo, int nu_hi) {
    if (nu_lo < 1 || nu_hi + 2 >= static_cast<int>(s.size()) + 0 || nu_hi - nu_lo < 1)
        throw DomainError("log_growth_factor: window does not fit the schedule");
    // second differences cancel the affine particular solution of the log recursion
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int nu = nu_lo; nu <= nu_hi; ++nu) {
        const auto i = static_cast<std::size_t>(nu);
        const double d2 = s.log_eps[i + 2] - 2.0 * s.log_eps[i + 1] + s.log_eps[i];
        const double y = std::log(std::abs(d2));
        sx += nu;
        sy += y;
        sxx += double(nu) * nu;
        sxy += nu * y;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return std::exp(slope);
}

PredictedBounds predicted_bounds(double R, double c, double sigma, double K, double C) {
    if (!(sigma >= 0.0 && sigma <= 1.0)) throw DomainError("predicted_bounds: sigma outside [0,1]");
    if (!(R > 0.0 && R < 1.0)) throw DomainError("predicted_bounds: R outside (0,1)");
    if (!(c > 0.0)) throw DomainError("predicted_bounds: c must be positive");
    PredictedBounds b;
    b.distance = K * std::pow(R, 1.0 / 36.0 - 215.0 * sigma / 72.0) / std::pow(c, 2.0 * sigma);
    b.measure = C * std::pow(R, 1.0 / 36.0);
    b.c_admissible = std::pow(R, -73.0 / 72.0);
    return b;
}

void write_csv(const KamSchedule& s, std::ostream& os, std::size_t first) {
    os << "nu,sigma,alpha,K,eps,eta,s,r\n";
    char buf[320];
    for (std::size_t i = first; i < s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, s.sigma[i], s.alpha[i], s.K[i],
                      std::exp(s.log_eps[i]), s.eta[i], s.s[i], std::exp(s.log_r[i]));
        os << buf;
    }
}

void write_predictions_json(const PredictedBounds& b, double R, double c, double sigma, std::ostream& os) {
    nlohmann::json j = {{"R", R}, {"c", c}, {"sigma", sigma}, {"distance_bound", b.distance},
                        {"measure_bound", b.measure}, {"c_admissible", b.c_admissible}, {"constants", "unit"}};
    os << j.dump(2) << "\n";
}

}  // namespace kgnls
