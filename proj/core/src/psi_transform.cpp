#include "kgnls/psi_transform.hpp"

#include "kgnls/errors.hpp"

#include <cmath>

namespace kgnls {

namespace {

constexpr double kSymTol = 1e-12;

void check_c(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("psi transform: c must be positive and finite");
}

}  // namespace

RealFieldState::RealFieldState(int M_) : M(M_) {
    if (M_ < 0) throw ShapeError("RealFieldState: negative truncation");
    u_hat.assign(static_cast<std::size_t>(2 * M_ + 1), cplx{});
    v_hat.assign(static_cast<std::size_t>(2 * M_ + 1), cplx{});
}

double RealFieldState::symmetry_defect() const {
    double d = 0.0;
    for (int j = -M; j <= M; ++j) {
        d = std::max(d, std::abs(u_at(-j) - std::conj(u_at(j))));
        d = std::max(d, std::abs(v_at(-j) - std::conj(v_at(j))));
    }
    return d;
}

FourierState to_psi(const RealFieldState& s, double c) {
    check_c(c);
    if (s.u_hat.size() != static_cast<std::size_t>(2 * s.M + 1) || s.v_hat.size() != s.u_hat.size())
        throw ShapeError("to_psi: field arrays do not match the truncation");
    double norm = 0.0;
    for (const auto& x : s.u_hat) norm = std::max(norm, std::abs(x));
    for (const auto& x : s.v_hat) norm = std::max(norm, std::abs(x));
    if (s.symmetry_defect() > kSymTol * std::max(1.0, norm))
        throw DomainError("to_psi: fields are not conjugate-symmetric");

    const double c2 = c * c;
    const cplx I(0.0, 1.0);
    FourierState out(s.M);
    for (int j = -s.M; j <= s.M; ++j) {
        const double w = weight(c, j);
        const double sw = std::sqrt(w);
        out.z_at(j) = (sw * s.u_at(j) + I * s.v_at(j) / (sw * c2)) / std::sqrt(2.0);
        out.zbar_at(j) = (sw * s.u_at(-j) - I * s.v_at(-j) / (sw * c2)) / std::sqrt(2.0);
    }
    return out;
}

RealFieldState from_psi(const FourierState& psi, double c) {
    check_c(c);
    const double c2 = c * c;
    const cplx I(0.0, 1.0);
    RealFieldState out(psi.M);
    for (int j = -psi.M; j <= psi.M; ++j) {
        const double sw = std::sqrt(weight(c, j));
        const cplx p = psi.z_at(j);
        const cplx q = psi.zbar_at(-j);
        out.u_at(j) = (p + q) / (std::sqrt(2.0) * sw);
        out.v_at(j) = c2 * sw * (p - q) / (std::sqrt(2.0) * I);
    }
    return out;
}

double kg_quadratic_energy(const RealFieldState& s, double c) {
    check_c(c);
    const double c2 = c * c;
    CompensatedSum acc;
    for (int j = -s.M; j <= s.M; ++j)
        acc.add(0.5 * ((double(j) * j + c2) * std::norm(s.u_at(j)) + std::norm(s.v_at(j)) / c2));
    return acc.value();
}

cplx psi_quadratic_energy(const FourierState& psi, double c) {
    check_c(c);
    CompensatedSum re, im;
    for (int j = -psi.M; j <= psi.M; ++j) {
        const cplx t = lambda(c, j) * psi.z_at(j) * psi.zbar_at(j);
        re.add(t.real());
        im.add(t.imag());
    }
    return {re.value(), im.value()};
}

}  // namespace kgnls
