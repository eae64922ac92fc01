#pragma once

#include "kgnls/spectral_core.hpp"

namespace kgnls {

// Fourier coefficients of the real field u and of u_t on {-M..M}.
struct RealFieldState {
    int M = 0;
    CVec u_hat;
    CVec v_hat;

    RealFieldState() = default;
    explicit RealFieldState(int M_);

    cplx& u_at(int j) { return u_hat[static_cast<std::size_t>(j + M)]; }
    cplx& v_at(int j) { return v_hat[static_cast<std::size_t>(j + M)]; }
    cplx u_at(int j) const { return u_hat[static_cast<std::size_t>(j + M)]; }
    cplx v_at(int j) const { return v_hat[static_cast<std::size_t>(j + M)]; }

    // max |x_{-j} - conj(x_j)| over both fields
    double symmetry_defect() const;
};

FourierState to_psi(const RealFieldState& state, double c);
RealFieldState from_psi(const FourierState& psi, double c);

// sum_j [ (j^2 + c^2)|u_j|^2 + |v_j|^2 / c^2 ] / 2
double kg_quadratic_energy(const RealFieldState& state, double c);
// sum_j lambda_j z_j zbar_j
cplx psi_quadratic_energy(const FourierState& psi, double c);

}  // namespace kgnls
