#include "kgnls/spectral_core.hpp"

#include "kgnls/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kgnls {

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

void SpaceParams::validate() const {
    if (!(a >= 0.0)) throw DomainError("SpaceParams: a must be >= 0");
    if (!(p > 0.5)) throw DomainError("SpaceParams: p must be > 1/2");
    if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("SpaceParams: beta must lie in [0,1]");
    if (M < 1) throw DomainError("SpaceParams: M must be >= 1");
}

double lambda(double c, int j) {
    if (!(c > 0.0)) throw DomainError("lambda: c must be positive");
    const double jj = static_cast<double>(j);
    return c * std::sqrt(jj * jj + c * c);
}

double nu(double h, int j) {
    if (!(h > 0.0)) throw DomainError("nu: h must be positive");
    const double j2 = static_cast<double>(j) * static_cast<double>(j);
    return j2 / (1.0 + std::sqrt(1.0 + h * j2));
}

double weight(double c, int j) {
    if (!(c > 0.0)) throw DomainError("weight: c must be positive");
    const double r = static_cast<double>(j) / c;
    return std::sqrt(1.0 + r * r);
}

double bracket(int j) {
    const double jj = static_cast<double>(j);
    return std::sqrt(1.0 + jj * jj);
}

FrequencyTable::FrequencyTable(double c, int M) : c_(c), h_(0.0), M_(M) {
    if (!(c > 0.0)) throw DomainError("FrequencyTable: c must be positive");
    if (M < 0) throw DomainError("FrequencyTable: M must be >= 0");
    h_ = 1.0 / (c * c);
    const std::size_t n = static_cast<std::size_t>(2 * M + 1);
    lambda_.resize(n);
    nu_.resize(n);
    w_.resize(n);
    for (int j = -M; j <= M; ++j) {
        const auto k = static_cast<std::size_t>(j + M);
        nu_[k] = kgnls::nu(h_, j);
        // h^-1 + nu rather than c*sqrt(.) so the identity is exact by construction
        lambda_[k] = c * c + nu_[k];
        w_[k] = 1.0 + h_ * nu_[k];
    }
}

std::size_t FrequencyTable::index(int j) const {
    if (j < -M_ || j > M_) throw ShapeError("FrequencyTable: index " + std::to_string(j) + " outside truncation");
    return static_cast<std::size_t>(j + M_);
}

FourierState::FourierState(int M_) : M(M_) {
    if (M_ < 0) throw ShapeError("FourierState: negative truncation");
    z.assign(static_cast<std::size_t>(2 * M_ + 1), cplx{});
    zbar.assign(z.size(), cplx{});
}

FourierState FourierState::real_from(const CVec& z) {
    FourierState s(radius_of(z.size()));
    s.z = z;
    for (std::size_t k = 0; k < z.size(); ++k) s.zbar[k] = std::conj(z[k]);
    return s;
}

bool FourierState::real_representation(double tol) const {
    for (std::size_t k = 0; k < z.size(); ++k)
        if (std::abs(zbar[k] - std::conj(z[k])) > tol * (1.0 + std::abs(z[k]))) return false;
    return true;
}

int radius_of(std::size_t length) {
    if (length % 2 == 0) throw ShapeError("sequence length must be odd (indices -M..M)");
    return static_cast<int>(length / 2);
}

namespace {

double mode_weight_sq(int j, const SpaceParams& params, const FrequencyTable& freq) {
    const double jj = static_cast<double>(j);
    double w = std::exp(2.0 * std::abs(jj) * params.a) * std::pow(1.0 + jj * jj, params.p);
    if (params.beta != 0.0) w *= std::pow(freq.w(j), 2.0 * params.beta);
    return w;
}

}  // namespace

double weighted_norm(std::span<const cplx> x, const SpaceParams& params, const FrequencyTable& freq) {
    const int M = radius_of(x.size());
    if (M > freq.M()) throw ShapeError("weighted_norm: sequence exceeds frequency table");
    CompensatedSum s;
    for (int j = -M; j <= M; ++j)
        s.add(std::norm(x[static_cast<std::size_t>(j + M)]) * mode_weight_sq(j, params, freq));
    return std::sqrt(s.value());
}

double weighted_norm(const FourierState& state, const SpaceParams& params, const FrequencyTable& freq) {
    if (state.z.size() != state.zbar.size()) throw ShapeError("weighted_norm: z and zbar lengths differ");
    if (state.M > freq.M()) throw ShapeError("weighted_norm: state exceeds frequency table");
    CompensatedSum s;
    for (int j = -state.M; j <= state.M; ++j) {
        const double wt = mode_weight_sq(j, params, freq);
        s.add(std::norm(state.z_at(j)) * wt);
        s.add(std::norm(state.zbar_at(j)) * wt);
    }
    return std::sqrt(s.value());
}

CVec convolve(std::span<const cplx> x, std::span<const cplx> y, int out_radius) {
    const int Mx = radius_of(x.size());
    const int My = radius_of(y.size());
    const int Mo = out_radius < 0 ? Mx : out_radius;
    CVec out(static_cast<std::size_t>(2 * Mo + 1));
    for (int j = -Mo; j <= Mo; ++j) {
        CompensatedSum re, im;
        const int klo = std::max(-My, j - Mx);
        const int khi = std::min(My, j + Mx);
        for (int k = klo; k <= khi; ++k) {
            const cplx t = x[static_cast<std::size_t>(j - k + Mx)] * y[static_cast<std::size_t>(k + My)];
            re.add(t.real());
            im.add(t.imag());
        }
        out[static_cast<std::size_t>(j + Mo)] = {re.value(), im.value()};
    }
    return out;
}

CVec reflect(std::span<const cplx> x) {
    return CVec(x.rbegin(), x.rend());
}

}  // namespace kgnls
