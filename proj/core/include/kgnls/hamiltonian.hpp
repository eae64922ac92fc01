#pragma once

#include "kgnls/spectral_core.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace kgnls {

// Product of up to kMaxDegree variables z_j (sigma=+1) or zbar_j (sigma=-1),
// kept with slots sorted by (j, sigma) so equal monomials compare equal.
class Monomial {
public:
    static constexpr int kMaxDegree = 8;

    Monomial() = default;
    Monomial(std::span<const int> j, std::span<const int> sigma);
    Monomial(std::initializer_list<int> j, std::initializer_list<int> sigma);

    static Monomial from_sigma_string(const std::string& sigma, std::span<const int> j);

    int degree() const noexcept { return deg_; }
    int j(int t) const noexcept { return slot_j(slots_[static_cast<std::size_t>(t)]); }
    int sigma(int t) const noexcept { return slot_sigma(slots_[static_cast<std::size_t>(t)]); }
    int momentum() const noexcept;
    int gauge_sum() const noexcept;
    int count(int j, int sigma) const noexcept;

    std::vector<int> jvec() const;
    std::vector<int> sigvec() const;
    std::string sigma_string() const;

    // Number of distinct orderings of the slots, n!/prod(m!).
    double orderings() const;

    // Slot codes, exposed for the bracket kernel.
    std::span<const std::int32_t> slots() const noexcept { return {slots_.data(), static_cast<std::size_t>(deg_)}; }
    static std::int32_t encode(int j, int sigma) noexcept { return 2 * (j + kOffset) + (sigma > 0 ? 1 : 0); }
    static int slot_j(std::int32_t s) noexcept { return s / 2 - kOffset; }
    static int slot_sigma(std::int32_t s) noexcept { return (s & 1) ? 1 : -1; }
    static Monomial from_slots(std::span<const std::int32_t> s);

    auto operator<=>(const Monomial&) const = default;

private:
    static constexpr int kOffset = 1 << 20;

    std::uint8_t deg_ = 0;
    std::array<std::int32_t, kMaxDegree> slots_{};
};

class PolyHamiltonian {
public:
    using TermMap = std::map<Monomial, cplx>;
    static constexpr double kPrune = 1e-16;

    PolyHamiltonian() = default;

    // Adds to the merged coefficient; entries falling below kPrune are dropped.
    void add(const Monomial& m, cplx coefficient);
    void add(std::span<const int> j, std::span<const int> sigma, cplx coefficient);
    cplx coefficient(const Monomial& m) const;

    const TermMap& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }
    int min_degree() const;
    int max_degree() const;
    bool homogeneous() const;
    double sup_coefficient() const;

    PolyHamiltonian degree_part(int n) const;
    template <class Pred>
    PolyHamiltonian filter(Pred pred) const {
        PolyHamiltonian out;
        for (const auto& [m, a] : terms_)
            if (pred(m, a)) out.terms_.emplace(m, a);
        return out;
    }

    cplx evaluate(const FourierState& state) const;

    PolyHamiltonian& operator+=(const PolyHamiltonian& other);
    PolyHamiltonian& operator-=(const PolyHamiltonian& other);
    PolyHamiltonian& operator*=(cplx s);
    friend PolyHamiltonian operator+(PolyHamiltonian a, const PolyHamiltonian& b) { return a += b; }
    friend PolyHamiltonian operator-(PolyHamiltonian a, const PolyHamiltonian& b) { return a -= b; }
    friend PolyHamiltonian operator*(cplx s, PolyHamiltonian a) { return a *= s; }

    void write_text(std::ostream& os) const;
    static PolyHamiltonian read_text(std::istream& is);

private:
    TermMap terms_;
};

// Per-ordered-tuple coefficient of the quartic KG Hamiltonian:
// (1/32 pi) binom(4, sigma_hat) / sqrt(w_j1 w_j2 w_j3 w_j4), zero off the momentum shell.
double P_raw_coefficient(const FrequencyTable& freq, std::span<const int> j, std::span<const int> sigma);

PolyHamiltonian build_P(const FrequencyTable& freq, int M);
PolyHamiltonian build_P_NLS(int M);
PolyHamiltonian build_Lambda(const FrequencyTable& freq, int M);
PolyHamiltonian build_Lambda_NLS(int M);
// sum nu_j z_j zbar_j, i.e. the KG quadratic part without the uniform c^2 mass term
PolyHamiltonian build_Lambda_nu(const FrequencyTable& freq, int M);

// {sum_j z_j zbar_j, H}, computed termwise as i (sum sigma) H
PolyHamiltonian mass_bracket(const PolyHamiltonian& H);

PolyHamiltonian gauge_project(const PolyHamiltonian& H);

struct PSplit {
    PolyHamiltonian P_nls;
    PolyHamiltonian P_ng;
    PolyHamiltonian P_r;
    double reconstruction_residual = 0.0;
};
PSplit split_P(const FrequencyTable& freq, int M);

struct BracketOptions {
    int max_degree = 6;
    std::size_t max_terms = 20'000'000;
    // incremented once per product dropped by the degree cutoff
    std::size_t* discarded = nullptr;
};

// {F,G} = i sum_j (dF/dzbar_j dG/dz_j - dF/dz_j dG/dzbar_j)
PolyHamiltonian poisson_bracket(const PolyHamiltonian& F, const PolyHamiltonian& G, const BracketOptions& opts = {});

// (-i dH/dzbar, +i dH/dz) on the state's index range.
FourierState vector_field(const PolyHamiltonian& H, const FourierState& state);

// Majorant of the phase-space norm of X_H at state for a Hamiltonian factorized
// with slot weights b[t] (one sequence on -M..M per slot, or a single shared one).
double vector_field_norm_bound(const PolyHamiltonian& H, const std::vector<std::vector<double>>& b,
                               const FourierState& state, const SpaceParams& params, const FrequencyTable& freq);

}  // namespace kgnls
