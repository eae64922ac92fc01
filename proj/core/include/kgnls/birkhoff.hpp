#pragma once

#include "kgnls/hamiltonian.hpp"

#include <span>
#include <string>
#include <vector>

namespace kgnls {

struct ResonanceClass {
    bool in_IR = false;
    bool in_LJ = false;
    int gauge_sum = 0;
    double divisor = 0.0;  // sigma . lambda, zero when no table is supplied
};

// Quartic classification. With freq == nullptr the divisor uses lambda_j = j^2/2.
ResonanceClass classify(std::span<const int> j, std::span<const int> sigma, const std::vector<int>& J,
                        const FrequencyTable* freq = nullptr);
ResonanceClass classify(const Monomial& m, const std::vector<int>& J, const FrequencyTable* freq = nullptr);

struct NormalFormOptions {
    double nongauge_floor = 1e-8;  // times c^2
    double gauge_floor = -1.0;     // absolute; negative means 1e-8 times the smallest Gauge divisor present
    bool compute_P0 = true;
    bool compute_G_nls = true;
};

struct NormalFormResult {
    std::vector<int> J;
    double c = 0.0;  // zero for the NLS problem
    int M = 0;
    PolyHamiltonian G;
    PolyHamiltonian G_nls;
    PolyHamiltonian G_remainder;
    PolyHamiltonian Lambda_plus;
    PolyHamiltonian P_hat;
    PolyHamiltonian P0_terms;
    double residual = 0.0;           // max relative coefficient of {Lambda,G}+P-Lambda_plus-P_hat
    double closed_form_error = 0.0;  // max |Lambda_plus - closed form|
    double min_gauge_divisor = 0.0;
    double min_nongauge_divisor = 0.0;
    std::size_t discarded_products = 0;

    bool is_nls() const noexcept { return c == 0.0; }
    void write_json_header(std::ostream& os) const;
};

NormalFormResult solve_cohomological_quartic(const PolyHamiltonian& P, const FrequencyTable& freq, const std::vector<int>& J,
                                             const NormalFormOptions& opts = {});
NormalFormResult solve_cohomological_nls(const PolyHamiltonian& P_nls, const std::vector<int>& J, int M,
                                         const NormalFormOptions& opts = {});

// Coefficient of z_i zbar_i z_j zbar_j per ordered pair: (1/2) N_ij / ((1+h nu_i)(1+h nu_j)).
double lambda_plus_term(const FrequencyTable& freq, int i, int j);
double lambda_plus_term_nls(int i, int j);
// Closed-form Lambda_plus on |i|,|j| <= M over pairs touching J; freq == nullptr gives the NLS one.
PolyHamiltonian lambda_plus_closed_form(const FrequencyTable* freq, const std::vector<int>& J, int M);

struct RemainderSplit {
    PolyHamiltonian total;               // G - G_nls
    PolyHamiltonian non_gauge;           // sum sigma != 0 part of G
    PolyHamiltonian gauge_from_PR;       // i P^R / (sigma . lambda)
    PolyHamiltonian divisor_difference;  // i P^NLS (1/(sigma . lambda) - 1/(sigma . lambda_nls))
    double reconstruction_residual = 0.0;
};
RemainderSplit remainder_split(const NormalFormResult& kg, const NormalFormResult& nls);

// H o phi_G^1 as the Lie series sum_k ad_G^k H / k!, truncated at opts.max_degree.
// A nonzero mass_shift transports H + mass_shift * sum_j z_j zbar_j instead; the
// untouched mass_shift * sum_j z_j zbar_j is left out of the result. This keeps the
// c^2 part of the KG frequencies away from the small nu_j in floating point.
PolyHamiltonian lie_transform(const PolyHamiltonian& H, const PolyHamiltonian& G, const BracketOptions& opts = {},
                              double mass_shift = 0.0);

struct DivisorBoundsRow {
    double c = 0.0;
    double gauge_min = 0.0;
    double nongauge_min_over_c2 = 0.0;
    Monomial gauge_witness;
    Monomial nongauge_witness;
    std::size_t scanned = 0;
};

struct DivisorBoundsReport {
    std::vector<int> J;
    int Mmax = 0;
    std::vector<DivisorBoundsRow> rows;
    bool all_positive = false;
    double nongauge_spread = 0.0;  // max/min - 1 of the non-Gauge minima over the c grid
};

DivisorBoundsReport verify_divisor_bounds(const std::vector<int>& J, const std::vector<double>& c_list, int Mmax);

}  // namespace kgnls
