#pragma once

#include "kgnls/frequencies.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kgnls {

enum class SClass { Zero, S0, S1, S2, S4, S5, S6, S7, S8 };
enum class SFamily { Zero, S0, Minus, Plus };

SFamily family(SClass s);
std::string to_string(SClass s);

struct IndexPair {
    std::vector<int> k;
    SparseEll ell;
    int momentum = 0;
    int L = 0;
    bool in_Z2 = false;
    bool in_ZM = false;
    bool in_ZG = false;
    SClass sclass = SClass::Zero;

    int k_norm1() const;
    int ell_norm1() const;
};

// Fills momentum, gauge sum, membership flags and the S-class (c enters the size cutoffs).
IndexPair make_index_pair(const std::vector<int>& k, SparseEll ell, const std::vector<int>& J, double c);

struct ResonantQuery {
    double alpha = 1e-2;
    double tau = 1.0;
    double theta = 0.0;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    int workers = 1;

    void validate() const;
};

// Every ell with |ell|_1 <= 2, support in J^c with |n| <= support_radius, and zero total momentum.
std::vector<SparseEll> enumerate_ell(const std::vector<int>& k, const std::vector<int>& J, int support_radius);
// Integer N-vectors with kmin <= |k|_1 <= kmax.
std::vector<std::vector<int>> enumerate_k(int N, int kmin, int kmax);

SClass classify_pair(const IndexPair& pair, double c);

// <omega(xi), k> + <Omega(xi), ell> with corrections when tabulated.
double divisor(const FrequencyModel& m, const Eigen::VectorXd& xi, const IndexPair& pair, bool check = true);
double divisor_nls(const FrequencyModel& m, const Eigen::VectorXd& xi, const IndexPair& pair, bool check = true);

struct DivisorParts {
    double Lc2 = 0.0;
    double nu_part = 0.0;  // <nu, k> + sum ell_n nu_n
    double xi_part = 0.0;  // (A k + B^T ell) . xi
    double correction = 0.0;
    double total() const { return Lc2 + (nu_part + xi_part + correction); }
};
DivisorParts divisor_parts(const FrequencyModel& m, const Eigen::VectorXd& xi, const IndexPair& pair);
Eigen::VectorXd divisor_gradient(const FrequencyModel& m, const IndexPair& pair);

double k_bracket(const std::vector<int>& k);                 // max(1, |k|_1)
double ell_weight(const FrequencyModel& m, const SparseEll& ell);  // min over the support of w_n, 1 for ell = 0
double resonance_threshold(const FrequencyModel& m, const IndexPair& pair, const ResonantQuery& q);

struct MeasureEstimate {
    double alpha = 0.0;
    double fraction = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t hits = 0;
    std::size_t samples = 0;
};
MeasureEstimate wilson_interval(std::size_t hits, std::size_t n);

// Uniform samples of the amplitude box; block b draws from its own stream seeded from (seed, b).
std::vector<Eigen::VectorXd> sample_box(const FrequencyModel& m, std::size_t n, std::uint64_t seed);

// Fraction of the box inside the union of R_{k ell} over ell from enumerate_ell(k, J, M).
MeasureEstimate measure_estimate_mc(const FrequencyModel& m, const std::vector<int>& k, const ResonantQuery& q);
// Same samples for every alpha, so the estimates are nested sample-wise.
std::vector<MeasureEstimate> measure_sweep(const FrequencyModel& m, const std::vector<IndexPair>& pairs,
                                           const std::vector<double>& alphas, const ResonantQuery& q);

double x_L(int L);

struct NonGaugeReport {
    double c = 0.0;
    int kmax = 0;
    int support_radius = 0;
    double min_over_c2 = 0.0;
    IndexPair witness;
    Eigen::VectorXd witness_xi;
    std::size_t scanned = 0;
    std::map<SClass, double> class_min_over_c2;
    std::size_t s8_pairs = 0;
    std::size_t s8_near_xL = 0;
    double s8_min_over_c2 = 0.0;
};
// Pairs in Z_M with L != 0, |k|_1 <= min(kappa sqrt(c), kmax_cap), support in [-c/2, c/2], at the box corners.
NonGaugeReport nongauge_scan(const FrequencyModel& m, double kappa, int kmax_cap = 0);

struct ExcisionResult {
    double excised_fraction = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::vector<char> kept;  // per sample
    std::vector<Eigen::VectorXd> samples;
    std::size_t kg_sets = 0;
    std::size_t nls_sets = 0;
};
// Removes R_{k ell} for K_cut < |k|_1 <= kmax, KG divisors over Z_M and NLS divisors over Z_G.
ExcisionResult cantor_excision(const FrequencyModel& m, const ResonantQuery& q, int K_cut, int kmax);

}  // namespace kgnls
