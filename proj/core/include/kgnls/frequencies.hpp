#pragma once

#include "kgnls/spectral_core.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <utility>
#include <vector>

namespace kgnls {

// Sparse normal-mode vector: (index, value) pairs with distinct indices.
using SparseEll = std::vector<std::pair<int, int>>;

// Values sampled on a scattered xi grid, extended off the grid by the nearest sample.
struct TabulatedCorrection {
    std::vector<Eigen::VectorXd> xi;
    std::vector<Eigen::VectorXd> values;

    bool empty() const noexcept { return xi.empty(); }
    Eigen::VectorXd eval(const Eigen::VectorXd& at, Eigen::Index dim) const;
    // max over sample pairs of |dv|_inf / |dxi|_inf
    double lipschitz() const;
    double sup() const;
};

struct FrequencyModel {
    double c = 0.0;
    double h = 0.0;
    double R = 0.0;
    int M = 0;
    std::vector<int> J;
    std::vector<int> normal;  // {-M..M} minus J, ascending
    Eigen::VectorXd nu_J;
    Eigen::VectorXd w_J;
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;  // rows follow `normal`
    Eigen::MatrixXd A_nls;
    Eigen::MatrixXd B_nls;
    Eigen::VectorXd xi_lo;
    Eigen::VectorXd xi_hi;
    TabulatedCorrection delta;  // on J
    TabulatedCorrection Delta;  // on `normal`

    int N() const noexcept { return static_cast<int>(J.size()); }
    int normal_position(int n) const;  // -1 if n is tangential or outside the truncation
    bool in_box(const Eigen::VectorXd& xi, double rel_tol = 1e-12) const;
    Eigen::VectorXd box_center() const { return 0.5 * (xi_lo + xi_hi); }

    // Analytic expressions valid for any index, including the tail beyond M.
    double w(int n) const;
    double nu(int n) const;
    double B_row_entry(int n, int i) const;  // (3/4 pi) / (w_n w_{J_i})
};

FrequencyModel build_model(double c, const std::vector<int>& J, int M, double R);

// Frequency maps; `check` rejects xi outside the amplitude box.
Eigen::VectorXd omega0(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check = true);
Eigen::VectorXd omega0_shifted(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check = true);  // omega0 - c^2
Eigen::VectorXd omega0_nls(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check = true);
Eigen::VectorXd Omega0(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check = true);
Eigen::VectorXd Omega0_shifted(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check = true);
Eigen::VectorXd Omega0_nls(const FrequencyModel& m, const Eigen::VectorXd& xi, bool check = true);
// Single normal frequency, any n outside J; shifted drops the c^2.
double Omega0_at(const FrequencyModel& m, int n, const Eigen::VectorXd& xi, bool shifted = false);

Eigen::MatrixXd bateman_inverse(const FrequencyModel& m);
// (8 pi / 3) (4N-1)/(2N-1) |w|_inf^2
double bateman_norm_bound(const FrequencyModel& m);

// Solution x of A x + B^T ell = 0.
Eigen::VectorXd solve_first_melnikov(const FrequencyModel& m, const SparseEll& ell);
// A k + B^T ell, with the analytic B for indices beyond M.
Eigen::VectorXd melnikov_vector(const FrequencyModel& m, const std::vector<int>& k, const SparseEll& ell);

struct MelnikovReport {
    double min_ratio = 0.0;
    std::vector<int> k_witness;
    SparseEll ell_witness;
    bool h_hypothesis = false;  // h <= 49 / (576 max|J|^2)
    std::size_t scanned = 0;
};
MelnikovReport first_melnikov_lower_bound(const FrequencyModel& m, int kmax);

struct AsymptoticsRow {
    int i = 0;
    int j = 0;
    double deviation = 0.0;
    double scaled = 0.0;  // deviation * w_i^2
};
struct AsymptoticsReport {
    bool empty = true;
    double constant = 0.0;  // max scaled deviation
    std::vector<AsymptoticsRow> rows;
};
// pairs empty: every admissible pair c^3 < |i| < |j| <= M of normal modes.
AsymptoticsReport asymptotics_check(const FrequencyModel& m, const std::vector<std::pair<int, int>>& pairs = {});

void export_json(const FrequencyModel& m, std::ostream& os);

}  // namespace kgnls
