#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace kgnls {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

// Neumaier variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct SpaceParams {
    double a = 0.0;
    double p = 5.0;
    double beta = 0.0;
    int M = 1;

    void validate() const;
};

// lambda_j = c sqrt(j^2 + c^2)
double lambda(double c, int j);
// nu_j(h) = j^2 / (1 + sqrt(1 + h j^2))
double nu(double h, int j);
// w_j = sqrt(1 + j^2/c^2)
double weight(double c, int j);
// <j> = sqrt(1 + j^2)
double bracket(int j);

class FrequencyTable {
public:
    FrequencyTable(double c, int M);

    double c() const noexcept { return c_; }
    double h() const noexcept { return h_; }
    int M() const noexcept { return M_; }

    double lambda(int j) const { return lambda_[index(j)]; }
    double nu(int j) const { return nu_[index(j)]; }
    double w(int j) const { return w_[index(j)]; }

    const std::vector<double>& lambdas() const noexcept { return lambda_; }
    const std::vector<double>& nus() const noexcept { return nu_; }
    const std::vector<double>& weights() const noexcept { return w_; }

private:
    std::size_t index(int j) const;

    double c_;
    double h_;
    int M_;
    std::vector<double> lambda_;
    std::vector<double> nu_;
    std::vector<double> w_;
};

// Truncated pair (z, zbar) on {-M..M}; zbar is an independent variable.
struct FourierState {
    int M = 0;
    CVec z;
    CVec zbar;

    FourierState() = default;
    explicit FourierState(int M_);

    static FourierState real_from(const CVec& z);

    cplx& z_at(int j) { return z[static_cast<std::size_t>(j + M)]; }
    cplx& zbar_at(int j) { return zbar[static_cast<std::size_t>(j + M)]; }
    cplx z_at(int j) const { return z[static_cast<std::size_t>(j + M)]; }
    cplx zbar_at(int j) const { return zbar[static_cast<std::size_t>(j + M)]; }

    bool real_representation(double tol = 1e-12) const;
    std::size_t size() const noexcept { return z.size(); }
};

double weighted_norm(const FourierState& state, const SpaceParams& params, const FrequencyTable& freq);
// Same norm for a single sequence on {-M..M}.
double weighted_norm(std::span<const cplx> x, const SpaceParams& params, const FrequencyTable& freq);

// (x * y)_j = sum_k x_{j-k} y_k on symmetric index ranges inferred from the lengths.
// Output radius defaults to the radius of x; terms outside are discarded.
CVec convolve(std::span<const cplx> x, std::span<const cplx> y, int out_radius = -1);

int radius_of(std::size_t length);
CVec reflect(std::span<const cplx> x);

}  // namespace kgnls
