#pragma once

#include "kgnls/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace testutil {

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline kgnls::CVec random_seq(std::mt19937_64& rng, int M, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    kgnls::CVec x(static_cast<std::size_t>(2 * M + 1));
    for (auto& v : x) v = {g(rng), g(rng)};
    return x;
}

inline kgnls::FourierState random_real_state(std::mt19937_64& rng, int M, double scale) {
    return kgnls::FourierState::real_from(random_seq(rng, M, scale));
}

inline kgnls::FourierState random_state(std::mt19937_64& rng, int M, double scale) {
    kgnls::FourierState s(M);
    s.z = random_seq(rng, M, scale);
    s.zbar = random_seq(rng, M, scale);
    return s;
}

}  // namespace testutil
