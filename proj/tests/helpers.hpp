#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "shearlab/spectral.hpp"

namespace testing_util {

using namespace shearlab;

inline Grid box(int nx = 16, int ny = 16, double Ly = 2.0 * std::numbers::pi) {
    Grid g;
    g.Nx = nx;
    g.Ny = ny;
    g.y_domain = Periodic{Ly};
    return g;
}

inline Grid chan(int nx = 16, int ny = 64, double a = 1.0, double b = 2.0) {
    Grid g;
    g.Nx = nx;
    g.Ny = ny;
    g.y_domain = Channel{a, b};
    return g;
}

inline SpectralField random_field(const Grid& g, unsigned seed, bool mean_free = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    auto u = sample(g, [&](double, double) { return n(rng); });
    if (mean_free) u = project_nonzero_k(u);
    return u;
}

/// Narrow Gaussian centred at c; below 1e-9 beyond 4.4 widths and spectrally resolved.
inline double gauss(double y, double c, double w) { return std::exp(-0.5 * (y - c) * (y - c) / (w * w)); }

/// Smooth compactly supported bump on [a, b].
inline double bump(double y, double a, double b) {
    if (y <= a || y >= b) return 0.0;
    const double s = (2.0 * y - a - b) / (b - a);
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

inline double rel_diff(const SpectralField& a, const SpectralField& b) {
    return l2_norm(a - b) / std::max(l2_norm(b), 1e-300);
}

}  // namespace testing_util
