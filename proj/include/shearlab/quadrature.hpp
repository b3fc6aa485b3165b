#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace shearlab::quad {

/// Composite Simpson weights on n intervals (n even) of width h.
inline std::vector<double> simpson_weights(int n, double h) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("Simpson needs an even number of intervals >= 2");
    std::vector<double> w(n + 1);
    for (int j = 0; j <= n; ++j) w[j] = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    for (auto& v : w) v *= h / 3.0;
    return w;
}

template <class F>
double simpson(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    auto w = simpson_weights(n, h);
    double acc = 0.0;
    for (int j = 0; j <= n; ++j) acc += w[j] * f(a + j * h);
    return acc;
}

/// Nodes/weights of 20-point Gauss-Legendre on [-1, 1], computed by Newton on P_n.
inline const std::pair<std::array<double, 20>, std::array<double, 20>>& gauss_legendre20() {
    static const auto rule = [] {
        constexpr int n = 20;
        std::array<double, n> x{}, w{};
        for (int i = 0; i < n; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        return std::make_pair(x, w);
    }();
    return rule;
}

template <class F>
double gauss_legendre(F&& f, double a, double b) {
    const auto& [x, w] = gauss_legendre20();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(mid + half * x[i]);
    return acc * half;
}

/// Adaptive Gauss-Kronrod-free bisection on Gauss-Legendre panels until the
/// panel estimate and its two halves agree to tol.
template <class F>
double adaptive_gl(F&& f, double a, double b, double tol, int depth = 0) {
    const double whole = gauss_legendre(f, a, b);
    const double m = 0.5 * (a + b);
    const double left = gauss_legendre(f, a, m);
    const double right = gauss_legendre(f, m, b);
    if (std::abs(left + right - whole) <= tol || depth > 40) return left + right;
    return adaptive_gl(f, a, m, 0.5 * tol, depth + 1) + adaptive_gl(f, m, b, 0.5 * tol, depth + 1);
}

}  // namespace shearlab::quad
