#pragma once

#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "shearlab/error.hpp"

namespace shearlab {

struct Periodic {
    double Ly = 8.0 * std::numbers::pi;
    bool operator==(const Periodic&) const = default;
};

/// Finite channel (a, b). Samples live on the Ny interior points of a uniform
/// mesh with spacing (b - a) / (Ny + 1); the end points carry Dirichlet data.
struct Channel {
    double a = 1.0;
    double b = 2.0;
    bool operator==(const Channel&) const = default;
};

using YDomain = std::variant<Periodic, Channel>;

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct Grid {
    int Nx = 16;
    int Ny = 256;
    double Lx = 2.0 * std::numbers::pi;
    YDomain y_domain = Periodic{};
    double dealias_fraction = 2.0 / 3.0;

    bool operator==(const Grid&) const = default;

    bool periodic() const { return std::holds_alternative<Periodic>(y_domain); }
    bool channel() const { return !periodic(); }
    const Channel& chan() const { return std::get<Channel>(y_domain); }

    std::size_t size() const { return static_cast<std::size_t>(Nx) * static_cast<std::size_t>(Ny); }

    /// Length of the y range: Ly for periodic, b - a for channel.
    double y_length() const {
        if (periodic()) return std::get<Periodic>(y_domain).Ly;
        return chan().b - chan().a;
    }

    double dy() const { return periodic() ? y_length() / Ny : y_length() / (Ny + 1); }

    double y(int j) const {
        if (periodic()) return -0.5 * y_length() + j * dy();
        return chan().a + (j + 1) * dy();
    }

    std::vector<double> y_points() const {
        std::vector<double> ys(Ny);
        for (int j = 0; j < Ny; ++j) ys[j] = y(j);
        return ys;
    }

    double x(int i) const { return i * Lx / Nx; }

    /// Signed integer mode for FFT index i (Nyquist maps to -N/2).
    static int mode(int i, int n) { return i < n / 2 ? i : i - n; }

    int kmode(int i) const { return mode(i, Nx); }
    double kx(int i) const { return 2.0 * std::numbers::pi / Lx * kmode(i); }

    /// y wavenumber of spectral index m: Fourier for periodic, sine index (m+1) for channel.
    double ky(int m) const {
        if (periodic()) return 2.0 * std::numbers::pi / y_length() * mode(m, Ny);
        return std::numbers::pi * (m + 1) / y_length();
    }

    double deta() const { return 2.0 * std::numbers::pi / y_length(); }

    void validate() const {
        if (Nx < 8 || Nx % 2 != 0 || !is_pow2(Nx)) throw config_error("grid: Nx must be a power of two >= 8");
        if (!is_pow2(Ny) || Ny < 4) throw config_error("grid: Ny must be a power of two >= 4");
        if (!(Lx > 0)) throw config_error("grid: Lx must be positive");
        if (!(dealias_fraction > 0 && dealias_fraction <= 1)) throw config_error("grid: dealias_fraction must be in (0,1]");
        if (periodic()) {
            if (!(y_length() > 0)) throw config_error("grid: Ly must be positive");
        } else if (!(chan().a < chan().b)) {
            throw config_error("grid: channel requires a < b");
        }
    }
};

/// Index into the k-major coefficient layout.
inline std::size_t at(const Grid& g, int ik, int j) {
    return static_cast<std::size_t>(ik) * static_cast<std::size_t>(g.Ny) + static_cast<std::size_t>(j);
}

struct SobolevIndex {
    double s = 0.0;
    explicit SobolevIndex(double v) : s(v) {
        if (!(v >= -2.0 && v <= 2.0)) throw config_error("Sobolev index must lie in [-2, 2]");
    }
};

}  // namespace shearlab
