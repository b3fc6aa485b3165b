#pragma once

// Spectral core: norms, multiplier inverses, velocity, frame shifts and the
// finite-difference channel machinery shared by the other modules.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "shearlab/field.hpp"

namespace shearlab {

inline constexpr const char* kNormConvention =
    "normalized-measure inhomogeneous H^s: weight (1+kx^2+ky^2)^s, ||sin x||_L2 = 1/sqrt(2)";

// ---------------------------------------------------------------------------
// Norms and inner products

namespace detail {

/// Orthonormal sine coefficients of each k-row, scaled so that the plain sum of
/// squares equals the normalized L2 norm squared.
inline std::vector<cplx> channel_sine_coeffs(const SpectralField& u) {
    const Grid& g = u.grid();
    const int nx = g.Nx, ny = g.Ny;
    std::vector<double> re(g.size()), im(g.size());
    auto c = u.coeffs();
    for (std::size_t n = 0; n < g.size(); ++n) {
        re[n] = c[n].real();
        im[n] = c[n].imag();
    }
    fft::dst1_rows(re, nx, ny);
    fft::dst1_rows(im, nx, ny);
    const double scale = 1.0 / (std::sqrt(2.0 * (ny + 1)) * std::sqrt(ny + 1.0));
    std::vector<cplx> out(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) out[n] = cplx(re[n], im[n]) * scale;
    return out;
}

}  // namespace detail

/// (sum_k sum_eta (1 + kx^2 + eta^2)^s |c|^2)^(1/2). Channel grids use the
/// Dirichlet sine basis of the y discretization. Summation order is fixed.
inline double sobolev_norm(const SpectralField& u, SobolevIndex s) {
    const Grid& g = u.grid();
    double acc = 0.0;
    if (g.periodic()) {
        auto c = u.coeffs();
        for (int i = 0; i < g.Nx; ++i) {
            const double k2 = g.kx(i) * g.kx(i);
            for (int m = 0; m < g.Ny; ++m) {
                const double e = g.ky(m);
                acc += std::pow(1.0 + k2 + e * e, s.s) * std::norm(c[at(g, i, m)]);
            }
        }
    } else {
        auto c = detail::channel_sine_coeffs(u);
        for (int i = 0; i < g.Nx; ++i) {
            const double k2 = g.kx(i) * g.kx(i);
            for (int m = 0; m < g.Ny; ++m) {
                const double e = g.ky(m);
                acc += std::pow(1.0 + k2 + e * e, s.s) * std::norm(c[at(g, i, m)]);
            }
        }
    }
    return std::sqrt(acc);
}

inline double sobolev_norm(const SpectralField& u, double s) { return sobolev_norm(u, SobolevIndex(s)); }

inline double l2_norm(const SpectralField& u) {
    const Grid& g = u.grid();
    double acc = 0.0;
    for (auto v : u.coeffs()) acc += std::norm(v);
    if (g.channel()) acc /= (g.Ny + 1);
    return std::sqrt(acc);
}

/// <u, v> under the normalized measure (conjugate-linear in u).
inline cplx inner(const SpectralField& u, const SpectralField& v) {
    u.check_compatible(v);
    cplx acc{0.0, 0.0};
    auto a = u.coeffs();
    auto b = v.coeffs();
    for (std::size_t n = 0; n < a.size(); ++n) acc += std::conj(a[n]) * b[n];
    if (u.grid().channel()) acc /= static_cast<double>(u.Ny() + 1);
    return acc;
}

/// L2 norm computed from physical samples with the same normalization.
inline double physical_l2(const SpectralField& u) {
    auto s = inverse_transform(u);
    double acc = 0.0;
    for (auto v : s) acc += std::norm(v);
    const Grid& g = u.grid();
    const double denom = g.periodic() ? static_cast<double>(g.size()) : static_cast<double>(g.Nx) * (g.Ny + 1);
    return std::sqrt(acc / denom);
}

/// Fraction of L2 energy sitting in the outer 10% of the y range.
inline double boundary_mass(const SpectralField& u) {
    const Grid& g = u.grid();
    auto h = to_hybrid(u);
    const double L = g.y_length();
    const double lo = g.periodic() ? -0.5 * L : g.chan().a;
    double edge = 0.0, total = 0.0;
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j) {
            const double e = std::norm(h[at(g, i, j)]);
            const double r = (g.y(j) - lo) / L;
            total += e;
            if (r < 0.1 || r > 0.9) edge += e;
        }
    return total > 0 ? edge / total : 0.0;
}

// ---------------------------------------------------------------------------
// Mode projections

inline SpectralField project_nonzero_k(SpectralField u) {
    for (int j = 0; j < u.Ny(); ++j) u(0, j) = 0.0;
    return u;
}

inline SpectralField project_zero_k(SpectralField u) {
    for (int i = 1; i < u.Nx(); ++i)
        for (int j = 0; j < u.Ny(); ++j) u(i, j) = 0.0;
    return u;
}

inline double k0_content(const SpectralField& u) {
    double acc = 0.0, tot = 0.0;
    for (int i = 0; i < u.Nx(); ++i)
        for (int j = 0; j < u.Ny(); ++j) {
            const double e = std::norm(u(i, j));
            tot += e;
            if (i == 0) acc += e;
        }
    return tot > 0 ? std::sqrt(acc / tot) : 0.0;
}

inline bool dealiased_mode_x(const Grid& g, int i) {
    return std::abs(g.kmode(i)) <= static_cast<int>(g.dealias_fraction * g.Nx / 2.0);
}
inline bool dealiased_mode_y(const Grid& g, int m) {
    return std::abs(Grid::mode(m, g.Ny)) <= static_cast<int>(g.dealias_fraction * g.Ny / 2.0);
}

/// Zero the modes outside the dealiasing band (x always; y only on periodic grids).
inline SpectralField dealias(SpectralField u) {
    const Grid& g = u.grid();
    for (int i = 0; i < g.Nx; ++i) {
        const bool kx_ok = dealiased_mode_x(g, i);
        for (int m = 0; m < g.Ny; ++m)
            if (!kx_ok || (g.periodic() && !dealiased_mode_y(g, m))) u(i, m) = 0.0;
    }
    return u;
}

// ---------------------------------------------------------------------------
// Channel finite differences (homogeneous Dirichlet ghost values)

namespace channel {

/// Central first derivative on each k-row of a hybrid array.
inline std::vector<cplx> d_dy(const Grid& g, std::span<const cplx> h) {
    std::vector<cplx> out(h.size());
    const double inv2h = 1.0 / (2.0 * g.dy());
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j) {
            const cplx up = j + 1 < g.Ny ? h[at(g, i, j + 1)] : cplx{};
            const cplx dn = j > 0 ? h[at(g, i, j - 1)] : cplx{};
            out[at(g, i, j)] = (up - dn) * inv2h;
        }
    return out;
}

inline std::vector<cplx> d2_dy2(const Grid& g, std::span<const cplx> h) {
    std::vector<cplx> out(h.size());
    const double inv = 1.0 / (g.dy() * g.dy());
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j) {
            const cplx up = j + 1 < g.Ny ? h[at(g, i, j + 1)] : cplx{};
            const cplx dn = j > 0 ? h[at(g, i, j - 1)] : cplx{};
            out[at(g, i, j)] = (up - 2.0 * h[at(g, i, j)] + dn) * inv;
        }
    return out;
}

/// Solve a complex tridiagonal system (Thomas). lower[0] and upper[n-1] unused.
inline std::vector<cplx> solve_tridiagonal(std::span<const cplx> lower, std::span<const cplx> diag,
                                           std::span<const cplx> upper, std::span<const cplx> rhs) {
    const std::size_t n = diag.size();
    std::vector<cplx> c(n), d(n), x(n);
    cplx beta = diag[0];
    if (std::abs(beta) == 0.0) throw numerical_error("singular tridiagonal system");
    c[0] = upper[0] / beta;
    d[0] = rhs[0] / beta;
    for (std::size_t j = 1; j < n; ++j) {
        beta = diag[j] - lower[j] * c[j - 1];
        if (std::abs(beta) < 1e-300) throw numerical_error("singular tridiagonal system");
        c[j] = j + 1 < n ? upper[j] / beta : cplx{};
        d[j] = (rhs[j] - lower[j] * d[j - 1]) / beta;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) x[j] = d[j] - c[j] * x[j + 1];
    return x;
}

/// Solve (D2 - kx^2) phi = w for one k-row with homogeneous Dirichlet ends.
inline std::vector<cplx> dirichlet_laplacian_solve(const Grid& g, double kx, std::span<const cplx> w) {
    const int n = g.Ny;
    const double inv = 1.0 / (g.dy() * g.dy());
    std::vector<cplx> lo(n, inv), di(n, -2.0 * inv - kx * kx), up(n, inv);
    return solve_tridiagonal(lo, di, up, w);
}

/// Apply E_t: multiply row k by exp(i kx t U(y_j)).
inline void apply_phase(const Grid& g, std::span<cplx> h, double t, std::span<const double> U) {
    for (int i = 0; i < g.Nx; ++i) {
        const double kx = g.kx(i);
        if (kx == 0.0) continue;
        for (int j = 0; j < g.Ny; ++j) h[at(g, i, j)] *= std::polar(1.0, kx * t * U[j]);
    }
}

}  // namespace channel

// ---------------------------------------------------------------------------
// Derivatives

inline SpectralField ddx(const SpectralField& u) {
    SpectralField out(u.grid(), u.frame());
    const Grid& g = u.grid();
    for (int i = 0; i < g.Nx; ++i) {
        const cplx ik(0.0, g.kx(i));
        for (int j = 0; j < g.Ny; ++j) out(i, j) = ik * u(i, j);
    }
    return out;
}

/// y derivative: spectral on periodic grids, second-order central differences on channels.
inline SpectralField ddy(const SpectralField& u) {
    const Grid& g = u.grid();
    SpectralField out(g, u.frame());
    if (g.periodic()) {
        for (int i = 0; i < g.Nx; ++i)
            for (int m = 0; m < g.Ny; ++m) {
                const int mm = Grid::mode(m, g.Ny);
                const double e = (2 * mm == -g.Ny) ? 0.0 : g.ky(m);
                out(i, m) = cplx(0.0, e) * u(i, m);
            }
    } else {
        auto d = channel::d_dy(g, u.coeffs());
        std::copy(d.begin(), d.end(), out.coeffs().begin());
    }
    return out;
}

inline SpectralField laplacian(const SpectralField& u) {
    const Grid& g = u.grid();
    SpectralField out(g, u.frame());
    if (g.periodic()) {
        for (int i = 0; i < g.Nx; ++i)
            for (int m = 0; m < g.Ny; ++m) {
                const double k2 = g.kx(i) * g.kx(i) + g.ky(m) * g.ky(m);
                out(i, m) = -k2 * u(i, m);
            }
    } else {
        auto d = channel::d2_dy2(g, u.coeffs());
        for (int i = 0; i < g.Nx; ++i)
            for (int j = 0; j < g.Ny; ++j) out(i, j) = d[at(g, i, j)] - g.kx(i) * g.kx(i) * u(i, j);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Elliptic inverses

/// Delta^{-1}. Periodic: multiplier -1/(kx^2+eta^2), mean mode must vanish.
/// Channel: homogeneous Dirichlet finite-difference solve per k.
inline SpectralField invert_laplacian(const SpectralField& w) {
    const Grid& g = w.grid();
    SpectralField phi(g, w.frame());
    if (g.periodic()) {
        const double scale = std::max(1.0, std::abs(w(0, 0)));
        if (std::abs(w(0, 0)) > 1e-12 * scale && std::abs(w(0, 0)) > 1e-14)
            throw hypothesis_error("invert_laplacian: nonzero mean on a periodic grid");
        for (int i = 0; i < g.Nx; ++i)
            for (int m = 0; m < g.Ny; ++m) {
                if (i == 0 && m == 0) continue;
                const double k2 = g.kx(i) * g.kx(i) + g.ky(m) * g.ky(m);
                phi(i, m) = -w(i, m) / k2;
            }
    } else {
        for (int i = 0; i < g.Nx; ++i) {
            std::span<const cplx> row(&w.coeffs()[at(g, i, 0)], g.Ny);
            auto sol = channel::dirichlet_laplacian_solve(g, g.kx(i), row);
            std::copy(sol.begin(), sol.end(), &phi.coeffs()[at(g, i, 0)]);
        }
    }
    return phi;
}

enum class ZeroModes { Reject, Zero };

/// Delta_t^{-1} for Couette, Delta_t = dx^2 + (dy - t dx)^2.
/// Periodic: multiplier -1/(kx^2 + (eta - kx t)^2).
/// Channel: E_t (D2 - kx^2)^{-1} E_t^{-1} with E_t = exp(i kx t y).
inline SpectralField invert_sheared_laplacian(const SpectralField& w, double t, ZeroModes policy = ZeroModes::Reject) {
    const Grid& g = w.grid();
    SpectralField phi(g, w.frame());
    double k0 = 0.0, all = 0.0;
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j) {
            all = std::max(all, std::abs(w(i, j)));
            if (i == 0) k0 = std::max(k0, std::abs(w(i, j)));
        }
    if (k0 > 1e-12 * all && policy == ZeroModes::Reject)
            throw hypothesis_error("invert_sheared_laplacian: k = 0 content requires the zeroing flag");
    if (g.periodic()) {
        for (int i = 1; i < g.Nx; ++i) {
            const double kx = g.kx(i);
            for (int m = 0; m < g.Ny; ++m) {
                const double e = g.ky(m) - kx * t;
                phi(i, m) = -w(i, m) / (kx * kx + e * e);
            }
        }
    } else {
        const auto ys = g.y_points();
        std::vector<cplx> h(w.coeffs().begin(), w.coeffs().end());
        channel::apply_phase(g, h, -t, ys);
        for (int i = 1; i < g.Nx; ++i) {
            std::span<const cplx> row(&h[at(g, i, 0)], g.Ny);
            auto sol = channel::dirichlet_laplacian_solve(g, g.kx(i), row);
            std::copy(sol.begin(), sol.end(), &h[at(g, i, 0)]);
        }
        for (int j = 0; j < g.Ny; ++j) h[at(g, 0, j)] = 0.0;
        channel::apply_phase(g, h, t, ys);
        std::copy(h.begin(), h.end(), phi.coeffs().begin());
    }
    return phi;
}

// ---------------------------------------------------------------------------
// Velocity

struct Velocity {
    SpectralField vx, vy;
};

/// v = grad^perp phi = (-dy phi, dx phi).
inline Velocity velocity(const SpectralField& phi) {
    Velocity v{ddy(phi), ddx(phi)};
    v.vx *= -1.0;
    return v;
}

inline SpectralField divergence(const Velocity& v) { return ddx(v.vx) + ddy(v.vy); }

// ---------------------------------------------------------------------------
// Frame shifts

/// u(x + t U(y), y) evaluated pointwise on the grid (exact for channel grids,
/// exact on periodic grids when the induced eta shift is a lattice vector).
inline SpectralField shear_shift(const SpectralField& u, double t, std::span<const double> U) {
    const Grid& g = u.grid();
    auto h = to_hybrid(u);
    channel::apply_phase(g, h, t, U);
    return from_hybrid(g, std::move(h), u.frame());
}

inline SpectralField shear_shift(const SpectralField& u, double t) {
    const auto ys = u.grid().y_points();
    return shear_shift(u, t, ys);
}

enum class ShiftDir { ToLagrangian, ToEulerian };

struct ShiftReport {
    bool commensurate = true;
    /// Energy fraction in the outer 10% of y after a resampled shift; the
    /// periodic image is only faithful when this is small.
    double edge_energy = 0.0;
};

/// Shift is commensurate when kx * t is an integer multiple of the eta spacing.
inline bool commensurate(const Grid& g, double t) {
    if (g.channel()) return true;
    const double r = t * (2.0 * std::numbers::pi / g.Lx) / g.deta();
    return std::abs(r - std::round(r)) < 1e-9 * std::max(1.0, std::abs(r));
}

/// to_lagrangian: u(x + t y, y); to_eulerian: u(x - t y, y).
inline SpectralField shift_frame(const SpectralField& u, double t, ShiftDir dir, bool allow_resample = false,
                                 ShiftReport* report = nullptr) {
    const Grid& g = u.grid();
    const bool comm = commensurate(g, t);
    if (!comm && !allow_resample)
        throw hypothesis_error("shift_frame: incommensurate shift on a periodic grid (enable resampling)");
    SpectralField out = shear_shift(u, dir == ShiftDir::ToLagrangian ? t : -t);
    if (dir == ShiftDir::ToLagrangian && !u.frame().is_lagrangian()) out.set_frame(Frame::lagrangian(t));
    if (dir == ShiftDir::ToEulerian && u.frame().is_lagrangian()) {
        const double rest = *u.frame().lagrangian_time - t;
        out.set_frame(std::abs(rest) < 1e-14 ? Frame::eulerian() : Frame::lagrangian(rest));
    }
    if (report) {
        report->commensurate = comm;
        report->edge_energy = comm ? 0.0 : boundary_mass(out);
    }
    return out;
}

inline void require_periodic(const Grid& g, const char* what) {
    if (!g.periodic()) throw config_error(std::string(what) + " needs a periodic y-domain (Fourier multiplier)");
}

}  // namespace shearlab
