#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "shearlab/error.hpp"
#include "shearlab/fft.hpp"
#include "shearlab/grid.hpp"

namespace shearlab {

using cplx = std::complex<double>;

/// Which coordinates the coefficients are expressed in. A Lagrangian field at
/// time t represents W(x, y) = omega(x + t U(y), y).
struct Frame {
    std::optional<double> lagrangian_time;

    static Frame eulerian() { return {}; }
    static Frame lagrangian(double t) { return {t}; }
    bool is_lagrangian() const { return lagrangian_time.has_value(); }
    bool operator==(const Frame&) const = default;
};

/// Complex coefficient array in k-major layout.
///
/// Periodic grids hold normalized 2-D Fourier coefficients c(k, eta) with
/// u(x,y) = sum c exp(i(kx x + eta y)). Channel grids hold the x-Fourier
/// coefficients sampled at the interior y points, c(k, y_j).
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(Grid g, Frame f = Frame::eulerian())
        : grid_(std::move(g)), frame_(f), c_(grid_.size(), cplx{0.0, 0.0}) {}

    const Grid& grid() const { return grid_; }
    const Frame& frame() const { return frame_; }
    void set_frame(Frame f) { frame_ = f; }

    std::span<cplx> coeffs() { return c_; }
    std::span<const cplx> coeffs() const { return c_; }

    cplx& operator()(int ik, int j) { return c_[at(grid_, ik, j)]; }
    const cplx& operator()(int ik, int j) const { return c_[at(grid_, ik, j)]; }

    int Nx() const { return grid_.Nx; }
    int Ny() const { return grid_.Ny; }

    SpectralField& operator+=(const SpectralField& o) {
        check_compatible(o);
        for (std::size_t n = 0; n < c_.size(); ++n) c_[n] += o.c_[n];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_compatible(o);
        for (std::size_t n = 0; n < c_.size(); ++n) c_[n] -= o.c_[n];
        return *this;
    }
    SpectralField& operator*=(cplx a) {
        for (auto& v : c_) v *= a;
        return *this;
    }
    /// this += a * o
    SpectralField& axpy(cplx a, const SpectralField& o) {
        check_compatible(o);
        for (std::size_t n = 0; n < c_.size(); ++n) c_[n] += a * o.c_[n];
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(cplx s, SpectralField a) { return a *= s; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= cplx{s, 0.0}; }

    void check_compatible(const SpectralField& o) const {
        if (!(grid_ == o.grid_)) throw config_error("field grids differ");
    }

    bool all_finite() const {
        return std::all_of(c_.begin(), c_.end(), [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
    }

private:
    Grid grid_;
    Frame frame_;
    std::vector<cplx> c_;
};

/// Physical samples u(x_i, y_j) in x-major layout [i * Ny + j].
using Samples = std::vector<cplx>;

inline void check_samples(const Grid& g, std::span<const cplx> s) {
    if (s.size() != g.size()) throw config_error("sample array size does not match grid");
    for (auto v : s)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw numerical_error("non-finite input samples");
}

namespace detail {

/// Periodic y samples start at -Ly/2; FFT coefficients refer to an origin at the
/// first sample, so eta-mode m picks up exp(i pi m) = (-1)^m.
inline void y_origin_phase(const Grid& g, std::span<cplx> c) {
    for (int i = 0; i < g.Nx; ++i)
        for (int m = 1; m < g.Ny; m += 2) c[at(g, i, m)] = -c[at(g, i, m)];
}

}  // namespace detail

/// Physical samples -> coefficients.
inline SpectralField transform(const Grid& g, std::span<const cplx> samples, Frame f = Frame::eulerian()) {
    check_samples(g, samples);
    SpectralField out(g, f);
    auto c = out.coeffs();
    std::copy(samples.begin(), samples.end(), c.begin());
    if (g.periodic()) {
        fft::fft2(c, g.Nx, g.Ny, fft::Dir::Forward);
        const double n = static_cast<double>(g.size());
        for (auto& v : c) v /= n;
        detail::y_origin_phase(g, c);
    } else {
        fft::fft_x(c, g.Nx, g.Ny, fft::Dir::Forward);
        const double n = g.Nx;
        for (auto& v : c) v /= n;
    }
    return out;
}

inline SpectralField transform(const Grid& g, const std::vector<double>& samples, Frame f = Frame::eulerian()) {
    Samples s(samples.begin(), samples.end());
    return transform(g, s, f);
}

/// Coefficients -> physical samples.
inline Samples inverse_transform(const SpectralField& u) {
    const Grid& g = u.grid();
    Samples s(u.coeffs().begin(), u.coeffs().end());
    if (g.periodic()) {
        detail::y_origin_phase(g, s);
        fft::fft2(s, g.Nx, g.Ny, fft::Dir::Backward);
    } else
        fft::fft_x(s, g.Nx, g.Ny, fft::Dir::Backward);
    return s;
}

/// Sample a real function f(x, y) on the grid and transform it.
template <class F>
SpectralField sample(const Grid& g, F&& f, Frame fr = Frame::eulerian()) {
    Samples s(g.size());
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j) s[at(g, i, j)] = cplx(f(g.x(i), g.y(j)), 0.0);
    return transform(g, s, fr);
}

/// (k, y_j) representation. For channel fields this is the storage itself.
inline std::vector<cplx> to_hybrid(const SpectralField& u) {
    std::vector<cplx> h(u.coeffs().begin(), u.coeffs().end());
    if (u.grid().periodic()) {
        detail::y_origin_phase(u.grid(), h);
        fft::fft_y(h, u.Nx(), u.Ny(), fft::Dir::Backward);
    }
    return h;
}

inline SpectralField from_hybrid(const Grid& g, std::vector<cplx> h, Frame f) {
    SpectralField out(g, f);
    if (g.periodic()) {
        fft::fft_y(h, g.Nx, g.Ny, fft::Dir::Forward);
        for (auto& v : h) v /= static_cast<double>(g.Ny);
        detail::y_origin_phase(g, h);
    }
    std::copy(h.begin(), h.end(), out.coeffs().begin());
    return out;
}

/// Hybrid (k, y_j) array -> physical samples.
inline Samples hybrid_to_physical(const Grid& g, std::vector<cplx> h) {
    fft::fft_x(h, g.Nx, g.Ny, fft::Dir::Backward);
    return h;
}

inline std::vector<cplx> physical_to_hybrid(const Grid& g, Samples s) {
    fft::fft_x(s, g.Nx, g.Ny, fft::Dir::Forward);
    for (auto& v : s) v /= static_cast<double>(g.Nx);
    return s;
}

/// Largest |imag| of the physical samples relative to the largest |value|.
inline double reality_defect(const SpectralField& u) {
    auto s = inverse_transform(u);
    double im = 0.0, mx = 0.0;
    for (auto v : s) {
        im = std::max(im, std::abs(v.imag()));
        mx = std::max(mx, std::abs(v));
    }
    return mx > 0 ? im / mx : 0.0;
}

}  // namespace shearlab
