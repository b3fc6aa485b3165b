#pragma once

// Forced linearized Euler at Couette flow, d_t w + y d_x w = f:
// closed-form resonant / stationary solutions, the Duhamel quadrature oracle and
// the Fourier-in-time reduction of time-periodic forcing.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "shearlab/quadrature.hpp"
#include "shearlab/spectral.hpp"

namespace shearlab {

enum class ForcingKind { Resonant, Stationary, TimePeriodic };

inline void require_mean_free_x(const SpectralField& f, const std::string& what) {
    double k0 = 0.0, all = 0.0;
    for (int i = 0; i < f.Nx(); ++i)
        for (int j = 0; j < f.Ny(); ++j) {
            all = std::max(all, std::abs(f(i, j)));
            if (i == 0) k0 = std::max(k0, std::abs(f(i, j)));
        }
    if (k0 > 1e-12 * std::max(all, 1e-300) && k0 > 1e-15)
        throw hypothesis_error(what + " violates the vanishing average in x (int f dx = 0)");
}

/// Declarative forcing. Resonant: f(t) = f0(x - t y, y). Stationary: f(t) = f0.
/// TimePeriodic: samples of f over one period, interpolated trigonometrically.
struct ForcingSpec {
    ForcingKind kind = ForcingKind::Stationary;
    SpectralField f0;
    double period_T = 0.0;
    double phase_speed_c = 0.0;
    std::vector<SpectralField> period_samples;

    static ForcingSpec resonant(SpectralField f0) {
        require_mean_free_x(f0, "forcing f0");
        return {ForcingKind::Resonant, std::move(f0), 0.0, 0.0, {}};
    }
    static ForcingSpec stationary(SpectralField f0) {
        require_mean_free_x(f0, "forcing f0");
        return {ForcingKind::Stationary, std::move(f0), 0.0, 0.0, {}};
    }
    static ForcingSpec time_periodic(std::vector<SpectralField> samples, double T) {
        if (!(T > 0)) throw config_error("time-periodic forcing needs period_T > 0");
        if (samples.size() < 8) throw hypothesis_error("time-periodic forcing undersampled: need >= 8 samples per period");
        for (auto& s : samples) require_mean_free_x(s, "forcing sample");
        ForcingSpec f{ForcingKind::TimePeriodic, samples.front(), T, 0.0, std::move(samples)};
        return f;
    }

    /// Eulerian forcing at time t.
    SpectralField eval(double t) const {
        switch (kind) {
            case ForcingKind::Resonant:
                return shear_shift(f0, -t);
            case ForcingKind::Stationary:
                return f0;
            case ForcingKind::TimePeriodic:
                break;
        }
        const int M = static_cast<int>(period_samples.size());
        SpectralField out(f0.grid());
        // trigonometric interpolation through the M samples
        for (int n = 0; n < M; ++n) {
            const double tn = n * period_T / M;
            const double x = std::numbers::pi * (t - tn) / period_T;
            double w;
            if (std::abs(std::sin(x)) < 1e-14) {
                w = 1.0;
            } else if (M % 2 == 1) {
                w = std::sin(M * x) / (M * std::sin(x));
            } else {
                w = std::sin(M * x) / (M * std::tan(x));
            }
            out.axpy(w, period_samples[n]);
        }
        return out;
    }
};

/// Transport by the shear: w0(x - t y, y).
inline SpectralField solve_unforced(const SpectralField& w0, double t, bool allow_resample = false) {
    auto out = shift_frame(w0, t, ShiftDir::ToEulerian, allow_resample);
    out.set_frame(Frame::eulerian());
    return out;
}

/// w(t) = w0(x - t y, y) + t f0(x - t y, y).
inline SpectralField solve_resonant(const SpectralField& w0, const SpectralField& f0, double t,
                                    bool allow_resample = false) {
    require_mean_free_x(f0, "forcing f0");
    SpectralField s = w0;
    s.axpy(t, f0);
    return solve_unforced(s, t, allow_resample);
}

/// g solves y d_x g = f0, i.e. g = (1/y) d_x^{-1} f0.
struct AntiderivativeG {
    SpectralField g;
    SpectralField source;
};

/// Pointwise division by the shear velocity profile V(y_j) followed by d_x^{-1}.
/// Requires |V| >= vmin wherever the data live.
inline SpectralField divide_by_ikV(const SpectralField& f, std::span<const double> V, double vmin,
                                   const std::string& hypothesis) {
    const Grid& g = f.grid();
    auto h = to_hybrid(f);
    double mx = 0.0;
    for (auto v : h) mx = std::max(mx, std::abs(v));
    for (int i = 0; i < g.Nx; ++i) {
        const double kx = g.kx(i);
        for (int j = 0; j < g.Ny; ++j) {
            cplx& v = h[at(g, i, j)];
            if (i == 0) {
                v = 0.0;
                continue;
            }
            if (std::abs(V[j]) < vmin) {
                if (std::abs(v) > 1e-13 * std::max(mx, 1e-300)) throw hypothesis_error(hypothesis);
                v = 0.0;
                continue;
            }
            v /= cplx(0.0, kx * V[j]);
        }
    }
    return from_hybrid(g, std::move(h), f.frame());
}

inline AntiderivativeG antiderivative_g(const SpectralField& f0) {
    require_mean_free_x(f0, "forcing f0");
    const Grid& g = f0.grid();
    const std::string hyp = "the channel must satisfy |y| >= 1 (domain containing y = 0 is not allowed)";
    if (g.channel() && !(g.chan().a >= 1.0 || g.chan().b <= -1.0)) throw hypothesis_error(hyp);
    const auto ys = g.y_points();
    return {divide_by_ikV(f0, ys, 1.0, hyp + "; f0 has support where |y| < 1"), f0};
}

/// w(t) = w0(x - t y, y) - g(x - t y, y) + g(x, y).
inline SpectralField solve_stationary(const SpectralField& w0, const SpectralField& f0, double t,
                                      bool allow_resample = false) {
    auto G = antiderivative_g(f0);
    auto out = solve_unforced(w0 - G.g, t, allow_resample);
    out += G.g;
    return out;
}

using ForcingClosure = std::function<SpectralField(double)>;

/// Composite Simpson for w0(x-ty,y) + int_0^t f(tau, x-(t-tau)y, y) dtau.
inline SpectralField duhamel_quadrature(const SpectralField& w0, const ForcingClosure& f, double t, int n_steps) {
    if (n_steps < 2) throw config_error("duhamel_quadrature needs n_steps >= 2");
    if (n_steps % 2) ++n_steps;
    auto out = solve_unforced(w0, t, true);
    if (t == 0.0) return out;
    const double h = t / n_steps;
    const auto w = quad::simpson_weights(n_steps, h);
    for (int j = 0; j <= n_steps; ++j) {
        const double tau = j * h;
        SpectralField fj;
        try {
            fj = f(tau);
        } catch (const std::exception& e) {
            throw numerical_error("forcing closure failed at tau = " + std::to_string(tau) + ": " + e.what());
        }
        if (!fj.all_finite()) throw numerical_error("forcing closure returned non-finite values at tau = " + std::to_string(tau));
        out.axpy(w[j], shear_shift(fj, -(t - tau)));
    }
    return out;
}

inline SpectralField duhamel_quadrature(const SpectralField& w0, const ForcingSpec& f, double t, int n_steps) {
    return duhamel_quadrature(w0, [&f](double tau) { return f.eval(tau); }, t, n_steps);
}

// ---------------------------------------------------------------------------
// Time-periodic reduction

/// One Fourier-in-time component: forcing exp(i c t) F(y) exp(i k x). In the
/// frame rotating with exp(-i c t) it is stationary forcing for the transport
/// speed y + c/k (Galilean shift y -> y + c/k).
struct PeriodicComponent {
    double c = 0.0;
    int k = 0;
    double galilean_shift = 0.0;
    SpectralField forcing;  // single x-mode, stationary-type
};

inline std::vector<PeriodicComponent> reduce_time_periodic(const ForcingSpec& f, double drop_tol = 1e-14) {
    if (f.kind != ForcingKind::TimePeriodic) {
        // already stationary-type: identity reduction, one component per active k
        if (f.kind == ForcingKind::Resonant) throw config_error("resonant forcing is not time-periodic");
        std::vector<PeriodicComponent> out;
        const Grid& g = f.f0.grid();
        for (int i = 1; i < g.Nx; ++i) {
            SpectralField fk(g);
            double e = 0.0;
            for (int j = 0; j < g.Ny; ++j) {
                fk(i, j) = f.f0(i, j);
                e += std::norm(f.f0(i, j));
            }
            if (e > drop_tol * drop_tol) out.push_back({0.0, g.kmode(i), 0.0, std::move(fk)});
        }
        return out;
    }
    const int M = static_cast<int>(f.period_samples.size());
    if (M < 8) throw hypothesis_error("time-periodic forcing undersampled: need >= 8 samples per period");
    const Grid& g = f.f0.grid();
    std::vector<PeriodicComponent> out;
    double scale = 0.0;
    for (auto& s : f.period_samples) scale = std::max(scale, l2_norm(s));
    for (int n = 0; n < M; ++n) {
        const int freq = Grid::mode(n, M);
        if (2 * freq == -M) continue;  // Nyquist in time is ambiguous; require it to vanish
        const double c = 2.0 * std::numbers::pi * freq / f.period_T;
        SpectralField Fn(g);
        for (int m = 0; m < M; ++m) {
            const double ang = -2.0 * std::numbers::pi * freq * m / M;
            Fn.axpy(std::polar(1.0 / M, ang), f.period_samples[m]);
        }
        for (int i = 1; i < g.Nx; ++i) {
            SpectralField fk(g);
            double e = 0.0;
            for (int j = 0; j < g.Ny; ++j) {
                fk(i, j) = Fn(i, j);
                e += std::norm(Fn(i, j));
            }
            if (std::sqrt(e) <= drop_tol * std::max(scale, 1.0)) continue;
            const int k = g.kmode(i);
            out.push_back({c, k, c / g.kx(i), std::move(fk)});
        }
    }
    return out;
}

/// Solution for one component from rest: exp(i c t) (1 - exp(-i a t)) / (i a) F,
/// with a = kx (y + c/kx). This is the stationary formula with shifted speed.
inline SpectralField solve_component(const PeriodicComponent& comp, double t) {
    const Grid& g = comp.forcing.grid();
    auto h = to_hybrid(comp.forcing);
    const auto ys = g.y_points();
    for (int i = 0; i < g.Nx; ++i) {
        const double kx = g.kx(i);
        for (int j = 0; j < g.Ny; ++j) {
            cplx& v = h[at(g, i, j)];
            if (v == cplx{}) continue;
            const double a = kx * ys[j] + comp.c;
            cplx factor;
            if (std::abs(a * t) < 1e-6)
                factor = t * (1.0 - cplx(0.0, a * t / 2.0));  // resonant streamline limit
            else
                factor = (1.0 - std::polar(1.0, -a * t)) / cplx(0.0, a);
            v *= std::polar(1.0, comp.c * t) * factor;
        }
    }
    return from_hybrid(g, std::move(h), Frame::eulerian());
}

/// Reassemble transport of w0 plus every component's forced response.
inline SpectralField solve_time_periodic(const SpectralField& w0, const ForcingSpec& f, double t) {
    auto out = solve_unforced(w0, t, true);
    for (const auto& comp : reduce_time_periodic(f)) out += solve_component(comp, t);
    return out;
}

}  // namespace shearlab
