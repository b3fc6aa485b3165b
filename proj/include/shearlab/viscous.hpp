#pragma once

// Forced linearized Navier-Stokes at Couette flow,
//   d_t w + y d_x w = nu Lap w + f,
// solved as a Fourier multiplier in the sheared frame W(x, y) = w(x + t y, y).
// Lagrangian index eta corresponds to the Eulerian wavenumber eta - kx t.

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "shearlab/couette.hpp"
#include "shearlab/diagnostics.hpp"

namespace shearlab {

inline void require_viscosity(double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw config_error("viscosity nu must be positive");
}

/// nu * int_tau^t k^2 + (eta - k s)^2 ds for Lagrangian index eta.
inline double heat_exponent(double k, double eta, double nu, double tau, double t) {
    if (k == 0.0) return nu * eta * eta * (t - tau);
    const double a = eta - k * tau, b = eta - k * t;
    // (a^3 - b^3) / (3k) with a - b = k (t - tau), factored to avoid cancellation
    return nu * (k * k * (t - tau) + (t - tau) * (a * a + a * b + b * b) / 3.0);
}

/// Integrand of b in the variable xi = t - tau, for Eulerian index eta.
inline double b_integrand(double k, double eta, double nu, double xi) {
    const double e = eta + k * xi;
    return std::exp(-nu * (k * k * xi + xi * (e * e + e * eta + eta * eta) / 3.0));
}

namespace detail {
inline double gk_integrate(double k, double eta, double nu, double a, double b, double tol) {
    auto f = [&](double xi) { return b_integrand(k, eta, nu, xi); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol);
}
}  // namespace detail

/// b(t, k, eta) = int_0^t exp(-nu k^2 xi - nu ((eta + k xi)^3 - eta^3) / (3k)) dxi.
inline double b_value(double k, double eta, double nu, double t) {
    if (k == 0.0) throw config_error("b_value requires k != 0");
    require_viscosity(nu);
    if (t <= 0.0) return 0.0;
    // panels of width ~ one decay scale keep the relative tolerance meaningful
    double acc = 0.0, a = 0.0;
    double w = 1.0;
    while (a < t) {
        const double b = std::min(t, a + w);
        acc += detail::gk_integrate(k, eta, nu, a, b, 1e-13);
        if (b_integrand(k, eta, nu, b) < 1e-18 * std::max(acc, 1e-300)) break;
        a = b;
        w *= 2.0;
    }
    return acc;
}

struct BInf {
    double value = 0.0;
    double error_bound = 0.0;
};

/// b at t = infinity by interval doubling. The exponent's xi-derivative is at
/// least nu k^2, so the tail past xi0 is at most integrand(xi0) / (nu k^2).
inline BInf b_inf(double k, double eta, double nu, double tol = 1e-12) {
    if (k == 0.0) throw config_error("b_value requires k != 0");
    require_viscosity(nu);
    double acc = 0.0, a = 0.0, w = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double b = a + w;
        acc += detail::gk_integrate(k, eta, nu, a, b, 1e-14);
        const double tail = b_integrand(k, eta, nu, b) / (nu * k * k);
        if (tail < tol) return {acc, tail};
        a = b;
        w *= 2.0;
    }
    throw numerical_error("b_inf: tail bound did not converge");
}

struct BProfile {
    double k = 1.0, eta = 0.0, nu = 0.1;
    std::vector<double> times;
    std::vector<double> b;
    double b_inf = 0.0;
    double b_inf_error = 0.0;
};

inline BProfile make_bprofile(double k, double eta, double nu, const std::vector<double>& times) {
    BProfile p{k, eta, nu, times, {}, 0.0, 0.0};
    for (double t : times) p.b.push_back(b_value(k, eta, nu, t));
    const auto inf = b_inf(k, eta, nu);
    p.b_inf = inf.value;
    p.b_inf_error = inf.error_bound;
    return p;
}

struct BinfBoundReport {
    double nu = 0.0;
    bool upper_bound_ok = true;
    double max_upper_product = 0.0;  // max b_inf (k^2 + eta^2)
    double c_measured = std::numeric_limits<double>::infinity();
    int c_k = 0;
    double c_eta = 0.0;
    int worst_k = 0;
    double worst_eta = 0.0;
    std::size_t points = 0;
};

/// Checks b_inf (k^2 + eta^2) <= 1/nu on the grid and measures the lower constant.
inline BinfBoundReport check_binf_bounds(const std::vector<int>& ks, const std::vector<double>& etas, double nu) {
    BinfBoundReport r;
    r.nu = nu;
    for (int k : ks)
        for (double eta : etas) {
            if (k == 0) throw config_error("check_binf_bounds: k must be nonzero");
            if (std::abs(eta) < 1.0) throw hypothesis_error("check_binf_bounds: the bound is stated for |eta| >= 1");
            const auto bi = b_inf(k, eta, nu);
            const double prod = bi.value * (double(k) * k + eta * eta);
            ++r.points;
            if (prod > r.max_upper_product) {
                r.max_upper_product = prod;
                r.worst_k = k;
                r.worst_eta = eta;
            }
            if (prod + bi.error_bound * (double(k) * k + eta * eta) > 1.0 / nu) r.upper_bound_ok = false;
            if (prod < r.c_measured) {
                r.c_measured = prod;
                r.c_k = k;
                r.c_eta = eta;
            }
        }
    return r;
}

inline ordered_json to_json(const BinfBoundReport& r) {
    return ordered_json{{"nu", r.nu},
                        {"points", r.points},
                        {"upper_bound_ok", r.upper_bound_ok},
                        {"max_upper_product", r.max_upper_product},
                        {"upper_limit", 1.0 / r.nu},
                        {"worst_mode", {r.worst_k, r.worst_eta}},
                        {"c_measured", r.c_measured},
                        {"c_mode", {r.c_k, r.c_eta}}};
}

// ---------------------------------------------------------------------------
// Multiplier evolution

/// Multiply Lagrangian coefficients by exp(-heat_exponent) over [tau, t].
inline SpectralField heat_propagate(SpectralField W, double nu, double tau, double t) {
    const Grid& g = W.grid();
    for (int i = 0; i < g.Nx; ++i) {
        const double k = g.kx(i);
        for (int m = 0; m < g.Ny; ++m) W(i, m) *= std::exp(-heat_exponent(k, g.ky(m), nu, tau, t));
    }
    return W;
}

/// Lagrangian forcing E_tau f(tau) at a quadrature node.
inline SpectralField lagrangian_forcing(const ForcingSpec& f, double tau) {
    if (f.kind == ForcingKind::Resonant) return f.f0;
    return shear_shift(f.eval(tau), tau);
}

/// Sheared-frame solution W(t): exact homogeneous factor plus Simpson in tau of
/// the forced part with exact exponents.
inline SpectralField multiplier_solution_W(const SpectralField& w0, const ForcingSpec* f, double nu, double t,
                                           int n_steps) {
    require_viscosity(nu);
    require_periodic(w0.grid(), "multiplier_solution");
    SpectralField W = heat_propagate(w0, nu, 0.0, t);
    if (f && t > 0.0) {
        if (n_steps < 2) throw config_error("multiplier_solution needs n_steps >= 2");
        if (n_steps % 2) ++n_steps;
        const double h = t / n_steps;
        const auto wts = quad::simpson_weights(n_steps, h);
        for (int j = 0; j <= n_steps; ++j) {
            const double tau = j * h;
            W.axpy(wts[j], heat_propagate(lagrangian_forcing(*f, tau), nu, tau, t));
        }
    }
    W.set_frame(Frame::lagrangian(t));
    return W;
}

inline SpectralField multiplier_solution(const SpectralField& w0, const ForcingSpec& f, double nu, double t,
                                         int n_steps) {
    auto W = multiplier_solution_W(w0, &f, nu, t, n_steps);
    auto out = shift_frame(W, t, ShiftDir::ToEulerian, true);
    out.set_frame(Frame::eulerian());
    return out;
}

inline SpectralField multiplier_solution(const SpectralField& w0, double nu, double t) {
    auto W = multiplier_solution_W(w0, nullptr, nu, t, 2);
    auto out = shift_frame(W, t, ShiftDir::ToEulerian, true);
    out.set_frame(Frame::eulerian());
    return out;
}

/// Resonant forcing through b: W(t) = H(0,t) W0 + b(t, k, eta - k t) f0.
inline SpectralField viscous_resonant_W(const SpectralField& w0, const SpectralField& f0, double nu, double t) {
    require_viscosity(nu);
    require_periodic(w0.grid(), "viscous_resonant");
    require_mean_free_x(f0, "forcing f0");
    const Grid& g = w0.grid();
    SpectralField W = heat_propagate(w0, nu, 0.0, t);
    for (int i = 1; i < g.Nx; ++i) {
        const double k = g.kx(i);
        for (int m = 0; m < g.Ny; ++m) {
            const cplx fv = f0(i, m);
            if (fv == cplx{}) continue;
            W(i, m) += b_value(k, g.ky(m) - k * t, nu, t) * fv;
        }
    }
    W.set_frame(Frame::lagrangian(t));
    return W;
}

// ---------------------------------------------------------------------------
// Stationary problem  y d_x g - nu Lap g = f0  on [-R, R] with Dirichlet ends

inline Grid stationary_grid(int Nx = 16, int Ny = 1024, double R = 20.0) {
    Grid g;
    g.Nx = Nx;
    g.Ny = Ny;
    g.y_domain = Channel{-R, R};
    g.validate();
    return g;
}

/// Applies y d_x - nu (D2 - kx^2) with the same second-order stencil as the solve.
inline SpectralField apply_L(const SpectralField& u, double nu) {
    const Grid& g = u.grid();
    auto h = to_hybrid(u);
    auto d2 = channel::d2_dy2(g, h);
    std::vector<cplx> out(h.size());
    for (int i = 0; i < g.Nx; ++i) {
        const double k = g.kx(i);
        for (int j = 0; j < g.Ny; ++j) {
            const std::size_t n = at(g, i, j);
            out[n] = cplx(0.0, k * g.y(j)) * h[n] - nu * (d2[n] - k * k * h[n]);
        }
    }
    return from_hybrid(g, std::move(out), u.frame());
}

struct StationarySolution {
    SpectralField g;
    double residual = 0.0;      // relative, ||L g - f|| / ||f||
    double boundary_mass = 0.0;  // energy fraction in the outer 10% of [-R, R]
    double h1_norm = 0.0;
    double h1_bound = 0.0;       // ||f0||_{L2} / nu
};

inline StationarySolution stationary_solve_L(const SpectralField& f0, double nu, double mass_tol = 1e-6) {
    require_viscosity(nu);
    const Grid& g = f0.grid();
    if (!g.channel() || std::abs(g.chan().a + g.chan().b) > 1e-12)
        throw config_error("stationary_solve_L needs a symmetric channel grid [-R, R]");
    require_mean_free_x(f0, "forcing f0");
    auto h = to_hybrid(f0);
    const double inv = 1.0 / (g.dy() * g.dy());
    std::vector<cplx> sol(h.size());
    const int n = g.Ny;
    for (int i = 1; i < g.Nx; ++i) {
        const double k = g.kx(i);
        std::vector<cplx> lo(n, -nu * inv), up(n, -nu * inv), di(n), rhs(n);
        for (int j = 0; j < n; ++j) {
            di[j] = cplx(nu * (2.0 * inv + k * k), k * g.y(j));
            rhs[j] = h[at(g, i, j)];
        }
        auto x = channel::solve_tridiagonal(lo, di, up, rhs);
        for (int j = 0; j < n; ++j) sol[at(g, i, j)] = x[j];
    }
    StationarySolution s;
    s.g = from_hybrid(g, std::move(sol), Frame::eulerian());
    if (!s.g.all_finite()) throw numerical_error("stationary_solve_L: non-finite solution (singular system)");
    const double fn = l2_norm(f0);
    s.residual = fn > 0 ? l2_norm(apply_L(s.g, nu) - f0) / fn : 0.0;
    s.boundary_mass = boundary_mass(s.g);
    s.h1_norm = sobolev_norm(s.g, 1.0);
    s.h1_bound = fn / nu;
    if (s.boundary_mass > mass_tol)
        throw numerical_error("stationary_solve_L: boundary-layer mass " + std::to_string(s.boundary_mass) +
                              " exceeds tolerance; increase R");
    return s;
}

/// y d_x u - nu Lap u on a periodic box, y multiplying pointwise on [-Ly/2, Ly/2).
/// Faithful when u is supported away from the box edge.
inline SpectralField apply_L_periodic(const SpectralField& u, double nu) {
    const Grid& g = u.grid();
    require_periodic(g, "apply_L_periodic");
    auto h = to_hybrid(ddx(u));
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j) h[at(g, i, j)] *= g.y(j);
    auto out = from_hybrid(g, std::move(h), u.frame());
    out.axpy(-nu, laplacian(u));
    return out;
}

/// With stationary forcing f0 = L g, w(t) - g evolves homogeneously:
/// w(t) = g + e^{-nu ...}(w0 - g), evaluated exactly per mode.
inline SpectralField stationary_damping(const SpectralField& w0, const SpectralField& g, double nu, double t) {
    auto d = multiplier_solution(w0 - g, nu, t);
    return d + g;
}

// ---------------------------------------------------------------------------
// Enhanced dissipation

struct DissipationProbe {
    Series l2;
    RateFit fit;
};

/// L2 norm of the homogeneous evolution of a single-k packet and its exp-poly fit.
inline DissipationProbe enhanced_dissipation_probe(const SpectralField& w0, double nu, const std::vector<double>& times,
                                                   double noise_floor = 1e-250) {
    require_periodic(w0.grid(), "enhanced_dissipation_probe");
    const Grid& g = w0.grid();
    int active = -1;
    for (int i = 0; i < g.Nx; ++i)
        for (int m = 0; m < g.Ny; ++m)
            if (std::abs(w0(i, m)) > 0.0) {
                const int k = std::abs(g.kmode(i));
                if (active >= 0 && k != active) throw hypothesis_error("enhanced_dissipation_probe needs a single-k packet");
                active = k;
            }
    if (active < 0) throw hypothesis_error("enhanced_dissipation_probe: empty packet");
    DissipationProbe p;
    p.l2.name = "l2";
    const double n0 = l2_norm(w0);
    for (double t : times) {
        const double v = l2_norm(heat_propagate(w0, nu, 0.0, t));
        if (v > noise_floor * n0) p.l2.push(t, v);
    }
    if (p.l2.size() < 5) throw numerical_error("enhanced_dissipation_probe: fewer than 5 usable samples above the noise floor");
    p.fit = fit_exp_poly(p.l2, 0.0, Window{times.front(), times.back()});
    return p;
}

/// Uniform-in-eta damping envelope exp(-nu k_min^2 t^3 / 12).
inline double damping_envelope(double nu, double kmin, double t) { return std::exp(-nu * kmin * kmin * t * t * t / 12.0); }

/// Reference curve exp(-nu k^2 t^3 / 3), sharp only for eta = 0.
inline double reference_curve(double nu, double k, double t) { return std::exp(-nu * k * k * t * t * t / 3.0); }

}  // namespace shearlab
