#pragma once

// Forced nonlinear Navier-Stokes around Couette flow on the shearing box,
//   d_t w + y d_x w - nu Lap w = f - (v . grad w)_{!=},
// stored in a sheared frame V(x, y) = w(x + s y, y) with s = t - frame_time.
// Lagrangian index eta carries the Eulerian wavenumber eta - kx s.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shearlab/couette.hpp"
#include "shearlab/diagnostics.hpp"
#include "shearlab/viscous.hpp"

namespace shearlab {

struct NSState {
    SpectralField V;
    double t = 0.0;
    double frame_time = 0.0;
    double nu = 0.0;
    std::optional<ForcingSpec> forcing;
    int remap_count = 0;
    /// Largest energy fraction pushed out of the resolved band by a remap.
    double max_remap_loss = 0.0;

    double shear() const { return t - frame_time; }

    /// Eulerian vorticity at time t.
    SpectralField eulerian() const {
        auto w = shear_shift(V, -shear());
        w.set_frame(Frame::eulerian());
        return w;
    }
};

inline NSState make_ns_state(const SpectralField& w0, double nu, std::optional<ForcingSpec> forcing = std::nullopt,
                             double t0 = 0.0) {
    require_viscosity(nu);
    require_periodic(w0.grid(), "nonlinear evolution");
    require_mean_free_x(w0, "initial vorticity");
    if (forcing && !(forcing->f0.grid() == w0.grid())) throw config_error("forcing grid differs from the state grid");
    NSState s;
    s.V = project_nonzero_k(dealias(w0));
    s.V.set_frame(Frame::eulerian());
    s.t = t0;
    s.frame_time = t0;
    s.nu = nu;
    s.forcing = std::move(forcing);
    return s;
}

// ---------------------------------------------------------------------------
// Right-hand side

struct Advection {
    /// -(v . grad w)_{!=} in the frame of the input.
    SpectralField N;
    double ux_max = 0.0, uy_max = 0.0;
};

/// Dealiased pseudo-spectral Jacobian with Eulerian wavenumbers (kx, eta - kx s).
inline Advection advection(const SpectralField& V, double s) {
    const Grid& g = V.grid();
    const std::size_t n = g.size();
    Samples phx(n), phy(n), wx(n), wy(n);
    for (int i = 1; i < g.Nx; ++i) {
        if (!dealiased_mode_x(g, i)) continue;
        const double k = g.kx(i);
        for (int m = 0; m < g.Ny; ++m) {
            if (!dealiased_mode_y(g, m)) continue;
            const cplx c = V(i, m);
            if (c == cplx{}) continue;
            const double e = g.ky(m) - k * s;
            const cplx phi = -c / (k * k + e * e);
            const std::size_t q = at(g, i, m);
            phx[q] = cplx(0.0, k) * phi;
            phy[q] = cplx(0.0, e) * phi;
            wx[q] = cplx(0.0, k) * c;
            wy[q] = cplx(0.0, e) * c;
        }
    }
    // a common translation of the y samples commutes with the product
    for (auto* a : {&phx, &phy, &wx, &wy}) fft::fft2(*a, g.Nx, g.Ny, fft::Dir::Backward);
    Advection out{SpectralField(g, V.frame()), 0.0, 0.0};
    auto p = out.N.coeffs();
    for (std::size_t q = 0; q < n; ++q) {
        // v = (-phi_y, phi_x)
        p[q] = phy[q] * wx[q] - phx[q] * wy[q];
        out.ux_max = std::max(out.ux_max, std::abs(phy[q].real()));
        out.uy_max = std::max(out.uy_max, std::abs(phx[q].real()));
    }
    fft::fft2(p, g.Nx, g.Ny, fft::Dir::Forward);
    const double inv = 1.0 / static_cast<double>(n);
    for (int i = 0; i < g.Nx; ++i) {
        const bool keep_x = i != 0 && dealiased_mode_x(g, i);
        for (int m = 0; m < g.Ny; ++m) {
            auto& v = out.N(i, m);
            v = (keep_x && dealiased_mode_y(g, m)) ? v * inv : cplx{};
        }
    }
    return out;
}

/// Unprojected <W, v . grad W> in the frame with shear s, for the energy identity.
inline double advection_energy_defect(const SpectralField& V, double s) {
    auto N = advection(V, s).N;
    SpectralField Vd = project_nonzero_k(dealias(V));
    return std::abs(inner(Vd, N).real());
}

/// Forcing in the frame of shear s at time t, projected and dealiased.
inline SpectralField frame_forcing(const ForcingSpec& f, double t, double s) {
    SpectralField F = f.kind == ForcingKind::Resonant ? shear_shift(f.f0, s - t) : shear_shift(f.eval(t), s);
    return project_nonzero_k(dealias(F));
}

/// nu Lap_s V - (v . grad w)_{!=} + forcing, all in the frame of the state.
inline SpectralField rhs(const NSState& st) {
    const Grid& g = st.V.grid();
    const double s = st.shear();
    SpectralField out = advection(st.V, s).N;
    for (int i = 0; i < g.Nx; ++i) {
        const double k = g.kx(i);
        for (int m = 0; m < g.Ny; ++m) {
            const double e = g.ky(m) - k * s;
            out(i, m) -= st.nu * (k * k + e * e) * st.V(i, m);
        }
    }
    if (st.forcing) out += frame_forcing(*st.forcing, st.t, s);
    return out;
}

/// The same right-hand side with the nonlinearity dropped.
inline SpectralField rhs_linear(const NSState& st) {
    const Grid& g = st.V.grid();
    const double s = st.shear();
    SpectralField out(g, st.V.frame());
    for (int i = 0; i < g.Nx; ++i) {
        const double k = g.kx(i);
        for (int m = 0; m < g.Ny; ++m) {
            const double e = g.ky(m) - k * s;
            out(i, m) = -st.nu * (k * k + e * e) * st.V(i, m);
        }
    }
    if (st.forcing) out += frame_forcing(*st.forcing, st.t, s);
    return out;
}

// ---------------------------------------------------------------------------
// Time stepping

struct EvolveOptions {
    double dt = 0.01;
    /// Advective CFL bound on dt (|ux| kmax + |uy| emax).
    double cfl = 2.0;
    /// Largest energy fraction a remap may discard.
    double max_remap_loss = 1e-10;
};

namespace ns_detail {

/// Shear unit: the smallest s that shifts every kx by a whole eta lattice step.
inline double shear_unit(const Grid& g) { return g.deta() * g.Lx / (2.0 * std::numbers::pi); }

inline double remap_threshold(const Grid& g) {
    int kmax = 0, mmax = 0;
    for (int i = 0; i < g.Nx; ++i)
        if (dealiased_mode_x(g, i)) kmax = std::max(kmax, std::abs(g.kmode(i)));
    for (int m = 0; m < g.Ny; ++m)
        if (dealiased_mode_y(g, m)) mmax = std::max(mmax, std::abs(Grid::mode(m, g.Ny)));
    // remap once the band of the widest kx has slid by a third of its width
    const double s = mmax * g.deta() / (3.0 * kmax * (2.0 * std::numbers::pi / g.Lx));
    const double u = shear_unit(g);
    return std::max(u, std::ceil(s / u - 1e-9) * u);
}

inline double max_eulerian_wavenumber(const Grid& g, double s) {
    double emax = 0.0;
    for (int i = 0; i < g.Nx; ++i) {
        if (!dealiased_mode_x(g, i)) continue;
        for (int m = 0; m < g.Ny; ++m)
            if (dealiased_mode_y(g, m)) emax = std::max(emax, std::abs(g.ky(m) - g.kx(i) * s));
    }
    return emax;
}

inline double max_kx(const Grid& g) {
    double k = 0.0;
    for (int i = 0; i < g.Nx; ++i)
        if (dealiased_mode_x(g, i)) k = std::max(k, std::abs(g.kx(i)));
    return k;
}

/// Re-centre the frame at the current time by an exact lattice shift.
inline void remap(NSState& st, double loss_tol) {
    const Grid& g = st.V.grid();
    const double s = st.shear();
    double lost = 0.0, tot = 0.0;
    for (int i = 0; i < g.Nx; ++i) {
        const int shift = static_cast<int>(std::lround(g.kx(i) * s / g.deta()));
        for (int m = 0; m < g.Ny; ++m) {
            const double e2 = std::norm(st.V(i, m));
            tot += e2;
            const int me = Grid::mode(m, g.Ny) - shift;
            const int idx = ((me % g.Ny) + g.Ny) % g.Ny;
            if (Grid::mode(idx, g.Ny) != me || !dealiased_mode_y(g, idx)) lost += e2;
        }
    }
    const double frac = tot > 0 ? lost / tot : 0.0;
    st.max_remap_loss = std::max(st.max_remap_loss, frac);
    if (frac > loss_tol)
        throw numerical_error("resolution exhausted at t = " + format_double(st.t) + ": remap would discard energy fraction " +
                              format_double(frac));
    SpectralField out(g, Frame::eulerian());
    for (int i = 0; i < g.Nx; ++i) {
        const int shift = static_cast<int>(std::lround(g.kx(i) * s / g.deta()));
        for (int m = 0; m < g.Ny; ++m) {
            const int me = Grid::mode(m, g.Ny) - shift;
            const int idx = ((me % g.Ny) + g.Ny) % g.Ny;
            if (Grid::mode(idx, g.Ny) == me && dealiased_mode_y(g, idx)) out(i, idx) = st.V(i, m);
        }
    }
    st.V = std::move(out);
    st.frame_time = st.t;
    ++st.remap_count;
}

}  // namespace ns_detail

/// One integrating-factor RK4 step (Lawson) of length h; the heat factor is exact.
inline void if_rk4_step(NSState& st, double h, const EvolveOptions& opt = {}) {
    const Grid& g = st.V.grid();
    const double s = st.shear(), t = st.t, nu = st.nu;
    auto N = [&](const SpectralField& V, double ss, double tt, Advection* keep = nullptr) {
        Advection a = advection(V, ss);
        if (st.forcing) a.N += frame_forcing(*st.forcing, tt, ss);
        if (keep) *keep = a;
        return a.N;
    };
    Advection a0;
    const SpectralField k1 = N(st.V, s, t, &a0);
    const double kmax = ns_detail::max_kx(g), emax = ns_detail::max_eulerian_wavenumber(g, s + h);
    const double c = h * (a0.ux_max * kmax + a0.uy_max * emax);
    if (c > opt.cfl)
        throw numerical_error("CFL violation at t = " + format_double(t) + ": dt * (|u| k) = " + format_double(c));
    const double sh = s + 0.5 * h, s1 = s + h;
    const SpectralField HV_half = heat_propagate(st.V, nu, s, sh);
    const SpectralField HV = heat_propagate(HV_half, nu, sh, s1);
    SpectralField a = HV_half;
    a.axpy(0.5 * h, heat_propagate(k1, nu, s, sh));
    const SpectralField k2 = N(a, sh, t + 0.5 * h);
    SpectralField b = HV_half;
    b.axpy(0.5 * h, k2);
    const SpectralField k3 = N(b, sh, t + 0.5 * h);
    SpectralField cst = HV;
    cst.axpy(h, heat_propagate(k3, nu, sh, s1));
    const SpectralField k4 = N(cst, s1, t + h);
    SpectralField out = HV;
    out.axpy(h / 6.0, heat_propagate(k1, nu, s, s1));
    out.axpy(h / 3.0, heat_propagate(k2 + k3, nu, sh, s1));
    out.axpy(h / 6.0, k4);
    if (!out.all_finite()) throw numerical_error("non-finite state at t = " + format_double(t + h));
    st.V = std::move(out);
    st.t = t + h;
}

/// Advance to t_end; steps land on remap points and on t_end exactly.
inline void evolve(NSState& st, double t_end, const EvolveOptions& opt = {}) {
    if (!(opt.dt > 0)) throw config_error("evolve: dt must be positive");
    if (t_end < st.t) throw config_error("evolve: t_end precedes the current time");
    const Grid& g = st.V.grid();
    const double thr = ns_detail::remap_threshold(g);
    const double eps = 1e-12 * std::max(1.0, t_end);
    while (st.t < t_end - eps) {
        double h = std::min(opt.dt, t_end - st.t);
        const double to_remap = thr - st.shear();
        if (to_remap > eps && h > to_remap - eps) h = to_remap;
        if_rk4_step(st, h, opt);
        if (std::abs(st.shear() - thr) <= eps) ns_detail::remap(st, opt.max_remap_loss);
    }
    st.t = std::max(st.t, t_end);
}

/// Evolve through the requested times and call back at each of them.
inline void trajectory(NSState& st, const std::vector<double>& times, const EvolveOptions& opt,
                       const std::function<void(const NSState&)>& on_time) {
    for (double t : times) {
        evolve(st, t, opt);
        if (on_time) on_time(st);
    }
}

// ---------------------------------------------------------------------------
// Stationary fixed point  L g = f - (v[g] . grad g)_{!=},  L = y d_x - nu Lap

struct FixedPointConfig {
    double nu = 0.5;
    SpectralField f;
    double tol = 1e-10;
    int max_iters = 30;
    double C1 = 1.0 / 40.0;

    static FixedPointConfig make(double nu, SpectralField f, double tol = 1e-10, int max_iters = 30) {
        FixedPointConfig c{nu, std::move(f), tol, max_iters, 1.0 / 40.0};
        c.validate();
        return c;
    }

    void validate() const {
        require_viscosity(nu);
        require_periodic(f.grid(), "fixed_point_stationary");
        require_mean_free_x(f, "forcing f");
        if (!(tol > 0)) throw config_error("fixed point tolerance must be positive");
        if (max_iters < 1) throw config_error("fixed point needs max_iters >= 1");
        const double h1 = sobolev_norm(f, 1.0);
        if (h1 > C1 * nu * nu * (1.0 + 1e-12))
            throw hypothesis_error("forcing too large: ||f||_H1 = " + format_double(h1) + " exceeds nu^2/40 = " +
                                   format_double(C1 * nu * nu));
    }
};

/// Dense per-mode inverse of y d_x - nu Lap on the periodic box, in (kx, y_j).
class StationaryOperator {
public:
    StationaryOperator(const Grid& g, double nu) : g_(g), nu_(nu), lu_(g.Nx) {
        require_periodic(g, "StationaryOperator");
        const int n = g.Ny;
        // spectral second derivative in physical y: circulant, depends on j - l
        std::vector<double> col(n, 0.0);
        for (int d = 0; d < n; ++d) {
            double acc = 0.0;
            for (int m = 0; m < n; ++m) {
                const double e = g.ky(m);
                acc -= e * e * std::cos(e * d * g.dy());
            }
            col[d] = acc / n;
        }
        D2_.resize(n, n);
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) D2_(j, l) = col[(j - l + n) % n];
    }

    /// Solve L g = r; k = 0 content of r must vanish.
    SpectralField solve(const SpectralField& r) const {
        auto h = to_hybrid(r);
        std::vector<cplx> out(h.size());
        for (int i = 1; i < g_.Nx; ++i) {
            bool any = false;
            for (int j = 0; j < g_.Ny && !any; ++j) any = h[at(g_, i, j)] != cplx{};
            if (!any) continue;
            const auto& lu = factor(i);
            Eigen::VectorXcd b(g_.Ny);
            for (int j = 0; j < g_.Ny; ++j) b(j) = h[at(g_, i, j)];
            Eigen::VectorXcd x = lu.solve(b);
            for (int j = 0; j < g_.Ny; ++j) out[at(g_, i, j)] = x(j);
        }
        return from_hybrid(g_, std::move(out), Frame::eulerian());
    }

private:
    const Eigen::PartialPivLU<Eigen::MatrixXcd>& factor(int i) const {
        if (!lu_[i]) {
            const double k = g_.kx(i);
            Eigen::MatrixXcd A = (-nu_ * D2_).cast<cplx>();
            for (int j = 0; j < g_.Ny; ++j) A(j, j) += cplx(nu_ * k * k, k * g_.y(j));
            lu_[i].emplace(A);
        }
        return *lu_[i];
    }

    Grid g_;
    double nu_;
    Eigen::MatrixXd D2_;
    mutable std::vector<std::optional<Eigen::PartialPivLU<Eigen::MatrixXcd>>> lu_;
};

struct FixedPointResult {
    SpectralField g;
    int iterations = 0;
    /// ||g_{n+1} - g_n||_H1 per iteration.
    std::vector<double> increments;
    /// Successive increment ratios.
    std::vector<double> ratios;
    double contraction = 0.0;
    double residual = 0.0;
    double h1_norm = 0.0;
    double h1_bound = 0.0;
    bool bound_ok = false;
    bool damped = false;
    int damped_from = -1;
};

inline ordered_json to_json(const FixedPointResult& r) {
    ordered_json j;
    j["iterations"] = r.iterations;
    j["increments"] = r.increments;
    j["ratios"] = r.ratios;
    j["contraction"] = r.contraction;
    j["residual_l2"] = r.residual;
    j["g_h1"] = r.h1_norm;
    j["g_h1_bound"] = r.h1_bound;
    j["bound_ok"] = r.bound_ok;
    j["damped"] = r.damped;
    if (r.damped) j["damped_from_iteration"] = r.damped_from;
    return j;
}

/// ||L g + (v[g] . grad g)_{!=} - f||_L2.
inline double stationary_residual(const SpectralField& g, const SpectralField& f, double nu) {
    auto r = apply_L_periodic(g, nu);
    r -= advection(g, 0.0).N;
    r -= f;
    return l2_norm(r);
}

/// Picard iteration g_{n+1} = L^{-1}(f - (v[g_n] . grad g_n)_{!=}) from g_0 = 0.
/// Relaxation 0.5 engages after three non-contracting ratios; a second stall aborts.
inline FixedPointResult fixed_point_stationary(const FixedPointConfig& cfg) {
    cfg.validate();
    const Grid& G = cfg.f.grid();
    StationaryOperator L(G, cfg.nu);
    FixedPointResult res;
    SpectralField g(G);
    double omega = 1.0;
    int stalled = 0;
    bool converged = false;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        SpectralField r = cfg.f;
        r += advection(g, 0.0).N;
        SpectralField next = L.solve(project_nonzero_k(r));
        if (omega != 1.0) next = g + omega * (next - g);
        const double inc = sobolev_norm(next - g, 1.0);
        if (!res.increments.empty() && res.increments.back() > 0) {
            res.ratios.push_back(inc / res.increments.back());
            stalled = res.ratios.back() >= 1.0 ? stalled + 1 : 0;
        }
        res.increments.push_back(inc);
        g = std::move(next);
        res.iterations = it;
        if (inc < cfg.tol) {
            converged = true;
            break;
        }
        if (stalled >= 3) {
            if (res.damped) {
                std::string msg = "fixed point does not contract: increments";
                for (double v : res.increments) msg += " " + format_double(v);
                throw numerical_error(msg);
            }
            res.damped = true;
            res.damped_from = it;
            omega = 0.5;
            stalled = 0;
        }
    }
    if (!converged)
        throw numerical_error("fixed point did not converge in " + std::to_string(cfg.max_iters) + " iterations (last increment " +
                              format_double(res.increments.back()) + ")");
    res.g = g;
    res.contraction = 0.0;
    for (double q : res.ratios) res.contraction = std::max(res.contraction, q);
    res.residual = stationary_residual(g, cfg.f, cfg.nu);
    res.h1_norm = sobolev_norm(g, 1.0);
    res.h1_bound = 2.0 * cfg.C1 * cfg.nu;
    res.bound_ok = res.h1_norm <= res.h1_bound;
    return res;
}

// ---------------------------------------------------------------------------
// Perturbation decay around the fixed point

struct DecayOptions {
    double t_end = 20.0;
    double sample_dt = 0.25;
    EvolveOptions evolve;
    /// Samples below this multiple of the initial distance are excluded from the fit.
    double fit_floor = 1e-9;
};

struct DecayReport {
    Series distance{"perturbation_l2", {}, {}};
    RateFit fit;
    /// Smallest rate -d log ||w - g|| / dt over consecutive samples in the fit window.
    double floor_rate = 0.0;
    int remaps = 0;
};

inline DecayReport perturbation_decay(const SpectralField& w0, const SpectralField& g, const FixedPointConfig& cfg,
                                      const DecayOptions& opt = {}) {
    require_mean_free_x(w0, "initial vorticity");
    if (!(opt.sample_dt > 0) || !(opt.t_end > 0)) throw config_error("perturbation_decay: bad sampling");
    NSState st = make_ns_state(w0, cfg.nu, ForcingSpec::stationary(cfg.f));
    DecayReport rep;
    auto record = [&] { rep.distance.push(st.t, l2_norm(st.eulerian() - g)); };
    record();
    const int n = static_cast<int>(std::llround(opt.t_end / opt.sample_dt));
    for (int j = 1; j <= n; ++j) {
        evolve(st, j * opt.sample_dt, opt.evolve);
        record();
    }
    rep.remaps = st.remap_count;
    const double d0 = rep.distance.v.front();
    double t_last = rep.distance.t.front();
    for (std::size_t j = 0; j < rep.distance.v.size() && rep.distance.v[j] > opt.fit_floor * d0; ++j) t_last = rep.distance.t[j];
    rep.fit = fit_exp_poly(rep.distance, 1.0, Window{0.0, t_last});
    rep.floor_rate = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < rep.distance.v.size() && rep.distance.t[j] <= t_last; ++j) {
        const double r = -std::log(rep.distance.v[j] / rep.distance.v[j - 1]) / (rep.distance.t[j] - rep.distance.t[j - 1]);
        rep.floor_rate = std::min(rep.floor_rate, r);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Second-order consistency with the linear multiplier

struct LinearConsistency {
    std::vector<double> eps, defect;
    double slope = 0.0;
};

/// ||evolve(eps w) - multiplier_solution(eps w)||_L2 at time t for each eps; slope in log-log.
inline LinearConsistency linear_consistency(const SpectralField& w, double nu, double t, const std::vector<double>& eps,
                                            const EvolveOptions& opt = {}) {
    if (eps.size() < 3) throw config_error("linear_consistency needs at least three amplitudes");
    LinearConsistency r;
    std::vector<double> le, ld;
    for (double e : eps) {
        const SpectralField w0 = e * project_nonzero_k(dealias(w));
        NSState st = make_ns_state(w0, nu);
        evolve(st, t, opt);
        const double d = l2_norm(st.eulerian() - multiplier_solution(w0, nu, t));
        r.eps.push_back(e);
        r.defect.push_back(d);
        le.push_back(std::log(e));
        ld.push_back(std::log(d));
    }
    r.slope = detail::linreg(le, ld).slope;
    return r;
}

// ---------------------------------------------------------------------------
// Linear resonant split  W = H W0 + b f0

struct ResonantSplit {
    Series omega1{"omega1_l2", {}, {}};
    Series omega2{"omega2_l2", {}, {}};
    /// ||b(t, k, eta) f0(k, eta)|| at a fixed index pairing; nondecreasing in t.
    Series b_f0{"b_f0_l2", {}, {}};
    /// omega1 ~ C exp(-b t^d) with free d.
    std::optional<RateFit> omega1_fit;
};

inline ResonantSplit viscous_resonant_decomposition(const SpectralField& w0, const SpectralField& f0, double nu,
                                                    const std::vector<double>& times) {
    require_viscosity(nu);
    SpectralField zero(w0.grid());
    ResonantSplit r;
    for (double t : times) {
        r.omega1.push(t, l2_norm(heat_propagate(w0, nu, 0.0, t)));
        r.omega2.push(t, l2_norm(viscous_resonant_W(zero, f0, nu, t)));
        SpectralField bf(f0.grid());
        for (int i = 1; i < bf.Nx(); ++i)
            for (int m = 0; m < bf.Ny(); ++m)
                if (f0(i, m) != cplx{}) bf(i, m) = b_value(f0.grid().kx(i), f0.grid().ky(m), nu, t) * f0(i, m);
        r.b_f0.push(t, l2_norm(bf));
    }
    Series pos{r.omega1.name, {}, {}};
    const double v0 = r.omega1.v.empty() ? 0.0 : r.omega1.v.front();
    for (std::size_t j = 0; j < r.omega1.t.size(); ++j)
        if (r.omega1.v[j] > 1e-13 * v0 && r.omega1.t[j] > 0.0) pos.push(r.omega1.t[j], r.omega1.v[j]);
    if (pos.t.size() >= 6) r.omega1_fit = fit_exp_poly(pos, 0.0, Window{});
    return r;
}

}  // namespace shearlab
