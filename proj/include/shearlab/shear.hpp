#pragma once

// Linearized Euler around a general monotone shear U(y) on a channel, in the
// sheared frame W(t, x, y) = w(t, x + t U(y), y):
//   d_t W = U'' d_x Lap_t^{-1} W,   Lap_t = d_x^2 + (d_y - t U' d_x)^2.
// Channel fields are stored as x-Fourier rows at interior y points, so every
// operator here acts row by row.

#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "shearlab/couette.hpp"
#include "shearlab/diagnostics.hpp"

namespace shearlab {

using Row = std::vector<cplx>;

struct ShearProfile {
    std::string name = "couette";
    std::function<double(double)> U, dU, d2U;
    bool couette = false;  // U'' == 0 identically

    struct Sampled {
        std::vector<double> U, dU, d2U;
        double umin = 0, umax = 0, d2max = 0;
    };

    Sampled sample(const Grid& g) const {
        Sampled s;
        s.umin = std::numeric_limits<double>::infinity();
        s.umax = -s.umin;
        for (int j = 0; j < g.Ny; ++j) {
            const double y = g.y(j);
            s.U.push_back(U(y));
            s.dU.push_back(dU(y));
            s.d2U.push_back(couette ? 0.0 : d2U(y));
            s.umin = std::min(s.umin, s.U.back());
            s.umax = std::max(s.umax, s.U.back());
            s.d2max = std::max(s.d2max, std::abs(s.d2U.back()));
        }
        return s;
    }

    static ShearProfile make_couette() {
        return {"couette", [](double y) { return y; }, [](double) { return 1.0; }, [](double) { return 0.0; }, true};
    }
    /// U = y + eps sin(wn y).
    static ShearProfile couette_perturbed(double eps, double wn) {
        return {"couette_perturbed", [=](double y) { return y + eps * std::sin(wn * y); },
                [=](double y) { return 1.0 + eps * wn * std::cos(wn * y); },
                [=](double y) { return -eps * wn * wn * std::sin(wn * y); }, eps == 0.0};
    }
    static ShearProfile tanh_monotone() {
        return {"tanh_monotone", [](double y) { return std::tanh(y); },
                [](double y) { return 1.0 / (std::cosh(y) * std::cosh(y)); },
                [](double y) { return -2.0 * std::tanh(y) / (std::cosh(y) * std::cosh(y)); }, false};
    }

    /// Uniformly spaced "y U" table, one pair per line; '#' starts a comment.
    static ShearProfile from_table(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw config_error("cannot read profile table " + path);
        std::vector<double> ys, us;
        std::string line;
        while (std::getline(is, line)) {
            if (auto p = line.find('#'); p != std::string::npos) line.resize(p);
            std::istringstream ls(line);
            double y, u;
            if (ls >> y >> u) {
                ys.push_back(y);
                us.push_back(u);
            }
        }
        if (ys.size() < 8) throw config_error("profile table needs at least 8 rows");
        const double h = (ys.back() - ys.front()) / (ys.size() - 1);
        for (std::size_t i = 1; i < ys.size(); ++i)
            if (std::abs(ys[i] - ys[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
                throw config_error("profile table must be uniformly spaced in y");
        auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
            us.begin(), us.end(), ys.front(), h);
        return {"table:" + path, [spline](double y) { return (*spline)(y); },
                [spline](double y) { return spline->prime(y); }, [spline](double y) { return spline->double_prime(y); },
                false};
    }
};

inline ShearProfile profile_by_name(const std::string& name, double eps = 0.05, double wn = 2.0 * std::numbers::pi) {
    if (name == "couette") return ShearProfile::make_couette();
    if (name == "couette_perturbed") return ShearProfile::couette_perturbed(eps, wn);
    if (name == "tanh_monotone" || name == "tanh-monotone") return ShearProfile::tanh_monotone();
    if (name.rfind("table:", 0) == 0) return ShearProfile::from_table(name.substr(6));
    throw config_error("unknown shear profile '" + name + "'");
}

inline void require_channel(const Grid& g, const char* what) {
    if (!g.channel()) throw config_error(std::string(what) + " needs a channel grid");
}

// ---------------------------------------------------------------------------
// Elliptic solves per x-mode

inline Row row_of(const SpectralField& u, int i) {
    Row r(u.Ny());
    for (int j = 0; j < u.Ny(); ++j) r[j] = u(i, j);
    return r;
}
inline void set_row(SpectralField& u, int i, const Row& r) {
    for (int j = 0; j < u.Ny(); ++j) u(i, j) = r[j];
}
inline bool row_is_zero(const SpectralField& u, int i) {
    for (int j = 0; j < u.Ny(); ++j)
        if (u(i, j) != cplx{}) return false;
    return true;
}

/// Solves (-k^2 + (d/dy - i k t U')^2) phi = w with phi = 0 at both walls, as
/// E_t (D2 - k^2)^{-1} E_t^{-1} w where E_t = exp(i k t U).
inline Row elliptic_solve_mode(const Row& w, double k, double t, const Grid& g, const std::vector<double>& U) {
    if (k == 0.0) throw config_error("elliptic_solve_mode requires k != 0");
    const int n = g.Ny;
    Row v(n);
    for (int j = 0; j < n; ++j) v[j] = w[j] * std::polar(1.0, -k * t * U[j]);
    auto psi = channel::dirichlet_laplacian_solve(g, k, v);
    for (int j = 0; j < n; ++j) psi[j] *= std::polar(1.0, k * t * U[j]);
    return psi;
}

/// The same operator applied forward (conjugated stencil); residual reference.
inline Row sheared_operator_mode(const Row& phi, double k, double t, const Grid& g, const std::vector<double>& U) {
    const int n = g.Ny;
    const double inv = 1.0 / (g.dy() * g.dy());
    Row v(n), out(n);
    for (int j = 0; j < n; ++j) v[j] = phi[j] * std::polar(1.0, -k * t * U[j]);
    for (int j = 0; j < n; ++j) {
        const cplx up = j + 1 < n ? v[j + 1] : cplx{}, dn = j > 0 ? v[j - 1] : cplx{};
        out[j] = ((up - 2.0 * v[j] + dn) * inv - k * k * v[j]) * std::polar(1.0, k * t * U[j]);
    }
    return out;
}

/// Direct centered-difference discretization of the variable-coefficient
/// operator phi'' - 2 i a phi' - i a' phi - a^2 phi - k^2 phi, a = k t U'.
inline Row elliptic_solve_mode_direct(const Row& w, double k, double t, const Grid& g, const std::vector<double>& dU,
                                      const std::vector<double>& d2U) {
    const int n = g.Ny;
    const double h = g.dy(), inv = 1.0 / (h * h);
    Row lo(n), di(n), up(n);
    for (int j = 0; j < n; ++j) {
        const double a = k * t * dU[j], ap = k * t * d2U[j];
        const cplx c1(0.0, -2.0 * a);
        lo[j] = inv - c1 / (2.0 * h);
        up[j] = inv + c1 / (2.0 * h);
        di[j] = -2.0 * inv - cplx(0.0, ap) - a * a - k * k;
    }
    return channel::solve_tridiagonal(lo, di, up, w);
}

// ---------------------------------------------------------------------------
// Time stepping of the scattering equation

inline double shear_dt(const ShearProfile::Sampled& s) { return s.d2max > 0 ? std::min(0.01, 0.5 / s.d2max) : 0.01; }

namespace detail {
inline Row scattering_rhs(const Row& w, double k, double t, const Grid& g, const ShearProfile::Sampled& s) {
    Row phi = elliptic_solve_mode(w, k, t, g, s.U);
    for (int j = 0; j < g.Ny; ++j) phi[j] *= cplx(0.0, k) * s.d2U[j];
    return phi;
}

inline void rk4_row(Row& w, double k, double t, double dt, const Grid& g, const ShearProfile::Sampled& s) {
    const int n = g.Ny;
    auto k1 = scattering_rhs(w, k, t, g, s);
    Row tmp(n);
    for (int j = 0; j < n; ++j) tmp[j] = w[j] + 0.5 * dt * k1[j];
    auto k2 = scattering_rhs(tmp, k, t + 0.5 * dt, g, s);
    for (int j = 0; j < n; ++j) tmp[j] = w[j] + 0.5 * dt * k2[j];
    auto k3 = scattering_rhs(tmp, k, t + 0.5 * dt, g, s);
    for (int j = 0; j < n; ++j) tmp[j] = w[j] + dt * k3[j];
    auto k4 = scattering_rhs(tmp, k, t + dt, g, s);
    for (int j = 0; j < n; ++j) w[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
}
}  // namespace detail

/// Propagator S(t2, t1) for one profile on one grid.
class ShearSolver {
public:
    ShearSolver(const Grid& g, ShearProfile p, double dt_max = 0.0)
        : grid_(g), profile_(std::move(p)), s_(profile_.sample(g)) {
        require_channel(g, "shear solver");
        dt_ = shear_dt(s_);
        if (dt_max > 0) dt_ = s_.d2max > 0 ? std::min(dt_max, 0.5 / s_.d2max) : dt_max;
    }

    const Grid& grid() const { return grid_; }
    const ShearProfile& profile() const { return profile_; }
    const ShearProfile::Sampled& sampled() const { return s_; }
    double dt() const { return dt_; }
    bool identity() const { return profile_.couette || s_.d2max == 0.0; }

    /// One RK4 step from t to t + dt (dt may be negative for reversed stepping).
    SpectralField step(const SpectralField& W, double t, double dt) const {
        if (std::abs(dt) * s_.d2max > 0.5 + 1e-12) throw config_error("shear step violates dt * max|U''| <= 0.5");
        SpectralField out = W;
        if (identity()) return out;
        for (int i = 1; i < grid_.Nx; ++i) {
            if (row_is_zero(W, i)) continue;
            Row r = row_of(W, i);
            detail::rk4_row(r, grid_.kx(i), t, dt, grid_, s_);
            set_row(out, i, r);
        }
        return out;
    }

    int steps_for(double span) const { return std::max(1, static_cast<int>(std::ceil(std::abs(span) / dt_ - 1e-9))); }

    /// S(t2, t1) u. Uniform steps of size (t2 - t1)/n, n = ceil(|t2 - t1| / dt).
    SpectralField apply(double t2, double t1, const SpectralField& u) const {
        if (t2 == t1 || identity()) return u;
        const int n = steps_for(t2 - t1);
        const double h = (t2 - t1) / n;
        SpectralField out(grid_, u.frame());
        for (int i = 1; i < grid_.Nx; ++i) {
            if (row_is_zero(u, i)) continue;
            Row r = row_of(u, i);
            for (int m = 0; m < n; ++m) detail::rk4_row(r, grid_.kx(i), t1 + m * h, h, grid_, s_);
            set_row(out, i, r);
        }
        // k = 0 rows are invariant
        for (int j = 0; j < grid_.Ny; ++j) out(0, j) = u(0, j);
        return out;
    }

    /// d_t S(t, 0) u evaluated as the right-hand side at time t.
    SpectralField rhs(const SpectralField& W, double t) const {
        SpectralField out(grid_, W.frame());
        if (identity()) return out;
        for (int i = 1; i < grid_.Nx; ++i) {
            if (row_is_zero(W, i)) continue;
            set_row(out, i, detail::scattering_rhs(row_of(W, i), grid_.kx(i), t, grid_, s_));
        }
        return out;
    }

    /// E_t: u(x, y) -> u(x + t U(y), y).
    SpectralField phase(const SpectralField& u, double t) const { return shear_shift(u, t, s_.U); }

    /// Sheared inverse Laplacian for this profile, all rows.
    SpectralField sheared_inverse(const SpectralField& W, double t) const {
        SpectralField out(grid_, W.frame());
        for (int i = 1; i < grid_.Nx; ++i) {
            if (row_is_zero(W, i)) continue;
            set_row(out, i, elliptic_solve_mode(row_of(W, i), grid_.kx(i), t, grid_, s_.U));
        }
        return out;
    }

private:
    Grid grid_;
    ShearProfile profile_;
    ShearProfile::Sampled s_;
    double dt_ = 0.01;
};

inline SpectralField apply_S(double t2, double t1, const SpectralField& u, const ShearProfile& p) {
    return ShearSolver(u.grid(), p).apply(t2, t1, u);
}

// ---------------------------------------------------------------------------
// Forced problems

using LagrangianForcing = std::function<SpectralField(double)>;

/// W(t) = S(t,0) w0 + int_0^t S(t,tau) F(tau) dtau by composite Simpson, with
/// the node sum accumulated Horner-style so each stretch is propagated once.
/// The callback, if set, receives the Simpson value at every even node.
inline SpectralField duhamel_shear(const ShearSolver& S, const SpectralField& w0, const LagrangianForcing& F, double t,
                                   int n_steps,
                                   const std::function<void(double, const SpectralField&)>& on_node = {}) {
    if (n_steps < 2) throw config_error("Duhamel quadrature needs n_steps >= 2");
    if (n_steps % 2) ++n_steps;
    const double h = t / n_steps;
    SpectralField acc = w0;
    for (int j = 0; j <= n_steps; ++j) {
        const double tau = j * h;
        if (j > 0) acc = S.apply(tau, tau - h, acc);
        SpectralField Fj;
        try {
            Fj = F(tau);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw numerical_error("forcing closure failed at tau = " + std::to_string(tau) + ": " + e.what());
        }
        if (!Fj.all_finite()) throw numerical_error("forcing is non-finite at tau = " + std::to_string(tau));
        if (j % 2 == 0 && on_node) {
            SpectralField snap = acc;
            if (j > 0) snap.axpy(h / 3.0, Fj);
            on_node(tau, snap);
        }
        const double w = (j == 0 || j == n_steps) ? h / 3.0 : (j % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
        acc.axpy(w, Fj);
    }
    return acc;
}

/// Eulerian solution of the forced general-shear problem.
inline SpectralField solve_forced_shear(const SpectralField& w0, const ForcingSpec& f, double t, const ShearProfile& p,
                                        int n_steps) {
    ShearSolver S(w0.grid(), p);
    LagrangianForcing F;
    if (f.kind == ForcingKind::Resonant)
        F = [&](double) { return f.f0; };
    else
        F = [&](double tau) { return S.phase(f.eval(tau), tau); };
    auto W = duhamel_shear(S, w0, F, t, n_steps);
    auto out = S.phase(W, -t);
    out.set_frame(Frame::eulerian());
    return out;
}

/// g with U d_x g = f0.
inline SpectralField solve_g_shear(const SpectralField& f0, const ShearProfile& p, double umin = 1e-8) {
    require_mean_free_x(f0, "forcing f0");
    const auto s = p.sample(f0.grid());
    return divide_by_ikV(f0, s.U, umin, "the shear profile vanishes where the forcing is supported (U must be bounded away from 0)");
}

/// Sheared-frame form of the stationary decomposition:
///   W(t) = S(t,0)(w0 - g) + E_t S(0,-t) g.
inline SpectralField stationary_decomposition_W(const ShearSolver& S, const SpectralField& w0, const SpectralField& g,
                                                double t) {
    auto W = S.apply(t, 0.0, w0 - g);
    W += S.phase(S.apply(0.0, -t, g), t);
    return W;
}

/// Lagrangian forcing for which the decomposition is an exact solution:
/// F(tau) = E_tau S(0,-tau) f0. Reduces to E_tau f0 for Couette.
inline LagrangianForcing decomposition_forcing(const ShearSolver& S, const SpectralField& f0) {
    return [&S, f0](double tau) { return S.phase(S.apply(0.0, -tau, f0), tau); };
}

// ---------------------------------------------------------------------------
// Operator probes

inline std::vector<SpectralField> probe_basket(const Grid& g, int count = 20, unsigned seed = 12345, int kmax = 3,
                                               int mmax = 6) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N;
    std::vector<SpectralField> out;
    const double L = g.y_length(), a = g.channel() ? g.chan().a : -0.5 * L;
    for (int c = 0; c < count; ++c) {
        std::vector<double> amp(kmax * mmax), ph(kmax * mmax);
        for (auto& v : amp) v = N(rng);
        for (auto& v : ph) v = N(rng);
        auto u = sample(g, [&](double x, double y) {
            double acc = 0.0;
            for (int k = 1; k <= kmax; ++k)
                for (int m = 1; m <= mmax; ++m) {
                    const double A = amp[(k - 1) * mmax + m - 1] / (m * m);
                    acc += A * std::cos(k * x + ph[(k - 1) * mmax + m - 1]) * std::sin(m * std::numbers::pi * (y - a) / L);
                }
            return acc;
        });
        u *= 1.0 / l2_norm(u);
        out.push_back(std::move(u));
    }
    return out;
}

struct OperatorProbe {
    std::vector<double> s_list;
    std::vector<double> times;
    std::vector<std::vector<double>> ratio;      // [is][n]: max over basket of ||S(t,0)u||_s / ||u||_s
    std::vector<std::vector<double>> dt_norm;    // [is][n]: max over basket of ||d_t S(t,0)u||_s
    std::vector<RateFit> trend;                  // drift of the ratio after relaxation, last two-thirds, per s
    std::vector<RateFit> trend_linear;           // plain linear fit of the ratio over the whole span
    std::vector<RateFit> decay;                  // power-law fit of dt_norm against 1 + t
    double commutation_defect = 0.0;
};

struct ProbeOptions {
    int basket_size = 20;
    unsigned seed = 12345;
    std::vector<double> commutation_taus = {0.5, 1.0, 2.0};
    double commutation_t1 = 0.0, commutation_t2 = 1.0;
};

inline OperatorProbe probe_properties(const Grid& g, const ShearProfile& p, const std::vector<double>& s_list,
                                      const std::vector<double>& times, const ProbeOptions& opt = {}) {
    for (double s : s_list)
        if (!(s > -1.5 && s < 1.5)) throw config_error("probe Sobolev indices must lie in (-3/2, 3/2)");
    ShearSolver S(g, p);
    OperatorProbe r;
    r.s_list = s_list;
    r.times = times;
    r.ratio.assign(s_list.size(), std::vector<double>(times.size(), 0.0));
    r.dt_norm = r.ratio;
    const auto basket = probe_basket(g, opt.basket_size, opt.seed);
    for (const auto& u : basket) {
        std::vector<double> base;
        for (double s : s_list) base.push_back(sobolev_norm(u, s));
        SpectralField W = u;
        double tc = 0.0;
        for (std::size_t n = 0; n < times.size(); ++n) {
            W = S.apply(times[n], tc, W);
            tc = times[n];
            const auto d = S.rhs(W, tc);
            for (std::size_t is = 0; is < s_list.size(); ++is) {
                r.ratio[is][n] = std::max(r.ratio[is][n], sobolev_norm(W, s_list[is]) / base[is]);
                r.dt_norm[is][n] = std::max(r.dt_norm[is][n], sobolev_norm(d, s_list[is]));
            }
        }
    }
    for (std::size_t is = 0; is < s_list.size(); ++is) {
        Series rs{"ratio", times, r.ratio[is]};
        r.trend.push_back(fit_linear_relaxed(rs));
        r.trend_linear.push_back(fit_linear(rs, Window{times.front(), times.back()}));
        Series ds{"dt", {}, {}};
        for (std::size_t n = 0; n < times.size(); ++n)
            if (r.dt_norm[is][n] > 0) ds.push(1.0 + times[n], r.dt_norm[is][n]);
        if (ds.size() >= 5) r.decay.push_back(fit_power_law(ds));
        else r.decay.push_back(RateFit{});
    }
    // S(t2,t1) E_tau f versus E_tau S(t2 - tau, t1 - tau) f
    for (double tau : opt.commutation_taus)
        for (std::size_t c = 0; c < std::min<std::size_t>(basket.size(), 4); ++c) {
            const auto& f = basket[c];
            auto lhs = S.apply(opt.commutation_t2, opt.commutation_t1, S.phase(f, tau));
            auto rhs = S.phase(S.apply(opt.commutation_t2 - tau, opt.commutation_t1 - tau, f), tau);
            r.commutation_defect = std::max(r.commutation_defect, l2_norm(lhs - rhs) / l2_norm(f));
        }
    return r;
}

}  // namespace shearlab
