#pragma once

// Duhamel integral of the nonlinearity along a frozen decomposition
//   W(t) = A(t) + E_t Z(t)      (sheared frame, E_t u = u(x + t U(y), y)),
// split into the four products
//   I = J(Phi_A, A), II = J(Phi_Z, E Z), III = J(Phi_A, E Z), IV = J(Phi_Z, A)
// with Phi = Lap_t^{-1} W and J(a, b) = grad^perp a . grad b. The Jacobian is
// invariant under the shear map, so plain derivatives in sheared coordinates
// suffice. Products are formed row-wise in the hybrid (k, y_j) representation
// by an exact convolution over the active x-modes.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "shearlab/couette.hpp"
#include "shearlab/diagnostics.hpp"
#include "shearlab/shear.hpp"

namespace shearlab {

// ---------------------------------------------------------------------------
// Sparse hybrid arithmetic

struct Hyb {
    std::vector<cplx> h;
    std::vector<int> rows;  // x-mode rows that may be nonzero
};

namespace hyb {

inline Hyb from_field(const SpectralField& u) {
    Hyb r{to_hybrid(u), {}};
    const Grid& g = u.grid();
    for (int i = 0; i < g.Nx; ++i) {
        bool nz = false;
        for (int j = 0; j < g.Ny && !nz; ++j) nz = r.h[at(g, i, j)] != cplx{};
        if (nz) r.rows.push_back(i);
    }
    return r;
}

inline SpectralField to_field(const Grid& g, const Hyb& a, Frame f) { return from_hybrid(g, a.h, f); }

/// Zero x-mode rows whose magnitude is below rel * (largest value). Keeps the
/// active-row lists short for fields built from analytic samples.
inline SpectralField sparsify(SpectralField u, double rel = 1e-13) {
    const Grid& g = u.grid();
    auto h = to_hybrid(u);
    double mx = 0.0;
    for (auto v : h) mx = std::max(mx, std::abs(v));
    for (int i = 0; i < g.Nx; ++i) {
        double rm = 0.0;
        for (int j = 0; j < g.Ny; ++j) rm = std::max(rm, std::abs(h[at(g, i, j)]));
        if (rm <= rel * mx)
            for (int j = 0; j < g.Ny; ++j) h[at(g, i, j)] = 0.0;
    }
    return from_hybrid(g, std::move(h), u.frame());
}

/// d/dy of each active row: spectral on periodic grids, centered differences on channels.
inline Hyb dy(const Grid& g, const Hyb& a) {
    Hyb r{std::vector<cplx>(a.h.size()), a.rows};
    if (g.periodic()) {
        std::vector<cplx> row(g.Ny);
        for (int i : a.rows) {
            std::copy_n(&a.h[at(g, i, 0)], g.Ny, row.begin());
            fft::fft_y(row, 1, g.Ny, fft::Dir::Forward);
            for (int m = 0; m < g.Ny; ++m) {
                const double eta = (2 * m == g.Ny) ? 0.0 : g.ky(m);
                row[m] *= cplx(0.0, eta / g.Ny);
            }
            fft::fft_y(row, 1, g.Ny, fft::Dir::Backward);
            std::copy(row.begin(), row.end(), &r.h[at(g, i, 0)]);
        }
    } else {
        const double inv2h = 1.0 / (2.0 * g.dy());
        for (int i : a.rows)
            for (int j = 0; j < g.Ny; ++j) {
                const cplx up = j + 1 < g.Ny ? a.h[at(g, i, j + 1)] : cplx{};
                const cplx dn = j > 0 ? a.h[at(g, i, j - 1)] : cplx{};
                r.h[at(g, i, j)] = (up - dn) * inv2h;
            }
    }
    return r;
}

inline void apply_phase(const Grid& g, Hyb& a, double tau, std::span<const double> U) {
    if (tau == 0.0) return;
    for (int i : a.rows) {
        const double k = g.kx(i);
        for (int j = 0; j < g.Ny; ++j) a.h[at(g, i, j)] *= std::polar(1.0, k * tau * U[j]);
    }
}

struct Grad {
    Hyb x, y;
};

/// Gradient of E_tau b from the smooth base b:
///   d_x -> E_tau(i k b),  d_y -> E_tau(d_y b + i k tau U' b).
inline Grad grad(const Grid& g, const Hyb& b, double tau, std::span<const double> U, std::span<const double> dU) {
    Grad r{Hyb{std::vector<cplx>(b.h.size()), b.rows}, dy(g, b)};
    for (int i : b.rows) {
        const double k = g.kx(i);
        for (int j = 0; j < g.Ny; ++j) {
            const std::size_t n = at(g, i, j);
            r.x.h[n] = cplx(0.0, k) * b.h[n];
            if (tau != 0.0) r.y.h[n] += cplx(0.0, k * tau * dU[j]) * b.h[n];
        }
    }
    apply_phase(g, r.x, tau, U);
    apply_phase(g, r.y, tau, U);
    return r;
}

inline int row_of_mode(const Grid& g, int k) {
    if (2 * std::abs(k) >= g.Nx) return -1;
    return k >= 0 ? k : g.Nx + k;
}

/// out += s * a * b (pointwise in y, convolution in k).
inline void mul_add(const Grid& g, const Hyb& a, const Hyb& b, double s, Hyb& out) {
    for (int ia : a.rows)
        for (int ib : b.rows) {
            const int io = row_of_mode(g, g.kmode(ia) + g.kmode(ib));
            if (io < 0) throw numerical_error("product exceeds the x-resolution; increase Nx");
            if (std::find(out.rows.begin(), out.rows.end(), io) == out.rows.end()) out.rows.push_back(io);
            const cplx* pa = &a.h[at(g, ia, 0)];
            const cplx* pb = &b.h[at(g, ib, 0)];
            cplx* po = &out.h[at(g, io, 0)];
            for (int j = 0; j < g.Ny; ++j) po[j] += s * pa[j] * pb[j];
        }
}

/// J(a, b) = -a_y b_x + a_x b_y with the k = 0 output row removed.
inline Hyb jacobian(const Grid& g, const Grad& a, const Grad& b) {
    Hyb out{std::vector<cplx>(g.size()), {}};
    mul_add(g, a.y, b.x, -1.0, out);
    mul_add(g, a.x, b.y, 1.0, out);
    for (int j = 0; j < g.Ny; ++j) out.h[at(g, 0, j)] = 0.0;
    std::erase(out.rows, 0);
    std::sort(out.rows.begin(), out.rows.end());
    return out;
}

inline void axpy(cplx s, const Hyb& x, Hyb& y) {
    if (y.h.empty()) y.h.assign(x.h.size(), cplx{});
    for (std::size_t n = 0; n < x.h.size(); ++n) y.h[n] += s * x.h[n];
    for (int r : x.rows)
        if (std::find(y.rows.begin(), y.rows.end(), r) == y.rows.end()) y.rows.push_back(r);
}

inline double l2(const Grid& g, const std::vector<cplx>& h) {
    double acc = 0.0;
    for (auto v : h) acc += std::norm(v);
    return std::sqrt(acc / (g.periodic() ? g.Ny : g.Ny + 1));
}

}  // namespace hyb

// ---------------------------------------------------------------------------
// Integrands

using Terms = std::array<Hyb, 4>;

/// Evaluates the four product terms at time tau for the decomposition (A, Z).
class TermEvaluator {
public:
    TermEvaluator(const Grid& g, std::vector<double> U, std::vector<double> dU) : g_(g), U_(std::move(U)), dU_(std::move(dU)) {}

    static TermEvaluator couette(const Grid& g) {
        auto ys = g.y_points();
        return {g, ys, std::vector<double>(ys.size(), 1.0)};
    }

    const Grid& grid() const { return g_; }
    std::span<const double> U() const { return U_; }

    Terms eval(const SpectralField& A, const SpectralField& Z, double tau) const {
        const Hyb a = hyb::from_field(A), z = hyb::from_field(Z);
        const auto gA = hyb::grad(g_, a, 0.0, U_, dU_);
        const auto gEZ = hyb::grad(g_, z, tau, U_, dU_);
        // Phi_A = Lap_tau^{-1} A; Phi_Z = E_tau Lap^{-1} Z
        hyb::Grad gPA;
        if (g_.periodic()) {
            gPA = hyb::grad(g_, hyb::from_field(invert_sheared_laplacian(A, tau, ZeroModes::Zero)), 0.0, U_, dU_);
        } else {
            auto base = hyb::from_field(invert_laplacian(shear_shift(A, -tau, U_)));
            gPA = hyb::grad(g_, base, tau, U_, dU_);
        }
        const auto gPZ = hyb::grad(g_, hyb::from_field(invert_laplacian(project_nonzero_k(Z))), tau, U_, dU_);
        return {hyb::jacobian(g_, gPA, gA), hyb::jacobian(g_, gPZ, gEZ), hyb::jacobian(g_, gPA, gEZ),
                hyb::jacobian(g_, gPZ, gA)};
    }

private:
    Grid g_;
    std::vector<double> U_, dU_;
};

// ---------------------------------------------------------------------------
// Couette consistency integral

struct DuhamelDecomposition {
    double T = 0.0;
    SpectralField term_I, term_II, term_III, term_IV, total;
    std::vector<double> times;
    std::vector<double> s_list;
    /// norms[term][is][n]; term index 0..3 for I..IV, 4 for the total.
    std::array<std::vector<std::vector<double>>, 5> norms;
    std::size_t nodes = 0;

    const SpectralField& term(int i) const {
        switch (i) {
            case 0: return term_I;
            case 1: return term_II;
            case 2: return term_III;
            case 3: return term_IV;
            default: return total;
        }
    }
};

inline const char* term_name(int i) {
    static const char* names[] = {"I", "II", "III", "IV", "total"};
    return names[i];
}

struct ConsistencyOptions {
    std::vector<double> s_list = {-1.0, -0.6, 0.0};
    double record_dt = 0.5;
    double tol = 1e-8;            // L2 tolerance on the total at T
    std::size_t max_nodes = 1u << 14;
    int initial_panel_steps = 4;
    /// Called at every record time with the cumulative terms (I..IV, total).
    std::function<void(double, const std::array<SpectralField, 5>&)> on_record;
};

namespace detail {

inline void check_regular(const SpectralField& u, const char* name) {
    require_mean_free_x(u, name);
    if (!u.all_finite() || !std::isfinite(sobolev_norm(u, 1.5)) || !std::isfinite(sobolev_norm(ddx(u), 1.5)))
        throw hypothesis_error(std::string(name) + " must lie in H^{3/2} with d_x in H^{3/2}");
}

inline void record(DuhamelDecomposition& d, const Grid& g, double t, const Terms& cum, const ConsistencyOptions& opt) {
    std::array<SpectralField, 5> f;
    for (int i = 0; i < 4; ++i) f[i] = hyb::to_field(g, cum[i], Frame::lagrangian(t));
    f[4] = f[0] + f[1] + f[2] + f[3];
    d.times.push_back(t);
    for (int i = 0; i < 5; ++i)
        for (std::size_t is = 0; is < opt.s_list.size(); ++is) d.norms[i][is].push_back(sobolev_norm(f[i], opt.s_list[is]));
    if (opt.on_record) opt.on_record(t, f);
}

}  // namespace detail

/// int_0^T of the four product terms for W = w1 + E_t w2 (Couette), by panel-wise
/// composite Simpson with step halving; norm series recorded at panel ends.
inline DuhamelDecomposition consistency_integral(const SpectralField& w1_in, const SpectralField& w2_in, double T,
                                                 const ConsistencyOptions& opt = {}) {
    detail::check_regular(w1_in, "omega_1");
    detail::check_regular(w2_in, "omega_2");
    if (!(T >= 0)) throw config_error("consistency_integral needs T >= 0");
    const Grid& g = w1_in.grid();
    w1_in.check_compatible(w2_in);
    const auto w1 = hyb::sparsify(w1_in), w2 = hyb::sparsify(w2_in);
    const auto ev = TermEvaluator::couette(g);
    auto f = [&](double tau) { return ev.eval(w1, w2, tau); };

    DuhamelDecomposition d;
    d.T = T;
    d.s_list = opt.s_list;
    for (auto& n : d.norms) n.assign(opt.s_list.size(), {});

    Terms cum;
    for (auto& c : cum) c.h.assign(g.size(), cplx{});
    detail::record(d, g, 0.0, cum, opt);

    const int panels = std::max(1, static_cast<int>(std::ceil(T / opt.record_dt - 1e-9)));
    const double width = T / panels;
    const double panel_tol = opt.tol * width / std::max(T, 1e-300);
    const std::size_t panel_cap = std::max<std::size_t>(8, opt.max_nodes / panels);
    Terms fa = f(0.0);
    d.nodes = 1;
    for (int p = 0; p < panels && T > 0; ++p) {
        const double a = p * width, b = (p + 1) * width;
        Terms fb = f(b);
        ++d.nodes;
        // running sums: ends, odd nodes, interior even nodes
        int n = opt.initial_panel_steps;
        Terms odd, even;
        for (int i = 0; i < 4; ++i) {
            odd[i].h.assign(g.size(), cplx{});
            even[i].h.assign(g.size(), cplx{});
        }
        auto add_nodes = [&](int nn, int start, int stride, Terms& into) {
            const double h = (b - a) / nn;
            for (int j = start; j < nn; j += stride) {
                auto v = f(a + j * h);
                ++d.nodes;
                for (int i = 0; i < 4; ++i) hyb::axpy(1.0, v[i], into[i]);
            }
        };
        add_nodes(n, 1, 2, odd);
        add_nodes(n, 2, 2, even);
        auto simpson = [&](int nn) {
            Terms s;
            const double h = (b - a) / nn;
            for (int i = 0; i < 4; ++i) {
                s[i].h.assign(g.size(), cplx{});
                hyb::axpy(h / 3.0, fa[i], s[i]);
                hyb::axpy(h / 3.0, fb[i], s[i]);
                hyb::axpy(4.0 * h / 3.0, odd[i], s[i]);
                hyb::axpy(2.0 * h / 3.0, even[i], s[i]);
            }
            return s;
        };
        Terms prev = simpson(n);
        while (true) {
            for (int i = 0; i < 4; ++i) hyb::axpy(1.0, odd[i], even[i]);
            for (auto& o : odd) std::fill(o.h.begin(), o.h.end(), cplx{});
            n *= 2;
            add_nodes(n, 1, 2, odd);
            Terms cur = simpson(n);
            std::vector<cplx> diff(g.size());
            for (int i = 0; i < 4; ++i)
                for (std::size_t k = 0; k < diff.size(); ++k) diff[k] += cur[i].h[k] - prev[i].h[k];
            prev = std::move(cur);
            // Richardson estimate of the Simpson error at the finer level
            if (hyb::l2(g, diff) / 15.0 < panel_tol) break;
            if (static_cast<std::size_t>(n) >= panel_cap)
                throw numerical_error("consistency_integral: step halving did not reach tolerance on panel [" +
                                      std::to_string(a) + ", " + std::to_string(b) + "]");
        }
        for (int i = 0; i < 4; ++i) hyb::axpy(1.0, prev[i], cum[i]);
        detail::record(d, g, b, cum, opt);
        fa = std::move(fb);
    }
    const Frame fr = Frame::lagrangian(T);
    d.term_I = hyb::to_field(g, cum[0], fr);
    d.term_II = hyb::to_field(g, cum[1], fr);
    d.term_III = hyb::to_field(g, cum[2], fr);
    d.term_IV = hyb::to_field(g, cum[3], fr);
    d.total = d.term_I + d.term_II + d.term_III + d.term_IV;
    return d;
}

// ---------------------------------------------------------------------------
// Closed forms

/// int_0^T of the sheared inverse multiplier: -(1/(k|k|)) [atan(eta/|k|) - atan((eta - k T)/|k|)].
inline double b_T_multiplier(double k, double eta, double T) {
    if (k == 0.0) throw config_error("b_T_multiplier requires k != 0");
    const double ak = std::abs(k);
    return -(1.0 / (k * ak)) * (std::atan(eta / ak) - std::atan((eta - k * T) / ak));
}

/// int_0^T exp(i kappa t) dt, exact for every kappa including 0.
inline cplx phase_integral(double kappa, double T) {
    const double z = kappa * T;
    if (std::abs(z) < 1e-4) return T * cplx(1.0 - z * z / 6.0, z / 2.0 - z * z * z / 24.0);
    return (std::polar(1.0, z) - 1.0) / cplx(0.0, kappa);
}

/// int_0^T E_t q dt row by row: (1/y) d_x^{-1} (E_T q - q) away from y = 0.
inline Hyb time_antiderivative(const Grid& g, const Hyb& q, double T) {
    Hyb r{std::vector<cplx>(q.h.size()), q.rows};
    for (int i : q.rows) {
        const double k = g.kx(i);
        for (int j = 0; j < g.Ny; ++j) {
            const std::size_t n = at(g, i, j);
            r.h[n] = phase_integral(k * g.y(j), T) * q.h[n];
        }
    }
    return r;
}

namespace detail {
inline void require_support_away_from_zero(const SpectralField& u, const char* name, double ymin = 1.0) {
    const Grid& g = u.grid();
    auto h = to_hybrid(u);
    double mx = 0.0, inner = 0.0;
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j) {
            const double v = std::abs(h[at(g, i, j)]);
            mx = std::max(mx, v);
            if (std::abs(g.y(j)) < ymin) inner = std::max(inner, v);
        }
    if (inner > 1e-8 * std::max(mx, 1e-300))
        throw hypothesis_error(std::string(name) + " must vanish where |y| < 1 (the closed forms divide by y)");
}
}  // namespace detail

/// Term II in closed form: (1/y) d_x^{-1} p(x + t y, y) |_{t=0}^{T}, p = J(phi_2, w2).
inline SpectralField term_II_closed_form(const SpectralField& w2_in, double T) {
    const Grid& g = w2_in.grid();
    if (g.channel() && !(g.chan().a >= 1.0 || g.chan().b <= -1.0))
        throw hypothesis_error("term II closed form needs |y| >= 1 on the channel");
    require_mean_free_x(w2_in, "omega_2");
    const auto w2 = hyb::sparsify(w2_in);
    const auto ev = TermEvaluator::couette(g);
    SpectralField zero(g);
    auto p = ev.eval(zero, w2, 0.0)[1];  // J(phi_2, w2), k = 0 removed
    auto pf = hyb::to_field(g, p, Frame::eulerian());
    detail::require_support_away_from_zero(pf, "the product grad^perp phi_2 . grad omega_2");
    auto r = time_antiderivative(g, p, T);
    return hyb::to_field(g, r, Frame::lagrangian(T));
}

/// Pieces of term IV in closed form:
///   IV = eq27 + lead + eq29,
///   eq27 = [(1/y) d_x^{-1} (E_T grad^perp phi_2 - grad^perp phi_2)] . grad w1,
///   lead = -(T/y) (E_T phi_2) d_x w1,
///   eq29 = [(1/y^2) d_x^{-1}(E_T phi_2 - phi_2)] d_x w1.
struct TermIVClosedForm {
    SpectralField eq27, lead, eq29, total;
};

inline TermIVClosedForm term_IV_closed_form(const SpectralField& w1_in, const SpectralField& w2_in, double T) {
    const Grid& g = w1_in.grid();
    detail::require_support_away_from_zero(w1_in, "omega_1");
    const auto w1 = hyb::sparsify(w1_in), w2 = hyb::sparsify(w2_in);
    const auto ys = g.y_points();
    const std::vector<double> ones(ys.size(), 1.0);
    const Hyb phi = hyb::from_field(invert_laplacian(project_nonzero_k(w2)));
    const auto gphi = hyb::grad(g, phi, 0.0, ys, ones);
    const auto gw1 = hyb::grad(g, hyb::from_field(w1), 0.0, ys, ones);
    // grad^perp phi = (-phi_y, phi_x)
    Hyb perp_x{gphi.y.h, gphi.y.rows};
    for (auto& v : perp_x.h) v = -v;
    const Hyb& perp_y = gphi.x;
    auto Ax = time_antiderivative(g, perp_x, T), Ay = time_antiderivative(g, perp_y, T);

    auto finish = [&](Hyb h) {
        for (int j = 0; j < g.Ny; ++j) h.h[at(g, 0, j)] = 0.0;
        return hyb::to_field(g, h, Frame::lagrangian(T));
    };
    TermIVClosedForm r;
    {
        Hyb out{std::vector<cplx>(g.size()), {}};
        hyb::mul_add(g, Ax, gw1.x, 1.0, out);
        hyb::mul_add(g, Ay, gw1.y, 1.0, out);
        r.eq27 = finish(out);
    }
    {
        Hyb ephi = phi;
        hyb::apply_phase(g, ephi, T, ys);
        for (int i : ephi.rows)
            for (int j = 0; j < g.Ny; ++j) {
                const double y = g.y(j);
                ephi.h[at(g, i, j)] *= std::abs(y) >= 0.5 ? -T / y : 0.0;
            }
        Hyb out{std::vector<cplx>(g.size()), {}};
        hyb::mul_add(g, ephi, gw1.x, 1.0, out);
        r.lead = finish(out);
    }
    {
        auto inner = time_antiderivative(g, phi, T);  // (1/y) d_x^{-1}(E_T phi - phi)
        // lead and eq29 are separately singular at y = 0; w1 vanishes there
        for (int i : inner.rows) {
            for (int j = 0; j < g.Ny; ++j) {
                const double y = g.y(j);
                auto& v = inner.h[at(g, i, j)];
                v = std::abs(y) >= 0.5 ? v / y : cplx{};
            }
        }
        Hyb out{std::vector<cplx>(g.size()), {}};
        hyb::mul_add(g, inner, gw1.x, 1.0, out);
        r.eq29 = finish(out);
    }
    r.total = r.eq27 + r.lead + r.eq29;
    return r;
}

// ---------------------------------------------------------------------------
// Frequency cone

struct FrequencyCone {
    double c = 1.0;
    double t = 0.0;
    bool contains(double eta) const { return std::abs(eta) >= c * t; }
};

/// Keeps coefficients with |eta| >= c t (periodic grids); complement = true keeps the rest.
inline SpectralField project_cone(SpectralField u, const FrequencyCone& cone, bool complement = false) {
    const Grid& g = u.grid();
    require_periodic(g, "project_cone");
    for (int i = 0; i < g.Nx; ++i)
        for (int m = 0; m < g.Ny; ++m)
            if (cone.contains(g.ky(m)) == complement) u(i, m) = 0.0;
    return u;
}

// ---------------------------------------------------------------------------
// General shear

struct ShearConsistency {
    SpectralField sigma;
    std::vector<double> times;
    std::vector<double> s_list;
    std::vector<std::vector<double>> norms;  // [is][n]
};

/// sigma(T) = int_0^T S(T, tau) J(Phi, W)(tau) dtau along
///   W(tau) = S(tau, 0)(w0 - g) + E_tau S(0, -tau) g,  U d_x g = f0,
/// by composite Simpson on n_steps uniform nodes, accumulated Horner-style.
/// Norms are recorded at every record_every-th even node.
inline ShearConsistency consistency_integral_shear(const SpectralField& w0, const SpectralField& f0,
                                                   const ShearProfile& p, double T, int n_steps,
                                                   const std::vector<double>& s_list = {-1.0, -0.6, 0.0},
                                                   int record_every = 2) {
    require_channel(w0.grid(), "consistency_integral_shear");
    if (n_steps < 2) throw config_error("consistency_integral_shear needs n_steps >= 2");
    if (n_steps % 2) ++n_steps;
    const Grid& g = w0.grid();
    ShearSolver S(g, p);
    const auto g0 = solve_g_shear(f0, p);
    const auto A0 = hyb::sparsify(w0 - g0);
    const auto gs = hyb::sparsify(g0);
    TermEvaluator ev(g, S.sampled().U, S.sampled().dU);
    ShearConsistency out;
    out.s_list = s_list;
    out.norms.assign(s_list.size(), {});
    auto N = [&](double tau, const SpectralField& A) {
        const auto Z = S.apply(0.0, -tau, gs);
        auto t = ev.eval(A, Z, tau);
        Hyb sum{std::vector<cplx>(g.size()), {}};
        for (auto& x : t) hyb::axpy(1.0, x, sum);
        return hyb::to_field(g, sum, Frame::lagrangian(tau));
    };
    const double h = T / n_steps;
    SpectralField acc(g, Frame::lagrangian(0.0));
    SpectralField A = A0;
    for (int j = 0; j <= n_steps; ++j) {
        const double tau = j * h;
        if (j > 0) {
            acc = S.apply(tau, tau - h, acc);
            A = S.apply(tau, tau - h, A);
        }
        const auto Nj = N(tau, A);
        if (j % 2 == 0 && (j / 2) % std::max(1, record_every / 2) == 0) {
            SpectralField snap = acc;
            if (j > 0) snap.axpy(h / 3.0, Nj);
            out.times.push_back(tau);
            for (std::size_t is = 0; is < s_list.size(); ++is) out.norms[is].push_back(sobolev_norm(snap, s_list[is]));
        }
        const double w = (j == 0 || j == n_steps) ? h / 3.0 : (j % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
        acc.axpy(w, Nj);
    }
    acc.set_frame(Frame::lagrangian(T));
    out.sigma = std::move(acc);
    return out;
}

}  // namespace shearlab
