#pragma once

// Scenario catalog: each scenario reads its parameters (echoing defaults),
// validates hypotheses before computing, and returns a report whose checks
// decide the exit status.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "shearlab/config.hpp"
#include "shearlab/consistency.hpp"
#include "shearlab/couette.hpp"
#include "shearlab/diagnostics.hpp"
#include "shearlab/nonlinear.hpp"
#include "shearlab/shear.hpp"
#include "shearlab/viscous.hpp"

namespace shearlab {

struct ScenarioInfo {
    std::string name;
    std::string reference;
    std::string summary;
};

inline const std::vector<ScenarioInfo>& scenario_catalog() {
    static const std::vector<ScenarioInfo> cat = {
        {"couette-resonant", "Thm. 1.1, Prop. 2.2 (Eq. 7)",
         "resonant forcing at Couette flow: linear L2 growth, bounded H^-1, weakly converging velocity"},
        {"couette-stationary", "Prop. 2.2 (Eq. 5)", "stationary forcing: transport plus stationary part, H^-1/2 damping"},
        {"consistency", "Prop. 2.3", "Duhamel consistency integral split into terms I-IV with closed forms"},
        {"shear-linear", "Section 3 (Eqs. 9-11, 22)", "general monotone shear: propagator probes and stationary decomposition"},
        {"shear-consistency", "Section 3, Prop. 2.3 analogue", "consistency integral for a general shear profile"},
        {"viscous-resonant", "Lemma 4.1, Cor. 4.2", "viscous resonant forcing through the b multiplier"},
        {"viscous-stationary", "Cor. 4.2", "enhanced dissipation and damping towards the stationary solution"},
        {"bprofile", "Cor. 4.2 (Eq. 14)", "b(t,k,eta) profile and the b_infinity bounds"},
        {"ns-fixedpoint", "Prop. 4.3", "stationary nonlinear solution by contraction"},
        {"ns-decay", "Prop. 4.4", "exponential decay of perturbations of the stationary solution"},
        {"ns-resonant-split", "Thm. 1.2", "split into a dissipating part and a bounded forced part"},
    };
    return cat;
}

namespace scen {

inline double rel_l2(const SpectralField& a, const SpectralField& b) {
    const double d = l2_norm(b);
    const double n = l2_norm(a - b);
    return d > 0 ? n / d : n;
}

inline ordered_json check_detail(double value, double threshold) { return {{"value", value}, {"threshold", threshold}}; }

inline void add_max_check(Report& r, const std::string& name, double value, double threshold) {
    r.add_check(name, std::isfinite(value) && value < threshold, check_detail(value, threshold));
}

/// Largest relative spread (max - min) / mean over the last third of a series.
inline double last_third_variation(const std::vector<double>& t, const std::vector<double>& v) {
    const double tc = t.front() + 2.0 * (t.back() - t.front()) / 3.0;
    double mn = std::numeric_limits<double>::infinity(), mx = -mn, sum = 0;
    int n = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= tc - 1e-12) {
            mn = std::min(mn, v[i]);
            mx = std::max(mx, v[i]);
            sum += v[i];
            ++n;
        }
    return n ? (mx - mn) / (sum / n) : 0.0;
}

inline void fit_entry(Report& r, const std::string& name, const RateFit& f) { r.fits[name] = to_json(f); }

// ---------------------------------------------------------------------------

inline Report couette_resonant(Config& c) {
    const Grid g = grid_from_config(c, "channel", 16, 512, 1.0, 5.0);
    const auto w0p = field_preset(c, "w0", preset("bump", 1.0, 1, 0.0, 1.5, 4.5));
    // a quarter-period phase shift makes f0 orthogonal to w0, so the growth is linear already at moderate t
    const auto f0p = field_preset(c, "f0", preset("bump", 1.0, 1, std::numbers::pi / 2, 2.0, 4.0));
    const auto times = time_grid(c, 100.0, 101);
    const double fit_t0 = c.num("fit.t0", 10.0), fit_t1 = c.num("fit.t1", times.back());
    const double t_oracle = c.num("oracle.t", 5.0);
    const int n_oracle = c.integer("oracle.n_steps", 256);
    const double tol_oracle = c.num("checks.oracle_tol", 1e-8);
    const double alpha_lo = c.num("checks.alpha_lo", 0.98), alpha_hi = c.num("checks.alpha_hi", 1.02);
    const double slack = c.num("checks.hminus1_slack", 1e-6);
    const double tail_tol = c.num("checks.pairing_tail", 1e-2);
    c.reject_unknown();

    const auto w0 = make_field(g, w0p, c);
    const auto f0 = make_field(g, f0p, c);
    const auto spec = ForcingSpec::resonant(f0);
    const auto G = antiderivative_g(f0);

    Report r;
    r.scenario = "couette-resonant";
    const auto oracle = duhamel_quadrature(w0, spec, t_oracle, n_oracle);
    add_max_check(r, "duhamel_vs_closed_form", rel_l2(oracle, solve_resonant(w0, f0, t_oracle)), tol_oracle);

    NormSeries ns({0.0, -1.0}, g);
    const auto basket = TestFunctionBasket::make(g);
    PairingAccumulator px(basket), py(basket);
    for (double t : times) {
        const auto w = solve_resonant(w0, f0, t);
        ns.push(t, w);
        const auto v = velocity(invert_laplacian(w));
        px.add(t, v.vx);
        py.add(t, v.vy);
    }
    r.series.push_back(ns.column(0, "omega"));
    r.series.push_back(ns.column(1, "omega"));
    const auto fit = fit_power_law(ns.column(0), Window{fit_t0, fit_t1});
    fit_entry(r, "l2_growth", fit);
    r.add_check("growth_exponent", fit.alpha >= alpha_lo && fit.alpha <= alpha_hi,
                {{"alpha", fit.alpha}, {"range", {alpha_lo, alpha_hi}}});

    const double sup_hm1 = *std::max_element(ns.values[1].begin(), ns.values[1].end());
    const double bound = sobolev_norm(w0, -1.0) + sobolev_norm(G.g, 1.0);
    r.values["sup_hminus1"] = sup_hm1;
    r.values["hminus1_bound"] = bound;
    r.add_check("hminus1_bounded", sup_hm1 <= bound + slack, {{"sup", sup_hm1}, {"bound", bound}, {"slack", slack}});

    const auto rx = px.finish(), ry = py.finish();
    for (auto& s : rx.series("pair_vx")) r.series.push_back(s);
    for (auto& s : ry.series("pair_vy")) r.series.push_back(s);
    add_max_check(r, "velocity_pairings_cauchy", std::max(rx.cauchy_tail, ry.cauchy_tail), tail_tol);
    r.values["f0_l2"] = l2_norm(f0);
    return r;
}

inline Report couette_stationary(Config& c) {
    const Grid g = grid_from_config(c, "channel", 16, 512, 1.0, 5.0);
    const auto w0p = field_preset(c, "w0", preset("zero"));
    const auto f0p = field_preset(c, "f0", preset("bump", 1.0, 1, 0.0, 2.0, 4.0));
    const auto times = time_grid(c, 100.0, 101);
    const double t_oracle = c.num("oracle.t", 5.0);
    const int n_oracle = c.integer("oracle.n_steps", 2048);
    const double tol_oracle = c.num("checks.oracle_tol", 1e-8);
    const double tol_const = c.num("checks.l2_constant_tol", 1e-8);
    const double ratio_max = c.num("checks.decay_ratio", 0.2);
    c.reject_unknown();

    const auto f0 = make_field(g, f0p, c);
    const auto spec = ForcingSpec::stationary(f0);
    const auto G = antiderivative_g(f0);
    const auto w0 = w0p.kind == "g" ? G.g : make_field(g, w0p, c);

    Report r;
    r.scenario = "couette-stationary";
    const auto oracle = duhamel_quadrature(w0, spec, t_oracle, n_oracle);
    add_max_check(r, "duhamel_vs_closed_form", rel_l2(oracle, solve_stationary(w0, f0, t_oracle)), tol_oracle);

    // starting from g the solution is g itself
    Series l2g{"l2_from_g", {}, {}};
    double worst = 0.0;
    const double gn = l2_norm(G.g);
    for (double t : times) {
        const double v = l2_norm(solve_stationary(G.g, f0, t));
        l2g.push(t, v);
        worst = std::max(worst, std::abs(v - gn) / gn);
    }
    r.series.push_back(l2g);
    const double lq = l2_norm(duhamel_quadrature(G.g, spec, t_oracle, n_oracle));
    worst = std::max(worst, std::abs(lq - gn) / gn);
    add_max_check(r, "l2_constant_from_g", worst, tol_const);

    NormSeries ns({0.0, -0.5, -1.0}, g);
    Series dist{"distance_to_g_Hm0.5", {}, {}};
    for (double t : times) {
        const auto w = solve_stationary(w0, f0, t);
        ns.push(t, w);
        dist.push(t, sobolev_norm(w - G.g, -0.5));
    }
    for (std::size_t i = 0; i < 3; ++i) r.series.push_back(ns.column(i, "omega"));
    r.series.push_back(dist);
    if (dist.v.front() > 0) {
        bool mono = true;
        for (std::size_t i = 1; i < dist.v.size(); ++i) mono = mono && dist.v[i] <= dist.v[i - 1] * (1 + 1e-12);
        const double ratio = dist.v.back() / dist.v.front();
        r.add_check("distance_monotone", mono);
        add_max_check(r, "distance_decay_ratio", ratio, ratio_max);
    } else {
        r.values["distance_checks"] = "skipped: w0 equals g";
    }
    r.values["g_l2"] = gn;
    r.values["g_h1"] = sobolev_norm(G.g, 1.0);
    return r;
}

inline Report consistency(Config& c) {
    const Grid g = grid_from_config(c, "periodic", 256, 256, 2.0 * std::numbers::pi);
    const auto w1p = field_preset(c, "w1", preset("gauss", 1.0, 1, 0.0, 1.0, 2.0, 2.0, 0.15));
    const auto w2p = field_preset(c, "w2", preset("gauss", 1.0, 1, 0.0, 1.0, 2.0, 2.0, 0.15));
    const double T = c.num("time.t_end", 80.0);
    const double record_dt = c.num("time.record_dt", 0.5);
    const double tol = c.num("quadrature.tol", 1e-7);
    const int max_nodes = c.integer("quadrature.max_nodes", 1 << 16);
    const double var_max = c.num("checks.iv_over_t_variation", 0.1);
    const double tail_max = c.num("checks.term_I_tail", 1e-3);
    const double closed_tol = c.num("checks.closed_form_tol", 1e-6);
    c.reject_unknown();

    const auto w1 = make_field(g, w1p, c), w2 = make_field(g, w2p, c);
    require_mean_free_x(w1, "omega_1");
    require_mean_free_x(w2, "omega_2");

    ConsistencyOptions opt;
    opt.s_list = {-1.0, -0.6, 0.0};
    opt.record_dt = record_dt;
    opt.tol = tol;
    opt.max_nodes = static_cast<std::size_t>(max_nodes);
    std::vector<std::pair<double, SpectralField>> late_I;
    opt.on_record = [&](double t, const std::array<SpectralField, 5>& cum) {
        if (t >= 2.0 * T / 3.0 - 1e-12) late_I.emplace_back(t, cum[0]);
    };
    const auto d = consistency_integral(w1, w2, T, opt);

    Report r;
    r.scenario = "consistency";
    for (int term = 0; term < 5; ++term)
        for (std::size_t is = 0; is < d.s_list.size(); ++is) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "term_%s_H%g", term_name(term), d.s_list[is]);
            r.series.push_back({buf, d.times, d.norms[term][is]});
        }
    r.values["quadrature_nodes"] = d.nodes;

    // ||IV||_H0 / t settles
    const std::size_t i0 = 2;  // s = 0
    Series ivt{"term_IV_H0_over_t", {}, {}};
    for (std::size_t n = 0; n < d.times.size(); ++n)
        if (d.times[n] > 0) ivt.push(d.times[n], d.norms[3][i0][n] / d.times[n]);
    r.series.push_back(ivt);
    add_max_check(r, "term_IV_over_t_converges", last_third_variation(ivt.t, ivt.v), var_max);

    Series ivm{"term_IV_Hm1", d.times, d.norms[3][0]};
    const auto trend = fit_linear(ivm);
    fit_entry(r, "term_IV_Hm1_trend", trend);
    r.add_check("term_IV_Hm1_no_positive_trend", !trend.positive_trend(),
                {{"slope", trend.slope}, {"half_width_95", trend.half_width}});

    double tail = 0.0;
    for (auto& [t, I] : late_I) tail = std::max(tail, sobolev_norm(I - d.term_I, -0.6));
    add_max_check(r, "term_I_Hm0.6_cauchy_tail", tail, tail_max);

    add_max_check(r, "term_II_closed_form", rel_l2(d.term_II, term_II_closed_form(w2, T)), closed_tol);
    const auto iv = term_IV_closed_form(w1, w2, T);
    r.values["term_IV_closed_form_rel"] = rel_l2(d.term_IV, iv.total);
    r.values["term_IV_lead_l2"] = l2_norm(iv.lead);
    r.values["term_IV_eq27_l2"] = l2_norm(iv.eq27);
    r.values["term_IV_remainder_l2"] = l2_norm(iv.eq29);
    return r;
}

inline ShearProfile profile_from_config(Config& c, const std::string& def) {
    const std::string name = c.str("profile.name", def);
    if (name == "couette_perturbed") {
        const double eps = c.num("profile.eps", 0.05);
        const double wn = c.num("profile.wavenumber", 2.0 * std::numbers::pi);
        return ShearProfile::couette_perturbed(eps, wn);
    }
    if (name == "table") return ShearProfile::from_table(c.resolve(c.required("profile.path")).string());
    return profile_by_name(name);
}

inline Report shear_linear(Config& c) {
    const Grid g = grid_from_config(c, "channel", 8, 128, 1.0, 2.0);
    const auto prof = profile_from_config(c, "couette_perturbed");
    const auto times = time_grid(c, 100.0, 51);
    const auto s_list = c.list("probe.s_list", {-1.0, 0.0, 1.0});
    ProbeOptions po;
    po.basket_size = c.integer("probe.basket_size", 20);
    po.seed = static_cast<unsigned>(c.integer("probe.seed", 12345));
    po.commutation_taus = c.list("probe.commutation_taus", {0.5, 1.0, 2.0});
    const auto f0p = field_preset(c, "f0", preset("bump", 1.0, 1, 0.0, 1.2, 1.8));
    const double t_dec = c.num("decomposition.t", 2.0);
    const int n_dec = c.integer("decomposition.n_steps", 64);
    const double tol_couette = c.num("checks.couette_tol", 1e-8);
    const double tol_comm = c.num("checks.commutation_tol", 1e-8);
    const double tol_dec = c.num("checks.decomposition_tol", 1e-6);
    c.reject_unknown();

    const auto f0 = make_field(g, f0p, c);
    require_mean_free_x(f0, "forcing f0");
    Report r;
    r.scenario = "shear-linear";

    // the Couette profile reproduces transport and the closed forms
    {
        const auto cou = ShearProfile::make_couette();
        const auto u = probe_basket(g, 1, po.seed)[0];
        double e = rel_l2(ShearSolver(g, cou).apply(7.0, 1.0, u), u);
        e = std::max(e, rel_l2(solve_forced_shear(u, ForcingSpec::resonant(f0), 5.0, cou, 4), solve_resonant(u, f0, 5.0)));
        e = std::max(e, rel_l2(solve_forced_shear(u, ForcingSpec::stationary(f0), 5.0, cou, 512), solve_stationary(u, f0, 5.0)));
        e = std::max(e, rel_l2(solve_g_shear(f0, cou), antiderivative_g(f0).g));
        add_max_check(r, "couette_identities", e, tol_couette);
    }

    const auto probe = probe_properties(g, prof, s_list, times, po);
    for (std::size_t is = 0; is < s_list.size(); ++is) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "ratio_H%g", s_list[is]);
        r.series.push_back({buf, times, probe.ratio[is]});
        std::snprintf(buf, sizeof buf, "dt_norm_H%g", s_list[is]);
        r.series.push_back({buf, times, probe.dt_norm[is]});
        std::snprintf(buf, sizeof buf, "ratio_trend_H%g", s_list[is]);
        fit_entry(r, buf, probe.trend[is]);
        std::snprintf(buf, sizeof buf, "ratio_linear_H%g", s_list[is]);
        fit_entry(r, buf, probe.trend_linear[is]);
        std::snprintf(buf, sizeof buf, "no_positive_trend_H%g", s_list[is]);
        r.add_check(buf, !probe.trend[is].positive_trend(),
                    {{"slope", probe.trend[is].slope}, {"half_width_95", probe.trend[is].half_width}});
        if (probe.decay[is].n > 0) {
            std::snprintf(buf, sizeof buf, "dt_norm_decay_H%g", s_list[is]);
            fit_entry(r, buf, probe.decay[is]);
        }
    }
    add_max_check(r, "commutation_defect", probe.commutation_defect, tol_comm);

    ShearSolver S(g, prof);
    const auto gs = solve_g_shear(f0, prof);
    const auto w0 = probe_basket(g, 1, po.seed)[0];
    const auto dec = stationary_decomposition_W(S, w0, gs, t_dec);
    const auto duh = duhamel_shear(S, w0, decomposition_forcing(S, f0), t_dec, n_dec);
    add_max_check(r, "decomposition_residual", rel_l2(duh, dec), tol_dec);
    return r;
}

inline Report shear_consistency(Config& c) {
    const Grid g = grid_from_config(c, "channel", 16, 256, 1.0, 3.0);
    const auto prof = profile_from_config(c, "couette_perturbed");
    const auto w0p = field_preset(c, "w0", preset("bump", 1.0, 1, 0.0, 1.3, 2.7));
    const auto f0p = field_preset(c, "f0", preset("bump", 0.5, 1, 0.7, 1.5, 2.5));
    const double T = c.num("time.t_end", 20.0);
    const int n = c.integer("time.n_steps", 400);
    const int every = c.integer("time.record_every", 10);
    const double ref_tol = c.num("checks.couette_reference_tol", 1e-6);
    c.reject_unknown();

    const auto w0 = make_field(g, w0p, c), f0 = make_field(g, f0p, c);
    require_mean_free_x(w0, "omega_0");
    require_mean_free_x(f0, "forcing f0");
    const auto res = consistency_integral_shear(w0, f0, prof, T, n, {-1.0, -0.6, 0.0}, every);

    Report r;
    r.scenario = "shear-consistency";
    for (std::size_t is = 0; is < res.s_list.size(); ++is) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "sigma_H%g", res.s_list[is]);
        r.series.push_back({buf, res.times, res.norms[is]});
    }
    r.add_check("finite", res.sigma.all_finite());
    Series hm1{"sigma_Hm1", res.times, res.norms[0]};
    if (hm1.size() >= 6) {
        const auto tr = fit_linear(hm1);
        fit_entry(r, "sigma_Hm1_trend", tr);
        r.values["sigma_Hm1_positive_trend"] = tr.positive_trend();
    }
    if (prof.couette) {
        ConsistencyOptions opt;
        opt.tol = 1e-8;
        const auto G = antiderivative_g(f0);
        const auto d = consistency_integral(w0 - G.g, G.g, T, opt);
        add_max_check(r, "couette_reference", rel_l2(res.sigma, d.total), ref_tol);
    }
    return r;
}

// ---------------------------------------------------------------------------

inline Report viscous_resonant(Config& c) {
    const Grid g = grid_from_config(c, "periodic", 16, 256, 8.0 * std::numbers::pi);
    const double nu = c.num("viscous.nu", 0.1);
    const auto w0p = field_preset(c, "w0", preset("bump", 1.0, 1, 0.0, -4.0, 4.0));
    const auto f0p = field_preset(c, "f0", preset("bump", 1.0, 1, 0.5, -3.0, 3.0));
    const auto times = time_grid(c, 20.0, 41);
    const double t_q = c.num("oracle.t", 3.0);
    const int n_q = c.integer("oracle.n_steps", 2000);
    const double tol_q = c.num("checks.oracle_tol", 1e-8);
    const double tol_heat = c.num("checks.heat_factor_tol", 1e-12);
    c.reject_unknown();

    require_viscosity(nu);
    const auto w0 = make_field(g, w0p, c), f0 = make_field(g, f0p, c);
    const auto spec = ForcingSpec::resonant(f0);
    Report r;
    r.scenario = "viscous-resonant";

    double heat_err = 0.0;
    for (double k : {1.0, 2.0, 5.0})
        for (double eta : {-7.0, 0.0, 3.5})
            for (auto [a, b] : std::vector<std::pair<double, double>>{{0.0, 1.0}, {0.5, 4.0}, {2.0, 10.0}}) {
                const auto sym = [&](double s) { return nu * (k * k + (eta - k * s) * (eta - k * s)); };
                const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(sym, a, b, 0, 1e-15);
                heat_err = std::max(heat_err, std::abs(heat_exponent(k, eta, nu, a, b) - q) / std::max(1.0, q));
            }
    add_max_check(r, "heat_factor_closed_form", heat_err, tol_heat);
    add_max_check(r, "b_form_vs_quadrature", rel_l2(multiplier_solution_W(w0, &spec, nu, t_q, n_q), viscous_resonant_W(w0, f0, nu, t_q)),
                  tol_q);

    const auto split = viscous_resonant_decomposition(w0, f0, nu, times);
    r.series.push_back(split.omega1);
    r.series.push_back(split.omega2);
    r.series.push_back(split.b_f0);
    if (split.omega1_fit) fit_entry(r, "omega1_decay", *split.omega1_fit);
    bool mono = true;
    for (std::size_t i = 1; i < split.b_f0.v.size(); ++i) mono = mono && split.b_f0.v[i] >= split.b_f0.v[i - 1] * (1 - 1e-12);
    r.add_check("b_f0_monotone", mono);
    return r;
}

inline Report viscous_stationary(Config& c) {
    const Grid g = grid_from_config(c, "periodic", 16, 512, 8.0 * std::numbers::pi);
    const double nu_packet = c.num("packet.nu", 0.01);
    const int k_packet = c.integer("packet.k", 1);
    const auto ptimes = time_grid(c, 20.0, 61, "packet");
    const double pt0 = c.num("packet.t0", 5.0);
    const double nu = c.num("viscous.nu", 0.05);
    const auto gp = field_preset(c, "g", preset("bump", 1.0, 1, 0.0, -3.0, 3.0));
    const auto w0p = field_preset(c, "w0", preset("bump", 1.0, 1, 1.3, -2.0, 4.0));
    const auto times = time_grid(c, 6.0, 25);
    const double d_lo = c.num("checks.d_lo", 2.9), d_hi = c.num("checks.d_hi", 3.1);
    c.reject_unknown();

    require_viscosity(nu);
    require_viscosity(nu_packet);
    Report r;
    r.scenario = "viscous-stationary";

    SpectralField packet(g);
    int ip = -1;
    for (int i = 0; i < g.Nx; ++i)
        if (g.kmode(i) == k_packet) ip = i;
    if (ip < 0 || k_packet == 0) throw config_error("packet.k must be a resolved nonzero x mode");
    packet(ip, 0) = 1.0;
    std::vector<double> pts;
    for (double t : ptimes)
        if (t >= pt0) pts.push_back(t);
    const auto probe = enhanced_dissipation_probe(packet, nu_packet, pts);
    r.series.push_back(Series{"packet_l2", probe.l2.t, probe.l2.v});
    fit_entry(r, "packet_decay", probe.fit);
    r.add_check("packet_exponent", probe.fit.d >= d_lo && probe.fit.d <= d_hi, {{"d", probe.fit.d}, {"range", {d_lo, d_hi}}});

    // forcing f0 = L g makes g stationary
    const auto gs = make_field(g, gp, c);
    require_mean_free_x(gs, "stationary solution g");
    const auto w0 = make_field(g, w0p, c);
    require_mean_free_x(w0, "initial vorticity");
    const double d0 = l2_norm(w0 - gs);
    Series dist{"distance_to_g", {}, {}}, env{"envelope_t3_over_12", {}, {}}, ref{"reference_t3_over_3", {}, {}};
    bool under = true;
    double worst = 0.0;
    for (double t : times) {
        const double dv = l2_norm(stationary_damping(w0, gs, nu, t) - gs);
        const double e = damping_envelope(nu, 1.0, t) * d0;
        dist.push(t, dv);
        env.push(t, e);
        ref.push(t, reference_curve(nu, 1.0, t) * d0);
        under = under && dv <= e * (1 + 1e-12);
        worst = std::max(worst, e > 0 ? dv / e : 0.0);
    }
    r.series.push_back(dist);
    r.series.push_back(env);
    r.series.push_back(ref);
    r.add_check("damping_under_envelope", under, {{"max_ratio", worst}});
    return r;
}

inline Report bprofile(Config& c) {
    const double k = c.num("b.k", 1.0), eta = c.num("b.eta", 0.0), nu = c.num("viscous.nu", 0.1);
    const auto times = time_grid(c, 64.0, 129);
    const int kmax = c.integer("bounds.kmax", 16), emax = c.integer("bounds.etamax", 32);
    const bool mixed = c.flag("bounds.mixed_quadrant", true);
    c.reject_unknown();

    require_viscosity(nu);
    if (k == 0.0) throw config_error("b.k must be nonzero");
    if (kmax < 1 || emax < 1) throw config_error("bounds.kmax and bounds.etamax must be positive");
    Report r;
    r.scenario = "bprofile";
    const auto p = make_bprofile(k, eta, nu, times);
    r.series.push_back({"b", times, p.b});
    bool mono = true, bounded = true;
    for (std::size_t i = 0; i < p.b.size(); ++i) {
        bounded = bounded && p.b[i] >= 0.0 && p.b[i] <= 1.0 / (nu * k * k);
        if (i) mono = mono && p.b[i] >= p.b[i - 1];
    }
    r.add_check("b_monotone", mono);
    r.add_check("b_below_one_over_nu_k2", bounded, {{"bound", 1.0 / (nu * k * k)}});
    r.values["b_inf"] = p.b_inf;
    r.values["b_inf_error"] = p.b_inf_error;

    std::vector<int> ks;
    std::vector<double> etas;
    for (int i = 1; i <= kmax; ++i) ks.push_back(i);
    for (int e = 1; e <= emax; ++e) etas.push_back(e);
    const auto br = check_binf_bounds(ks, etas, nu);
    r.values["binf_bounds"] = to_json(br);
    r.add_check("binf_upper_bound", br.upper_bound_ok, {{"max_product", br.max_upper_product}, {"one_over_nu", 1.0 / nu}});
    r.add_check("binf_lower_constant_positive", br.c_measured > 0.0, {{"c_measured", br.c_measured}});
    if (mixed) {
        std::vector<double> neg;
        for (double e : etas) neg.push_back(-e);
        r.values["binf_bounds_mixed_quadrant"] = to_json(check_binf_bounds(ks, neg, nu));
    }
    return r;
}

// ---------------------------------------------------------------------------

/// Stationary forcing amplitude * cos(kx x) exp(-(y - c)^2 / 2 w^2), rescaled so that
/// ||f||_H1 = fraction * nu^2 / 40 when fraction > 0.
inline SpectralField ns_forcing(Config& c, const Grid& g, double nu) {
    const auto fp = field_preset(c, "f", preset("gauss", 1.0, 1, 0.0, 1.0, 2.0, 0.0, 1.0));
    const double frac = c.num("f.smallness_fraction", 1.0);
    auto f = make_field(g, fp, c);
    if (frac > 0 && l2_norm(f) > 0) f *= frac * nu * nu / 40.0 / sobolev_norm(f, 1.0);
    return f;
}

inline Report ns_fixedpoint(Config& c) {
    const Grid g = grid_from_config(c, "periodic", 16, 256, 8.0 * std::numbers::pi);
    const double nu = c.num("viscous.nu", 0.5);
    const double tol = c.num("fixedpoint.tol", 1e-10);
    const int iters = c.integer("fixedpoint.max_iters", 30);
    const double res_tol = c.num("checks.residual_tol", 1e-6);
    const auto f = ns_forcing(c, g, nu);
    c.reject_unknown();

    const auto cfg = FixedPointConfig::make(nu, f, tol, iters);
    const auto fp = fixed_point_stationary(cfg);

    Report r;
    r.scenario = "ns-fixedpoint";
    Series inc{"increments_h1", {}, {}};
    for (std::size_t i = 0; i < fp.increments.size(); ++i) inc.push(static_cast<double>(i + 1), fp.increments[i]);
    r.series.push_back(inc);
    r.values["fixed_point"] = to_json(fp);
    r.values["f_h1"] = sobolev_norm(f, 1.0);
    r.values["f_h1_limit"] = nu * nu / 40.0;
    r.add_check("iterations", fp.iterations <= iters, {{"iterations", fp.iterations}, {"max", iters}});
    r.add_check("g_h1_bound", fp.bound_ok, {{"g_h1", fp.h1_norm}, {"bound", fp.h1_bound}});
    add_max_check(r, "residual", fp.residual, res_tol);
    add_max_check(r, "contraction", fp.contraction, 1.0);
    return r;
}

inline Report ns_decay(Config& c) {
    const Grid g = grid_from_config(c, "periodic", 16, 256, 8.0 * std::numbers::pi);
    const double nu = c.num("viscous.nu", 0.5);
    const double tol = c.num("fixedpoint.tol", 1e-10);
    const auto f = ns_forcing(c, g, nu);
    const auto pp = field_preset(c, "perturbation", preset("gauss", 0.01, 1, 0.0, 1.0, 2.0, 0.5, 1.0));
    DecayOptions dopt;
    dopt.t_end = c.num("time.t_end", 20.0);
    dopt.sample_dt = c.num("time.sample_dt", 0.25);
    dopt.evolve.dt = c.num("time.dt", 0.01);
    const double rate_frac = c.num("checks.rate_fraction", 0.9);
    const double stat_factor = c.num("checks.stationarity_factor", 10.0);
    const bool lin = c.flag("linear.enabled", true);
    const double lin_nu = c.num("linear.nu", 0.05);
    const double lin_t = c.num("linear.t", 10.0);
    const auto lin_eps = c.list("linear.eps", {4e-2, 2e-2, 1e-2, 5e-3});
    const double lin_dt = c.num("linear.dt", 0.02);
    const double slope_tol = c.num("checks.linear_slope_tol", 0.1);
    c.reject_unknown();

    const auto cfg = FixedPointConfig::make(nu, f, tol);
    const auto pert = make_field(g, pp, c);
    require_mean_free_x(pert, "perturbation");
    const auto fp = fixed_point_stationary(cfg);

    Report r;
    r.scenario = "ns-decay";
    r.values["fixed_point"] = to_json(fp);

    // the fixed point does not move
    {
        NSState st = make_ns_state(fp.g, nu, ForcingSpec::stationary(f));
        Series drift{"stationary_drift_l2", {}, {}};
        drift.push(0.0, 0.0);
        const int n = static_cast<int>(std::llround(dopt.t_end / dopt.sample_dt));
        for (int j = 1; j <= n; ++j) {
            evolve(st, j * dopt.sample_dt, dopt.evolve);
            drift.push(st.t, l2_norm(st.eulerian() - fp.g));
        }
        r.series.push_back(drift);
        add_max_check(r, "fixed_point_stationary", *std::max_element(drift.v.begin(), drift.v.end()), stat_factor * tol);
    }

    const auto rep = perturbation_decay(fp.g + pert, fp.g, cfg, dopt);
    r.series.push_back(rep.distance);
    fit_entry(r, "perturbation_decay", rep.fit);
    r.values["floor_rate"] = rep.floor_rate;
    r.values["remaps"] = rep.remaps;
    const double need = rate_frac * nu / 2.0;
    r.add_check("decay_rate", rep.fit.b >= need, {{"rate", rep.fit.b}, {"required", need}});

    if (lin) {
        const auto w = sample(g, [](double x, double y) {
            return std::cos(x) * std::exp(-0.5 * y * y) + 0.6 * std::sin(2 * x + 0.3) * std::exp(-0.5 * std::pow((y - 0.8) / 0.7, 2));
        });
        const auto lc = linear_consistency(w, lin_nu, lin_t, lin_eps, EvolveOptions{lin_dt});
        r.series.push_back({"linear_defect", lc.eps, lc.defect});
        r.values["linear_defect_slope"] = lc.slope;
        r.add_check("linear_defect_second_order", std::abs(lc.slope - 2.0) <= slope_tol, {{"slope", lc.slope}, {"tolerance", slope_tol}});
    }
    return r;
}

inline Report ns_resonant_split(Config& c) {
    const Grid g = grid_from_config(c, "periodic", 16, 256, 8.0 * std::numbers::pi);
    const double nu = c.num("viscous.nu", 0.1);
    const auto w0p = field_preset(c, "w0", preset("gauss", 1.0, 1, 0.0, 1.0, 2.0, 0.0, 1.0));
    const auto f0p = field_preset(c, "f0", preset("gauss", 1.0, 1, 0.5, 1.0, 2.0, 0.5, 1.0));
    const auto times = time_grid(c, 20.0, 41);
    c.reject_unknown();

    require_viscosity(nu);
    const auto w0 = make_field(g, w0p, c), f0 = make_field(g, f0p, c);
    require_mean_free_x(w0, "omega_0");
    require_mean_free_x(f0, "forcing f0");
    const auto split = viscous_resonant_decomposition(w0, f0, nu, times);

    Report r;
    r.scenario = "ns-resonant-split";
    r.series.push_back(split.omega1);
    r.series.push_back(split.omega2);
    r.series.push_back(split.b_f0);
    if (split.omega1_fit) {
        fit_entry(r, "omega1_decay", *split.omega1_fit);
        r.values["omega1_measured_constant"] = split.omega1_fit->b / nu;
        r.add_check("omega1_super_exponential", split.omega1_fit->d > 2.0, {{"d", split.omega1_fit->d}});
    }
    double env = 0.0;
    for (int i = 1; i < g.Nx; ++i)
        for (int m = 0; m < g.Ny; ++m)
            if (f0(i, m) != cplx{}) env += std::norm(f0(i, m)) / std::pow(nu * g.kx(i) * g.kx(i), 2);
    env = std::sqrt(env);
    const double mx = *std::max_element(split.omega2.v.begin(), split.omega2.v.end());
    r.add_check("omega2_bounded", mx <= env, {{"max", mx}, {"envelope", env}});
    bool mono = true;
    for (std::size_t i = 1; i < split.b_f0.v.size(); ++i) mono = mono && split.b_f0.v[i] >= split.b_f0.v[i - 1] * (1 - 1e-12);
    r.add_check("b_f0_monotone", mono);
    return r;
}

}  // namespace scen

/// Dispatch on the "scenario" key; the config echo becomes the report config.
inline Report run_scenario(Config& c) {
    const std::string name = c.required("scenario");
    using Fn = Report (*)(Config&);
    static const std::vector<std::pair<std::string, Fn>> table = {
        {"couette-resonant", scen::couette_resonant}, {"couette-stationary", scen::couette_stationary},
        {"consistency", scen::consistency},           {"shear-linear", scen::shear_linear},
        {"shear-consistency", scen::shear_consistency}, {"viscous-resonant", scen::viscous_resonant},
        {"viscous-stationary", scen::viscous_stationary}, {"bprofile", scen::bprofile},
        {"ns-fixedpoint", scen::ns_fixedpoint},       {"ns-decay", scen::ns_decay},
        {"ns-resonant-split", scen::ns_resonant_split},
    };
    for (auto& [n, fn] : table)
        if (n == name) {
            Report r = fn(c);
            r.config = c.echoed();
            return r;
        }
    throw config_error("unknown scenario '" + name + "' (see list-scenarios)");
}

}  // namespace shearlab
