// Acceptance run: one PASS/FAIL line per criterion. Tolerances are pinned here
// and compared against the values the scenarios report, not their own checks.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "shearlab/scenarios.hpp"

namespace fs = std::filesystem;
using namespace shearlab;
using nlohmann::ordered_json;

namespace {

struct Run {
    Report report;
    ordered_json summary;
    double seconds = 0.0;
    std::string error;
};

Run run(const std::string& text) {
    Run r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Config c = Config::from_string(text);
        r.report = run_scenario(c);
        r.summary = summary_json(r.report);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

double val(const Run& r, const std::string& check, const std::string& field = "value") {
    return r.report.checks.at(check).at(field).get<double>();
}

bool ok(const Run& r, const std::string& check) { return r.report.checks.at(check).at("ok").get<bool>(); }

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <class F>
void criterion(int id, F&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        verdict(id, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

Run require(const std::string& text) {
    Run r = run(text);
    if (!r.error.empty()) throw std::runtime_error(r.error);
    return r;
}

std::map<std::string, std::string> read_dir(const fs::path& d) {
    std::map<std::string, std::string> out;
    for (auto& e : fs::directory_iterator(d)) {
        std::ifstream is(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        out[e.path().filename().string()] = ss.str();
    }
    return out;
}

}  // namespace

int main() {
    Run cres, csta, cons, shear, vres, bprof, vsta, fixp, decay;

    criterion(1, [&] {
        cres = require("scenario = couette-resonant\n[oracle]\nt = 5\n");
        csta = require("scenario = couette-stationary\n[oracle]\nt = 5\n");
        const double a = val(cres, "duhamel_vs_closed_form"), b = val(csta, "duhamel_vs_closed_form");
        verdict(1, a < 1e-8 && b < 1e-8, fmt("resonant rel %.3g, stationary rel %.3g (< 1e-8)", a, b));
    });

    criterion(2, [&] {
        const double alpha = val(cres, "growth_exponent", "alpha");
        const double sup = val(cres, "hminus1_bounded", "sup"), bound = val(cres, "hminus1_bounded", "bound");
        const double tail = val(cres, "velocity_pairings_cauchy");
        const auto& fit = cres.report.fits.at("l2_growth");
        const bool window = fit.at("window")[0] == 10.0 && fit.at("window")[1] == 100.0;
        verdict(2, window && alpha >= 0.98 && alpha <= 1.02 && sup <= bound + 1e-6 && tail < 1e-2,
                fmt("alpha %.4f on [10,100], sup H^-1 %.4g <= %.4g, pairing tail %.3g", alpha, sup, bound, tail));
    });

    criterion(3, [&] {
        const double c = val(csta, "l2_constant_from_g");
        const double ratio = val(csta, "distance_decay_ratio");
        const bool mono = ok(csta, "distance_monotone");
        const double tend = csta.report.series.back().t.back();
        verdict(3, c < 1e-8 && mono && ratio < 0.2 && tend == 100.0,
                fmt("L2 drift %.3g, monotone %d, H^-1/2 ratio %.4f at t=%g", c, int(mono), ratio, tend));
    });

    criterion(4, [&] {
        cons = require("scenario = consistency\n[grid]\nnx = 256\nny = 256\n[time]\nt_end = 80\n");
        const double var = val(cons, "term_IV_over_t_converges");
        const bool trend = ok(cons, "term_IV_Hm1_no_positive_trend");
        const double tail = val(cons, "term_I_Hm0.6_cauchy_tail");
        const double ii = val(cons, "term_II_closed_form");
        verdict(4, var < 0.1 && trend && tail < 1e-3 && ii < 1e-6,
                fmt("IV/t variation %.3g, IV H^-1 no positive trend %d, I tail %.3g, II closed form %.3g (%.0f s)", var,
                    int(trend), tail, ii, cons.seconds));
    });

    criterion(5, [&] {
        shear = require(
            "scenario = shear-linear\n[profile]\nname = couette_perturbed\neps = 0.05\nwavenumber = 2pi\n"
            "[probe]\ns_list = -1, 0, 1\n[time]\nt_end = 100\n");
        const double id = val(shear, "couette_identities");
        bool trends = true;
        for (const char* s : {"no_positive_trend_H-1", "no_positive_trend_H0", "no_positive_trend_H1"}) trends = trends && ok(shear, s);
        const double comm = val(shear, "commutation_defect");
        const double dec = val(shear, "decomposition_residual");
        verdict(5, id < 1e-8 && trends && comm < 1e-8 && dec < 1e-6,
                fmt("Couette identities %.3g, no positive trends %d, commutation %.3g, plug-in residual %.3g (%.0f s)", id,
                    int(trends), comm, dec, shear.seconds));
    });

    criterion(6, [&] {
        vres = require("scenario = viscous-resonant\n");
        bprof = require("scenario = bprofile\n[viscous]\nnu = 0.1\n[bounds]\nkmax = 16\netamax = 32\n");
        const double heat = val(vres, "heat_factor_closed_form");
        const bool mono = ok(bprof, "b_monotone"), bounded = ok(bprof, "b_below_one_over_nu_k2");
        const bool upper = ok(bprof, "binf_upper_bound");
        const double cm = val(bprof, "binf_lower_constant_positive", "c_measured");
        const auto& bb = bprof.report.values.at("binf_bounds");
        const bool grid = bb.at("points").get<int>() == 16 * 32;
        verdict(6, heat < 1e-12 && mono && bounded && upper && cm > 0 && grid,
                fmt("heat factor %.3g, b monotone %d, b <= 1/(nu k^2) %d, upper bound %d on 16x32, c_measured %.4g", heat,
                    int(mono), int(bounded), int(upper), cm));
    });

    criterion(7, [&] {
        vsta = require("scenario = viscous-stationary\n[packet]\nnu = 0.01\nk = 1\n");
        const double d = val(vsta, "packet_exponent", "d");
        const bool env = ok(vsta, "damping_under_envelope");
        verdict(7, d >= 2.9 && d <= 3.1 && env, fmt("free exponent d %.4f, under envelope %d", d, int(env)));
    });

    criterion(8, [&] {
        fixp = require("scenario = ns-fixedpoint\n[viscous]\nnu = 0.5\n[f]\nsmallness_fraction = 1\n");
        const auto& fp = fixp.report.values.at("fixed_point");
        const int it = fp.at("iterations").get<int>();
        const double h1 = fp.at("g_h1").get<double>(), res = fp.at("residual_l2").get<double>();
        const double q = fp.at("contraction").get<double>();
        const double fh1 = fixp.report.values.at("f_h1").get<double>();
        const bool forcing = std::abs(fh1 - 0.25 / 40.0) < 1e-12;
        verdict(8, forcing && it <= 30 && h1 <= 0.025 && res < 1e-6 && q < 1.0,
                fmt("||f||_H1 %.6g, iterations %d, ||g||_H1 %.4g, residual %.3g, contraction %.3g", fh1, it, h1, res, q));
    });

    criterion(9, [&] {
        decay = require(
            "scenario = ns-decay\n[viscous]\nnu = 0.5\n[perturbation]\namplitude = 0.01\n[time]\nt_end = 20\n");
        const double rate = val(decay, "decay_rate", "rate");
        const double drift = val(decay, "fixed_point_stationary");
        const double tol = decay.report.config.at("fixedpoint.tol").get<double>();
        verdict(9, rate >= 0.9 * 0.25 && drift < 10 * tol,
                fmt("decay rate %.4g >= %.4g, stationary drift %.3g over [0,20] (< %.1g)", rate, 0.225, drift, 10 * tol));
    });

    criterion(10, [&] {
        const double slope = decay.report.values.at("linear_defect_slope").get<double>();
        verdict(10, std::abs(slope - 2.0) <= 0.1, fmt("defect slope %.4f", slope));
    });

    criterion(11, [&] {
        const fs::path root = fs::temp_directory_path() / "shearlab_acceptance_determinism";
        fs::remove_all(root);
        bool same = true;
        std::string detail;
        for (const char* text : {"scenario = couette-resonant\n", "scenario = ns-fixedpoint\n", "scenario = bprofile\n"}) {
            const auto a = require(text), b = require(text);
            emit_report(a.report, root / "a");
            emit_report(b.report, root / "b");
            const auto da = read_dir(root / "a"), db = read_dir(root / "b");
            same = same && !da.empty() && da == db;
            detail += a.report.scenario + ":" + std::to_string(da.size()) + " files ";
            fs::remove_all(root);
        }
        verdict(11, same, detail + (same ? "byte-identical" : "differ"));
    });

    std::printf("%d criteria failed\n", failures);
    return failures ? 1 : 0;
}
