#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "shearlab/couette.hpp"
#include "shearlab/diagnostics.hpp"

using namespace shearlab;
using namespace testing_util;
using Catch::Approx;

namespace {
Series make(std::function<double(double)> f, double t0, double t1, int n) {
    Series s{"s", {}, {}};
    for (int i = 0; i <= n; ++i) {
        const double t = t0 + (t1 - t0) * i / n;
        s.push(t, f(t));
    }
    return s;
}
std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}
}  // namespace

TEST_CASE("power-law fits recover exact models", "[diagnostics]") {
    auto f = fit_power_law(make([](double t) { return 3 * t; }, 1, 10, 40));
    CHECK(f.alpha == Approx(1.0).margin(1e-6));
    CHECK(f.residual_rms < 1e-12);
    CHECK(fit_power_law(make([](double) { return 5.0; }, 1, 10, 40)).alpha == Approx(0.0).margin(1e-6));
    CHECK_THROWS_AS(fit_power_law(make([](double t) { return t - 5; }, 1, 10, 40), Window{1, 10}), Error);
    CHECK_THROWS_AS(fit_power_law(make([](double t) { return t; }, 1, 10, 3)), Error);
}

TEST_CASE("exp-poly fits recover degree and rate", "[diagnostics]") {
    auto s3 = make([](double t) { return std::exp(-0.1 * t * t * t); }, 0.5, 4, 60);
    auto fixed = fit_exp_poly(s3, 3.0);
    CHECK(fixed.b == Approx(0.1).margin(1e-10));
    auto free = fit_exp_poly(s3);
    CHECK(free.d == Approx(3.0).margin(1e-3));
    CHECK(free.b == Approx(0.1).margin(1e-4));
    auto s1 = fit_exp_poly(make([](double t) { return std::exp(-0.25 * t); }, 0, 20, 60));
    CHECK(s1.d == Approx(1.0).margin(1e-3));
    CHECK(s1.b == Approx(0.25).margin(1e-4));
}

TEST_CASE("trend test", "[diagnostics]") {
    auto up = fit_linear(make([](double t) { return 1 + 0.01 * t + 1e-3 * std::sin(7 * t); }, 0, 100, 200));
    CHECK(up.positive_trend());
    auto flat = fit_linear(make([](double t) { return 1 + 1e-3 * std::sin(7 * t); }, 0, 100, 200));
    CHECK_FALSE(flat.positive_trend());
}

TEST_CASE("relaxed trend test separates saturation from growth", "[diagnostics]") {
    auto wiggle = [](double t) { return 1e-4 * std::sin(7 * t); };
    auto relax = fit_linear_relaxed(make([&](double t) { return 2 - 3 / (1 + t) + wiggle(t); }, 0, 100, 50));
    CHECK(relax.model == FitModel::LinearRelaxed);
    CHECK(relax.relaxation == Approx(-3).margin(1e-2));
    CHECK_FALSE(relax.positive_trend());
    CHECK_FALSE(fit_linear_relaxed(make([&](double t) { return 2 - std::exp(-t / 20) + wiggle(t); }, 0, 100, 50)).positive_trend());
    CHECK_FALSE(fit_linear_relaxed(make([&](double t) { return 2 - 3 / std::pow(1 + t, 2) + wiggle(t); }, 0, 100, 50)).positive_trend());
    // slow unbounded growth is still a trend
    CHECK(fit_linear_relaxed(make([&](double t) { return std::sqrt(t) + wiggle(t); }, 0, 100, 50)).positive_trend());
    CHECK(fit_linear_relaxed(make([&](double t) { return std::log1p(t) + wiggle(t); }, 0, 100, 50)).positive_trend());
    CHECK(fit_linear_relaxed(make([&](double t) { return std::pow(1 + t, 0.2) + wiggle(t); }, 0, 100, 50)).positive_trend());
    auto exact = fit_linear_relaxed(make([](double t) { return 1 + 0.5 * t + 2 / (1 + t); }, 0, 30, 30), Window{0, 30});
    CHECK(exact.slope == Approx(0.5).margin(1e-10));
    CHECK(exact.intercept == Approx(1.0).margin(1e-9));
    CHECK_THROWS_AS(fit_linear_relaxed(make([](double t) { return t; }, 0, 1, 3)), Error);
}

TEST_CASE("resonant Couette growth exponent", "[diagnostics]") {
    const Grid g = chan(8, 512, 1.0, 5.0);
    SpectralField w0(g);
    auto f0 = sample(g, [](double x, double y) { return std::cos(x) * bump(y, 1, 5); });
    NormSeries ns({0.0}, g);
    for (int i = 0; i <= 90; ++i) {
        const double t = 10 + i;
        ns.push(t, solve_resonant(w0, f0, t));
    }
    auto f = fit_power_law(ns.column(0), Window{10, 100});
    CHECK(f.alpha >= 0.98);
    CHECK(f.alpha <= 1.02);
}

TEST_CASE("weak pairings", "[diagnostics]") {
    const Grid g = chan(8, 512, 1.0, 5.0);
    auto basket = TestFunctionBasket::make(g);
    REQUIRE(basket.members.size() == 5);
    for (auto& m : basket.members) {
        CHECK(sobolev_norm(m, 1.0) == Approx(1.0).epsilon(1e-12));
        CHECK(k0_content(m) < 1e-14);
    }
    auto h = sample(g, [](double x, double y) { return std::cos(x) * bump(y, 1.5, 4.5) + std::sin(2 * x) * bump(y, 2, 4); });
    auto f0 = sample(g, [](double x, double y) { return std::cos(x) * bump(y, 1, 5); });
    SpectralField zero(g);
    PairingAccumulator transport(basket), constant(basket), resonant(basket);
    for (int i = 0; i <= 100; ++i) {
        const double t = i;
        transport.add(t, solve_unforced(h, t));
        constant.add(t, h);
        resonant.add(t, solve_resonant(zero, f0, t));
    }
    auto rt = transport.finish();
    CHECK(rt.cauchy_tail < 1e-3);
    for (auto& p : rt.pairings) CHECK(std::abs(p.back()) < 1e-3);
    CHECK(constant.finish().cauchy_tail < 1e-14);
    CHECK(resonant.finish().cauchy_tail < 1e-2);
    CHECK_THROWS_AS(PairingAccumulator(basket).add(0.0, SpectralField(chan(8, 64, 1, 5))), Error);
}

TEST_CASE("report emission is deterministic", "[diagnostics]") {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "shearlab_report_test";
    fs::remove_all(root);
    Report empty;
    empty.scenario = "empty";
    empty.series.push_back({"norm", {}, {}});
    emit_report(empty, root / "e");
    CHECK(slurp(root / "e" / "norm.csv") == "t,value\r\n");
    auto js = nlohmann::json::parse(slurp(root / "e" / "summary.json"));
    CHECK(js["format"] == "shearlab-report-v1");

    Report r;
    r.scenario = "x";
    r.config["nu"] = 0.1;
    r.series.push_back(make([](double t) { return std::exp(-t) / 3.0; }, 0, 1, 10));
    r.fits["f"] = to_json(fit_exp_poly(r.series[0], 1.0));
    r.add_check("c", true);
    emit_report(r, root / "a");
    emit_report(r, root / "b");
    CHECK(slurp(root / "a" / "summary.json") == slurp(root / "b" / "summary.json"));
    CHECK(slurp(root / "a" / "s.csv") == slurp(root / "b" / "s.csv"));
    CHECK(slurp(root / "a" / "s.csv").find("0.33333333333333331") != std::string::npos);
    fs::remove_all(root);
}
