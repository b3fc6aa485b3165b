#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "shearlab/couette.hpp"

using namespace shearlab;
using namespace testing_util;
using Catch::Approx;

namespace {
const Grid kChan = chan(8, 256, 1.0, 5.0);
double rho(double y) { return std::sin(std::numbers::pi * (y - 1.0) / 4.0); }
}  // namespace

TEST_CASE("resonant forcing grows linearly along streamlines", "[couette]") {
    const Grid g = box(16, 256, 8.0 * std::numbers::pi);
    SpectralField w0(g);
    auto f0 = sample(g, [](double x, double) { return std::cos(x); });
    auto w = solve_resonant(w0, f0, 5.0);
    auto expect = sample(g, [](double x, double y) { return 5.0 * std::cos(x - 5.0 * y); });
    CHECK(rel_diff(w, expect) < 1e-12);
    CHECK(l2_norm(w) == Approx(5.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(sobolev_norm(w, -1.0) == Approx(5.0 / std::sqrt(2.0) / std::sqrt(27.0)).epsilon(1e-12));
}

TEST_CASE("resonant solution matches Duhamel quadrature on a channel", "[couette]") {
    auto w0 = sample(kChan, [](double x, double y) { return std::sin(2 * x) * rho(y); });
    auto f0 = sample(kChan, [](double x, double y) { return std::cos(x) * rho(y) * rho(y); });
    const double t = 3.0;
    auto closed = solve_resonant(w0, f0, t);
    auto quad = duhamel_quadrature(w0, ForcingSpec::resonant(f0), t, 64);
    CHECK(rel_diff(quad, closed) < 1e-12);
}

TEST_CASE("stationary forcing: closed form, antiderivative and Duhamel agree", "[couette]") {
    auto w0 = sample(kChan, [](double x, double y) { return std::cos(x) * rho(y); });
    auto f0 = sample(kChan, [](double x, double y) { return std::cos(x) * rho(y) + 0.5 * std::sin(3 * x) * rho(y); });
    auto G = antiderivative_g(f0);
    auto g_exact = sample(kChan, [](double x, double y) {
        return (std::sin(x) * rho(y) - std::cos(3 * x) * rho(y) / 6.0) / y;
    });
    CHECK(rel_diff(G.g, g_exact) < 1e-12);
    // y d_x g = f
    std::vector<double> ys = kChan.y_points();
    auto dg = ddx(G.g);
    auto ydg = sample(kChan, [](double, double) { return 0.0; });
    auto hy = to_hybrid(dg);
    for (int i = 0; i < kChan.Nx; ++i)
        for (int j = 0; j < kChan.Ny; ++j) hy[at(kChan, i, j)] *= ys[j];
    CHECK(rel_diff(from_hybrid(kChan, hy, Frame::eulerian()), f0) < 1e-12);

    const double t = 4.0;
    auto closed = solve_stationary(w0, f0, t);
    auto expect = sample(kChan, [&](double x, double y) {
        const double xs = x - t * y;
        auto g = [&](double xx) { return (std::sin(xx) * rho(y) - std::cos(3 * xx) * rho(y) / 6.0) / y; };
        return std::cos(xs) * rho(y) - g(xs) + g(x);
    });
    CHECK(rel_diff(closed, expect) < 1e-12);
    auto quad = duhamel_quadrature(w0, ForcingSpec::stationary(f0), t, 1024);
    CHECK(rel_diff(quad, closed) < 1e-8);
}

TEST_CASE("hypothesis violations are reported", "[couette]") {
    const Grid bad = chan(8, 64, -1.0, 1.0);
    auto f = sample(bad, [](double x, double) { return std::cos(x); });
    CHECK_THROWS_AS(antiderivative_g(f), Error);
    try {
        antiderivative_g(f);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Hypothesis);
    }
    auto mean = sample(kChan, [](double, double y) { return rho(y); });
    CHECK_THROWS_AS(ForcingSpec::stationary(mean), Error);
    CHECK_THROWS_AS(solve_resonant(mean, mean, 1.0), Error);

    const Grid g = box(16, 64, 8.0 * std::numbers::pi);
    auto wide = sample(g, [](double x, double) { return std::cos(x); });
    CHECK_THROWS_AS(antiderivative_g(wide), Error);
}

TEST_CASE("Duhamel closure failures surface as numerical errors", "[couette]") {
    SpectralField w0(kChan);
    ForcingClosure bad = [](double tau) -> SpectralField {
        if (tau > 0.5) throw std::runtime_error("boom");
        return SpectralField(kChan);
    };
    try {
        duhamel_quadrature(w0, bad, 1.0, 8);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Numerical);
    }
}

TEST_CASE("time-periodic forcing reduces to stationary components", "[couette]") {
    const double T = 2.0 * std::numbers::pi;
    std::vector<SpectralField> samples;
    for (int n = 0; n < 16; ++n) {
        const double tn = n * T / 16;
        samples.push_back(sample(kChan, [&](double x, double y) { return std::cos(tn) * std::cos(x) * rho(y); }));
    }
    auto f = ForcingSpec::time_periodic(samples, T);
    auto comps = reduce_time_periodic(f);
    REQUIRE(comps.size() == 4);
    for (auto& c : comps) {
        CHECK(std::abs(std::abs(c.c) - 1.0) < 1e-12);
        CHECK(std::abs(c.k) == 1);
        CHECK(c.galilean_shift == Approx(c.c / c.k));
    }
    CHECK(rel_diff(f.eval(0.3), sample(kChan, [](double x, double y) { return std::cos(0.3) * std::cos(x) * rho(y); })) < 1e-12);

    auto w0 = sample(kChan, [](double x, double y) { return std::sin(x) * rho(y); });
    auto w = solve_time_periodic(w0, f, 5.0);
    auto quad = duhamel_quadrature(w0, f, 5.0, 2048);
    CHECK(rel_diff(w, quad) < 1e-6);

    std::vector<SpectralField> few(samples.begin(), samples.begin() + 4);
    CHECK_THROWS_AS(ForcingSpec::time_periodic(few, T), Error);
}
