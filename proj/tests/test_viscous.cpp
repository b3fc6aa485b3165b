#include <catch2/catch_amalgamated.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "helpers.hpp"
#include "shearlab/viscous.hpp"

using namespace shearlab;
using namespace testing_util;
using Catch::Approx;

namespace {
const Grid kBox = box(16, 256, 8.0 * std::numbers::pi);
}

TEST_CASE("heat exponent matches quadrature of the symbol", "[viscous]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-5, 5), T(0, 4);
    for (int n = 0; n < 200; ++n) {
        const double k = std::round(U(rng)), eta = U(rng), nu = 0.05 + std::abs(U(rng)) / 10;
        const double tau = T(rng), t = tau + T(rng);
        const double num = nu * quad::simpson([&](double s) { return k * k + (eta - k * s) * (eta - k * s); }, tau, t, 8);
        CHECK(heat_exponent(k, eta, nu, tau, t) == Approx(num).epsilon(1e-12).margin(1e-14));
        CHECK(heat_exponent(k, eta, nu, tau, t) >= 0.0);
    }
}

TEST_CASE("homogeneous multiplier example", "[viscous]") {
    SpectralField w0(kBox);
    w0(1, 0) = 1.0;
    CHECK(rel_diff(multiplier_solution(w0, 0.1, 0.0), w0) < 1e-15);
    auto w = multiplier_solution(w0, 0.1, 3.0);
    const int m = kBox.Ny - 12;  // eta = -3
    CHECK(std::abs(w(1, m)) == Approx(std::exp(-1.2)).epsilon(1e-12));
    CHECK(std::abs(w(1, m)) == Approx(0.30119).epsilon(1e-4));
    // global L2 nonincreasing
    auto r = random_field(kBox, 3);
    double prev = l2_norm(r);
    for (double t = 0.25; t <= 5.0; t += 0.25) {
        const double v = l2_norm(multiplier_solution_W(r, nullptr, 0.05, t, 2));
        CHECK(v <= prev * (1 + 1e-14));
        prev = v;
    }
    CHECK_THROWS_AS(multiplier_solution(w0, -1.0, 1.0), Error);
}

TEST_CASE("resonant forcing: quadrature and b-form agree", "[viscous]") {
    auto w0 = sample(kBox, [](double x, double y) { return std::sin(x) * bump(y, -4, 4); });
    auto f0 = sample(kBox, [](double x, double y) { return std::cos(x) * bump(y, -3, 3) + 0.3 * std::cos(2 * x) * bump(y, -2, 2); });
    const double nu = 0.1, t = 3.0;
    const auto spec = ForcingSpec::resonant(f0);
    auto quad = multiplier_solution_W(w0, &spec, nu, t, 2000);
    auto closed = viscous_resonant_W(w0, f0, nu, t);
    CHECK(rel_diff(quad, closed) < 1e-8);
}

TEST_CASE("b profile properties", "[viscous]") {
    for (int k : {1, 2, 5})
        for (double eta : {-10.0, -1.0, 0.0, 2.0, 7.5}) {
            CHECK(b_value(k, eta, 0.1, 0.0) == 0.0);
            auto p = make_bprofile(k, eta, 0.1, {0.5, 1, 2, 4, 8, 16, 32, 64});
            for (std::size_t i = 0; i < p.b.size(); ++i) {
                CHECK(p.b[i] >= 0.0);
                CHECK(p.b[i] <= 1.0 / (0.1 * k * k));
                if (i) CHECK(p.b[i] >= p.b[i - 1]);
            }
            CHECK(p.b_inf >= p.b.back() - 1e-12);
            CHECK(p.b_inf <= 1.0 / (0.1 * k * k));
        }
    CHECK_THROWS_AS(b_value(0, 1.0, 0.1, 1.0), Error);
}

TEST_CASE("b_inf matches an independent double-exponential quadrature", "[viscous]") {
    boost::math::quadrature::exp_sinh<double> es;
    for (auto [k, eta] : std::vector<std::pair<double, double>>{{1, 0}, {1, 3}, {2, -5}, {3, 1}, {1, -10}}) {
        const double oracle = es.integrate([&](double xi) { return b_integrand(k, eta, 0.1, xi); }, 1e-14);
        CHECK(b_inf(k, eta, 0.1).value == Approx(oracle).margin(1e-8));
    }
    // direct Gauss-Legendre panels as a second oracle for the headline value
    double gl = 0.0;
    for (double a = 0; a < 200; a += 0.25) gl += quad::gauss_legendre([](double xi) { return b_integrand(1, 0, 0.1, xi); }, a, a + 0.25);
    CHECK(b_inf(1, 0, 0.1).value == Approx(gl).margin(1e-8));
}

TEST_CASE("b_inf bounds on the positive quadrant", "[viscous]") {
    std::vector<int> ks;
    std::vector<double> etas;
    for (int k = 1; k <= 16; ++k) ks.push_back(k);
    for (int e = 1; e <= 32; ++e) etas.push_back(e);
    auto r = check_binf_bounds(ks, etas, 0.1);
    CHECK(r.points == 512);
    CHECK(r.upper_bound_ok);
    CHECK(r.max_upper_product <= 10.0);
    CHECK(r.c_measured > 0.0);
    const double s8 = b_inf(1, 8, 0.1).value * 64, s16 = b_inf(1, 16, 0.1).value * 256;
    CHECK(s8 / s16 >= 0.5);
    CHECK(s8 / s16 <= 2.0);
    CHECK_THROWS_AS(check_binf_bounds({1}, {0.5}, 0.1), Error);
}

TEST_CASE("stationary solve of L", "[viscous]") {
    const Grid g = stationary_grid(8, 1024, 20.0);
    SpectralField zero(g);
    CHECK(l2_norm(stationary_solve_L(zero, 0.2).g) == 0.0);
    auto f0 = sample(g, [](double x, double y) { return std::cos(x) * bump(y, -3, 3); });
    auto s = stationary_solve_L(f0, 0.2);
    CHECK(s.residual < 1e-10);
    CHECK(s.boundary_mass < 1e-6);
    CHECK(s.h1_norm <= s.h1_bound);
    // R doubling on a nested grid with the same spacing
    const Grid g2 = stationary_grid(8, 2048, 20.0 * 2049.0 / 1025.0);  // same spacing, R nearly doubled
    auto f2 = sample(g2, [](double x, double y) { return std::cos(x) * bump(y, -3, 3); });
    auto s2 = stationary_solve_L(f2, 0.2);
    auto h1 = to_hybrid(s.g), h2 = to_hybrid(s2.g);
    double num = 0, den = 0;
    for (int i = 0; i < g.Nx; ++i)
        for (int j = 0; j < g.Ny; ++j) {
            num += std::norm(h1[at(g, i, j)] - h2[at(g2, i, j + 512)]);
            den += std::norm(h1[at(g, i, j)]);
        }
    CHECK(std::sqrt(num / den) < 1e-6);
    CHECK_THROWS_AS(stationary_solve_L(f0, 0.0), Error);
}

TEST_CASE("enhanced dissipation probes", "[viscous]") {
    std::vector<double> ts;
    for (int i = 0; i <= 60; ++i) ts.push_back(5.0 + 15.0 * i / 60);
    SpectralField w0(kBox);
    w0(1, 0) = 1.0;
    auto p = enhanced_dissipation_probe(w0, 0.01, ts);
    CHECK(p.fit.d >= 2.9);
    CHECK(p.fit.d <= 3.1);
    SpectralField h(kBox);
    h(0, 4) = 1.0;  // k = 0, eta = 1
    auto q = enhanced_dissipation_probe(h, 0.01, ts);
    CHECK(q.fit.d >= 0.9);
    CHECK(q.fit.d <= 1.1);
    SpectralField mixed(kBox);
    mixed(1, 0) = 1.0;
    mixed(2, 3) = 1.0;
    CHECK_THROWS_AS(enhanced_dissipation_probe(mixed, 0.01, ts), Error);
}

TEST_CASE("stationary forcing damps to g under the uniform envelope", "[viscous]") {
    const Grid kBox = box(16, 512, 8.0 * std::numbers::pi);
    const double nu = 0.05;
    auto g = sample(kBox, [](double x, double y) { return std::cos(x) * bump(y, -3, 3); });
    auto f0 = apply_L_periodic(g, nu);
    auto w0 = sample(kBox, [](double x, double y) { return std::sin(x) * bump(y, -2, 4) + std::cos(2 * x) * bump(y, -1, 1); });
    const double d0 = l2_norm(w0 - g);
    for (double t : {0.5, 1.0, 2.0, 4.0, 6.0}) {
        auto w = stationary_damping(w0, g, nu, t);
        CHECK(l2_norm(w - g) <= damping_envelope(nu, 1.0, t) * d0 * (1 + 1e-12));
    }
    // g is stationary for the quadrature route as well
    auto spec = ForcingSpec::stationary(f0);
    auto w = multiplier_solution(g, spec, nu, 2.0, 1600);
    CHECK(rel_diff(w, g) < 1e-6);
    auto w1 = multiplier_solution(w0, spec, nu, 2.0, 1600);
    CHECK(rel_diff(w1, stationary_damping(w0, g, nu, 2.0)) < 1e-6);
}
