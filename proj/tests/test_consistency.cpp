#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "shearlab/consistency.hpp"

using namespace shearlab;
using namespace testing_util;
using Catch::Approx;

namespace {
const Grid kBox = box(16, 256, 2.0 * std::numbers::pi);
SpectralField w1f(const Grid& g) { return sample(g, [](double x, double y) { return std::cos(x) * gauss(y, 2.0, 0.15); }); }
SpectralField w2f(const Grid& g) {
    return sample(g, [](double x, double y) { return std::cos(x) * gauss(y, 2.0, 0.15) + 0.5 * std::sin(x) * gauss(y, 2.1, 0.12); });
}
ConsistencyOptions quick() {
    ConsistencyOptions o;
    o.record_dt = 1.0;
    return o;
}
}  // namespace

TEST_CASE("b_T multiplier closed form", "[consistency]") {
    CHECK(b_T_multiplier(1, 0, 10) == Approx(-std::atan(10.0)).epsilon(1e-14));
    CHECK(b_T_multiplier(1, 0, 10) == Approx(-1.47113).margin(1e-5));
    CHECK(b_T_multiplier(1, 0, 1e12) == Approx(-std::numbers::pi / 2).epsilon(1e-10));
    for (double eta : {-7.0, -1.0, 0.0, 0.5, 3.0, 40.0})
        for (double T : {0.1, 1.0, 10.0, 1e6}) CHECK(std::abs(b_T_multiplier(2, eta, T)) <= std::numbers::pi / 4 + 1e-15);
    CHECK_THROWS_AS(b_T_multiplier(0, 1, 1), Error);
    // integral of the sheared inverse multiplier, numerically
    for (double eta : {-3.0, 0.0, 2.5}) {
        const double num = quad::adaptive_gl([&](double t) { return -1.0 / (1.0 + (eta - t) * (eta - t)); }, 0.0, 10.0, 1e-14);
        CHECK(b_T_multiplier(1, eta, 10) == Approx(num).epsilon(1e-12));
    }
    // monotone toward the limit
    double prev = 0.0;
    for (double T = 0.5; T < 50; T += 0.5) {
        const double v = b_T_multiplier(1, 0.0, T);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("vanishing factors switch off terms", "[consistency]") {
    SpectralField zero(kBox);
    auto d1 = consistency_integral(w1f(kBox), zero, 4.0, quick());
    CHECK(l2_norm(d1.term_I) > 1e-6);
    CHECK(l2_norm(d1.term_II) == 0.0);
    CHECK(l2_norm(d1.term_III) == 0.0);
    CHECK(l2_norm(d1.term_IV) == 0.0);
    auto d2 = consistency_integral(zero, w2f(kBox), 4.0, quick());
    CHECK(l2_norm(d2.term_II) > 1e-6);
    CHECK(l2_norm(d2.term_I) == 0.0);
    CHECK(l2_norm(d2.term_III) == 0.0);
    CHECK(l2_norm(d2.term_IV) == 0.0);
    auto mean = sample(kBox, [](double, double y) { return bump(y, 1, 3); });
    CHECK_THROWS_AS(consistency_integral(mean, zero, 1.0), Error);
}

TEST_CASE("closed forms agree with quadrature", "[consistency]") {
    const double T = 10.0;
    auto w1 = w1f(kBox), w2 = w2f(kBox);
    auto d = consistency_integral(w1, w2, T, quick());
    CHECK(l2_norm(d.total - (d.term_I + d.term_II + d.term_III + d.term_IV)) <= 1e-10 * l2_norm(d.total));
    CHECK(d.times.size() == 11);
    CHECK(d.times.back() == Approx(T));

    auto II = term_II_closed_form(w2, T);
    CHECK(rel_diff(d.term_II, II) < 1e-6);
    CHECK(l2_norm(term_II_closed_form(w2, 0.0)) == 0.0);
    CHECK(l2_norm(term_II_closed_form(SpectralField(kBox), T)) == 0.0);

    auto IV = term_IV_closed_form(w1, w2, T);
    CHECK(rel_diff(d.term_IV, IV.total) < 1e-6);
    // leading piece equals IV minus the bounded remainders
    CHECK(rel_diff(d.term_IV - IV.eq27 - IV.eq29, IV.lead) < 1e-6);

    const Grid bad = chan(16, 64, -1.0, 2.0);
    CHECK_THROWS_AS(term_II_closed_form(w2f(bad), 1.0), Error);
}

TEST_CASE("frequency cone projector", "[consistency]") {
    auto u = random_field(kBox, 11);
    CHECK(rel_diff(project_cone(u, {1.0, 0.0}), u) < 1e-15);
    const FrequencyCone cone{1.0, 10.0};
    auto p = project_cone(u, cone);
    CHECK(rel_diff(project_cone(p, cone), p) == 0.0);
    CHECK(rel_diff(p + project_cone(u, cone, true), u) < 1e-14);
    CHECK(l2_norm(invert_laplacian(p)) <= l2_norm(p) / 100.0 * (1 + 1e-14));
    auto low = sample(kBox, [](double x, double y) { return std::cos(x) * std::cos(3 * y); });
    CHECK(l2_norm(project_cone(low, cone)) < 1e-15);
}

TEST_CASE("shear consistency reduces to the Couette splitting", "[consistency]") {
    const Grid g = chan(16, 256, 1.0, 3.0);
    auto w0 = sample(g, [](double x, double y) { return std::sin(x) * bump(y, 1.0, 3.0); });
    auto f0 = sample(g, [](double x, double y) { return std::cos(x) * bump(y, 1.2, 2.8); });
    const double T = 4.0;
    auto sh = consistency_integral_shear(w0, f0, ShearProfile::make_couette(), T, 256);
    auto gg = antiderivative_g(f0).g;
    auto d = consistency_integral(w0 - gg, gg, T, quick());
    CHECK(rel_diff(sh.sigma, d.total) < 1e-6);
    SpectralField zero(g);
    auto z = consistency_integral_shear(zero, zero, ShearProfile::make_couette(), 1.0, 8);
    CHECK(l2_norm(z.sigma) == 0.0);
}
