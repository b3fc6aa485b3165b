#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "shearlab/io.hpp"
#include "shearlab/spectral.hpp"

using namespace shearlab;
using Catch::Approx;

namespace {

Grid box(int nx = 16, int ny = 16, double Ly = 2.0 * std::numbers::pi) {
    Grid g;
    g.Nx = nx;
    g.Ny = ny;
    g.y_domain = Periodic{Ly};
    return g;
}

Grid chan(int nx = 16, int ny = 64, double a = 1.0, double b = 2.0) {
    Grid g;
    g.Nx = nx;
    g.Ny = ny;
    g.y_domain = Channel{a, b};
    return g;
}

SpectralField random_field(const Grid& g, unsigned seed, bool mean_free = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    auto u = sample(g, [&](double, double) { return n(rng); });
    if (mean_free) u = project_nonzero_k(u);
    return u;
}

double rel_diff(const SpectralField& a, const SpectralField& b) { return l2_norm(a - b) / std::max(l2_norm(b), 1e-300); }

}  // namespace

TEST_CASE("transform of elementary fields", "[spectral][transform]") {
    const Grid g = box();
    SECTION("constant field has only the mean mode") {
        auto u = sample(g, [](double, double) { return 1.0; });
        CHECK(std::abs(u(0, 0) - 1.0) < 1e-14);
        double rest = 0.0;
        for (int i = 0; i < g.Nx; ++i)
            for (int m = 0; m < g.Ny; ++m)
                if (i || m) rest += std::abs(u(i, m));
        CHECK(rest < 1e-13);
    }
    SECTION("sin x has -i/2 at k=1 and +i/2 at k=-1") {
        auto u = sample(g, [](double x, double) { return std::sin(x); });
        CHECK(std::abs(u(1, 0) - cplx(0, -0.5)) < 1e-14);
        CHECK(std::abs(u(g.Nx - 1, 0) - cplx(0, 0.5)) < 1e-14);
        CHECK(reality_defect(u) < 1e-14);
    }
    SECTION("white noise round trip") {
        for (const Grid& gg : {box(), chan()}) {
            std::mt19937_64 rng(7);
            std::normal_distribution<double> n;
            Samples s(gg.size());
            for (auto& v : s) v = n(rng);
            auto back = inverse_transform(transform(gg, s));
            double err = 0.0;
            for (std::size_t k = 0; k < s.size(); ++k) err = std::max(err, std::abs(back[k] - s[k]));
            CHECK(err < 1e-12);
        }
    }
    SECTION("errors") {
        Samples bad(g.size() - 1);
        CHECK_THROWS_AS(transform(g, bad), Error);
        Samples nan(g.size(), cplx(std::nan(""), 0));
        CHECK_THROWS_AS(transform(g, nan), Error);
    }
}

TEST_CASE("sobolev norms of sin x", "[spectral][norm]") {
    auto u = sample(box(), [](double x, double) { return std::sin(x); });
    CHECK(sobolev_norm(u, 0.0) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(sobolev_norm(u, 1.0) == Approx(1.0).epsilon(1e-14));
    CHECK(sobolev_norm(u, -1.0) == Approx(0.5).epsilon(1e-14));
    CHECK_THROWS(SobolevIndex(2.5));
}

TEST_CASE("channel sine-basis norms", "[spectral][norm]") {
    const Grid g = chan(16, 127 + 1);
    const double L = g.y_length();
    // single Dirichlet eigenfunction: exact weights
    auto u = sample(g, [&](double x, double y) { return std::cos(x) * std::sin(std::numbers::pi * (y - 1.0) / L); });
    // discrete sine orthogonality: sum_j sin^2 = (Ny+1)/2, so ||u||^2 = 1/2 * 1/2
    CHECK(l2_norm(u) == Approx(0.5).epsilon(1e-12));
    CHECK(l2_norm(u) == Approx(sobolev_norm(u, 0.0)).epsilon(1e-12));
    const double w = 1.0 + 1.0 + std::pow(std::numbers::pi / L, 2);
    CHECK(sobolev_norm(u, -1.0) == Approx(l2_norm(u) / std::sqrt(w)).epsilon(1e-10));
    CHECK(sobolev_norm(u, 1.0) == Approx(l2_norm(u) * std::sqrt(w)).epsilon(1e-10));
}

TEST_CASE("Parseval and monotonicity in s", "[spectral][property]") {
    for (const Grid& g : {box(32, 64), chan(16, 64)}) {
        for (unsigned seed = 1; seed <= 10; ++seed) {
            auto u = random_field(g, seed);
            CHECK(std::abs(physical_l2(u) - l2_norm(u)) <= 1e-12 * l2_norm(u));
            double prev = 0.0;
            for (double s : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) {
                const double n = sobolev_norm(u, s);
                CHECK(n >= prev);
                prev = n;
            }
        }
    }
}

TEST_CASE("invert_laplacian", "[spectral][elliptic]") {
    const Grid g = box();
    SpectralField w(g);
    w(1, 0) = 1.0;
    CHECK(std::abs(invert_laplacian(w)(1, 0) + 1.0) < 1e-15);
    SpectralField w2(g);
    w2(2, 2) = 1.0;
    CHECK(std::abs(invert_laplacian(w2)(2, 2) + 0.125) < 1e-15);
    CHECK(l2_norm(invert_laplacian(SpectralField(g))) == 0.0);
    SpectralField mean(g);
    mean(0, 0) = 1.0;
    CHECK_THROWS_AS(invert_laplacian(mean), Error);

    for (const Grid& gg : {box(32, 32), chan(16, 64)}) {
        auto u = random_field(gg, 3);
        CHECK(rel_diff(laplacian(invert_laplacian(u)), u) < 1e-10);
    }
}

TEST_CASE("invert_sheared_laplacian multipliers", "[spectral][elliptic]") {
    const Grid g = box();
    auto factor = [&](int ik, int m, double t) {
        SpectralField w(g);
        w(ik, m) = 1.0;
        return invert_sheared_laplacian(w, t)(ik, m).real();
    };
    CHECK(factor(1, 0, 0.0) == Approx(-1.0));
    CHECK(factor(1, 2, 2.0) == Approx(-1.0));
    CHECK(factor(1, 0, 10.0) == Approx(-1.0 / 101.0));
    SpectralField k0(g);
    k0(0, 3) = 1.0;
    CHECK_THROWS_AS(invert_sheared_laplacian(k0, 1.0), Error);
    CHECK(l2_norm(invert_sheared_laplacian(k0, 1.0, ZeroModes::Zero)) == 0.0);
}

TEST_CASE("channel sheared inverse matches the spectral multiplier for interior data", "[spectral][elliptic]") {
    // Compactly supported data far from the walls: Dirichlet and periodic
    // inverses agree up to O(h^2) and exponentially small wall effects.
    const double h = 24.0 / 1024;
    Grid gc = chan(8, 1024, -12.0 - h, -12.0 - h + 1025 * h);
    auto bump = [](double y) { return std::exp(-y * y); };
    auto wc = sample(gc, [&](double x, double y) { return std::cos(x) * bump(y); });
    Grid gp = box(8, 1024, 24.0);
    auto wp = sample(gp, [&](double x, double y) { return std::cos(x) * bump(y); });
    for (double t : {0.0, 1.0}) {
        auto pc = inverse_transform(invert_sheared_laplacian(wc, t));
        auto pp = inverse_transform(invert_sheared_laplacian(wp, t));
        // both grids sample y = -12 + j h
        double err = 0.0, mx = 0.0;
        for (int j = 0; j < gc.Ny; ++j) {
            err = std::max(err, std::abs(pc[at(gc, 0, j)] - pp[at(gp, 0, j)]));
            mx = std::max(mx, std::abs(pp[at(gp, 0, j)]));
        }
        CHECK(err / mx < 1e-4);
    }
}

TEST_CASE("velocity", "[spectral][velocity]") {
    const Grid g = box();
    auto phi = sample(g, [](double x, double) { return std::sin(x); });
    auto v = velocity(phi);
    auto expect_vy = sample(g, [](double x, double) { return std::cos(x); });
    CHECK(l2_norm(v.vx) < 1e-15);
    CHECK(rel_diff(v.vy, expect_vy) < 1e-14);
    auto phi2 = sample(g, [](double, double y) { return std::sin(y); });
    auto v2 = velocity(phi2);
    CHECK(rel_diff(v2.vx, -1.0 * sample(g, [](double, double y) { return std::cos(y); })) < 1e-14);
    CHECK(l2_norm(velocity(SpectralField(g)).vx) == 0.0);
    for (unsigned seed = 1; seed < 6; ++seed) {
        auto r = random_field(box(32, 32), seed);
        CHECK(l2_norm(divergence(velocity(r))) < 1e-12 * std::max(1.0, l2_norm(r)));
    }
}

TEST_CASE("shift_frame", "[spectral][frame]") {
    const Grid g = box(16, 64);
    auto u = sample(g, [](double x, double) { return std::cos(x); });
    CHECK(rel_diff(shift_frame(u, 0.0, ShiftDir::ToEulerian), u) < 1e-15);

    auto moved = shift_frame(u, 3.0, ShiftDir::ToEulerian);
    auto expect = sample(g, [](double x, double y) { return std::cos(x - 3.0 * y); });
    CHECK(rel_diff(moved, expect) < 1e-12);
    CHECK(std::abs(moved(1, g.Ny - 3) - 0.5) < 1e-12);  // (1, -3)

    CHECK_THROWS_AS(shift_frame(u, 0.3, ShiftDir::ToEulerian), Error);
    ShiftReport rep;
    shift_frame(u, 0.3, ShiftDir::ToEulerian, true, &rep);
    CHECK_FALSE(rep.commensurate);

    for (unsigned seed = 1; seed < 6; ++seed) {
        auto r = random_field(g, seed);
        auto a = shift_frame(r, 2.0, ShiftDir::ToLagrangian);
        CHECK(std::abs(l2_norm(a) - l2_norm(r)) < 1e-10 * l2_norm(r));
        auto ab = shift_frame(shift_frame(r, 1.0, ShiftDir::ToLagrangian), 2.0, ShiftDir::ToLagrangian);
        CHECK(rel_diff(ab, shift_frame(r, 3.0, ShiftDir::ToLagrangian)) < 1e-10);
        CHECK(rel_diff(shift_frame(a, 2.0, ShiftDir::ToEulerian), r) < 1e-10);
    }
}

TEST_CASE("field files round trip", "[spectral][io]") {
    for (const Grid& g : {box(), chan()}) {
        auto u = random_field(g, 11);
        u.set_frame(Frame::lagrangian(2.5));
        const auto path = std::filesystem::temp_directory_path() / "shearlab_field_test.bin";
        save_field(u, path);
        auto v = load_field(path);
        CHECK(v.grid() == g);
        CHECK(v.frame() == u.frame());
        CHECK(l2_norm(u - v) == 0.0);
        CHECK(std::filesystem::file_size(path) == g.size() * 16);
    }
}
