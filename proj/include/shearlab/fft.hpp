#pragma once

// Thin FFTW3 layer. Plans are cached per shape and executed on caller arrays
// (FFTW_UNALIGNED), so the wrappers can be used on any std::vector storage.
// All transforms are unnormalized, like FFTW itself.

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

namespace shearlab::fft {

using cplx = std::complex<double>;

enum class Dir { Forward, Backward };

namespace detail {

struct PlanCache {
    std::mutex mu;
    std::map<std::tuple<int, int, int, int>, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
    }

    // kind: 0 = 2d, 1 = along x (strided), 2 = along y (contiguous rows), 3 = dst-I
    fftw_plan get(int kind, int nx, int ny, int sign) {
        std::lock_guard lock(mu);
        auto key = std::make_tuple(kind, nx, ny, sign);
        if (auto it = plans.find(key); it != plans.end()) return it->second;
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan p = nullptr;
        if (kind == 3) {
            std::vector<double> buf(static_cast<std::size_t>(nx) * ny);
            int n[] = {ny};
            fftw_r2r_kind k[] = {FFTW_RODFT00};
            p = fftw_plan_many_r2r(1, n, nx, buf.data(), nullptr, 1, ny, buf.data(), nullptr, 1, ny, k, flags);
        } else {
            std::vector<cplx> buf(static_cast<std::size_t>(nx) * ny);
            auto* b = reinterpret_cast<fftw_complex*>(buf.data());
            if (kind == 0) {
                p = fftw_plan_dft_2d(nx, ny, b, b, sign, flags);
            } else if (kind == 1) {
                int n[] = {nx};
                p = fftw_plan_many_dft(1, n, ny, b, nullptr, ny, 1, b, nullptr, ny, 1, sign, flags);
            } else {
                int n[] = {ny};
                p = fftw_plan_many_dft(1, n, nx, b, nullptr, 1, ny, b, nullptr, 1, ny, sign, flags);
            }
        }
        plans.emplace(key, p);
        return p;
    }
};

inline PlanCache& cache() {
    static PlanCache c;
    return c;
}

inline int sign_of(Dir d) { return d == Dir::Forward ? FFTW_FORWARD : FFTW_BACKWARD; }

inline fftw_complex* raw(std::span<cplx> s) { return reinterpret_cast<fftw_complex*>(s.data()); }

}  // namespace detail

/// In-place 2-D transform of an nx-by-ny row-major array.
inline void fft2(std::span<cplx> data, int nx, int ny, Dir d) {
    auto p = detail::cache().get(0, nx, ny, detail::sign_of(d));
    fftw_execute_dft(p, detail::raw(data), detail::raw(data));
}

/// In-place transform along the first (x) index of an nx-by-ny row-major array.
inline void fft_x(std::span<cplx> data, int nx, int ny, Dir d) {
    auto p = detail::cache().get(1, nx, ny, detail::sign_of(d));
    fftw_execute_dft(p, detail::raw(data), detail::raw(data));
}

/// In-place transform along the second (y) index of an nx-by-ny row-major array.
inline void fft_y(std::span<cplx> data, int nx, int ny, Dir d) {
    auto p = detail::cache().get(2, nx, ny, detail::sign_of(d));
    fftw_execute_dft(p, detail::raw(data), detail::raw(data));
}

/// In-place DST-I over each contiguous row of length ny. Self-inverse up to 2(ny+1).
inline void dst1_rows(std::span<double> data, int rows, int ny) {
    auto p = detail::cache().get(3, rows, ny, 0);
    fftw_execute_r2r(p, data.data(), data.data());
}

}  // namespace shearlab::fft
