#pragma once

// Field files: flat little-endian complex<double> coefficients (k-major) plus a
// JSON sidecar "<path>.json" carrying grid, frame and convention version.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "shearlab/field.hpp"
#include "shearlab/spectral.hpp"

namespace shearlab {

inline constexpr const char* kFieldFormat = "shearlab-field-v1";

inline nlohmann::ordered_json grid_to_json(const Grid& g) {
    nlohmann::ordered_json j;
    j["Nx"] = g.Nx;
    j["Ny"] = g.Ny;
    j["Lx"] = g.Lx;
    if (g.periodic()) {
        j["y_domain"] = {{"type", "periodic"}, {"Ly", g.y_length()}};
    } else {
        j["y_domain"] = {{"type", "channel"}, {"a", g.chan().a}, {"b", g.chan().b}};
    }
    j["dealias_fraction"] = g.dealias_fraction;
    return j;
}

inline Grid grid_from_json(const nlohmann::json& j) {
    Grid g;
    g.Nx = j.at("Nx").get<int>();
    g.Ny = j.at("Ny").get<int>();
    g.Lx = j.at("Lx").get<double>();
    const auto& d = j.at("y_domain");
    if (d.at("type") == "periodic")
        g.y_domain = Periodic{d.at("Ly").get<double>()};
    else if (d.at("type") == "channel")
        g.y_domain = Channel{d.at("a").get<double>(), d.at("b").get<double>()};
    else
        throw config_error("unknown y_domain type");
    g.dealias_fraction = j.value("dealias_fraction", 2.0 / 3.0);
    g.validate();
    return g;
}

namespace detail {

inline void put_le(std::ostream& os, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int n = 0; n < 8; ++n) b[n] = static_cast<unsigned char>((bits >> (8 * n)) & 0xffu);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_le(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw config_error("field file truncated");
    std::uint64_t bits = 0;
    for (int n = 0; n < 8; ++n) bits |= static_cast<std::uint64_t>(b[n]) << (8 * n);
    return std::bit_cast<double>(bits);
}

}  // namespace detail

inline void save_field(const SpectralField& u, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (auto v : u.coeffs()) {
        detail::put_le(os, v.real());
        detail::put_le(os, v.imag());
    }
    nlohmann::ordered_json meta;
    meta["format"] = kFieldFormat;
    meta["grid"] = grid_to_json(u.grid());
    meta["frame"] = u.frame().is_lagrangian()
                        ? nlohmann::ordered_json{{"type", "lagrangian"}, {"t", *u.frame().lagrangian_time}}
                        : nlohmann::ordered_json{{"type", "eulerian"}};
    meta["layout"] = u.grid().periodic() ? "coeff(k,eta), k-major" : "coeff(k,y_j), k-major";
    meta["norm_convention"] = kNormConvention;
    std::ofstream js(path.string() + ".json");
    if (!js) throw std::runtime_error("cannot open sidecar for " + path.string());
    js << meta.dump(2) << "\n";
}

inline SpectralField load_field(const std::filesystem::path& path) {
    std::ifstream js(path.string() + ".json");
    if (!js) throw config_error("missing sidecar " + path.string() + ".json");
    auto meta = nlohmann::json::parse(js);
    if (meta.value("format", "") != kFieldFormat) throw config_error("unsupported field format");
    Grid g = grid_from_json(meta.at("grid"));
    Frame f = meta.at("frame").at("type") == "lagrangian" ? Frame::lagrangian(meta["frame"]["t"].get<double>())
                                                          : Frame::eulerian();
    SpectralField u(g, f);
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("cannot open " + path.string());
    for (auto& v : u.coeffs()) {
        const double re = detail::get_le(is);
        const double im = detail::get_le(is);
        v = cplx(re, im);
    }
    if (is.peek() != std::char_traits<char>::eof()) throw config_error("field file has trailing data");
    return u;
}

}  // namespace shearlab
