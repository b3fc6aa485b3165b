#pragma once

// Declarative run configuration: an INI file of "key = value" lines grouped in
// [sections], addressed as "section.key". Every value read, including defaults,
// is echoed into the report.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "shearlab/error.hpp"
#include "shearlab/field.hpp"
#include "shearlab/grid.hpp"
#include "shearlab/io.hpp"
#include "shearlab/spectral.hpp"

namespace shearlab {

class Config {
public:
    Config() = default;

    static Config from_file(const std::filesystem::path& p) {
        Config c;
        try {
            boost::property_tree::ini_parser::read_ini(p.string(), c.tree_);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw config_error(std::string("cannot parse config: ") + e.what());
        }
        c.base_dir_ = p.parent_path();
        return c;
    }

    static Config from_string(const std::string& text) {
        Config c;
        std::istringstream is(text);
        try {
            boost::property_tree::ini_parser::read_ini(is, c.tree_);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw config_error(std::string("cannot parse config: ") + e.what());
        }
        return c;
    }

    /// "section.key=value"; creates the key if absent.
    void override_with(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos || eq == 0) throw config_error("override must look like key=value: " + assignment);
        set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
    }

    void set(const std::string& key, const std::string& value) { tree_.put(key, value); }

    bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

    std::string str(const std::string& key, const std::string& def) {
        auto v = tree_.get_optional<std::string>(key);
        const std::string out = v ? trim(*v) : def;
        echo(key, out);
        return out;
    }

    std::string required(const std::string& key) {
        auto v = tree_.get_optional<std::string>(key);
        if (!v || trim(*v).empty()) throw config_error("missing required key '" + key + "'");
        echo(key, trim(*v));
        return trim(*v);
    }

    double num(const std::string& key, double def) {
        auto v = tree_.get_optional<std::string>(key);
        double out = def;
        if (v) out = parse_double(key, *v);
        echo(key, out);
        return out;
    }

    int integer(const std::string& key, int def) {
        const double d = num(key, def);
        if (d != std::floor(d) || std::abs(d) > 1e9) throw config_error("key '" + key + "' must be an integer");
        return static_cast<int>(d);
    }

    bool flag(const std::string& key, bool def) {
        const std::string s = str(key, def ? "true" : "false");
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw config_error("key '" + key + "' must be true or false");
    }

    std::vector<double> list(const std::string& key, const std::vector<double>& def) {
        auto v = tree_.get_optional<std::string>(key);
        std::vector<double> out = def;
        if (v) {
            out.clear();
            std::string item;
            std::istringstream is(*v);
            while (std::getline(is, item, ','))
                if (!trim(item).empty()) out.push_back(parse_double(key, item));
        }
        echo(key, out);
        return out;
    }

    /// Rejects keys that no scenario step has read.
    void reject_unknown() const {
        std::vector<std::string> all;
        collect(tree_, "", all);
        for (const auto& k : all)
            if (!read_.count(k) && !ignored(k)) throw config_error("unknown config key '" + k + "'");
    }

    std::filesystem::path resolve(const std::string& p) const {
        std::filesystem::path q(p);
        return q.is_absolute() || base_dir_.empty() ? q : base_dir_ / q;
    }

    const nlohmann::ordered_json& echoed() const { return echo_; }

private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    static double parse_double(const std::string& key, const std::string& v) {
        const std::string t = trim(v);
        std::size_t pos = 0;
        double d = 0;
        try {
            if (t == "pi") return std::numbers::pi;
            if (t == "2pi") return 2.0 * std::numbers::pi;
            if (t == "8pi") return 8.0 * std::numbers::pi;
            d = std::stod(t, &pos);
        } catch (const std::exception&) {
            throw config_error("key '" + key + "' expects a number, got '" + t + "'");
        }
        if (pos != t.size() || !std::isfinite(d)) throw config_error("key '" + key + "' expects a number, got '" + t + "'");
        return d;
    }

    static void collect(const boost::property_tree::ptree& t, const std::string& prefix, std::vector<std::string>& out) {
        for (const auto& [k, sub] : t) {
            const std::string key = prefix.empty() ? k : prefix + "." + k;
            if (sub.empty()) out.push_back(key);
            else collect(sub, key, out);
        }
    }

    /// Keys consumed by the runner rather than by a scenario.
    static bool ignored(const std::string& k) { return k.rfind("sweep.", 0) == 0 || k == "output.dir"; }

    template <class T>
    void echo(const std::string& key, const T& v) {
        read_.insert(key);
        echo_[key] = v;
    }

    boost::property_tree::ptree tree_;
    std::filesystem::path base_dir_;
    std::set<std::string> read_;
    nlohmann::ordered_json echo_ = nlohmann::ordered_json::object();
};

// ---------------------------------------------------------------------------
// Grid and field presets

/// [grid] domain = periodic | channel; nx, ny; ly (periodic) or a, b (channel).
inline Grid grid_from_config(Config& c, const std::string& domain_def, int nx_def, int ny_def, double ly_or_a,
                             double b_def = 0.0) {
    Grid g;
    const std::string dom = c.str("grid.domain", domain_def);
    g.Nx = c.integer("grid.nx", nx_def);
    g.Ny = c.integer("grid.ny", ny_def);
    if (dom == "periodic") {
        g.y_domain = Periodic{c.num("grid.ly", domain_def == "periodic" ? ly_or_a : 2.0 * std::numbers::pi)};
    } else if (dom == "channel") {
        const double a = c.num("grid.a", domain_def == "channel" ? ly_or_a : 1.0);
        const double b = c.num("grid.b", domain_def == "channel" ? b_def : 2.0);
        g.y_domain = Channel{a, b};
    } else {
        throw config_error("grid.domain must be periodic or channel");
    }
    g.validate();
    return g;
}

inline double preset_bump(double y, double lo, double hi) {
    if (y <= lo || y >= hi) return 0.0;
    const double s = (2.0 * y - lo - hi) / (hi - lo);
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

struct FieldPreset {
    std::string kind = "zero";
    double amplitude = 1.0;
    int kx = 1;
    double phase = 0.0;
    double lo = 1.0, hi = 2.0;
    double center = 0.0, width = 1.0;
    std::string file;
};

inline FieldPreset preset(std::string kind, double amplitude = 1.0, int kx = 1, double phase = 0.0, double lo = 1.0,
                          double hi = 2.0, double center = 0.0, double width = 1.0) {
    return {std::move(kind), amplitude, kx, phase, lo, hi, center, width, {}};
}

/// [<name>] preset = zero | bump | gauss | mean_bump | file, with
/// amplitude, kx, phase, lo, hi (bump), center, width (gauss), path (file).
/// The field is amplitude * cos(kx x + phase) * profile(y); mean_bump has no x dependence.
inline FieldPreset field_preset(Config& c, const std::string& name, const FieldPreset& def) {
    FieldPreset p;
    p.kind = c.str(name + ".preset", def.kind);
    if (p.kind == "zero" || p.kind == "g") return p;
    if (p.kind == "file") {
        p.file = c.required(name + ".path");
        return p;
    }
    p.amplitude = c.num(name + ".amplitude", def.amplitude);
    if (p.kind != "mean_bump") {
        p.kx = c.integer(name + ".kx", def.kx);
        p.phase = c.num(name + ".phase", def.phase);
    }
    if (p.kind == "bump" || p.kind == "mean_bump") {
        p.lo = c.num(name + ".lo", def.lo);
        p.hi = c.num(name + ".hi", def.hi);
        if (!(p.lo < p.hi)) throw config_error(name + ": bump needs lo < hi");
    } else if (p.kind == "gauss") {
        p.center = c.num(name + ".center", def.center);
        p.width = c.num(name + ".width", def.width);
        if (!(p.width > 0)) throw config_error(name + ": gauss width must be positive");
    } else {
        throw config_error(name + ".preset must be zero, bump, gauss, mean_bump, file or g");
    }
    return p;
}

inline SpectralField make_field(const Grid& g, const FieldPreset& p, const Config& c) {
    if (p.kind == "zero" || p.kind == "g") return SpectralField(g);
    if (p.kind == "file") {
        auto u = load_field(c.resolve(p.file));
        if (!(u.grid() == g)) throw config_error("field file " + p.file + " was saved on a different grid");
        return u;
    }
    return sample(g, [&](double x, double y) {
        double prof;
        if (p.kind == "gauss") prof = std::exp(-0.5 * std::pow((y - p.center) / p.width, 2));
        else prof = preset_bump(y, p.lo, p.hi);
        if (p.kind == "mean_bump") return p.amplitude * prof;
        return p.amplitude * std::cos(p.kx * x + p.phase) * prof;
    });
}

/// [time] t_end and samples (uniform, including t = 0).
inline std::vector<double> time_grid(Config& c, double t_end_def, int samples_def, const std::string& section = "time") {
    const double t_end = c.num(section + ".t_end", t_end_def);
    const int n = c.integer(section + ".samples", samples_def);
    if (!(t_end > 0)) throw config_error(section + ".t_end must be positive");
    if (n < 2) throw config_error(section + ".samples must be at least 2");
    std::vector<double> t(n);
    for (int j = 0; j < n; ++j) t[j] = t_end * j / (n - 1);
    return t;
}

}  // namespace shearlab
