#pragma once

// Norm time series, rate fits, weak pairings and report emission.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/minima.hpp>
#include <json.hpp>

#include "shearlab/io.hpp"
#include "shearlab/spectral.hpp"

namespace shearlab {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kReportFormat = "shearlab-report-v1";

/// A single scalar time series, one CSV file in a report.
struct Series {
    std::string name;
    std::vector<double> t;
    std::vector<double> v;

    void push(double time, double value) {
        if (!t.empty() && !(time > t.back())) throw numerical_error("series '" + name + "': times must increase strictly");
        t.push_back(time);
        v.push_back(value);
    }
    std::size_t size() const { return t.size(); }
};

/// Sobolev norms of a trajectory for a list of indices s, sharing one time axis.
struct NormSeries {
    std::vector<double> times;
    std::vector<double> s_list;
    std::vector<std::vector<double>> values;  // values[is][n]
    Frame frame;
    Grid grid;

    NormSeries() = default;
    NormSeries(std::vector<double> s, Grid g, Frame f = Frame::eulerian())
        : s_list(std::move(s)), values(s_list.size()), frame(f), grid(std::move(g)) {}

    void push(double t, const SpectralField& u) {
        if (!times.empty() && !(t > times.back())) throw numerical_error("norm series: times must increase strictly");
        times.push_back(t);
        for (std::size_t i = 0; i < s_list.size(); ++i) values[i].push_back(sobolev_norm(u, s_list[i]));
    }

    Series column(std::size_t is, const std::string& prefix = "norm") const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s_H%g", prefix.c_str(), s_list.at(is));
        return {buf, times, values.at(is)};
    }

    std::size_t index_of(double s) const {
        for (std::size_t i = 0; i < s_list.size(); ++i)
            if (std::abs(s_list[i] - s) < 1e-12) return i;
        throw config_error("norm series has no column for s = " + std::to_string(s));
    }
};

// ---------------------------------------------------------------------------
// Fitting

enum class FitModel { PowerLaw, ExpPoly, Linear, LinearRelaxed };

struct RateFit {
    FitModel model = FitModel::Linear;
    double alpha = 0.0;      // PowerLaw exponent
    double b = 0.0;          // ExpPoly rate, value ~ C exp(-b t^d)
    double d = 1.0;          // ExpPoly degree
    double slope = 0.0;      // Linear slope (also the regressed slope for every model)
    double intercept = 0.0;
    double t0 = 0.0, t1 = 0.0;
    std::size_t n = 0;
    double residual_rms = 0.0;
    double half_width = 0.0;  // 95% confidence half-width of the fitted rate parameter
    double relaxation = 0.0;  // LinearRelaxed coefficient of 1 / (1 + t)

    /// Trend test: positive trend only when the whole 95% interval is above zero.
    bool positive_trend() const { return slope - half_width > 0.0; }
};

inline const char* model_name(FitModel m) {
    switch (m) {
        case FitModel::PowerLaw: return "power_law";
        case FitModel::ExpPoly: return "exp_poly";
        case FitModel::Linear: return "linear";
        case FitModel::LinearRelaxed: return "linear_relaxed";
    }
    return "?";
}

inline ordered_json to_json(const RateFit& f) {
    ordered_json j;
    j["model"] = model_name(f.model);
    if (f.model == FitModel::PowerLaw) j["alpha"] = f.alpha;
    if (f.model == FitModel::ExpPoly) {
        j["b"] = f.b;
        j["d"] = f.d;
    }
    j["slope"] = f.slope;
    j["intercept"] = f.intercept;
    if (f.model == FitModel::LinearRelaxed) j["relaxation"] = f.relaxation;
    j["window"] = {f.t0, f.t1};
    j["samples"] = f.n;
    j["residual_rms"] = f.residual_rms;
    j["half_width_95"] = f.half_width;
    return j;
}

struct Window {
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();

    /// Last two-thirds of the sampled span.
    static Window default_for(const std::vector<double>& t) {
        if (t.empty()) return {};
        return {t.front() + (t.back() - t.front()) / 3.0, t.back()};
    }
};

namespace detail {

struct LinReg {
    double slope, intercept, rms, slope_hw;
    std::size_t n;
};

inline LinReg linreg(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) throw numerical_error("fit window has no spread in the regressor");
    const double slope = sxy / sxx, icpt = my - slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) ss += std::pow(y[i] - icpt - slope * x[i], 2);
    const double rms = std::sqrt(ss / n);
    double hw = 0.0;
    if (n > 2) {
        const double se = std::sqrt(ss / (n - 2) / sxx);
        boost::math::students_t dist(static_cast<double>(n - 2));
        hw = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
    }
    return {slope, icpt, rms, hw, n};
}

inline void select(const Series& s, Window w, std::vector<double>& t, std::vector<double>& v) {
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.t[i] >= w.t0 - 1e-12 && s.t[i] <= w.t1 + 1e-12) {
            t.push_back(s.t[i]);
            v.push_back(s.v[i]);
        }
}

inline void require_positive(const std::vector<double>& v, std::size_t min_n, const char* what) {
    if (v.size() < min_n)
        throw numerical_error(std::string(what) + ": need at least " + std::to_string(min_n) + " samples in the window");
    for (double x : v)
        if (!(x > 0)) throw numerical_error(std::string(what) + ": nonpositive sample in the fit window");
}

}  // namespace detail

/// Least squares on (log t, log value).
inline RateFit fit_power_law(const Series& s, Window w) {
    std::vector<double> t, v;
    detail::select(s, w, t, v);
    detail::require_positive(v, 5, "fit_power_law");
    for (double x : t)
        if (!(x > 0)) throw numerical_error("fit_power_law: window must have t > 0");
    std::vector<double> lt(t.size()), lv(v.size());
    std::transform(t.begin(), t.end(), lt.begin(), [](double x) { return std::log(x); });
    std::transform(v.begin(), v.end(), lv.begin(), [](double x) { return std::log(x); });
    auto r = detail::linreg(lt, lv);
    RateFit f;
    f.model = FitModel::PowerLaw;
    f.alpha = f.slope = r.slope;
    f.intercept = r.intercept;
    f.t0 = t.front();
    f.t1 = t.back();
    f.n = r.n;
    f.residual_rms = r.rms;
    f.half_width = r.slope_hw;
    return f;
}
inline RateFit fit_power_law(const Series& s) { return fit_power_law(s, Window::default_for(s.t)); }

/// Least squares on (t, value).
inline RateFit fit_linear(const Series& s, Window w) {
    std::vector<double> t, v;
    detail::select(s, w, t, v);
    if (t.size() < 3) throw numerical_error("fit_linear: need at least 3 samples in the window");
    auto r = detail::linreg(t, v);
    RateFit f;
    f.model = FitModel::Linear;
    f.slope = r.slope;
    f.intercept = r.intercept;
    f.t0 = t.front();
    f.t1 = t.back();
    f.n = r.n;
    f.residual_rms = r.rms;
    f.half_width = r.slope_hw;
    return f;
}
inline RateFit fit_linear(const Series& s) { return fit_linear(s, Window::default_for(s.t)); }

/// Least squares on value = a + b t + c / (1 + t): the slope b is a drift that
/// persists after a series settles algebraically onto a limit.
inline RateFit fit_linear_relaxed(const Series& s, Window w) {
    std::vector<double> t, v;
    detail::select(s, w, t, v);
    const std::size_t n = t.size();
    if (n < 5) throw numerical_error("fit_linear_relaxed: need at least 5 samples in the window");
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = t[i];
        X(i, 2) = 1.0 / (1.0 + t[i]);
        y(i) = v[i];
    }
    const auto qr = X.colPivHouseholderQr();
    if (qr.rank() < 3) throw numerical_error("fit_linear_relaxed: degenerate window");
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd res = y - X * beta;
    const double ss = res.squaredNorm();
    const Eigen::MatrixXd cov = (X.transpose() * X).inverse() * (ss / double(n - 3));
    boost::math::students_t dist(static_cast<double>(n - 3));
    RateFit f;
    f.model = FitModel::LinearRelaxed;
    f.intercept = beta(0);
    f.slope = beta(1);
    f.relaxation = beta(2);
    f.t0 = t.front();
    f.t1 = t.back();
    f.n = n;
    f.residual_rms = std::sqrt(ss / n);
    f.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * std::sqrt(std::max(cov(1, 1), 0.0));
    return f;
}
inline RateFit fit_linear_relaxed(const Series& s) { return fit_linear_relaxed(s, Window::default_for(s.t)); }

namespace detail {
inline RateFit exp_poly_fixed(const std::vector<double>& t, const std::vector<double>& lv, double d) {
    std::vector<double> td(t.size());
    std::transform(t.begin(), t.end(), td.begin(), [d](double x) { return std::pow(x, d); });
    auto r = linreg(td, lv);
    RateFit f;
    f.model = FitModel::ExpPoly;
    f.d = d;
    f.b = -r.slope;
    f.slope = r.slope;
    f.intercept = r.intercept;
    f.t0 = t.front();
    f.t1 = t.back();
    f.n = r.n;
    f.residual_rms = r.rms;
    f.half_width = r.slope_hw;
    return f;
}
}  // namespace detail

/// value ~ C exp(-b t^d). Pass d <= 0 for a free degree: grid search over
/// {1, 2, 3}, then a bracketed minimization of the residual.
inline RateFit fit_exp_poly(const Series& s, double d, Window w) {
    std::vector<double> t, v;
    detail::select(s, w, t, v);
    detail::require_positive(v, 6, "fit_exp_poly");
    for (double x : t)
        if (x < 0) throw numerical_error("fit_exp_poly: window must have t >= 0");
    std::vector<double> lv(v.size());
    std::transform(v.begin(), v.end(), lv.begin(), [](double x) { return std::log(x); });
    if (d > 0) return detail::exp_poly_fixed(t, lv, d);
    double best_d = 1.0, best_r = std::numeric_limits<double>::infinity();
    for (double dd : {1.0, 2.0, 3.0}) {
        const double r = detail::exp_poly_fixed(t, lv, dd).residual_rms;
        if (r < best_r) {
            best_r = r;
            best_d = dd;
        }
    }
    auto res = [&](double dd) { return detail::exp_poly_fixed(t, lv, dd).residual_rms; };
    const auto [dmin, rmin] =
        boost::math::tools::brent_find_minima(res, std::max(0.25, best_d - 1.0), best_d + 1.0, 40);
    return detail::exp_poly_fixed(t, lv, rmin <= best_r ? dmin : best_d);
}
inline RateFit fit_exp_poly(const Series& s, double d = 0.0) { return fit_exp_poly(s, d, Window::default_for(s.t)); }

// ---------------------------------------------------------------------------
// Weak pairings

/// Five fixed smooth mean-free test fields, each with unit H^1 norm.
struct TestFunctionBasket {
    Grid grid;
    std::vector<SpectralField> members;

    static double bump(double y, double c, double w) {
        const double s = (y - c) / w;
        if (std::abs(s) >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - s * s));
    }

    static TestFunctionBasket make(const Grid& g) {
        double lo, hi;
        if (g.periodic()) {
            lo = -g.y_length() / 4.0;
            hi = g.y_length() / 4.0;
        } else {
            lo = g.chan().a;
            hi = g.chan().b;
        }
        const double L = hi - lo, c = 0.5 * (lo + hi);
        TestFunctionBasket b{g, {}};
        auto add = [&](auto f) {
            auto u = project_nonzero_k(sample(g, f));
            u *= 1.0 / sobolev_norm(u, 1.0);
            b.members.push_back(std::move(u));
        };
        add([&](double x, double y) { return std::cos(x) * bump(y, c, 0.45 * L); });
        add([&](double x, double y) { return std::sin(2 * x) * bump(y, lo + 0.3 * L, 0.25 * L); });
        add([&](double x, double y) { return std::sin(x) * bump(y, lo + 0.65 * L, 0.3 * L); });
        add([&](double x, double y) {
            return std::cos(x + 2.0 * std::numbers::pi * (y - c) / L) * bump(y, c, 0.45 * L);
        });
        add([&](double x, double y) {
            return (std::cos(x) + 0.5 * std::sin(3 * x)) * bump(y, c, 0.35 * L) * std::cos(2.0 * std::numbers::pi * (y - c) / L);
        });
        return b;
    }
};

struct PairingReport {
    std::vector<double> times;
    std::vector<std::vector<double>> pairings;  // [member][n]
    double cauchy_tail = 0.0;

    std::vector<Series> series(const std::string& prefix) const {
        std::vector<Series> out;
        for (std::size_t m = 0; m < pairings.size(); ++m) out.push_back({prefix + "_" + std::to_string(m), times, pairings[m]});
        return out;
    }
};

/// Streaming pairings of a trajectory against a basket.
class PairingAccumulator {
public:
    explicit PairingAccumulator(const TestFunctionBasket& b) : basket_(&b) { rep_.pairings.resize(b.members.size()); }

    void add(double t, const SpectralField& u) {
        if (!(u.grid() == basket_->grid)) throw config_error("weak pairing: trajectory and basket grids differ");
        rep_.times.push_back(t);
        for (std::size_t m = 0; m < basket_->members.size(); ++m)
            rep_.pairings[m].push_back(inner(u, basket_->members[m]).real());
    }

    /// Cauchy tail: max over members of sup |p(t) - p(t')| on the last third of the window.
    PairingReport finish() const {
        PairingReport r = rep_;
        if (r.times.empty()) return r;
        const double tc = r.times.front() + 2.0 * (r.times.back() - r.times.front()) / 3.0;
        for (auto& p : r.pairings) {
            double mn = std::numeric_limits<double>::infinity(), mx = -mn;
            for (std::size_t i = 0; i < p.size(); ++i)
                if (r.times[i] >= tc - 1e-12) {
                    mn = std::min(mn, p[i]);
                    mx = std::max(mx, p[i]);
                }
            r.cauchy_tail = std::max(r.cauchy_tail, mx - mn);
        }
        return r;
    }

private:
    const TestFunctionBasket* basket_;
    PairingReport rep_;
};

inline PairingReport weak_pairing_series(const std::vector<double>& times, const std::vector<SpectralField>& traj,
                                         const TestFunctionBasket& basket) {
    PairingAccumulator acc(basket);
    for (std::size_t i = 0; i < traj.size(); ++i) acc.add(times.at(i), traj[i]);
    return acc.finish();
}

// ---------------------------------------------------------------------------
// Reports

struct Report {
    std::string scenario;
    ordered_json config = ordered_json::object();
    std::vector<Series> series;
    ordered_json fits = ordered_json::object();
    ordered_json checks = ordered_json::object();
    ordered_json values = ordered_json::object();

    void add_check(const std::string& name, bool ok, ordered_json detail = ordered_json::object()) {
        detail["ok"] = ok;
        checks[name] = std::move(detail);
    }
    bool all_ok() const {
        for (auto& [k, v] : checks.items())
            if (!v.value("ok", false)) return false;
        return true;
    }
};

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string csv_text(const Series& s) {
    std::string out = "t,value\r\n";
    for (std::size_t i = 0; i < s.size(); ++i) out += format_double(s.t[i]) + "," + format_double(s.v[i]) + "\r\n";
    return out;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
    os << text;
    if (!os) throw std::runtime_error("write failed: " + p.string());
}

inline ordered_json summary_json(const Report& r) {
    ordered_json j;
    j["format"] = kReportFormat;
    j["scenario"] = r.scenario;
    j["norm_convention"] = kNormConvention;
    j["config"] = r.config;
    ordered_json files = ordered_json::array();
    for (auto& s : r.series) files.push_back(s.name + ".csv");
    j["series"] = files;
    j["fits"] = r.fits;
    j["values"] = r.values;
    j["checks"] = r.checks;
    j["all_ok"] = r.all_ok();
    return j;
}

/// One CSV per series plus summary.json. Output depends only on the report contents.
inline void emit_report(const Report& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (auto& s : r.series) write_text(dir / (s.name + ".csv"), csv_text(s));
    write_text(dir / "summary.json", summary_json(r).dump(2) + "\n");
}

}  // namespace shearlab
