#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shearlab/scenarios.hpp"

namespace fs = std::filesystem;
using namespace shearlab;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitHypothesis = 3, kExitNumerical = 4;

int exit_code_of(ErrorKind k) {
    switch (k) {
        case ErrorKind::Config: return kExitConfig;
        case ErrorKind::Hypothesis: return kExitHypothesis;
        case ErrorKind::Numerical: return kExitNumerical;
    }
    return kExitNumerical;
}

const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Config: return "config";
        case ErrorKind::Hypothesis: return "hypothesis";
        case ErrorKind::Numerical: return "numerical";
    }
    return "numerical";
}

struct Outcome {
    int code = kExitOk;
    std::string message;
};

std::mutex g_io;

/// Error JSON goes to stderr and, when the directory is writable, to error.json.
Outcome report_error(ErrorKind kind, const std::string& msg, const fs::path& dir) {
    const int code = exit_code_of(kind);
    ordered_json j{{"error", kind_name(kind)}, {"message", msg}, {"exit_code", code}};
    {
        std::lock_guard lk(g_io);
        std::cerr << j.dump() << "\n";
    }
    if (!dir.empty()) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (!ec) {
            try {
                write_text(dir / "error.json", j.dump(2) + "\n");
            } catch (const std::exception&) {
            }
        }
    }
    return {code, msg};
}

/// Runs one configuration end to end into dir.
Outcome run_one(Config cfg, const fs::path& dir) {
    try {
        Report r = run_scenario(cfg);
        emit_report(r, dir);
        const bool ok = r.all_ok();
        {
            std::lock_guard lk(g_io);
            std::cout << r.scenario << ": " << (ok ? "all checks passed" : "some checks failed") << " -> " << dir.string()
                      << "\n";
            for (auto& [name, c] : r.checks.items())
                std::cout << "  " << (c.value("ok", false) ? "ok   " : "FAIL ") << name << "\n";
        }
        return {ok ? kExitOk : kExitCheckFailed, ""};
    } catch (const Error& e) {
        return report_error(e.kind(), e.what(), dir);
    } catch (const std::exception& e) {
        return report_error(ErrorKind::Numerical, e.what(), dir);
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

/// [sweep] key = section.name, values = v1, v2, ...: one run per value in DIR/run-i.
int run_sweep(const Config& base, const std::string& key, const std::vector<std::string>& values, const fs::path& out,
              int jobs) {
    std::vector<Outcome> results(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < values.size();) {
            Config c = base;
            c.set(key, values[i]);
            results[i] = run_one(c, out / ("run-" + std::to_string(i)));
        }
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(values.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    ordered_json idx = ordered_json::array();
    int code = kExitOk;
    for (std::size_t i = 0; i < values.size(); ++i) {
        idx.push_back({{"run", "run-" + std::to_string(i)}, {"key", key}, {"value", values[i]}, {"exit_code", results[i].code}});
        code = std::max(code, results[i].code);
    }
    fs::create_directories(out);
    write_text(out / "sweep.json", idx.dump(2) + "\n");
    return code;
}

int cmd_run(const std::string& path, const std::string& output, const std::vector<std::string>& overrides, int jobs) {
    fs::path dir = output;
    try {
        if (!fs::exists(path)) throw config_error("config file not found: " + path);
        Config cfg = Config::from_file(path);
        for (auto& o : overrides) cfg.override_with(o);
        if (dir.empty()) {
            if (cfg.has("output.dir")) dir = cfg.resolve(cfg.str("output.dir", ""));
            else dir = fs::path("out") / (cfg.has("scenario") ? cfg.str("scenario", "run") : "run");
        }
        if (jobs < 1) throw config_error("--jobs must be at least 1");
        if (cfg.has("sweep.key") || cfg.has("sweep.values")) {
            if (!cfg.has("sweep.key") || !cfg.has("sweep.values")) throw config_error("[sweep] needs both key and values");
            const std::string key = cfg.str("sweep.key", "");
            const auto values = split_list(cfg.str("sweep.values", ""));
            if (values.empty()) throw config_error("[sweep] values is empty");
            return run_sweep(cfg, key, values, dir, jobs);
        }
        return run_one(cfg, dir).code;
    } catch (const Error& e) {
        return report_error(e.kind(), e.what(), dir).code;
    } catch (const std::exception& e) {
        return report_error(ErrorKind::Numerical, e.what(), dir).code;
    }
}

int cmd_list(bool as_json) {
    const auto& cat = scenario_catalog();
    if (as_json) {
        ordered_json j = ordered_json::array();
        for (auto& s : cat) j.push_back({{"name", s.name}, {"reference", s.reference}, {"summary", s.summary}});
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }
    std::size_t w = 0, wr = 0;
    for (auto& s : cat) {
        w = std::max(w, s.name.size());
        wr = std::max(wr, s.reference.size());
    }
    for (auto& s : cat)
        std::cout << s.name << std::string(w + 2 - s.name.size(), ' ') << s.reference
                  << std::string(wr + 2 - s.reference.size(), ' ') << s.summary << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shearlab: forced shear flow experiments"};
    app.require_subcommand(1);

    std::string config, output;
    std::vector<std::string> overrides;
    int jobs = 1;
    auto* run = app.add_subcommand("run", "run the scenario described by a config file");
    run->add_option("config", config, "config file (INI sections of key = value)")->required();
    run->add_option("--output", output, "report directory");
    run->add_option("--override", overrides, "override a config key, section.key=value (repeatable)");
    run->add_option("--jobs", jobs, "parallel runs for a [sweep] section");

    bool as_json = false;
    auto* list = app.add_subcommand("list-scenarios", "print the scenario catalog");
    list->add_flag("--json", as_json, "machine-readable catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    if (*run) return cmd_run(config, output, overrides, jobs);
    return cmd_list(as_json);
}
