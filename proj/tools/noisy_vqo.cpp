// noisy-vqo: command-line driver for the experiment suite.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nvqo/error.hpp"
#include "nvqo/experiments.hpp"

namespace {

// Relative "path" entries (noise tables) are taken relative to the config file.
void resolve_paths(nlohmann::json& j, const std::filesystem::path& base) {
    if (j.is_object()) {
        for (auto& [key, value] : j.items()) {
            if (key == "path" && value.is_string() && std::filesystem::path(value.get<std::string>()).is_relative()) {
                value = (base / value.get<std::string>()).lexically_normal().string();
            } else {
                resolve_paths(value, base);
            }
        }
    } else if (j.is_array()) {
        for (auto& v : j) resolve_paths(v, base);
    }
}

nlohmann::json load_config(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream in(path);
    if (!in) throw nvqo::ConfigError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw nvqo::ConfigError("config '" + path + "': " + e.what());
    }
    resolve_paths(j, std::filesystem::path(path).parent_path());
    return j;
}

nlohmann::json section(const nlohmann::json& config, const std::string& name) {
    if (!config.is_object()) throw nvqo::ConfigError("config must be a JSON object");
    for (const auto& [key, value] : config.items()) {
        if (key != "seed" && key != name) throw nvqo::ConfigError("config: unexpected top-level field '" + key + "'");
    }
    return config.contains(name) ? config.at(name) : nlohmann::json();
}

void print_checks(const nvqo::BoundsAuditResult& r) {
    int failed = 0;
    for (const auto& c : r.checks) {
        if (!c.pass) {
            ++failed;
            std::cout << "FAIL " << c.name << " instance=" << c.instance << " lhs=" << c.lhs << " rhs=" << c.rhs << '\n';
        }
    }
    std::cout << r.checks.size() - failed << "/" << r.checks.size() << " checks passed\n";
}

int run(const std::string& command, const std::string& config_path, std::uint64_t seed, bool seed_given,
        const std::string& out, bool full) {
    const nlohmann::json config = load_config(config_path);
    std::string key = command;
    for (auto& ch : key) {
        if (ch == '-') ch = '_';
    }
    nvqo::RunContext ctx;
    ctx.seed = seed_given ? seed : config.value("seed", std::uint64_t{1});
    ctx.out_dir = out;
    ctx.full = full;
    ctx.config = config;
    const nlohmann::json block = section(config, key);

    if (command == "qfi-scan") {
        const auto r = nvqo::run_qfi_scan(nvqo::parse_qfi_scan(block), ctx);
        std::cout << "eta,g2_sqrt_LD,g2_sqrt_SLD,qfi_bound,err_opt\n";
        for (const auto& row : r.rows) {
            std::cout << row.eta << ',' << row.g2_sqrt_ld << ',' << row.g2_sqrt_sld << ',' << row.qfi_bound << ','
                      << row.err_opt << '\n';
        }
        return 0;
    }
    if (command == "landscape") {
        const auto r = nvqo::run_landscape(nvqo::parse_landscape(block), ctx);
        std::cout << r.noiseless.size() << " grid points written\n";
        return 0;
    }
    if (command == "convergence") {
        const auto r = nvqo::run_convergence(nvqo::parse_convergence(block, full), ctx);
        for (const auto& arm : r.arms) {
            std::vector<double> curve;
            for (const auto& s : arm.result.exact) curve.push_back(s.mean);
            std::cout << arm.name << " final=" << nvqo::final_level(curve)
                      << " iterations_to_converge=" << nvqo::iterations_to_converge(curve) << '\n';
        }
        return 0;
    }
    if (command == "bounds-audit") {
        const auto r = nvqo::run_bounds_audit(nvqo::parse_bounds_audit(block), ctx);
        print_checks(r);
        return r.all_pass() ? 0 : 1;
    }
    if (command == "channel-validate") {
        const auto r = nvqo::run_channel_validate(nvqo::parse_channel_validate(block), ctx);
        print_checks(r);
        return r.all_pass() ? 0 : 1;
    }
    throw nvqo::ConfigError("unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noisy variational quantum optimization experiments"};
    app.set_version_flag("--version", nvqo::version_string());
    std::string command, config_path, out = "out";
    std::uint64_t seed = 1;
    bool full = false;
    app.add_option("command", command, "qfi-scan | landscape | convergence | bounds-audit | channel-validate")
        ->required()
        ->check(CLI::IsMember({"qfi-scan", "landscape", "convergence", "bounds-audit", "channel-validate"}));
    app.add_option("--config", config_path, "JSON configuration file");
    auto* seed_opt = app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out, "output directory");
    app.add_flag("--full", full, "use the larger problem size where defined");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return run(command, config_path, seed, seed_opt->count() > 0, out, full);
    } catch (const nvqo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const nvqo::DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 2;
    } catch (const nvqo::DimensionError& e) {
        std::cerr << "dimension error: " << e.what() << '\n';
        return 2;
    } catch (const nvqo::UnsupportedError& e) {
        std::cerr << "unsupported: " << e.what() << '\n';
        return 2;
    } catch (const nvqo::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
