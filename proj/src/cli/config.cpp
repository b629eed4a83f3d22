#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "fractanaka/cli.hpp"

namespace fractanaka::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

template <class T>
T parse_number(const std::string& s, const char* what) {
    T v{};
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw UsageError(std::string("invalid value '") + s + "' for " + what);
    return v;
}

template <class T>
std::vector<T> parse_list(const std::string& s, const char* what) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(trim(item), what));
    if (out.empty()) throw UsageError(std::string("empty list for ") + what);
    return out;
}

Subcommand subcommand_from(const std::string& s) {
    static const std::map<std::string, Subcommand> names{
        {"sample", Subcommand::sample},     {"solve", Subcommand::solve},       {"tanaka", Subcommand::tanaka},
        {"pathwise", Subcommand::pathwise}, {"converge", Subcommand::converge}, {"density", Subcommand::density}};
    const auto it = names.find(s);
    if (it == names.end()) throw UsageError("unknown subcommand '" + s + "'");
    return it->second;
}

}  // namespace

CliConfig parse_config(const std::vector<std::string>& args) {
    CliConfig cfg;
    std::string subcommand, levels, ladder, config_file;
    long long mollifier_n = 0;

    CLI::App app("Tanaka formula experiments for SDEs driven by fractional Brownian motion", "fractanaka");
    app.add_option("subcommand", subcommand, "sample | solve | tanaka | pathwise | converge | density")
        ->required();
    app.add_option("--config", config_file, "file of `key = value` lines");
    app.add_option("--model", cfg.model, "fbm | fou | doss | holder")
        ->check(CLI::IsMember({"fbm", "fou", "doss", "holder"}));
    app.add_option("--nu", cfg.nu, "fOU diffusion constant");
    app.add_option("--doss-a", cfg.doss_a, "a in sigma(x) = a + sin x (a > 1)");
    app.add_option("--hurst", cfg.hurst, "Hurst index in (1/2, 1)")->check([](const std::string& s) -> std::string {
        double h = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), h);
        if (ec != std::errc() || ptr != s.data() + s.size() || !(h > 0.5 && h < 1.0)) {
            return "hurst must lie in the open interval (1/2, 1), got " + s;
        }
        return {};
    });
    app.add_option("--horizon", cfg.horizon, "time horizon T")->check(CLI::PositiveNumber);
    app.add_option("--grid-n", cfg.grid_n, "number of grid steps N")->check(CLI::PositiveNumber);
    app.add_option("--paths", cfg.paths, "number of Monte Carlo paths")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--level", levels, "level(s) x, comma separated");
    app.add_option("--ladder", ladder, "mollifier indices, comma separated, increasing");
    app.add_option("--mollifier-n", mollifier_n, "single mollifier index (replaces the ladder)")
        ->check(CLI::PositiveNumber);
    app.add_option("--convention", cfg.convention, "argument_at_s | argument_at_r")
        ->check(CLI::IsMember({"argument_at_s", "argument_at_r"}));
    app.add_option("--x0", cfg.x0, "initial condition");
    app.add_option("--method", cfg.method, "circulant | cholesky")->check(CLI::IsMember({"circulant", "cholesky"}));
    app.add_option("--t", cfg.density_time, "evaluation time for density (default: horizon)");
    app.add_option("--workers", cfg.workers, "worker threads (speed only)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", cfg.out_dir, "output directory");
    for (CLI::Option* opt : app.get_options()) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // Locate --config before the real parse; its keys become leading flags so
    // that later command-line flags win.
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) config_file = args[k + 1];
        if (args[k].rfind("--config=", 0) == 0) config_file = args[k].substr(9);
    }
    std::vector<std::string> tokens;
    if (!config_file.empty()) {
        for (const auto& [key, value] : read_config_file(config_file)) {
            if (key == "config" || key == "help" || app.get_option_no_throw("--" + key) == nullptr) {
                throw UsageError("unknown key '" + key + "' in " + config_file);
            }
            tokens.push_back("--" + key + "=" + value);
        }
    }
    tokens.insert(tokens.end(), args.begin(), args.end());
    // CLI11 consumes arguments in reverse order.
    std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    cfg.subcommand = subcommand_from(subcommand);
    if (!levels.empty()) cfg.levels = parse_list<double>(levels, "--level");
    if (!ladder.empty()) cfg.ladder = parse_list<long long>(ladder, "--ladder");
    if (mollifier_n > 0) cfg.ladder = {mollifier_n};
    for (std::size_t k = 1; k < cfg.ladder.size(); ++k) {
        if (cfg.ladder[k] <= cfg.ladder[k - 1]) throw UsageError("--ladder must be strictly increasing");
    }
    if (cfg.ladder.front() < 1) throw UsageError("mollifier indices must be >= 1");
    if (cfg.model == "doss" && !(cfg.doss_a > 1.0)) throw UsageError("--doss-a must exceed 1");
    return cfg;
}

}  // namespace fractanaka::cli
