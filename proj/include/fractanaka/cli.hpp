#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fractanaka::cli {

enum class Subcommand { sample, solve, tanaka, pathwise, converge, density };

/// Bad flag, unknown key or invalid value: exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// --help; carries the usage text. main() prints it and returns 0.
class HelpRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CliConfig {
    Subcommand subcommand = Subcommand::tanaka;
    std::string model = "fbm";  // fbm | fou | doss | holder
    double nu = 1.0;
    double doss_a = 2.0;
    double hurst = 0.75;
    double horizon = 1.0;
    std::size_t grid_n = 2048;
    std::size_t paths = 4096;
    std::uint64_t seed = 42;
    std::vector<double> levels{0.0};
    std::vector<long long> ladder{4, 16, 64, 256};
    std::string convention = "argument_at_s";
    double x0 = 0.0;
    std::string method = "circulant";
    double density_time = 0.0;  // 0: use the horizon
    int workers = 0;            // 0: environment / OpenMP default
    std::string out_dir = ".";
};

/// args excludes the program name. `--config FILE` reads `key = value`
/// lines (`#` comments); flags given on the command line take precedence.
CliConfig parse_config(const std::vector<std::string>& args);

/// Executes the subcommand, writing outputs under out_dir and progress to
/// `log`. Returns 0, 1 on numerical failure, 2 on usage error.
int run(const CliConfig& config, std::ostream& log);

/// parse_config + run with error reporting on `err`.
int main(const std::vector<std::string>& args, std::ostream& log, std::ostream& err);

}  // namespace fractanaka::cli
