#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>

#include "fractanaka/cli.hpp"

namespace fs = std::filesystem;
using namespace fractanaka::cli;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fractanaka_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int invoke(std::vector<std::string> args, std::string* err_text = nullptr) {
    std::ostringstream log, err;
    const int code = main(args, log, err);
    if (err_text) *err_text = err.str();
    return code;
}

std::vector<std::string> small(std::string sub, const fs::path& out) {
    return {std::move(sub), "--grid-n", "64", "--paths", "32", "--seed", "3", "--out", out.string()};
}

}  // namespace

TEST(ParseConfig, FullExample) {
    const CliConfig c = parse_config({"tanaka", "--model", "fbm", "--hurst", "0.75", "--grid-n", "2048", "--paths", "8192",
                                      "--seed", "7", "--level", "0", "--mollifier-n", "64"});
    EXPECT_EQ(c.subcommand, Subcommand::tanaka);
    EXPECT_EQ(c.model, "fbm");
    EXPECT_EQ(c.hurst, 0.75);
    EXPECT_EQ(c.grid_n, 2048u);
    EXPECT_EQ(c.paths, 8192u);
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.levels, std::vector<double>{0.0});
    EXPECT_EQ(c.ladder, std::vector<long long>{64});
}

TEST(ParseConfig, Defaults) {
    const CliConfig c = parse_config({"converge"});
    EXPECT_EQ(c.hurst, 0.75);
    EXPECT_EQ(c.horizon, 1.0);
    EXPECT_EQ(c.grid_n, 2048u);
    EXPECT_EQ(c.paths, 4096u);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.convention, "argument_at_s");
    EXPECT_EQ(c.ladder, (std::vector<long long>{4, 16, 64, 256}));
}

TEST(ParseConfig, HurstOutsideRange) {
    std::string err;
    EXPECT_EQ(invoke({"tanaka", "--hurst", "0.4"}, &err), 2);
    EXPECT_NE(err.find("(1/2, 1)"), std::string::npos) << err;
    EXPECT_EQ(invoke({"tanaka", "--hurst", "1.0"}), 2);
}

TEST(ParseConfig, InvalidValuesAndFlags) {
    EXPECT_THROW(parse_config({"tanaka", "--paths", "many"}), UsageError);
    EXPECT_THROW(parse_config({"tanaka", "--bogus", "1"}), UsageError);
    EXPECT_THROW(parse_config({"fly"}), UsageError);
    EXPECT_THROW(parse_config({"tanaka", "--ladder", "16,4"}), UsageError);
    EXPECT_EQ(invoke({"tanaka", "--model", "heston"}), 2);
}

TEST(ParseConfig, FlagsOverrideFile) {
    const fs::path dir = scratch("precedence");
    const fs::path file = dir / "run.conf";
    std::ofstream(file) << "# experiment\npaths = 1024\nhurst = 0.6   # rough-ish\n\nlevel = 0.5\n";
    const CliConfig from_file = parse_config({"tanaka", "--config", file.string()});
    EXPECT_EQ(from_file.paths, 1024u);
    EXPECT_EQ(from_file.hurst, 0.6);
    EXPECT_EQ(from_file.levels, std::vector<double>{0.5});
    const CliConfig both = parse_config({"tanaka", "--paths", "4096", "--config", file.string()});
    EXPECT_EQ(both.paths, 4096u);
    EXPECT_EQ(both.hurst, 0.6);
}

TEST(ParseConfig, UnknownFileKeyIsNamed) {
    const fs::path dir = scratch("unknown");
    const fs::path file = dir / "run.conf";
    std::ofstream(file) << "paths = 10\nwidget = 3\n";
    std::string err;
    EXPECT_EQ(invoke({"tanaka", "--config", file.string()}, &err), 2);
    EXPECT_NE(err.find("widget"), std::string::npos) << err;
}

TEST(ParseConfig, HelpExitsCleanly) {
    std::ostringstream log, err;
    EXPECT_EQ(main({"--help"}, log, err), 0);
    EXPECT_NE(log.str().find("Usage"), std::string::npos);
}

TEST(Run, TanakaEmitsContractFiles) {
    const fs::path dir = scratch("tanaka");
    ASSERT_EQ(invoke(small("tanaka", dir)), 0);
    for (const char* f : {"terms.csv", "ensemble.csv", "summary.txt"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
    const std::string terms = slurp(dir / "terms.csv");
    EXPECT_EQ(terms.substr(0, terms.find('\n')),
              "path_id,x,n,convention,abs_increment,drift,rs_total,trace_sigma_prime,trace_local,skorokhod,"
              "residual_tchange,residual_tf");
    const std::string ens = slurp(dir / "ensemble.csv");
    EXPECT_EQ(ens.substr(0, ens.find('\n')), "level,n,term,mean,stderr,count");
}

TEST(Run, OtherSubcommandsEmitFiles) {
    const std::vector<std::pair<std::string, std::string>> cases{
        {"sample", "paths.csv"}, {"solve", "paths.csv"}, {"pathwise", "pathwise.csv"}};
    for (const auto& [sub, file] : cases) {
        const fs::path dir = scratch(sub);
        auto args = small(sub, dir);
        if (sub == "solve") args.insert(args.end(), {"--model", "fou"});
        ASSERT_EQ(invoke(args), 0) << sub;
        EXPECT_TRUE(fs::exists(dir / file)) << sub;
        EXPECT_TRUE(fs::exists(dir / "summary.txt")) << sub;
    }
}

TEST(Run, ConvergeLadderColumnIncreases) {
    const fs::path dir = scratch("converge");
    ASSERT_EQ(invoke(small("converge", dir)), 0);
    std::istringstream in(slurp(dir / "ladder.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("x,n,m,", 0), 0u);
    long long prev = 0;
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string x, n;
        std::getline(row, x, ',');
        std::getline(row, n, ',');
        EXPECT_GT(std::stoll(n), prev);
        prev = std::stoll(n);
        ++rows;
    }
    EXPECT_EQ(rows, 3);
}

TEST(Run, DensitySummaryHasPeakLine) {
    const fs::path dir = scratch("density");
    auto args = small("density", dir);
    args[4] = "2048";
    ASSERT_EQ(invoke(args), 0);
    EXPECT_NE(slurp(dir / "summary.txt").find("peak vs 1/sqrt(2 pi) t^{-H}"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "kde.csv"));
}

TEST(Run, ByteIdenticalAcrossWorkerCounts) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    auto args_a = small("tanaka", a), args_b = small("tanaka", b);
    args_a.insert(args_a.end(), {"--model", "doss", "--workers", "1"});
    args_b.insert(args_b.end(), {"--model", "doss", "--workers", "3"});
    ASSERT_EQ(invoke(args_a), 0);
    ASSERT_EQ(invoke(args_b), 0);
    for (const char* f : {"terms.csv", "ensemble.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Run, NumericalFailureExitsOne) {
    // b(y) = |y|^0.8 has an infinite derivative at the start point.
    const fs::path dir = scratch("fail");
    auto args = small("tanaka", dir);
    args.insert(args.end(), {"--model", "holder"});
    std::string err;
    EXPECT_EQ(invoke(args, &err), 1);
    EXPECT_NE(err.find("path 0"), std::string::npos) << err;
}

namespace {
struct CommaDecimal : std::numpunct<char> {
    char do_decimal_point() const override { return ','; }
    char do_thousands_sep() const override { return '.'; }
    std::string do_grouping() const override { return "\3"; }
};
}  // namespace

TEST(Run, LocaleDoesNotLeakIntoNumbers) {
    const std::locale saved = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
    const fs::path dir = scratch("locale");
    auto args = small("tanaka", dir);
    args.insert(args.end(), {"--hurst", "0.65", "--level", "0.25"});
    CliConfig c;
    EXPECT_NO_THROW(c = parse_config(args));
    const int code = invoke(args);
    std::locale::global(saved);
    EXPECT_EQ(c.hurst, 0.65);
    EXPECT_EQ(c.levels, std::vector<double>{0.25});
    ASSERT_EQ(code, 0);
    std::istringstream in(slurp(dir / "terms.csv"));
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    EXPECT_EQ(line.rfind("0,0.25,", 0), 0u) << line;
}
