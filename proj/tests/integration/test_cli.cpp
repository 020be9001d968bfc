#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
    const std::string cmd = std::string(CPSEM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cpsem_cli_" + name);
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

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

TEST(Cli, ListScenarios) {
    EXPECT_EQ(run("list-scenarios"), 0);
    EXPECT_EQ(run("--list-scenarios"), 0);
}

TEST(Cli, ConfigErrorsExitWithTwo) {
    const fs::path dir = scratch("bad");
    EXPECT_EQ(run("smooth --scenario nope --out " + dir.string()), 2);
    write(dir / "broken.json", "{ not json");
    EXPECT_EQ(run("smooth --config " + (dir / "broken.json").string() + " --out " + dir.string()), 2);
    write(dir / "unknown.json", R"({"iterations": 3})");
    EXPECT_EQ(run("smooth --config " + (dir / "unknown.json").string() + " --out " + dir.string()), 2);
    EXPECT_EQ(run("smooth --jobs notanumber"), 2);
    EXPECT_EQ(run("estimate --max-evals 10 --out " + dir.string()), 2);
    EXPECT_EQ(run(""), 2);
}

TEST(Cli, NumericalFailureExitsWithThree) {
    const fs::path dir = scratch("numeric");
    // particles start near zero (A = 0) while the data sit near 1e6; with a tiny R every
    // squared residual over R overflows and all weights vanish at t = 1
    write(dir / "c.json", R"({"model": {"model": "linear", "x0_mean": 1e6, "x0_var": 1e-300, "T": 5},
                              "iters": 2, "theta0_box": [[0, 0], [1e-6, 1e-6], [1e-300, 1e-300]]})");
    EXPECT_EQ(run("smooth --config " + (dir / "c.json").string() + " --out " + dir.string()), 3);
}

TEST(Cli, OutputsAreByteIdentical) {
    const fs::path a = scratch("rep_a"), b = scratch("rep_b");
    const fs::path cfg = a / "c.json";
    write(cfg, R"({"iters": 6, "repetitions": 3, "model": {"model": "kitagawa", "T": 40}})");
    for (const auto& dir : {a, b}) {
        ASSERT_EQ(run("estimate --scenario fig10 --config " + cfg.string() + " --seed 5 --no-timing --out " +
                      (dir / "est").string()),
                  0);
        ASSERT_EQ(run("smooth --scenario lorenz --seed 5 --no-timing --out " + (dir / "smooth").string()), 0);
        ASSERT_EQ(run("simulate --scenario fig14 --seed 5 --out " + (dir / "sim").string()), 0);
    }
    int compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        EXPECT_EQ(slurp(e.path()), slurp(b / fs::relative(e.path(), a))) << e.path();
        ++compared;
    }
    EXPECT_GT(compared, 10);
    EXPECT_TRUE(fs::exists(a / "est" / "estimates_final.csv"));
    EXPECT_TRUE(fs::exists(a / "smooth" / "reconstruction.csv"));
    EXPECT_TRUE(fs::exists(a / "sim" / "truth.csv"));
    EXPECT_TRUE(fs::exists(a / "sim" / "obs.csv"));
}

TEST(Cli, SeedChangesOutputs) {
    const fs::path a = scratch("seed_a"), b = scratch("seed_b");
    ASSERT_EQ(run("simulate --seed 1 --out " + a.string()), 0);
    ASSERT_EQ(run("simulate --seed 2 --out " + b.string()), 0);
    EXPECT_NE(slurp(a / "obs.csv"), slurp(b / "obs.csv"));
}

}  // namespace
