#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgc/cli.hpp"
#include "cgc/projections.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using cgc::cli::run;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cgc_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

// One 101x101 revolution frame shared by the slower tests.
class Built : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = scratch("shared");
        const Result r = call({"build", "--potential", "revolution", "--grid", "101x101", "--out", dir_.string()});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    static void TearDownTestSuite() { fs::remove_all(dir_); }
    static inline fs::path dir_;
};

}  // namespace

TEST(Cli, BuildSummaryAndCache) {
    const fs::path dir = scratch("build");
    const Result r = call({"build", "--potential", "amsler", "--grid", "11x9", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("grid 11x9"), std::string::npos);
    EXPECT_NE(r.out.find("max_birkhoff_residual"), std::string::npos);
    EXPECT_NE(r.out.find("off_big_cell 0"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "frame.cgcf"));

    const Result p = call({"project", "--out", dir.string(), "--mu", "2", "--format", "ply", "--raw-r4"});
    ASSERT_EQ(p.code, 0) << p.err;
    EXPECT_TRUE(fs::exists(dir / "mu_2.ply"));
    EXPECT_TRUE(fs::exists(dir / "mu_2_r4.csv"));
    fs::remove_all(dir);
}

TEST(Cli, UsageErrors) {
    const fs::path dir = scratch("usage");
    Result r = call({"build", "--potential", "catenoid", "--out", dir.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("catenoid"), std::string::npos);

    EXPECT_EQ(call({"build", "--potential", "revolution", "--grid", "1x5", "--out", dir.string()}).code, 2);
    EXPECT_EQ(call({"build", "--potential", "revolution", "--grid", "5by5", "--out", dir.string()}).code, 2);
    EXPECT_EQ(call({"build", "--potential", "revolution", "--grid", "4096x8", "--out", dir.string()}).code, 2);
    EXPECT_EQ(call({"build", "--potential", "revolution", "--domain", "0,1,2", "--out", dir.string()}).code, 2);
    EXPECT_EQ(call({"build", "--out", dir.string()}).code, 2);
    EXPECT_EQ(call({"frobnicate"}).code, 2);

    r = call({"project", "--out", dir.string(), "--mu", "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("mu=1 degenerates; use --sym"), std::string::npos);
    EXPECT_EQ(call({"project", "--out", dir.string(), "--mu", "0"}).code, 2);
    EXPECT_EQ(call({"project", "--out", dir.string(), "--mu-ramp", "0.5,2"}).code, 2);
    EXPECT_EQ(call({"project", "--out", dir.string(), "--parallel", "0.1"}).code, 2);
    EXPECT_EQ(call({"project", "--out", dir.string(), "--mu", "2", "--format", "stl"}).code, 2);
    EXPECT_EQ(call({"sweep", "--out", dir.string()}).code, 2);
    EXPECT_FALSE(fs::exists(dir / "frame.cgcf"));
}

TEST(Cli, MissingOrCorruptCacheIsRuntimeFailure) {
    const fs::path dir = scratch("missing");
    Result r = call({"project", "--out", dir.string(), "--mu", "2"});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("run build first"), std::string::npos);

    fs::create_directories(dir);
    std::ofstream(dir / "frame.cgcf") << "not a frame";
    EXPECT_EQ(call({"verify", "--out", dir.string(), "--mu", "2"}).code, 3);
    fs::remove_all(dir);
}

TEST(Cli, ConfigDocument) {
    const fs::path dir = scratch("config");
    fs::create_directories(dir);
    const fs::path doc = dir / "pot.json";
    std::ofstream(doc) << cgc::to_config(cgc::builtin("amsler"));
    const Result r = call({"build", "--config", doc.string(), "--grid", "9x9", "--out", dir.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(call({"build", "--config", (dir / "absent.json").string(), "--out", dir.string()}).code, 2);
    fs::remove_all(dir);
}

TEST(Cli, OutputIsDeterministic) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    for (const fs::path& d : {a, b}) {
        ASSERT_EQ(call({"build", "--potential", "revolution", "--grid", "21x17", "--out", d.string()}).code, 0);
        ASSERT_EQ(call({"project", "--out", d.string(), "--mu", "4", "--sym", "--format", "csv"}).code, 0);
    }
    for (const char* name : {"frame.cgcf", "mu_4.csv", "sym.csv"}) EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_F(Built, VerifyPassesOnConstructedSurfaces) {
    const Result r = call({"verify", "--out", dir_.string(), "--mu", "4,-4", "--sym"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("PASS curvature:mu_4"), std::string::npos);
    EXPECT_NE(r.out.find("PASS harmonicity:sym"), std::string::npos);
    EXPECT_NE(r.out.find("PASS singular-set:mu_4=mu_-4"), std::string::npos);
    const std::string csv = slurp(dir_ / "mu_4_diagnostics.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "i,j,u,v,E,F,G,e,f,g,K_est,res_harmonic,res_gauss,res_codazzi_u,res_codazzi_v,singular,valid");
}

TEST_F(Built, VerifyRejectsRampControl) {
    const Result r = call({"verify", "--out", dir_.string(), "--mu-ramp", "2,6"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("FAIL harmonicity:ramp_2_6"), std::string::npos);
    EXPECT_NE(r.out.find("verification failed"), std::string::npos);
}

TEST_F(Built, SweepTracksCurvatureFormula) {
    const Result r = call({"sweep", "--out", dir_.string(), "--mu", "4,0.5,0.1,0.02"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(slurp(dir_ / "sweep.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "mu,K_formula,K_est_median");
    std::vector<std::array<double, 3>> rows;
    while (std::getline(in, line)) {
        std::array<double, 3> x{};
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x[0], &x[1], &x[2]), 3) << line;
        EXPECT_DOUBLE_EQ(x[1], cgc::ProjectionParams(x[0]).K());
        rows.push_back(x);
    }
    ASSERT_EQ(rows.size(), 4u);
    // The v speed grows like 1/mu, so 101 points resolve the surface down to about mu = 0.1.
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(rows[k][2], rows[k][1], 2e-2 * std::abs(rows[k][1])) << rows[k][0];
    EXPECT_LT(std::abs(rows[2][1]), std::abs(rows[1][1]));
    EXPECT_LT(std::abs(rows[3][1]), std::abs(rows[2][1]));
    EXPECT_LT(std::abs(rows[3][1]), 0.1);
    EXPECT_LT(std::abs(rows[3][2]), 0.1);
    EXPECT_TRUE(fs::exists(dir_ / "sweep_mu_0.02.obj"));
}
