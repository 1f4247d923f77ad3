#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "mupolab/mupolab.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("mupolab_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    /// Run the CLI inside the scratch directory; stdout and stderr go to files.
    int run(const std::string& args) {
        const std::string cmd = "cd '" + dir_.string() + "' && '" MUPOLAB_CLI_PATH "' " + args +
                                " > stdout.txt 2> stderr.txt";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const std::string& name) const {
        std::ifstream in(dir_ / name, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

    fs::path dir_;
};

const char* kRectConfig = R"({"R": 1, "rho": 0.6, "stem": {"kind": "rectangular", "L": 1}, "hole": {"lo": 0.1, "hi": 0.3}})";
const char* kHatConfig =
    R"({"theta_star": "871/2500", "stem": {"kind": "triangular", "L": 1}, "hole": {"lo": 0.3, "hi": 0.348}})";

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_F(Cli, MuposAtRho0815) {
    ASSERT_EQ(run("mupos --rho 0.815 --s-max 919"), 0) << read("stderr.txt");
    const json j = json::parse(read("stdout.txt"));
    ASSERT_TRUE(j.is_array());
    ASSERT_EQ(j.size(), 3u);
    EXPECT_EQ(j[2]["s"], 66);
    EXPECT_EQ(j[2]["j"], 13);
    for (const char* key : {"s", "j", "lambda", "alpha_sj", "beta_sj", "theta_sj"}) EXPECT_TRUE(j[0].contains(key));
    const json m = json::parse(read("mupolab_manifest.json"));
    EXPECT_EQ(m["command"], "mupos");
    EXPECT_EQ(m["version"], mupolab::version);
    EXPECT_DOUBLE_EQ(m["config"]["rho"].get<double>(), 0.815);
}

TEST_F(Cli, MuposGeneralizedAlpha) {
    ASSERT_EQ(run("mupos --rho 0.3 --alpha 1/4 --s-max 50 --out g.json"), 0) << read("stderr.txt");
    const json j = json::parse(read("g.json"));
    ASSERT_TRUE(j.is_array());
    for (const auto& e : j) EXPECT_TRUE(e.contains("p") && e.contains("q"));
    EXPECT_TRUE(fs::exists(dir_ / "g.json.manifest.json"));
}

TEST_F(Cli, ClassifyWorkedSurd) {
    ASSERT_EQ(run("classify --xi '2*(5+sqrt(2))/23' --s-max 95"), 0) << read("stderr.txt");
    const json j = json::parse(read("stdout.txt"));
    EXPECT_EQ(j["kind"], "MupoFreeCertified");
    EXPECT_EQ(j["cf"], "[0; 1, 1, 3, {1, 4}]");
}

TEST_F(Cli, ClassifyNeedsExactInput) {
    EXPECT_NE(run("classify --rho 0.5"), 0);
    const json e = json::parse(read("stderr.txt"));
    EXPECT_EQ(e["error"]["code"], "DomainError");
}

TEST_F(Cli, SimulateIsByteIdentical) {
    write("rect.json", kRectConfig);
    ASSERT_EQ(run("simulate --config rect.json --particles 2000 --seed 5 --t-max 500 --bins 20 --out a.csv"), 0)
        << read("stderr.txt");
    ASSERT_EQ(run("simulate --config rect.json --particles 2000 --seed 5 --t-max 500 --bins 20 --out b.csv"), 0);
    const std::string a = read("a.csv");
    EXPECT_EQ(a, read("b.csv"));
    const auto rows = lines(a);
    ASSERT_EQ(rows.size(), 21u);
    EXPECT_EQ(rows[0], "t_lo,t_hi,survivors,fraction,stderr");
    const json m = json::parse(read("a.csv.manifest.json"));
    EXPECT_EQ(m["parameters"]["seed"], 5);
    EXPECT_EQ(m["config"]["hole"]["hi"], 0.3);
}

TEST_F(Cli, PredictHatPlateausAtC) {
    write("hat.json", kHatConfig);
    ASSERT_EQ(run("predict --config hat.json --t-min 10 --t-max 1e6 --points 30 --out p.csv"), 0)
        << read("stderr.txt");
    const json h = json::parse(read("stdout.txt"));
    EXPECT_EQ(h, json::parse(read("p.csv.json")));
    const double C = h["C"];
    EXPECT_GT(C, 0.0);
    EXPECT_EQ(h["mupos"].size(), 4u);
    const auto rows = lines(read("p.csv"));
    ASSERT_EQ(rows.size(), 31u);
    EXPECT_EQ(rows[0], "t,Pe_exponential,Pe_powerlaw,Pe_total");
    double t, e, w, tot;
    char c;
    std::istringstream last(rows.back());
    last >> t >> c >> e >> c >> w >> c >> tot;
    EXPECT_NEAR(t * tot / C, 1.0, 1e-9);
}

TEST_F(Cli, PredictRectangularStem) {
    write("rect.json", kRectConfig);
    ASSERT_EQ(run("predict --config rect.json --stem rectangular --out p.csv"), 0) << read("stderr.txt");
    const json h = json::parse(read("stdout.txt"));
    for (const char* key : {"A", "B", "gamma_bar", "C", "mupos", "ordering", "zeta", "n_thresholds"})
        EXPECT_TRUE(h.contains(key)) << key;
    EXPECT_EQ(h["zeta"], 2);
    EXPECT_EQ(h["n_thresholds"].size(), 6u);
}

TEST_F(Cli, PhaseCsv) {
    ASSERT_EQ(run("phase --rho 0.815 --N 50 --samples 20000 --out ph.csv"), 0) << read("stderr.txt");
    const auto rows = lines(read("ph.csv"));
    ASSERT_GE(rows.size(), 2u);
    EXPECT_EQ(rows[0], "phi,sin_theta");
}

TEST_F(Cli, UnknownConfigKeyIsRejected) {
    write("bad.json", R"({"rho": 0.5, "colour": "red", "hole": {"lo": 0.1, "hi": 0.2}})");
    EXPECT_EQ(run("simulate --config bad.json --particles 10 --out x.csv"), 2);
    const json e = json::parse(read("stderr.txt"));
    EXPECT_EQ(e["error"]["code"], "InvalidConfig");
}

TEST_F(Cli, ModuleErrorsAreStructured) {
    write("bad.json", R"({"rho": 0.5, "hole": {"lo": 0.8, "hi": 1.2}})");
    EXPECT_EQ(run("simulate --config bad.json --particles 10 --out x.csv"), 2);
    const json e = json::parse(read("stderr.txt"));
    EXPECT_EQ(e["error"]["code"], "InvalidGeometry");
    EXPECT_NE(run("mupos --s-max 10 --rho 1.5"), 0);
    EXPECT_NE(run("frobnicate"), 0);
}

TEST_F(Cli, VerifySubset) {
    ASSERT_EQ(run("verify --only 1 4 --out report.json"), 0) << read("stderr.txt");
    const json r = json::parse(read("report.json"));
    ASSERT_EQ(r.size(), 2u);
    EXPECT_TRUE(r[0]["pass"].get<bool>());
    EXPECT_EQ(lines(read("stdout.txt")).size(), 2u);
}
