#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "tiltbound/error.hpp"

using namespace tiltbound;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* const kTwoState = "P: [[0.7, 0.3], [0.3, 0.7]]\nf: [0, 1]\n";

struct Result {
  int status;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "tiltbound");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tiltbound_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
  }

  fs::path dir_;
};

}  // namespace

TEST(CliParse, RealGrid) {
  const auto g = cli::parse_real_grid("-4:4:81");
  ASSERT_EQ(g.size(), 81u);
  EXPECT_EQ(g.front(), -4.0);
  EXPECT_EQ(g[40], 0.0);
  EXPECT_EQ(g.back(), 4.0);
  EXPECT_EQ(cli::parse_real_grid("0.5, -1,2"), (std::vector<double>{-1, 0.5, 2}));
  EXPECT_EQ(cli::parse_real_grid("1e-1"), (std::vector<double>{0.1}));
  EXPECT_THROW(cli::parse_real_grid("1:2"), InputError);
  EXPECT_THROW(cli::parse_real_grid("2:1:5"), InputError);
  EXPECT_THROW(cli::parse_real_grid("x"), InputError);
  EXPECT_THROW(cli::parse_real_grid("inf"), InputError);
  EXPECT_THROW(cli::parse_real_grid("1:2:0"), InputError);
}

TEST(CliParse, IntRangeAndInterval) {
  const auto r = cli::parse_int_range("1:100");
  ASSERT_EQ(r.size(), 100u);
  EXPECT_EQ(r.front(), 1);
  EXPECT_EQ(r.back(), 100);
  EXPECT_EQ(cli::parse_int_range("10,5,5"), (std::vector<std::int64_t>{5, 10}));
  EXPECT_THROW(cli::parse_int_range("1.5"), InputError);
  EXPECT_THROW(cli::parse_int_range("5:1"), InputError);
  EXPECT_EQ(cli::parse_interval("0.9,1"), (std::pair<double, double>{0.9, 1.0}));
  EXPECT_THROW(cli::parse_interval("1,0"), InputError);
  EXPECT_THROW(cli::parse_interval("1"), InputError);
}

TEST(CliParse, CheckConfig) {
  cli::RunConfig c;
  c.command = cli::Command::bound;
  c.model_path = "m.yaml";
  c.n = {5};
  EXPECT_THROW(cli::check_config(c), InputError);  // no mu, no interval
  c.mu = {0.7};
  EXPECT_NO_THROW(cli::check_config(c));
  c.format = cli::Format::csv;
  EXPECT_THROW(cli::check_config(c), InputError);
  c.format = cli::Format::text;
  c.n = {0};
  EXPECT_THROW(cli::check_config(c), InputError);
}

TEST_F(CliTest, BoundOrdering) {
  const auto model = write("two.yaml", kTwoState);
  const Result r = invoke({"bound", "--model", model, "--mu", "0.7", "--n", "50", "--format", "machine"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  const json& res = j["result"];
  EXPECT_LE(res["chernoff"].get<double>(), res["hoeffding_sigma"].get<double>());
  EXPECT_LE(res["hoeffding_sigma"].get<double>(), res["hoeffding_range"].get<double>());
  EXPECT_TRUE(res["ordering_holds"].get<bool>());
  EXPECT_EQ(j["parameters"]["n"], 50);
  EXPECT_EQ(j["parameters"]["side"], "upper");
}

TEST_F(CliTest, ReportEmbedsHashVersionAndParameters) {
  const auto model = write("two.yaml", kTwoState);
  const Result r = invoke({"rate", "--model", model, "--mu", "0.6,0.8", "--format", "machine"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["model"]["sha256"], "a6dbdec8c4d6a8f92bd624c327bfc8de80a9ef9de96d60122058b3dcf15fe1b5");
  EXPECT_FALSE(j["version"].get<std::string>().empty());
  EXPECT_EQ(j["command"], "rate");
  EXPECT_EQ(j["parameters"]["mu"], (json{0.6, 0.8}));
  EXPECT_EQ(j["result"]["rows"].size(), 2u);

  const Result text = invoke({"rate", "--model", model, "--mu", "0.6"});
  EXPECT_NE(text.out.find("sha256=a6dbdec8"), std::string::npos);
  EXPECT_NE(text.out.find("parameters side=upper"), std::string::npos);
}

TEST_F(CliTest, ValidateFlagsA1) {
  const auto model = write("ex.yaml", "states: ['-1', '1']\nP: [[0.5, 0.5], [1, 0]]\nf: [-1, 1]\n");
  const Result r = invoke({"validate", "--model", model});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("A1"), std::string::npos);
  const Result m = invoke({"validate", "--model", model, "--format", "machine"});
  const json j = json::parse(m.out);
  EXPECT_FALSE(j["result"]["A1"].get<bool>());
  EXPECT_EQ(j["result"]["violations"][0]["assumption"], "A1");
  EXPECT_EQ(j["result"]["violations"][0]["states"], (json{"1"}));
  EXPECT_EQ(invoke({"validate", "--model", model, "--side", "lower"}).status, 0);
}

TEST_F(CliTest, ErgodicIid) {
  const auto model = write("iid.yaml", "P: [[0.7, 0.3], [0.7, 0.3]]\nf: [0, 1]\n");
  const Result r = invoke({"ergodic", "--model", model, "--theta", "1", "--n", "1:100", "--format", "machine"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["result"]["rows"].size(), 100u);
  for (const auto& row : j["result"]["rows"]) {
    EXPECT_TRUE(row["pass"].get<bool>());
    EXPECT_LT(row["gap"].get<double>(), 1e-10);
  }
  const Result csv = invoke({"ergodic", "--model", model, "--theta", "1,2", "--n", "1:3", "--format", "csv"});
  ASSERT_EQ(csv.status, 0);
  EXPECT_NE(csv.out.find("theta,n,Lambda_n,Lambda,gap,bound,pass\n"), std::string::npos);
}

TEST_F(CliTest, SpectrumDefaultsAndCsv) {
  const auto model = write("two.yaml", kTwoState);
  const Result r = invoke({"spectrum", "--model", model, "--format", "machine"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["result"]["rows"].size(), 81u);
  EXPECT_EQ(j["result"]["rows"][40]["Lambda"].get<double>(), 0.0);
  const Result csv = invoke({"spectrum", "--model", model, "--theta=-1:1:3", "--format", "csv"});
  ASSERT_EQ(csv.status, 0) << csv.err;
  std::istringstream lines(csv.out);
  std::string line;
  int data = 0;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#' && line.rfind("theta", 0) != 0) ++data;
  EXPECT_EQ(data, 3);
}

TEST_F(CliTest, SimulateIsByteIdentical) {
  const auto model = write("two.yaml", kTwoState);
  const std::vector<std::string> args{"simulate", "--model", model, "--mu", "0.7", "--n", "50",
                                      "--trials", "5000", "--seed", "99"};
  const Result a = invoke(args), b = invoke(args);
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  auto machine = args;
  machine.insert(machine.end(), {"--format", "machine"});
  const json j = json::parse(invoke(machine).out);
  EXPECT_TRUE(j["result"]["consistent"].get<bool>());
  EXPECT_EQ(j["result"]["estimate"]["trials"], 5000);
  EXPECT_EQ(j["result"]["estimate"]["seed"], 99);
}

TEST_F(CliTest, TwoSidedAndOutFile) {
  const auto model = write("two.yaml", kTwoState);
  const std::string out = (dir_ / "report.json").string();
  const Result r = invoke({"bound", "--model", model, "--interval", "1,1", "--n", "10", "--format",
                           "machine", "--out", out});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(out);
  const json j = json::parse(in);
  const double K = std::max(j["result"]["two_sided"]["K_upper"].get<double>(),
                            j["result"]["two_sided"]["K_lower"].get<double>());
  EXPECT_NEAR(j["result"]["two_sided"]["value"].get<double>(), 2 * K * std::pow(0.7, 10), 1e-12);
}

TEST_F(CliTest, ConstantsReport) {
  const auto model = write("two.yaml", kTwoState);
  const Result r = invoke({"constants", "--model", model, "--side", "lower", "--format", "machine"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["result"]["side"], "lower");
  EXPECT_NEAR(j["result"]["K"].get<double>(), 7.0 / 3.0, 1e-9);
  EXPECT_TRUE(j["result"]["grid_summary"]["converged"].get<bool>());
}

TEST_F(CliTest, InfinityIsEncodedAsString) {
  const auto model = write("two.yaml", kTwoState);
  const json j = json::parse(invoke({"rate", "--model", model, "--mu", "1.5", "--format", "machine"}).out);
  EXPECT_EQ(j["result"]["rows"][0]["value"], "inf");
}

TEST_F(CliTest, ErrorsNameModuleAndMapExitCodes) {
  const Result missing = invoke({"validate", "--model", (dir_ / "nope.yaml").string()});
  EXPECT_EQ(missing.status, 1);
  EXPECT_NE(missing.err.find("[cli]"), std::string::npos);

  const auto bad = write("bad.yaml", "P: [[0.5, 0.4], [0.5, 0.5]]\nf: [0, 1]\n");
  const Result row = invoke({"validate", "--model", bad});
  EXPECT_EQ(row.status, 1);
  EXPECT_NE(row.err.find("row not stochastic"), std::string::npos);
  EXPECT_NE(row.err.find("[matrix_core]"), std::string::npos);

  const auto cycle = write("cycle.yaml", "P: [[0, 1], [1, 0]]\nf: [-1, 1]\n");
  const Result assume = invoke({"constants", "--model", cycle});
  EXPECT_EQ(assume.status, 1);
  EXPECT_NE(assume.err.find("[bounds]"), std::string::npos);

  const auto two = write("two.yaml", kTwoState);
  const Result side = invoke({"bound", "--model", two, "--mu", "0.2", "--n", "5"});
  EXPECT_EQ(side.status, 1);
  EXPECT_NE(side.err.find("[family]"), std::string::npos);

  EXPECT_EQ(invoke({"bound", "--model", two, "--mu", "0.7", "--n", "5", "--format", "csv"}).status, 1);
  EXPECT_EQ(invoke({"bound", "--model", two, "--mu", "0.7", "--n", "5", "--side", "sideways"}).status, 1);
  EXPECT_EQ(invoke({"frobnicate"}).status, 1);
  EXPECT_EQ(invoke({}).status, 1);
}

TEST_F(CliTest, Help) {
  const Result r = invoke({"--help"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("simulate"), std::string::npos);
}

TEST(CliModels, ShippedModelsLoad) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(TILTBOUND_MODELS_DIR)) {
    const Result r = invoke({"validate", "--model", entry.path().string()});
    EXPECT_TRUE(r.status == 0 || r.status == 1) << entry.path() << r.err;
    EXPECT_TRUE(r.err.empty()) << entry.path() << r.err;
    ++count;
  }
  EXPECT_GE(count, 5);
}
