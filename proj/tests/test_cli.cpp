#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nhknot/cli.hpp"
#include "nhknot/io.hpp"
#include "nhknot/types.hpp"

namespace nhknot {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / (std::string("nhknot_cli_") + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "nhknot");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
  }

  std::string dir(const std::string& name) const { return (root_ / name).string(); }

  std::string write_config(const std::string& name, const Json& j) const {
    const fs::path p = root_ / name;
    write_json_file(p, j);
    return p.string();
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path root_;
};

TEST_F(CliTest, BandsClassifyPresets) {
  ASSERT_EQ(run({"bands", "--preset", "hopf_link", "--out", dir("h")}), 0);
  const Json h = read_json_file(root_ / "h" / "classification.json");
  EXPECT_EQ(h.at("nu"), 2);
  EXPECT_EQ(h.at("tag"), "hopf_link");
  EXPECT_TRUE(fs::exists(root_ / "h" / "band1.csv"));
  EXPECT_TRUE(fs::exists(root_ / "h" / "band2.csv"));

  ASSERT_EQ(run({"bands", "--preset", "unlink", "--out", dir("u")}), 0);
  EXPECT_EQ(read_json_file(root_ / "u" / "classification.json").at("nu"), 0);
}

TEST_F(CliTest, BandsGridInvariance) {
  ASSERT_EQ(run({"bands", "--preset", "unknot", "--grid", "64", "--out", dir("a")}), 0);
  ASSERT_EQ(run({"bands", "--preset", "unknot", "--grid", "2048", "--out", dir("b")}), 0);
  EXPECT_EQ(read_json_file(root_ / "a" / "classification.json").at("nu"),
            read_json_file(root_ / "b" / "classification.json").at("nu"));
}

TEST_F(CliTest, BerryValues) {
  ASSERT_EQ(run({"berry", "--preset", "unknot", "--out", dir("k")}), 0);
  EXPECT_NEAR(read_json_file(root_ / "k" / "berry.json").at("Q_raw").get<double>(), kPi, 1e-3);
  ASSERT_EQ(run({"berry", "--preset", "hopf_link", "--out", dir("h")}), 0);
  EXPECT_NEAR(read_json_file(root_ / "h" / "berry.json").at("Q_raw").get<double>(), kTwoPi, 1e-3);
  ASSERT_EQ(run({"berry", "--preset", "unlink", "--out", dir("u")}), 0);
  EXPECT_EQ(read_json_file(root_ / "u" / "berry.json").at("parity"), 1);
  EXPECT_TRUE(fs::exists(root_ / "u" / "projections.csv"));
}

TEST_F(CliTest, WindingFromConfigModel) {
  Json model = {{"m", 1},
                {"gamma0", {{-0.21, 0.0}, {0.70, 0.0}}},
                {"gamma1", {{{0.0, -0.30}, {0.0, 0.0}}}},
                {"gamma2", {{{0.0, 0.08}, {0.0, 0.0}}}}};
  const auto cfg = write_config("model.json", {{"model", model}});
  ASSERT_EQ(run({"winding", "--config", cfg, "--out", dir("w")}), 0);
  EXPECT_EQ(read_json_file(root_ / "w" / "winding.json").at("nu"), 1);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({"bands", "--preset", "trefoil", "--out", dir("x")}), 1);
  EXPECT_EQ(run({"bands", "--out", dir("x")}), 1);
  EXPECT_EQ(run({"bands", "--no-such-flag"}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({"evolve", "--preset", "unlink", "--band", "3"}), 1);
  const auto bad = write_config("bad.json", {{"model", {{"gamma0", "oops"}}}});
  EXPECT_EQ(run({"bands", "--config", bad, "--out", dir("x")}), 1);
}

TEST_F(CliTest, NumericalErrorsExitTwo) {
  // h12 = 1 + e^{ik} closes the gap at k = pi.
  Json model = {{"gamma0", {{1.0, 0.0}, {1.0, 0.0}}}, {"gamma1", {{{1.0, 0.0}, {0.0, 0.0}}}}, {"gamma2", {{{0.0, 0.0}, {0.0, 0.0}}}}};
  const auto cfg = write_config("ep.json", {{"model", model}});
  EXPECT_EQ(run({"bands", "--config", cfg, "--grid", "64", "--out", dir("e")}), 2);
}

TEST_F(CliTest, ManifestWritten) {
  ASSERT_EQ(run({"winding", "--preset", "hopf_link", "--seed", "9", "--out", dir("m")}), 0);
  const Json m = read_json_file(root_ / "m" / "manifest.json");
  EXPECT_EQ(m.at("command"), "winding");
  EXPECT_EQ(m.at("seed"), 9);
  EXPECT_EQ(m.at("version"), kVersion);
  EXPECT_TRUE(m.contains("duration_s"));
  EXPECT_TRUE(m.contains("output"));
  EXPECT_TRUE(m.contains("config"));
}

TEST_F(CliTest, DeterministicOutputs) {
  const auto cfg = write_config("sim.json", {{"sim", {{"ensemble", 8}, {"records", 40}}}, {"intervals", 400}});
  for (const char* name : {"a", "b"}) {
    ASSERT_EQ(run({"tomo", "--preset", "hopf_link", "--seed", "4", "--out", dir(std::string("t") + name)}), 0);
    ASSERT_EQ(run({"evolve", "--preset", "hopf_link", "--seed", "4", "--out", dir(std::string("e") + name)}), 0);
    ASSERT_EQ(run({"simulate-nv", "--preset", "unknot", "--config", cfg, "--seed", "4", "--out",
                   dir(std::string("s") + name)}),
              0);
  }
  for (const char* file : {"counts.json", "reconstruction.json"})
    EXPECT_EQ(slurp(root_ / "ta" / file), slurp(root_ / "tb" / file)) << file;
  for (const char* file : {"trace.csv", "steady.json", "fit.json"})
    EXPECT_EQ(slurp(root_ / "ea" / file), slurp(root_ / "eb" / file)) << file;
  for (const char* file : {"sim.csv", "sim.json"})
    EXPECT_EQ(slurp(root_ / "sa" / file), slurp(root_ / "sb" / file)) << file;
}

TEST_F(CliTest, TomoReconstructsEigenstate) {
  ASSERT_EQ(run({"tomo", "--preset", "hopf_link", "--k", "0.6", "--shots", "100000", "--out", dir("t")}), 0);
  EXPECT_GE(read_json_file(root_ / "t" / "reconstruction.json").at("fidelity_vs_reference").get<double>(), 0.97);
}

TEST_F(CliTest, DilateWritesPulses) {
  ASSERT_EQ(run({"dilate", "--preset", "hopf_link", "--k", "1.65", "--out", dir("d")}), 0);
  const Json d = read_json_file(root_ / "d" / "dilation.json");
  EXPECT_GT(d.at("eta0").get<double>(), 0.0);
  EXPECT_GE(d.at("min_margin").get<double>(), 0.05);
  const std::string csv = slurp(root_ / "d" / "pulses.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t_us,Omega1_MHz,phi1_rad,omega1_radperus,Omega2_MHz,phi2_rad,omega2_radperus");
}

TEST_F(CliTest, PipelineNoiselessSmallGrid) {
  const auto cfg = write_config("p.json", {{"sim", {{"dephasing", "none"}}},
                                           {"pipeline", {{"noise", false}, {"intervals", 800}}}});
  ASSERT_EQ(run({"pipeline", "--preset", "unknot", "--config", cfg, "--grid", "8", "--out", dir("p")}), 0);
  const Json r = read_json_file(root_ / "p" / "report.json");
  EXPECT_EQ(r.at("points").size(), 8u);
}

}  // namespace
}  // namespace nhknot
