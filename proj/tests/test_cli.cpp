#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lognlogs_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" + LOGNLOGS_CLI_PATH + "' " + args +
                            " > out.txt 2> err.txt";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("simulate --preset setting9 --out d.csv"), 2);
  EXPECT_EQ(run("simulate --out d.csv"), 2);
  EXPECT_EQ(run("fit --in d.csv"), 2);
}

TEST_F(Cli, VersionExitsZero) {
  EXPECT_EQ(run("--version"), 0);
  EXPECT_FALSE(read("out.txt").empty());
}

TEST_F(Cli, BadDataExitsThreeAndNamesTheLine) {
  EXPECT_EQ(run("fit --in missing.csv --b 1"), 3);
  write("bad.csv", "y,a,b\n3,1e19,0\n-4,1e19,0\n");
  EXPECT_EQ(run("fit --in bad.csv --b 1"), 3);
  EXPECT_NE(read("err.txt").find("line 3"), std::string::npos);
}

TEST_F(Cli, UnsupportedModelExitsFour) {
  write("tiny.csv", "y,a,b\n20,1e19,0\n50,1e19,0\n400,1e19,0\n");
  EXPECT_EQ(run("fit --in tiny.csv --b 3 --n-sim 50 --n-burn 10 --n-limit 3 --no-loglik"), 4);
}

TEST_F(Cli, SeedFromEnvironmentIsRecorded) {
  ASSERT_EQ(run("simulate --preset setting1 --out a.csv", "LOGNLOGS_SEED=17"), 0);
  ASSERT_EQ(run("simulate --preset setting1 --out b.csv --seed 17"), 0);
  EXPECT_EQ(read("a.csv"), read("b.csv"));
  const auto m = nlohmann::json::parse(read("a.csv.manifest.json"));
  EXPECT_EQ(m.at("seed").get<std::uint64_t>(), 17u);
}

TEST_F(Cli, ReplayReproducesOutput) {
  ASSERT_EQ(run("simulate --preset setting2 --out d.csv --seed 5"), 0);
  ASSERT_EQ(run("fit --in d.csv --b 2 --n-sim 200 --n-burn 40 --n-limit 5 --n-grid 5 --pp-n-sim 200 "
                "--pp-n-burn 50 --out fit.json --seed 5"),
            0);
  const std::string first = read("fit.json");
  fs::rename(dir_ / "fit.json", dir_ / "fit_first.json");
  ASSERT_EQ(run("replay fit.json.manifest.json"), 0);
  EXPECT_EQ(read("fit.json"), first);
}
