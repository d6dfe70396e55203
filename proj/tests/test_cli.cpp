#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "fbg/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = fbg::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "fbg_cli_test";
    fs::remove_all(dir_);
    const auto r = cli({"synth", "--out", dir_.string(), "--n-train", "4",
                        "--n-test", "2", "--image-size", "48", "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string p(const std::string& rel) { return (dir_ / rel).string(); }

  static fs::path dir_;
};

fs::path CliTest::dir_;

}  // namespace

TEST_F(CliTest, PartitionDescribePool) {
  const auto mask = p("candidates/train_0000/c0.png");
  const auto image = p("images/train_0000.png");
  auto r = cli({"partition", "--mask", mask, "--out", p("part.png"), "--sp", "crown",
                "--layers", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(p("part.png")));
  r = cli({"describe", "--image", image, "--mask", mask, "--out", p("d.bin"),
           "--descriptors", "eMSIFT", "--stride", "8"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(p("d.bin")));
  r = cli({"pool", "--image", image, "--mask", mask, "--out", p("f.bin"),
           "--stride", "8", "--scales", "16"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(p("f.bin")));
}

TEST_F(CliTest, TrainPredictEvaluate) {
  const auto manifest = p("manifest.json");
  auto r = cli({"train", "--manifest", manifest, "--out", p("model.bin"),
                "--stride", "8", "--scales", "16", "--jobs", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(p("model.bin")));
  r = cli({"predict", "--manifest", manifest, "--model", p("model.bin"), "--out",
           p("pred"), "--split", "test", "--stride", "8", "--scales", "16"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(p("pred/test_0000.png")));
  r = cli({"evaluate", "--manifest", manifest, "--predictions", p("pred"),
           "--split", "test", "--out", p("aac.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(p("aac.json")));
  // A model used with a different feature configuration is a runtime error.
  r = cli({"predict", "--manifest", manifest, "--model", p("model.bin"), "--out",
           p("pred2"), "--split", "test", "--stride", "4", "--scales", "16"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("ConfigMismatch"), std::string::npos) << r.err;
}

TEST_F(CliTest, RunPrintsTable) {
  const auto r = cli({"run", "--manifest", p("manifest.json"), "--out", p("run.json"),
                      "--regions", "F", "--stride", "8", "--scales", "16", "--jobs",
                      "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mean"), std::string::npos);
  EXPECT_TRUE(fs::exists(p("run.json")));
}

TEST_F(CliTest, Visualize) {
  auto r = cli({"visualize", "--mask", p("candidates/train_0001/c0.png"), "--image",
                p("images/train_0001.png"), "--out", p("vis.png")});
  EXPECT_EQ(r.code, 0) << r.err;
  r = cli({"visualize", "--labels", p("labels/train_0001.png"), "--out",
           p("vis2.png")});
  EXPECT_EQ(r.code, 0) << r.err;
  r = cli({"visualize", "--labels", p("labels/train_0001.png"), "--mask",
           p("candidates/train_0001/c0.png"), "--out", p("vis3.png")});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"partition", "--bogus"}).code, 2);
  const auto r = cli({"partition", "--mask", "m.png", "--out", "o.png", "--layers", "3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--layers"), std::string::npos);
  EXPECT_EQ(cli({"run", "--manifest", "x.json", "--out", "y.json", "--border-side",
                 "sideways"}).code,
            2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, MissingInputIsRuntimeError) {
  const auto r = cli({"partition", "--mask", "/nonexistent/m.png", "--out",
                      "/tmp/fbg_never.png"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/nonexistent/m.png"), std::string::npos);
}
