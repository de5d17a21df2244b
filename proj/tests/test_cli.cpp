#include <gtest/gtest.h>

#include <sstream>

#include "gboc/cli.hpp"
#include "gboc/model.hpp"
#include "test_util.hpp"

using gboc::testing::read_file;
using gboc::testing::TempDir;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = gboc::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> small_train(const TempDir& dir, const std::string& model) {
  return {"train", "--train-csv", (dir.path() / "s/train.csv").string(), "--model", dir.file(model).string(),
          "--epochs", "2", "--layers", "1", "--hidden", "6", "--decoder-width", "6", "--window", "4"};
}

void synth(const TempDir& dir, const std::string& kind = "clean") {
  ASSERT_EQ(run({"synth", "--kind", kind, "--length", "400", "--seed", "3", "--out", dir.file("s").string()}).code, 0);
}

}  // namespace

TEST(Cli, UnknownFlagFailsWithUsage) {
  const auto r = run({"train", "--bogus"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_NE(run({}).code, 0);
}

TEST(Cli, SynthWritesLabelledTest) {
  TempDir dir;
  synth(dir, "drift_noise");
  const auto test = read_file(dir.file("s/test.csv"));
  EXPECT_EQ(test.substr(0, test.find('\n')), "v0,label");
  EXPECT_EQ(read_file(dir.file("s/train.csv")).substr(0, 3), "v0\n");
}

TEST(Cli, PipelineRunsEndToEnd) {
  TempDir dir;
  synth(dir);
  auto args = small_train(dir, "m.bin");
  args.insert(args.end(), {"--out", dir.file("curve.csv").string()});
  const auto t = run(args);
  ASSERT_EQ(t.code, 0) << t.err;
  const auto curve = read_file(dir.file("curve.csv"));
  EXPECT_EQ(curve.substr(0, curve.find('\n')), "epoch,l_rec,l_gb,l,balls_before,balls_after");
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 3);

  const auto d = run({"detect", "--model", dir.file("m.bin").string(), "--test-csv", dir.file("s/test.csv").string(),
                      "--label-col", "label", "--out", dir.file("r.csv").string()});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(read_file(dir.file("r.csv")).substr(0, 25), "t,point_score,flag,label\n");

  const auto e = run({"eval", "--report", dir.file("r.csv").string(), "--model", dir.file("m.bin").string(), "--out",
                      dir.file("deltas.csv").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(e.out.substr(0, 13), "metric,value\n");
  EXPECT_NE(e.out.find("VUS-PR,"), std::string::npos);
  EXPECT_NE(e.out.find("VUS-ROC,"), std::string::npos);
  EXPECT_NE(e.out.find("Affiliation-F1,"), std::string::npos);
  EXPECT_EQ(std::count(e.out.begin(), e.out.end(), '\n'), 4);

  const auto b = run({"dump-balls", "--model", dir.file("m.bin").string()});
  ASSERT_EQ(b.code, 0);
  const auto model = gboc::load_model(dir.file("m.bin"));
  EXPECT_EQ(b.out.substr(0, 6), "c0,c1,");
  EXPECT_NE(b.out.find(",radius,member_count\n"), std::string::npos);
  EXPECT_EQ(static_cast<std::size_t>(std::count(b.out.begin(), b.out.end(), '\n')), model.centers.rows + 1);
}

TEST(Cli, ScoresOnlyAndValidationThreshold) {
  TempDir dir;
  synth(dir);
  ASSERT_EQ(run(small_train(dir, "m.bin")).code, 0);
  const auto d = run({"detect", "--model", dir.file("m.bin").string(), "--test-csv", dir.file("s/test.csv").string(),
                      "--label-col", "label", "--out", dir.file("r.csv").string(), "--scores-only",
                      "--threshold-fit", "validation", "--val-csv", dir.file("s/train.csv").string()});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(read_file(dir.file("r.csv")).substr(0, 14), "t,point_score\n");
  // Scores without flags cannot be evaluated.
  const auto e = run({"eval", "--report", dir.file("r.csv").string(), "--test-csv", dir.file("s/test.csv").string(),
                      "--label-col", "label"});
  EXPECT_EQ(e.code, 2);
  EXPECT_NE(e.err.find("flag"), std::string::npos);

  const auto missing = run({"detect", "--model", dir.file("m.bin").string(), "--test-csv",
                            dir.file("s/test.csv").string(), "--out", dir.file("x.csv").string(), "--threshold-fit",
                            "validation"});
  EXPECT_NE(missing.code, 0);
}

TEST(Cli, ModuleErrorsReportedWithNonzeroExit) {
  TempDir dir;
  const auto r = run({"detect", "--model", dir.file("none.bin").string(), "--test-csv", "x.csv", "--out",
                      dir.file("r.csv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.substr(0, 7), "error: ");
  synth(dir);
  auto args = small_train(dir, "m.bin");
  args.insert(args.end(), {"--lambda", "2"});
  EXPECT_EQ(run(args).code, 2);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  TempDir dir;
  synth(dir);
  const auto cfg = dir.write("train.ini", "epochs=1\nhidden=3\nlayers=2\n");
  auto args = small_train(dir, "m.bin");
  args.erase(args.begin() + 5, args.begin() + 9);  // drop --epochs and --layers
  args.insert(args.end(), {"--config", cfg.string(), "--hidden", "5"});
  ASSERT_EQ(run(args).code, 0);
  const auto m = gboc::load_model(dir.file("m.bin"));
  EXPECT_EQ(m.config.epochs, 1u);
  EXPECT_EQ(m.config.layers, 2u);
  EXPECT_EQ(m.config.hidden, 5u);
}

TEST(Cli, AblationFlagsStoredInModel) {
  TempDir dir;
  synth(dir);
  auto args = small_train(dir, "m.bin");
  args.insert(args.end(), {"--lambda", "1", "--gbc-off"});
  ASSERT_EQ(run(args).code, 0);
  const auto m = gboc::load_model(dir.file("m.bin"));
  EXPECT_TRUE(m.config.gbc_off);
  EXPECT_EQ(m.config.lambda, 1.0);
}

TEST(Cli, KernelChoiceValidated) {
  EXPECT_NE(run({"--kernels", "sse9", "dump-balls", "--model", "x"}).code, 0);
}
