#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "gdl/dataset_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run_gdl(const std::string& args, const fs::path& dir) {
  const auto log = dir / "stdout.txt";
  const std::string cmd = std::string("\"") + GDL_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("gdl_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kLowpass = R"({"id": "lp", "labels": "IROCG", "edges": [[0,1],[1,2],[2,3],[3,4]]})";

}  // namespace

TEST(Cli, IngestCleanFileSucceeds) {
  const auto dir = scratch("ingest_ok");
  write(dir / "in.jsonl", std::string(kLowpass) + "\n");
  const auto r = run_gdl("--out " + dir.string() + " ingest --input " + (dir / "in.jsonl").string(), dir);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "dataset.jsonl"));
}

TEST(Cli, IngestRejectedGraphExitsTwo) {
  const auto dir = scratch("ingest_bad");
  write(dir / "in.jsonl",
        std::string(kLowpass) + "\n" + R"({"id": "loop", "labels": "IRG", "edges": [[0,1],[1,1],[1,2]]})" + "\n");
  const auto r = run_gdl("--out " + dir.string() + " ingest --input " + (dir / "in.jsonl").string(), dir);
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("loop"), std::string::npos) << r.out;
  EXPECT_EQ(gdl::parse_dataset(dir / "dataset.jsonl", gdl::DatasetFormat::Jsonl).dataset.size(), 1u);
}

TEST(Cli, BadFlagExitsTwo) {
  const auto dir = scratch("bad_flag");
  EXPECT_EQ(run_gdl("generate --no-such-flag 3", dir).code, 2);
  EXPECT_EQ(run_gdl("--out " + dir.string() + " generate --max-subcircuits 7", dir).code, 2);
}

TEST(Cli, SizingAnInductorExitsThree) {
  const auto dir = scratch("inductor");
  write(dir / "in.jsonl", R"({"id": "rl", "labels": "IROLG", "edges": [[0,1],[1,2],[2,3],[3,4]]})"
                          "\n");
  const auto r = run_gdl("--out " + dir.string() + " size --input " + (dir / "in.jsonl").string(), dir);
  EXPECT_EQ(r.code, 3) << r.out;
}

TEST(Cli, ConfigSchemaListsKeys) {
  const auto dir = scratch("schema");
  const auto r = run_gdl("config-schema", dir);
  EXPECT_EQ(r.code, 0);
  for (const char* key : {"seed", "known_frac", "epochs", "hidden", "starts", "limit"})
    EXPECT_NE(r.out.find(std::string(key) + " = "), std::string::npos) << key;
}

TEST(Cli, ConfigFileAndFlagOverride) {
  const auto dir = scratch("config");
  write(dir / "run.cfg", "max_subcircuits = 1  # smallest set\nlimit = 10\n");
  auto r = run_gdl("--config " + (dir / "run.cfg").string() + " --out " + dir.string() + " generate", dir);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(gdl::parse_dataset(dir / "dataset.jsonl", gdl::DatasetFormat::Jsonl).dataset.size(), 10u);
  r = run_gdl("--config " + (dir / "run.cfg").string() + " --out " + dir.string() + " generate --limit 0", dir);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(gdl::parse_dataset(dir / "dataset.jsonl", gdl::DatasetFormat::Jsonl).dataset.size(), 25u);
  write(dir / "bad.cfg", "epochs = 5\nbogus = 1\n");
  r = run_gdl("--config " + (dir / "bad.cfg").string() + " --out " + dir.string() + " generate", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("bad.cfg:2"), std::string::npos) << r.out;
}

TEST(Cli, TrainAndEvaluateRoundTrip) {
  const auto dir = scratch("train");
  ASSERT_EQ(run_gdl("--out " + dir.string() + " generate --max-subcircuits 1", dir).code, 0);
  ASSERT_EQ(run_gdl("--out " + (dir / "sized").string() + " size --input " + (dir / "dataset.jsonl").string() +
                    " --starts 1 --max-evals 100",
                dir)
                .code,
            0);
  const auto sized = (dir / "sized" / "dataset.jsonl").string();
  auto r = run_gdl("--out " + (dir / "run").string() + " train --input " + sized +
                   " --known-frac 0.8 --epochs 5 --hidden 4 --batch-size 4",
               dir);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "run" / "report.json"));
  fs::path ckpt;
  for (const auto& e : fs::recursive_directory_iterator(dir / "run"))
    if (e.path().filename().string().find("model") != std::string::npos) ckpt = e.path();
  ASSERT_FALSE(ckpt.empty());
  r = run_gdl("--out " + (dir / "eval").string() + " evaluate --input " + sized + " --model " + ckpt.string(), dir);
  EXPECT_EQ(r.code, 0) << r.out;
}
