#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "support.hpp"
#include "sva/stimulus.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using sva::testing::scratch_dir;
using sva::testing::slurp;
using sva::testing::spit;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result sva_run(std::vector<std::string> args) {
  args.insert(args.begin(), "sva");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = sva::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<fs::path> files_matching(const fs::path& dir, const std::string& prefix, const std::string& suffix) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.starts_with(prefix) && name.ends_with(suffix)) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Cli, GenerateBalancedWithCapsule) {
  const auto dir = scratch_dir("cli-gen");
  const auto r = sva_run({"--out", dir.string(), "--seed", "42", "generate", "--template", "C", "--n", "10000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto files = files_matching(dir, "nonce_C_", ".jsonl");
  ASSERT_EQ(files.size(), 1u);
  const sva::Dataset d = sva::load_dataset(files[0]);
  EXPECT_EQ(d.items.size(), 10000u);
  EXPECT_EQ(d.count(sva::Number::Singular), 5000u);
  EXPECT_EQ(d.generation_seed, 42u);
  EXPECT_TRUE(fs::exists(sva::sidecar_path(files[0])));

  const json cfg = json::parse(slurp(dir / "resolved_config.generate.json"));
  EXPECT_EQ(cfg["subcommand"], "generate");
  EXPECT_EQ(cfg["global"]["seed"], 42);
  EXPECT_EQ(cfg["options"]["n"], 10000);
  const json meta = json::parse(slurp(dir / "run_meta.generate.json"));
  EXPECT_EQ(meta["artifacts"].size(), 1u);
}

TEST(Cli, EvaluateOracle) {
  const auto dir = scratch_dir("cli-eval");
  ASSERT_EQ(sva_run({"--out", dir.string(), "generate", "--template", "A", "--n", "100"}).code, 0);
  const auto data = files_matching(dir, "nonce_A_", ".jsonl").at(0);
  const auto r = sva_run({"--out", dir.string(), "--scorer", "oracle", "evaluate", "--data", data.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("A,NONCE,base,,0,100,100,0,1.000000"), std::string::npos) << r.out;
  EXPECT_EQ(files_matching(dir, "evaluate_", ".csv").size(), 1u);
  EXPECT_EQ(files_matching(dir, "evaluate_", ".outcomes.jsonl").size(), 1u);

  const auto js = sva_run({"--out", dir.string(), "--format", "json", "evaluate", "--data", data.string()});
  ASSERT_EQ(js.code, 0);
  EXPECT_EQ(json::parse(js.out)["rows"][0]["accuracy"], 1.0);

  const auto summary = files_matching(dir, "evaluate_", ".summary.json").at(0);
  const auto rep = sva_run({"--format", "csv", "--out", dir.string(), "report", "--input", summary.string()});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_NE(rep.out.find("1.000000"), std::string::npos);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto dir = scratch_dir("cli-config");
  spit(dir / "run.json", json{{"seed", 7}, {"out", (dir / "from-config").string()},
                              {"generate", {{"template", {"A", "E"}}, {"n", 8}}}}
                             .dump());
  const auto r = sva_run({"--config", (dir / "run.json").string(), "--seed", "9", "generate"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto out = dir / "from-config";
  const json cfg = json::parse(slurp(out / "resolved_config.generate.json"));
  EXPECT_EQ(cfg["global"]["seed"], 9);
  EXPECT_EQ(cfg["options"]["n"], 8);
  EXPECT_EQ(files_matching(out, "nonce_", ".jsonl").size(), 2u);
}

TEST(Cli, MatchAndExp2) {
  const auto dir = scratch_dir("cli-match");
  ASSERT_EQ(sva_run({"--out", dir.string(), "generate", "--template", "C", "--n", "40"}).code, 0);
  const sva::Dataset d = sva::load_dataset(files_matching(dir, "nonce_C_", ".jsonl").at(0));
  std::string text;
  for (const auto& s : d.items) text += s.sentence() + "\n";
  fs::create_directories(dir / "corpus");
  spit(dir / "corpus" / "part0", text);

  const auto m = sva_run({"--out", dir.string(), "match", "--corpus", (dir / "corpus").string(),
                          "--template", "C", "--n", "20", "--balance"});
  ASSERT_EQ(m.code, 0) << m.err;
  const auto wiki = files_matching(dir, "wiki_C_", ".jsonl");
  ASSERT_EQ(wiki.size(), 2u);  // data + provenance
  const auto data = wiki[0].string().ends_with(".provenance.jsonl") ? wiki[1] : wiki[0];
  const sva::Dataset w = sva::load_dataset(data);
  EXPECT_EQ(w.items.size(), 20u);
  EXPECT_EQ(w.count(sva::Number::Plural), 10u);
  EXPECT_EQ(w.source, sva::Source::WIKI);

  const auto e = sva_run({"--out", dir.string(), "--scorer", "linear-proximity", "exp2", "--data",
                          data.string(), "--repetitions", "10"});
  ASSERT_EQ(e.code, 0) << e.err;
  // Header, one baseline row and 6 positions x 10 repetitions.
  EXPECT_EQ(std::count(e.out.begin(), e.out.end(), '\n'), 1 + 1 + 60);
}

TEST(Cli, ImportMlAndExp1) {
  const auto dir = scratch_dir("cli-ml");
  spit(dir / "ml.tsv", "A\tthe boy laughs\tthe boy laugh\nA\tthe boys laugh\tthe boys laughs\n");
  ASSERT_EQ(sva_run({"--out", dir.string(), "import-ml", "--input", (dir / "ml.tsv").string()}).code, 0);
  ASSERT_EQ(sva_run({"--out", dir.string(), "generate", "--template", "A", "--n", "10"}).code, 0);
  const auto ml = files_matching(dir, "ml_A_", ".jsonl").at(0);
  const auto nonce = files_matching(dir, "nonce_A_", ".jsonl").at(0);
  const auto r = sva_run({"--out", dir.string(), "exp1", "--data", ml.string(), "--data", nonce.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("A,ML,exp1,,0,2,2,0,1.000000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("A,WIKI,exp1,,0,0,0,0,NA"), std::string::npos) << r.out;
}

TEST(Cli, ErrorsAreJson) {
  const auto dir = scratch_dir("cli-err");
  auto check = [](const Result& r, int code, const std::string& kind) {
    EXPECT_EQ(r.code, code) << r.err;
    const json j = json::parse(r.err);
    EXPECT_EQ(j["error"], kind) << r.err;
    EXPECT_TRUE(j["message"].is_string());
  };
  check(sva_run({}), 2, "usage");
  check(sva_run({"frobnicate"}), 2, "usage");
  check(sva_run({"generate", "--bogus"}), 2, "usage");
  check(sva_run({"--out", dir.string(), "generate", "--n", "3"}), 1, "generator");
  check(sva_run({"--out", dir.string(), "generate", "--template", "Z"}), 1, "template");
  check(sva_run({"--out", dir.string(), "evaluate", "--data", (dir / "missing.jsonl").string()}), 2, "usage");
  check(sva_run({"--out", dir.string(), "--lexicon", (dir / "none.json").string(), "generate"}), 1, "lexicon");
  spit(dir / "d.jsonl", "{not json\n");
  check(sva_run({"--out", dir.string(), "evaluate", "--data", (dir / "d.jsonl").string()}), 1, "data");
  ASSERT_EQ(sva_run({"--out", dir.string(), "generate", "--template", "A", "--n", "2"}).code, 0);
  const auto data = files_matching(dir, "nonce_A_", ".jsonl").at(0);
  check(sva_run({"--out", dir.string(), "--scorer", "stdio:exit 0", "evaluate", "--data", data.string()}), 1,
        "scorer_handshake");
  check(sva_run({"--out", dir.string(), "--scorer", "gpt", "evaluate", "--data", data.string()}), 2, "usage");
}

TEST(Cli, HelpAndVersion) {
  const auto h = sva_run({"--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("generate"), std::string::npos);
  const auto v = sva_run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("sva-generator/"), std::string::npos);
}

TEST(Cli, JobsDoNotChangeArtifacts) {
  const auto a = scratch_dir("cli-jobs-1");
  const auto b = scratch_dir("cli-jobs-8");
  for (const auto& [dir, jobs] : {std::pair{a, "1"}, std::pair{b, "8"}})
    ASSERT_EQ(sva_run({"--out", dir.string(), "--jobs", jobs, "--seed", "5", "generate", "--n", "200"}).code, 0);
  const auto fa = files_matching(a, "nonce_", ".jsonl");
  const auto fb = files_matching(b, "nonce_", ".jsonl");
  ASSERT_EQ(fa.size(), 11u);
  ASSERT_EQ(fb.size(), 11u);
  for (std::size_t i = 0; i < fa.size(); ++i) {
    EXPECT_EQ(fa[i].filename(), fb[i].filename());
    EXPECT_EQ(slurp(fa[i]), slurp(fb[i]));
  }
}
