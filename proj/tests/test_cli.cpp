#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bindlab/bindlab.hpp"
#include "bindlab/json_io.hpp"

using namespace bindlab;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bindlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(BINDLAB_CLI) + " " + args + " 2>" + path("stderr.txt");
    return std::system(cmd.c_str());
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  std::vector<io::json> lines(const std::string& name) const {
    std::vector<io::json> out;
    std::ifstream in(path(name));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) out.push_back(io::json::parse(line));
    }
    return out;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenWritesPromptsDeterministically) {
  ASSERT_EQ(run("gen --task boxes --n 5 --count 3 --seed 4 --out " + path("a.jsonl")), 0);
  ASSERT_EQ(run("gen --task boxes --n 5 --count 3 --seed 4 --out " + path("b.jsonl")), 0);
  EXPECT_EQ(slurp("a.jsonl"), slurp("b.jsonl"));
  const auto prompts = lines("a.jsonl");
  ASSERT_EQ(prompts.size(), 3u);
  for (const auto& j : prompts) {
    const auto inst = io::prompt_from_json(j);
    EXPECT_EQ(inst.n(), 5);
    EXPECT_EQ(inst.answer, inst.matrix.at(inst.query.q_group, inst.query.t_entity));
  }
  ASSERT_EQ(run("gen --task boxes --n 5 --count 1 --pad-tokens 20 --out " + path("pad.jsonl")), 0);
  EXPECT_TRUE(lines("pad.jsonl").front().contains("gap_fillers"));
}

TEST_F(Cli, PairsCarryPredictionsAndIds) {
  ASSERT_EQ(run("pairs --kind target-rebind --task music --n 6 --count 4 --seed 1 --out " + path("p.jsonl")), 0);
  const auto pairs = lines("p.jsonl");
  ASSERT_EQ(pairs.size(), 4u);
  EXPECT_EQ(pairs[2]["id"], "music-2");
  for (const auto& j : pairs) {
    for (const char* key : {"none", "positional", "lexical", "reflexive"}) {
      EXPECT_TRUE(j["predicted"][key].is_string()) << key;
    }
    EXPECT_NO_THROW(io::pair_from_json(j));
  }
  ASSERT_EQ(run("pairs --kind dangling-lex --task boxes --n 4 --count 2 --out " + path("d.jsonl")), 0);
  EXPECT_TRUE(lines("d.jsonl").front()["predicted"]["lexical"].is_null());
  EXPECT_NE(run("pairs --kind target-rebind --task boxes --n 3 --count 1 --out " + path("x.jsonl")), 0);
  EXPECT_NE(slurp("stderr.txt").find("error:"), std::string::npos);
}

TEST_F(Cli, SynthFitEvalPipeline) {
  ASSERT_EQ(run("synth --n 6 --noise 500 --seed 2 --out " + path("r.jsonl")), 0);
  EXPECT_EQ(lines("r.jsonl").size(), 216u);
  ASSERT_EQ(run("fit --records " + path("r.jsonl") + " --epochs 300 --seed 3 --out " + path("m.json") +
                " --trace " + path("trace.csv")),
            0);
  ASSERT_EQ(run("fit --records " + path("r.jsonl") + " --variant uniform --epochs 10 --seed 3 --out " +
                path("u.json")),
            0);
  const auto params = io::params_from_json(io::json::parse(slurp("m.json")));
  EXPECT_EQ(params.params.n, 6);
  EXPECT_NEAR(params.params.w_pos, 5.0, 1.0);
  EXPECT_FALSE(slurp("trace.csv").empty());
  ASSERT_EQ(run("eval --records " + path("r.jsonl") + " --params " + path("m.json") + " " + path("u.json") +
                " --bootstrap 200 --seed 3 --out " + path("eval.csv")),
            0);
  std::istringstream csv(slurp("eval.csv"));
  std::string header, row_m, row_u;
  std::getline(csv, header);
  std::getline(csv, row_m);
  std::getline(csv, row_u);
  EXPECT_EQ(header, "variant,t_entity,jss,jss_ci,kl_tp,kl_tp_ci,kl_pt,kl_pt_ci");
  EXPECT_EQ(row_m.rfind("M,1,", 0), 0u);
  EXPECT_EQ(row_u.rfind("uniform,1,", 0), 0u);
  const double jss_m = std::stod(row_m.substr(4));
  const double jss_u = std::stod(row_u.substr(10));
  EXPECT_GT(jss_m, 0.95);
  EXPECT_GT(jss_m, jss_u);
}

TEST_F(Cli, LabelAndReport) {
  ASSERT_EQ(run("pairs --task boxes --n 8 --count 200 --seed 9 --out " + path("p.jsonl")), 0);
  ASSERT_EQ(run("synth --n 8 --out " + path("unused.jsonl")), 0);
  ASSERT_EQ(run("fit --records " + path("unused.jsonl") + " --epochs 5 --out " + path("m.json")), 0);
  ASSERT_EQ(run("label --pairs " + path("p.jsonl") + " --simulate " + path("m.json") + " --seed 1 --out " +
                path("l.jsonl")),
            0);
  const auto labeled = lines("l.jsonl");
  ASSERT_EQ(labeled.size(), 200u);
  for (const auto& j : labeled) EXPECT_NO_THROW(io::outcome_from_json(j));

  // Explicit observations, as a string or as a group index.
  {
    std::ofstream obs(path("obs.jsonl"));
    const auto first = io::pair_from_json(lines("p.jsonl")[0]);
    obs << io::json{{"id", "boxes-0"}, {"observed", *first.predicted.positional}}.dump() << "\n";
    obs << io::json{{"id", "boxes-1"}, {"observed", 1}}.dump() << "\n";
  }
  ASSERT_EQ(run("label --pairs " + path("p.jsonl") + " --observations " + path("obs.jsonl") + " --out " +
                path("o.jsonl")),
            0);
  const auto obs_labels = lines("o.jsonl");
  ASSERT_EQ(obs_labels.size(), 2u);
  EXPECT_EQ(obs_labels[0]["label"], "positional");

  ASSERT_EQ(run("report --records " + path("l.jsonl") + " --kind ucurve --axis i_p --out " + path("rep")), 0);
  const auto ucurve_csv = slurp("rep/ucurve.csv");
  EXPECT_EQ(ucurve_csv.rfind("i_p,", 0), 0u);
  ASSERT_EQ(run("report --records " + path("l.jsonl") + " --kind confusion --out " + path("rep")), 0);
  const auto cm = io::json::parse(slurp("rep/confusion.json"));
  EXPECT_TRUE(cm.contains("included"));
  EXPECT_TRUE(cm.contains("excluded"));
  ASSERT_EQ(run("report --records " + path("unused.jsonl") + " --kind profile --fix i_p=2 i_r=7 --out " +
                path("rep")),
            0);
  const auto prof = io::json::parse(slurp("rep/profile.json"));
  EXPECT_EQ(prof["partial"], false);
}

TEST_F(Cli, SweepN) {
  ASSERT_EQ(run("sweep-n --task boxes --n-min 4 --n-max 6 --count 30 --seed 2 --out " + path("sw")), 0);
  EXPECT_EQ(lines("sw/labeled.jsonl").size(), 90u);
  std::istringstream csv(slurp("sw/n_sweep.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) rows += !line.empty();
  EXPECT_EQ(rows, 4);  // header plus n = 4, 5, 6
}
