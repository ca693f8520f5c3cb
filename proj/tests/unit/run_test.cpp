// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dnnpart/error.hpp"
#include "dnnpart/report.hpp"
#include "dnnpart/run.hpp"

namespace dnnpart {
namespace {

namespace fs = std::filesystem;

const fs::path kToy = DNNPART_TOY_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t semi = line.find(';', start);
    out.push_back(line.substr(start, semi - start));
    if (semi == std::string::npos) return out;
    start = semi + 1;
  }
}

class RunTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dnnpart_run_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunConfig toy(const std::string& out_name = "out") const {
    RunConfig c;
    c.graph_path = kToy / "graph.json";
    c.platform_paths = {kToy / "eyr.json", kToy / "smb.json"};
    c.link_paths = {kToy / "gige.json"};
    c.accuracy_path = kToy / "accuracy.json";
    c.constraints_path = kToy / "constraints.json";
    c.seed = 7;
    c.output_dir = dir_ / out_name;
    return c;
  }

  int run_quiet(const RunConfig& c) {
    out_.str("");
    err_.str("");
    return run(c, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(RunTest, ExploreWritesAllOutputs) {
  const RunConfig c = toy();
  ASSERT_EQ(run_quiet(c), kExitOk) << err_.str();
  for (const char* name :
       {"evaluations.csv", "pareto.csv", "selected.json", "memory_profile.csv", "run_manifest.json"})
    EXPECT_TRUE(fs::exists(c.output_dir / name)) << name;
  const auto pareto = lines(slurp(c.output_dir / "pareto.csv"));
  EXPECT_GT(pareto.size(), 1u);
  EXPECT_EQ(pareto[0],
            "cuts;latency_s;energy_j;throughput_fps;link_bits_total;mem_EYR_bytes;mem_SMB_bytes;"
            "top1;feasible;violated");
  const auto evaluations = lines(slurp(c.output_dir / "evaluations.csv"));
  for (std::size_t i = 1; i < pareto.size(); ++i)
    EXPECT_NE(std::find(evaluations.begin(), evaluations.end(), pareto[i]), evaluations.end());

  const auto summary = nlohmann::json::parse(slurp(c.output_dir / "selected.json"));
  EXPECT_EQ(summary["front"].size(), pareto.size() - 1);
  EXPECT_TRUE(summary["selected"].is_object());
  EXPECT_EQ(summary["evaluations"].get<std::size_t>(), evaluations.size() - 1);
  const auto manifest = nlohmann::json::parse(slurp(c.output_dir / "run_manifest.json"));
  EXPECT_EQ(manifest["seed"], 7);
  EXPECT_EQ(manifest["ga"]["population"], 20);
  EXPECT_EQ(manifest["ga"]["generations"], 25);
}

TEST_F(RunTest, MemoryProfileHasOneRowPerCut) {
  const RunConfig c = toy();
  ASSERT_EQ(run_quiet(c), kExitOk) << err_.str();
  const auto rows = lines(slurp(c.output_dir / "memory_profile.csv"));
  ASSERT_EQ(rows.size(), 1u + 7u);
  EXPECT_EQ(rows[0], "cut;layer;mem_EYR_bytes;mem_SMB_bytes");
  EXPECT_EQ(rows[1], "0;<input>;0;125898");
  EXPECT_EQ(rows[7], "6;fc;251796;0");
}

TEST_F(RunTest, SameSeedGivesIdenticalFiles) {
  const RunConfig a = toy("a");
  RunConfig b = toy("b");
  b.threads = 3;
  ASSERT_EQ(run_quiet(a), kExitOk);
  ASSERT_EQ(run_quiet(b), kExitOk);
  for (const char* name : {"evaluations.csv", "pareto.csv", "selected.json", "memory_profile.csv"})
    EXPECT_EQ(slurp(a.output_dir / name), slurp(b.output_dir / name)) << name;
}

TEST_F(RunTest, MissingLinkFile) {
  RunConfig c = toy();
  c.link_paths = {dir_ / "nowhere" / "link.json"};
  EXPECT_EQ(run_quiet(c), kExitInputError);
  EXPECT_NE(err_.str().find("nowhere/link.json"), std::string::npos) << err_.str();
}

TEST_F(RunTest, WrongLinkCount) {
  RunConfig c = toy();
  c.link_paths.clear();
  EXPECT_EQ(run_quiet(c), kExitInputError);
}

TEST_F(RunTest, ZeroCapacityIsInfeasible) {
  RunConfig c = toy();
  c.platform_paths = {kToy / "tight.json", kToy / "tight.json"};
  c.accuracy_path.reset();
  c.constraints_path.reset();
  EXPECT_EQ(run_quiet(c), kExitInfeasible);
  EXPECT_NE(err_.str().find("mem_tight_0"), std::string::npos) << err_.str();
  EXPECT_NE(err_.str().find("mem_tight_1"), std::string::npos) << err_.str();
  const auto summary = nlohmann::json::parse(slurp(c.output_dir / "selected.json"));
  EXPECT_TRUE(summary["selected"].is_null());
  EXPECT_TRUE(summary["front"].empty());
}

TEST_F(RunTest, EvaluateOneMatchesExhaustiveRows) {
  RunConfig ex = toy();
  ex.mode = RunMode::exhaustive;
  ASSERT_EQ(run_quiet(ex), kExitOk) << err_.str();
  const auto rows = lines(slurp(ex.output_dir / "evaluations.csv"));
  ASSERT_EQ(rows.size(), 8u);
  for (std::size_t cut = 0; cut <= 6; ++cut) {
    RunConfig one = toy();
    one.mode = RunMode::evaluate_one;
    one.cuts = std::to_string(cut);
    ASSERT_EQ(run_quiet(one), kExitOk) << err_.str();
    const auto j = nlohmann::json::parse(out_.str());
    const auto row = fields(rows[1 + cut]);
    EXPECT_EQ(row[0], std::to_string(cut));
    EXPECT_EQ(j["latency_s"].get<double>(), std::stod(row[1]));
    EXPECT_EQ(j["energy_j"].get<double>(), std::stod(row[2]));
    EXPECT_EQ(j["throughput_fps"].get<double>(), std::stod(row[3]));
    EXPECT_EQ(j["link_bits_total"].get<std::uint64_t>(), std::stoull(row[4]));
    EXPECT_EQ(j["top1"].get<double>(), std::stod(row[7]));
    EXPECT_EQ(j["feasible"].get<bool>(), row[8] == "1");
  }
}

TEST_F(RunTest, EvaluateOneBoundarySchemes) {
  RunConfig c = toy();
  c.mode = RunMode::evaluate_one;
  c.cuts = "0";
  ASSERT_EQ(run_quiet(c), kExitOk);
  const auto on_b = nlohmann::json::parse(out_.str());
  EXPECT_TRUE(on_b["stages"][0]["layers"].empty());
  EXPECT_EQ(on_b["stages"][1]["layers"].size(), 6u);
  EXPECT_EQ(on_b["link_bits_total"], 0);
  c.cuts = "6";
  ASSERT_EQ(run_quiet(c), kExitOk);
  const auto on_a = nlohmann::json::parse(out_.str());
  EXPECT_EQ(on_a["stages"][0]["layers"].size(), 6u);
  c.cuts = "7";
  EXPECT_EQ(run_quiet(c), kExitInputError);
  c.cuts = "1,2";
  EXPECT_EQ(run_quiet(c), kExitInputError);
}

TEST_F(RunTest, UncostedLayerNamesPlatformFile) {
  fs::create_directories(dir_);
  std::ofstream(dir_ / "bare.json") << R"({"name":"bare","bits":8,"mem_capacity_bytes":10,"cost_table":{}})";
  RunConfig c = toy();
  c.platform_paths[1] = dir_ / "bare.json";
  EXPECT_EQ(run_quiet(c), kExitInputError);
  EXPECT_NE(err_.str().find("bare.json"), std::string::npos);
  EXPECT_NE(err_.str().find("uncosted layer conv1 on bare"), std::string::npos) << err_.str();
}

TEST_F(RunTest, MalformedGraphReportsPosition) {
  fs::create_directories(dir_);
  std::ofstream(dir_ / "bad.json") << "{\n  \"name\": \"x\",\n  \"layers\": [,]\n}";
  RunConfig c = toy();
  c.graph_path = dir_ / "bad.json";
  EXPECT_EQ(run_quiet(c), kExitInputError);
  EXPECT_NE(err_.str().find("bad.json"), std::string::npos) << err_.str();
  EXPECT_NE(err_.str().find("3:"), std::string::npos) << err_.str();
}

TEST(ParseWeightList, Values) {
  const auto w = parse_weight_list("latency:1,energy:0.5");
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0], (std::pair{Metric::latency, 1.0}));
  EXPECT_EQ(w[1], (std::pair{Metric::energy, 0.5}));
  EXPECT_THROW(parse_weight_list("latency"), Error);
  EXPECT_THROW(parse_weight_list("speed:1"), Error);
  EXPECT_THROW(parse_weight_list("latency:x"), Error);
}

TEST(ParseObjectiveSettings, Document) {
  const ObjectiveSettings s = parse_objective_settings(
      R"({"constraints":{"max_latency_s":0.01},"weights":{"throughput":2},"references":{"throughput":50}})");
  EXPECT_EQ(s.constraints.max_latency_s, 0.01);
  ASSERT_EQ(s.weights.entries.size(), 1u);
  EXPECT_EQ(s.weights.references.at(Metric::throughput), 50.0);
  EXPECT_THROW(parse_objective_settings(R"({"constraints":{"max_power":1}})"), Error);
  EXPECT_THROW(parse_objective_settings(R"({"references":"manual"})"), Error);
  EXPECT_THROW(parse_objective_settings(R"({"constraints":{"min_top1":-0.5}})"), Error);
}

TEST(FormatDouble, RoundTrips) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(62.5), "62.5");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace dnnpart
