#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(OLREG_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t got; (got = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string sample(const std::string& name) { return std::string(OLREG_SAMPLES) + "/" + name; }

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    out.push_back(cells);
  }
  return out;
}

TEST(Cli, RunFiniteAgainstIidHasNoViolations) {
  const auto r = cli("--seed 3 run --class " + sample("class4.json") + " --env iid --n 0,50 --reps 5");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto t = rows(r.out);
  ASSERT_EQ(t.size(), 11u);
  EXPECT_EQ(t[0][0], "n");
  EXPECT_EQ(t[0][6], "violation");
  for (std::size_t i = 1; i < t.size(); ++i) {
    EXPECT_EQ(t[i][6], "0");
    if (t[i][0] == "0") EXPECT_EQ(t[i][2], "0");
  }
  EXPECT_EQ(cli("--seed 3 run --class " + sample("class4.json") + " --env iid --n 0,50 --reps 5").out,
            r.out);
}

TEST(Cli, RunAgainstTheShatteredTreeFile) {
  const auto r = cli("run --class " + sample("signs2.json") + " --tree " +
                     sample("tree_depth2.json") + " --env shatter --beta 1.5 --n 2 --reps 3");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(rows(r.out).size(), 4u);
}

TEST(Cli, BoundRatiosFollowThePowerLaw) {
  const auto r = cli("bound --regime power:p=1 --n 100,1000,10000");
  ASSERT_EQ(r.code, 0);
  const auto t = rows(r.out);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0][6], "normalized");
  for (int i = 1; i < 3; ++i)
    EXPECT_NEAR(std::stod(t[i + 1][2]) / std::stod(t[i][2]), std::pow(10.0, -2.0 / 3.0), 1e-9);
}

TEST(Cli, BoundFiniteSizeOneIsZero) {
  const auto r = cli("bound --regime finite:size=1 --n 10");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(rows(r.out)[1][2], "0");
}

TEST(Cli, ComplexityReportsAllQuantities) {
  const auto r = cli("--seed 1 complexity --class " + sample("class4.json") + " --depth 3");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto t = rows(r.out);
  EXPECT_EQ(t[0], (std::vector<std::string>{"quantity", "value", "mode", "stderr"}));
  std::vector<std::string> names;
  for (std::size_t i = 1; i < t.size(); ++i) names.push_back(t[i][0]);
  for (const char* q : {"cover_l2", "cover_linf", "fat_shattering_dim", "offset_rademacher"})
    EXPECT_NE(std::find(names.begin(), names.end(), q), names.end()) << q;
}

TEST(Cli, AdmissibilityExitCodes) {
  EXPECT_EQ(cli("admissibility --relaxation vaw --histories 5 --n 5").code, 0);
  const auto bad = cli("admissibility --relaxation corrupted --histories 5 --n 5");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find(",0\n"), std::string::npos);
}

TEST(Cli, LowerBoundPasses) {
  const auto r = cli("lowerbound --depth 4 --episodes 200");
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("run --forecaster nope").code, 2);
  EXPECT_EQ(cli("bound --regime sobolev:s=2 --n 10").code, 2);
  EXPECT_EQ(cli("complexity --class /nonexistent.json").code, 2);
  EXPECT_EQ(cli("run --env iid --n 10").code, 2);
  EXPECT_EQ(cli("--bound-B -1 bound --n 10").code, 2);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, MalformedClassFileNamesTheLine) {
  const std::string path = testing::TempDir() + "olreg_bad_class.json";
  std::ofstream(path) << "{\n\"domain_size\": 1,\n\"functions\": {\n\"f\": [3]\n}}\n";
  const std::string cmd = std::string(OLREG_CLI) + " complexity --class " + path + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  ASSERT_NE(p, nullptr);
  std::string err;
  char buf[512];
  for (std::size_t got; (got = fread(buf, 1, sizeof buf, p)) > 0;) err.append(buf, got);
  const int status = pclose(p);
  EXPECT_EQ(WEXITSTATUS(status), 2);
  EXPECT_NE(err.find("line 4"), std::string::npos) << err;
  std::remove(path.c_str());
}

TEST(Cli, OutFlagWritesTheFile) {
  const std::string path = testing::TempDir() + "olreg_out.csv";
  const auto r = cli("--out " + path + " bound --regime power:p=4 --n 1000");
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), cli("bound --regime power:p=4 --n 1000").out);
  std::remove(path.c_str());
}

}  // namespace
