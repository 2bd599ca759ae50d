#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using netinf::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Splits a header command line, honoring single quotes.
std::vector<std::string> shell_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false, any = false;
  for (char c : line) {
    if (c == '\'') {
      quoted = !quoted;
      any = true;
    } else if (c == ' ' && !quoted) {
      if (any) out.push_back(cur);
      cur.clear();
      any = false;
    } else {
      cur += c;
      any = true;
    }
  }
  if (any) out.push_back(cur);
  return out;
}

// The resolved command stored in the first header line, minus "netinf".
std::vector<std::string> header_command(const fs::path& file) {
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# netinf ", 0), 0u) << line;
  auto args = shell_split(line.substr(2));
  args.erase(args.begin());
  return args;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("netinf_cli_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, GenerateChainAndStar) {
  auto r = call({"generate", "--net", "chain:4", "--rates", "1,1", "--seed", "7", "-o", path("g.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path("g.txt"));
  auto net = netinf::read_graph(in);
  EXPECT_EQ(net.num_edges(), 3u);
  for (const auto& e : net.edges()) EXPECT_EQ(e.rate, 1.0);

  r = call({"generate", "--net", "star:3", "--rates", "0.5,1.5", "--seed", "1", "-o", path("s.txt")});
  ASSERT_EQ(r.code, 0);
  std::ifstream sin(path("s.txt"));
  auto star = netinf::read_graph(sin);
  EXPECT_EQ(star.num_edges(), 3u);
  for (const auto& e : star.edges()) {
    EXPECT_GE(e.rate, 0.5);
    EXPECT_LE(e.rate, 1.5);
  }
  EXPECT_NE(r.out.find("edges=3"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(call({"generate", "--net", "bogus"}).code, 2);
  EXPECT_EQ(call({"generate"}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  ASSERT_EQ(call({"generate", "--net", "chain:3", "-o", path("g.txt")}).code, 0);
  EXPECT_EQ(call({"simulate", "--graph", path("g.txt"), "--model", "gauss"}).code, 2);
  EXPECT_EQ(call({"infer", "--cascades", path("g.txt"), "--lambda", "1", "--lambda-const", "2"}).code, 2);
  auto help = call({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("generate"), std::string::npos);
}

TEST_F(Cli, RuntimeErrors) {
  EXPECT_EQ(call({"simulate", "--graph", path("missing.txt")}).code, 1);
  std::ofstream(path("bad.txt")) << "N 2\n0,7,1\n";
  EXPECT_EQ(call({"simulate", "--graph", path("bad.txt")}).code, 1);
}

TEST_F(Cli, SimulateIsReproducible) {
  ASSERT_EQ(call({"generate", "--net", "chain:4", "--seed", "2", "-o", path("g.txt")}).code, 0);
  for (const char* name : {"a.txt", "b.txt"})
    ASSERT_EQ(call({"simulate", "--graph", path("g.txt"), "--n", "100", "--T", "5", "--model", "exp", "--seed", "3",
                    "-o", path(name)})
                  .code,
              0);
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
  ASSERT_EQ(call({"simulate", "--graph", path("g.txt"), "--n", "100", "--T", "5", "--seed", "3", "--threads", "3",
                  "-o", path("c.txt")})
                .code,
            0);
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("c.txt")));
}

TEST_F(Cli, SimulateDegenerateWindows) {
  ASSERT_EQ(call({"generate", "--net", "chain:5", "-o", path("g.txt")}).code, 0);
  for (auto args : {std::vector<std::string>{"--T", "1e-9"}, std::vector<std::string>{"--model", "pow:1", "--T", "0.5"}}) {
    std::vector<std::string> cmd{"simulate", "--graph", path("g.txt"), "--n", "200", "-o", path("c.txt")};
    cmd.insert(cmd.end(), args.begin(), args.end());
    ASSERT_EQ(call(cmd).code, 0);
    std::ifstream in(path("c.txt"));
    auto set = netinf::read_cascades(in, 5);
    for (const auto& c : set.cascades) EXPECT_EQ(c.infected_count(), 1u);
  }
}

TEST_F(Cli, InferSingleEdge) {
  std::ofstream(path("g.txt")) << "N 2\n0,1,1\n";
  ASSERT_EQ(call({"simulate", "--graph", path("g.txt"), "--n", "5000", "--T", "10", "--seed", "8", "-o",
                  path("c.txt")})
                .code,
            0);
  auto r = call({"infer", "--cascades", path("c.txt"), "--lambda-const", "0.5", "--truth", path("g.txt"), "-o",
                 path("inf.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("f1=1.0"), std::string::npos) << r.out;
  const std::string text = slurp(path("inf.txt"));
  EXPECT_NE(text.find("# lambda="), std::string::npos);
  EXPECT_NE(text.find(" iters="), std::string::npos);
  EXPECT_NE(text.find(" model=exp"), std::string::npos);

  ASSERT_EQ(call({"infer", "--cascades", path("c.txt"), "--lambda", "1e9", "-o", path("zero.txt")}).code, 0);
  std::ifstream zin(path("zero.txt"));
  EXPECT_EQ(netinf::read_graph(zin).num_edges(), 0u);

  ASSERT_EQ(call({"infer", "--cascades", path("c.txt"), "--method", "first-edge", "-o", path("fe.txt")}).code, 0);
  EXPECT_NE(slurp(path("fe.txt")).find("rates=none"), std::string::npos);
  std::ifstream fin(path("fe.txt"));
  EXPECT_EQ(netinf::read_graph(fin).edge_set(), (netinf::EdgeSet{{0, 1}}));
}

TEST_F(Cli, DiagnoseStar) {
  ASSERT_EQ(call({"generate", "--net", "star:3", "--rates", "1,1", "-o", path("star.txt")}).code, 0);
  auto r = call({"diagnose", "--net", path("star.txt"), "--target", "1", "--n", "10000", "--T", "1000", "--sources",
                 "nodes:0", "-o", path("d.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path("d.csv"));
  std::string line;
  std::getline(in, line);  // command
  std::getline(in, line);
  EXPECT_EQ(line, "target,d,p,lambda_min,lambda_max,incoherence_norm,epsilon_slack,hazard_rank,n");
  std::getline(in, line);
  auto fields = netinf::cli::split(line, ',');
  ASSERT_EQ(fields.size(), 9u);
  EXPECT_EQ(fields[0], "1");
  EXPECT_NEAR(std::stod(fields[5]), 0.5, 0.05);
  EXPECT_EQ(fields[8], "10000");
}

TEST_F(Cli, HeaderCommandReproducesEveryOutput) {
  std::ofstream(path("scaling.cfg")) << "# small grid\nnets = chain:4;chain:6\nbetas = 1,2\ntrials = 3\nseed = 5\n";
  const std::vector<std::vector<std::string>> runs{
      {"generate", "--net", "kronecker:3", "--seed", "4", "-o", path("g.txt")},
      {"simulate", "--graph", path("g.txt"), "--n", "200", "--T", "5", "--seed", "9", "-o", path("c.txt")},
      {"infer", "--cascades", path("c.txt"), "--lambda-const", "1", "--truth", path("g.txt"), "-o", path("i.txt")},
      {"diagnose", "--net", path("g.txt"), "--n", "500", "--seed", "2", "-o", path("d.csv")},
      {"experiment", "scaling", "--config", path("scaling.cfg"), "--trials", "2", "-o", path("s.csv")},
      {"experiment", "comparison", "--net", "chain:4", "--ns", "20,40", "--trials", "2", "-o", path("m.csv")},
  };
  for (const auto& args : runs) {
    auto r = call(args);
    ASSERT_EQ(r.code, 0) << args[0] << ": " << r.err;
    const std::string file = args.back();
    auto again = header_command(file);
    again.push_back("-o");
    again.push_back(file + ".again");
    auto r2 = call(again);
    ASSERT_EQ(r2.code, 0) << r2.err;
    EXPECT_EQ(slurp(file), slurp(file + ".again")) << args[0];
  }
  // Explicit flags override the config file.
  const std::string csv = slurp(path("s.csv"));
  EXPECT_NE(csv.find("--trials 2"), std::string::npos);
  EXPECT_NE(csv.find("scaling:p=6:l1,1,2,"), std::string::npos);
  EXPECT_EQ(csv.find(",2,5,"), std::string::npos);  // no trial index 2
}

TEST_F(Cli, ComparisonEmitsThreeCurves) {
  auto r = call({"experiment", "comparison", "--net", "chain:5", "--methods", "l1,l0,first-edge", "--ns", "30,60",
                 "--trials", "2", "-o", path("m.csv"), "--svg", path("m.svg")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("m.csv"));
  for (const char* name : {"comparison:l1", "comparison:l0", "comparison:first-edge"})
    EXPECT_NE(csv.find(name), std::string::npos);
  EXPECT_NE(slurp(path("m.svg")).find("polyline"), std::string::npos);
  EXPECT_EQ(call({"experiment", "comparison", "--methods", "lasso"}).code, 2);
}

// The installed executable honors the same exit-code contract.
TEST_F(Cli, ExecutableExitCodes) {
  const std::string exe = NETINF_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int raw = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  EXPECT_EQ(status("generate --net chain:3 -o " + path("g.txt")), 0);
  EXPECT_EQ(status("generate --net bogus"), 2);
  EXPECT_EQ(status("simulate --graph " + path("nope.txt")), 1);
}
