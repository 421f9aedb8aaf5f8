#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "test_support.hpp"

using namespace gapforge;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("gapforge_cli_" + std::to_string(::getpid()) + "_" +
                                         std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& text) const {
    const auto p = (path_ / name).string();
    std::ofstream(p) << text;
    return p;
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

const char* kPlan = R"({"train_fractions":[0.5],"trials":1,"base_seed":3,
  "imputers":[{"strategy":"mean"}],"learners":[{"kind":"linear"}],
  "missingness":{"mechanism":"mcar","target_columns":["x0"],"rate":0.2}})";
const char* kSynth = R"({"n_rows":60,"n_numeric_features":3,"seed":1})";

}  // namespace

TEST_CASE("profile") {
  const auto r = invoke({"profile", test::data_path("fig1_fragment.csv")});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("LotFrontage", 0) == 0);
  CHECK(r.out.find("LotFrontage  5 missing") != std::string::npos);
  CHECK(r.out.find("11 missing cells in 8 rows x 5 columns") != std::string::npos);

  TempDir dir;
  const auto full = invoke({"profile", dir.file("full.csv", "a,b\n1,2\n3,4\n")});
  CHECK(full.code == 0);
  CHECK(full.out.find("0 missing cells") != std::string::npos);

  const auto json = invoke({"profile", "--format", "json", test::data_path("fig1_fragment.csv")});
  CHECK(json.code == 0);
  CHECK(json.out.find("\"LotFrontage\"") != std::string::npos);

  const auto missing = invoke({"profile", dir.path("nope.csv")});
  CHECK(missing.code == 2);
  CHECK(missing.out.empty());

  const auto ragged = invoke({"profile", dir.file("bad.csv", "a,b\n1,2\n3\n")});
  CHECK(ragged.code == 2);
  CHECK(ragged.err.find("row") != std::string::npos);
}

TEST_CASE("inject") {
  TempDir dir;
  std::string csv = "v\n";
  for (int i = 0; i < 500; ++i) csv += std::to_string(i) + "\n";
  const auto input = dir.file("in.csv", csv);
  const auto zero = dir.file("zero.json", R"({"mechanism":"mcar","target_columns":["v"],"rate":0})");
  const auto r0 = invoke({"inject", input, zero, "-o", dir.path("out0.csv")});
  REQUIRE(r0.code == 0);
  CHECK(slurp(dir.path("out0.csv")) == csv);

  const auto spec = dir.file("spec.json", R"({"mechanism":"mcar","target_columns":["v"],"rate":0.2})");
  CHECK(invoke({"inject", input, spec, "--seed", "4", "-o", dir.path("a.csv")}).code == 0);
  const auto again = invoke({"inject", input, spec, "--seed", "4", "-o", dir.path("b.csv")});
  CHECK(slurp(dir.path("a.csv")) == slurp(dir.path("b.csv")));
  CHECK(again.out.find("masked") != std::string::npos);
  invoke({"inject", input, spec, "--seed", "5", "-o", dir.path("c.csv")});
  CHECK(slurp(dir.path("a.csv")) != slurp(dir.path("c.csv")));

  // the environment seed is a fallback only
  ::setenv("GAPFORGE_SEED", "4", 1);
  invoke({"inject", input, spec, "-o", dir.path("env.csv")});
  invoke({"inject", input, spec, "--seed", "5", "-o", dir.path("flag.csv")});
  ::unsetenv("GAPFORGE_SEED");
  CHECK(slurp(dir.path("env.csv")) == slurp(dir.path("a.csv")));
  CHECK(slurp(dir.path("flag.csv")) == slurp(dir.path("c.csv")));

  const auto bad = dir.file("bad.json", R"({"mechanism":"mcar","target_columns":["v"],"rate":2})");
  const auto rb = invoke({"inject", input, bad});
  CHECK(rb.code == 2);
  CHECK(rb.err.find("rate") != std::string::npos);
}

TEST_CASE("impute") {
  TempDir dir;
  const auto input = dir.file("in.csv", "a,b\n1,x\nNaN,y\n3,NaN\n");
  const auto mean = dir.file("mean.json", R"({"strategy":"mean"})");
  const auto r = invoke({"impute", input, mean});
  REQUIRE(r.code == 0);
  CHECK(r.out == "a,b\n1,x\n2,y\n3,NaN\n");

  const auto zero = dir.file("zero.json", R"({"strategy":"zero"})");
  CHECK(invoke({"impute", input, zero}).out == "a,b\n1,x\n0,y\n3,NaN\n");

  const auto train = dir.file("train.csv", "a,b\n10,x\n20,y\n");
  CHECK(invoke({"impute", input, mean, "--fit-on", train}).out == "a,b\n1,x\n15,y\n3,NaN\n");

  const auto empty = dir.file("empty.csv", "a\nNaN\nNaN\n");
  CHECK(invoke({"impute", empty, mean}).code == 2);
}

TEST_CASE("bench") {
  TempDir dir;
  const auto plan = dir.file("plan.json", kPlan);
  const auto synth = dir.file("synth.json", kSynth);

  const auto csv = invoke({"bench", plan, "--synth", synth, "--format", "csv"});
  REQUIRE(csv.code == 0);
  int lines = 0;
  for (char c : csv.out) lines += c == '\n';
  CHECK(lines == 2);

  const auto a = invoke({"bench", plan, "--synth", synth, "--seed", "9", "--format", "json"});
  const auto b = invoke({"bench", plan, "--synth", synth, "--seed", "9", "--format", "json"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("\"base_seed\": 9") != std::string::npos);

  CHECK(invoke({"bench", plan, "--synth", synth, "-o", dir.path("r.md")}).code == 0);
  CHECK(slurp(dir.path("r.md")).find("| Training data size |") != std::string::npos);

  // a CSV input instead of a synthetic spec
  const auto data = dir.file("data.csv", "x0,x1,target\n1,2,3\n2,1,4\n3,3,6\n4,0,4\n5,2,7\n6,1,7\n7,5,12\n8,2,10\n");
  CHECK(invoke({"bench", data, plan, "--format", "csv"}).code == 0);

  const auto failing = dir.file("fail.json", R"({"train_fractions":[0.5],"trials":1,
    "imputers":[{"strategy":"mean","target_columns":["x0"]}],"learners":[{"kind":"linear"}],
    "missingness":{"mechanism":"mcar","target_columns":["x0"],"rate":1}})");
  CHECK(invoke({"bench", failing, "--synth", synth}).code == 3);

  const auto mismatch = dir.file("mismatch.json", R"({"imputers":[{"strategy":"mean"}],
    "learners":[{"kind":"linear"}],"metric":"accuracy"})");
  CHECK(invoke({"bench", mismatch, "--synth", synth}).code == 2);
}

TEST_CASE("usage errors") {
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"profile"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}
