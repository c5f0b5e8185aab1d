#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "apml/cli.hpp"
#include "support.hpp"

using namespace apml;
using apml::testing::random_cloud;
using apml::testing::read_text;
using apml::testing::TempDir;
using apml::testing::write_text;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "apml");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string &line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string f;
  while (std::getline(in, f, ','))
    out.push_back(f);
  return out;
}

struct Clouds {
  TempDir dir;
  std::string a = dir.file("a.xyz");
  std::string b = dir.file("b.xyz");

  Clouds() {
    write_text(a, "0 0 0\n");
    write_text(b, "3 4 0\n");
  }
};

} // namespace

TEST_SUITE("cli") {

TEST_CASE("apml loss on the 3-4-5 pair") {
  Clouds c;
  const auto r = cli({"loss", "--kind", "apml", c.a, c.b});
  REQUIRE(r.code == kExitOk);
  CHECK(std::stod(r.out) == doctest::Approx(5.0).epsilon(1e-7));
  const auto f32 = cli({"loss", "--precision", "f32", c.a, c.b});
  REQUIRE(f32.code == kExitOk);
  CHECK(std::stod(f32.out) == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("chamfer losses") {
  Clouds c;
  CHECK(cli({"loss", "--kind", "cd-l1", c.a, c.b}).out == "10\n");
  CHECK(cli({"loss", "--kind", "cd-l2", c.a, c.b}).out == "50\n");
}

TEST_CASE("gradient and diagnostics output") {
  Clouds c;
  const auto r = cli({"loss", "--grad", "--diagnostics", "--grad-mode", "full",
                      c.a, c.b});
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 3);
  const auto diag = nlohmann::json::parse(ls[1]);
  CHECK(diag.contains("loss"));
  CHECK(diag["row_overrides"] == 0);
  const auto grad = nlohmann::json::parse(ls[2])["grad"];
  CHECK(grad[0][0].get<double>() == doctest::Approx(-0.6).epsilon(1e-7));
  CHECK(grad[0][1].get<double>() == doctest::Approx(-0.8).epsilon(1e-7));
}

TEST_CASE("saved transport is row-stochastic") {
  TempDir dir;
  std::mt19937_64 rng(1);
  const auto pa = dir.file("a.bin"), pb = dir.file("b.bin");
  save_pointcloud(random_cloud(12, 3, rng), pa);
  save_pointcloud(random_cloud(12, 3, rng), pb);
  const auto plan_path = dir.file("plan.csv");
  REQUIRE(cli({"loss", "--save-transport", plan_path, pa, pb}).code == kExitOk);
  const auto plan = load_matrix_csv(plan_path);
  CHECK(plan.rows() == 12);
  CHECK((plan.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-6);

  const auto an = cli({"analyze", "--transport", plan_path});
  REQUIRE(an.code == kExitOk);
  CHECK(fields(lines(an.out)[1])[0] == "saved");
}

TEST_CASE("metrics of identical inputs") {
  Clouds c;
  const auto r = cli({"metrics", c.a, c.a});
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 2);
  CHECK(ls[0] == "cd_l1,cd_l2,emd,emd_x100,f1,precision,recall,tau");
  const auto v = fields(ls[1]);
  CHECK(v[0] == "0");
  CHECK(v[1] == "0");
  CHECK(v[2] == "0");
  CHECK(std::stod(v[4]) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(v[7] == "0.01");
}

TEST_CASE("metrics emd normalization") {
  TempDir dir;
  const auto a = dir.file("a.xyz"), b = dir.file("b.xyz");
  write_text(a, "0 0 0\n1 0 0\n");
  write_text(b, "0 1 0\n1 1 0\n");
  CHECK(fields(lines(cli({"metrics", a, b}).out)[1])[2] == "1");
  CHECK(fields(lines(cli({"metrics", "--emd-norm", "sum", a, b}).out)[1])[2] ==
        "2");
}

TEST_CASE("emd oracle") {
  TempDir dir;
  std::mt19937_64 rng(2);
  const auto a = dir.file("a.xyz"), b = dir.file("b.xyz");
  save_pointcloud(random_cloud(6, 3, rng), a);
  save_pointcloud(random_cloud(6, 3, rng), b);
  const auto r = cli({"emd-oracle", a, b});
  REQUIRE(r.code == kExitOk);
  const auto v = fields(lines(r.out)[1]);
  CHECK(std::stod(v[2]) <= 1e-9);

  save_pointcloud(random_cloud(9, 3, rng), a);
  save_pointcloud(random_cloud(9, 3, rng), b);
  CHECK(cli({"emd-oracle", a, b}).code == kExitComputation);
}

TEST_CASE("fit writes a trace") {
  TempDir dir;
  const auto trace = dir.file("trace.csv");
  const auto final_cloud = dir.file("final.xyz");
  const auto r = cli({"fit", "--loss", "cd-l1", "--shape", "sphere", "--n", "32",
                      "--steps", "10", "--seed", "7", "--out", trace,
                      "--save-final", final_cloud});
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(read_text(trace));
  REQUIRE(ls.size() == 12);
  CHECK(ls[0] == kTraceHeader);
  CHECK(std::stod(fields(ls.back())[1]) < std::stod(fields(ls[1])[1]));
  CHECK(load_pointcloud(final_cloud).size() == 32);

  const auto apml_run = cli({"fit", "--n", "16", "--steps", "3"});
  REQUIRE(apml_run.code == kExitOk);
  CHECK(lines(apml_run.out).size() == 5);
}

TEST_CASE("analyze a cloud pair") {
  TempDir dir;
  std::mt19937_64 rng(3);
  const auto a = dir.file("a.xyz"), b = dir.file("b.xyz");
  save_pointcloud(random_cloud(40, 3, rng), a);
  save_pointcloud(random_cloud(40, 3, rng), b);
  for (const char *stage : {"pre", "post"}) {
    const auto r = cli({"analyze", a, b, "--stage", stage, "--bins", "5"});
    REQUIRE(r.code == kExitOk);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 2 + 1 + 1 + 5);
    const auto v = fields(ls[1]);
    CHECK(v[0] == std::string(stage) + "-sinkhorn");
    CHECK(v[2] == "1600");
    CHECK(v[3] == v[6]);
    CHECK(ls[3] == "bin_lo,bin_hi,count");
  }
}

TEST_CASE("bench rows") {
  const auto r = cli({"bench", "--sizes", "8,16", "--reps", "2"});
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 3);
  CHECK(ls[0] == "n,mean_ms,std_ms,reps");
  CHECK(fields(ls[2])[0] == "16");
  CHECK(fields(ls[2])[3] == "2");
}

TEST_CASE("usage errors exit 1") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"loss", "--bogus", "a", "b"}).code == kExitUsage);
  CHECK(cli({"loss", "--kind", "hausdorff", "a", "b"}).code == kExitUsage);
  const auto r = cli({"metrics"});
  CHECK(r.code == kExitUsage);
  CHECK_FALSE(r.err.empty());
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("computation errors exit 2") {
  Clouds c;
  CHECK(cli({"metrics", c.a, c.dir.file("missing.xyz")}).code == kExitComputation);
  write_text(c.b, "1 2\n");
  const auto r = cli({"loss", c.a, c.b});
  CHECK(r.code == kExitComputation);
  CHECK(r.err.find("apml:") == 0);
  CHECK(cli({"loss", "--p-min", "1.5", c.a, c.a}).code != kExitOk);
}

TEST_CASE("repeated runs are byte identical") {
  Clouds c;
  const auto x = cli({"metrics", c.a, c.b});
  const auto y = cli({"metrics", c.a, c.b});
  CHECK(x.out == y.out);
}

}
