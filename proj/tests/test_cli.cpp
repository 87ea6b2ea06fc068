#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vocovar/cli.hpp"

using namespace vocovar;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vocovar_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("cli pipeline runs end to end") {
  const fs::path dir = fresh_dir("pipeline");
  const std::string ds = (dir / "scene.vds").string();

  CHECK(run_cli({"simulate", "--kind", "loop", "--keyframes", "8",
                 "--landmarks", "350", "--noise-sigma", "0.8", "--seed", "5",
                 "-o", ds}) == 0);
  CHECK(run_cli({"validate", ds}) == 0);
  CHECK(run_cli({"solve", ds, "-o", (dir / "poses.csv").string()}) == 0);
  CHECK(run_cli({"marginals", ds, "-o", (dir / "marg.csv").string()}) == 0);
  CHECK(run_cli({"trend", ds, "-o", (dir / "trend.csv").string(), "--plot",
                 (dir / "trend.svg").string()}) == 0);
  CHECK(run_cli({"covis", ds, "-o", (dir / "covis.csv").string()}) == 0);

  CHECK(slurp(dir / "poses.csv").rfind("keyframe,qw", 0) == 0);
  CHECK(slurp(dir / "marg.csv").find("cov55,logdet") != std::string::npos);
  CHECK(slurp(dir / "trend.csv").rfind(
            "keyframe,logdet,num_edges,max_backlink_span", 0) == 0);
  CHECK(slurp(dir / "trend.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("cli simulate accepts a scenario file with flag overrides") {
  const fs::path dir = fresh_dir("specfile");
  {
    std::ofstream spec(dir / "scene.spec");
    spec << "kind arc\nkeyframes 5\nlandmarks 300\nnoise_sigma 0.5\nseed 9\n";
  }
  const std::string ds = (dir / "a.vds").string();
  CHECK(run_cli({"simulate", (dir / "scene.spec").string(), "-o", ds}) == 0);
  CHECK(run_cli({"validate", ds}) == 0);

  // Override the keyframe count from the command line.
  const std::string ds2 = (dir / "b.vds").string();
  CHECK(run_cli({"simulate", (dir / "scene.spec").string(), "--keyframes", "7",
                 "-o", ds2}) == 0);
  CHECK(slurp(ds) != slurp(ds2));
}

TEST_CASE("cli pipelines are byte-identical across reruns") {
  const fs::path a = fresh_dir("rerun_a");
  const fs::path b = fresh_dir("rerun_b");
  for (const fs::path& dir : {a, b}) {
    const std::string ds = (dir / "scene.vds").string();
    REQUIRE(run_cli({"simulate", "--kind", "revisit", "--keyframes", "10",
                     "--landmarks", "400", "--noise-sigma", "1.0", "--seed",
                     "21", "-o", ds}) == 0);
    REQUIRE(run_cli({"solve", ds, "-o", (dir / "poses.csv").string()}) == 0);
    REQUIRE(run_cli({"trend", ds, "-o", (dir / "trend.csv").string()}) == 0);
    REQUIRE(run_cli({"marginals", ds, "-o", (dir / "marg.csv").string()}) == 0);
  }
  for (const char* name : {"scene.vds", "poses.csv", "trend.csv", "marg.csv"}) {
    CHECK(slurp(a / name) == slurp(b / name));
  }
}

TEST_CASE("cli maps corrupt files to the validation exit code") {
  const fs::path dir = fresh_dir("corrupt");
  {
    std::ofstream out(dir / "bad.vds");
    out << "vocovar-dataset v1\nK 300 300 320 240 640 480\nF 0 1 0 0 0 0 0 0\n"
        << "S 0 abc 240 0.5\n";
  }
  CHECK(run_cli({"validate", (dir / "bad.vds").string()}) == 3);

  {
    std::ofstream out(dir / "vers.vds");
    out << "vocovar-dataset v9\n";
  }
  CHECK(run_cli({"validate", (dir / "vers.vds").string()}) == 3);
}

TEST_CASE("cli maps usage problems to exit code 2") {
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"solve"}) == 2);                       // missing dataset
  CHECK(run_cli({"trend", "x.vds", "--wat"}) == 2);     // unknown flag
}

TEST_CASE("cli maps missing files to the io exit code") {
  CHECK(run_cli({"validate", "/nonexistent/scene.vds"}) == 5);
}

TEST_CASE("cli maps singular systems to the numerical exit code") {
  const fs::path dir = fresh_dir("singular");
  const std::string ds = (dir / "scene.vds").string();
  REQUIRE(run_cli({"simulate", "--kind", "line", "--keyframes", "4",
                   "--landmarks", "300", "--seed", "3", "-o", ds}) == 0);
  CHECK(run_cli({"solve", ds, "--no-gauge", "-o",
                 (dir / "poses.csv").string()}) == 4);
}

TEST_CASE("cli gauge priors are injected by default") {
  const fs::path dir = fresh_dir("gauge_default");
  const std::string ds = (dir / "scene.vds").string();
  REQUIRE(run_cli({"simulate", "--kind", "line", "--keyframes", "4",
                   "--landmarks", "300", "--seed", "4", "-o", ds}) == 0);
  // No gauge flags given: marginals must still succeed.
  CHECK(run_cli({"marginals", ds, "-o", (dir / "m.csv").string()}) == 0);
  // And custom sigmas are accepted.
  CHECK(run_cli({"marginals", ds, "--gauge-rot-sigma", "1e-3",
                 "--gauge-trans-sigma", "1e-3", "-o",
                 (dir / "m2.csv").string()}) == 0);
  CHECK(slurp(dir / "m.csv") != slurp(dir / "m2.csv"));
}
