// Exercises the benchmark driver binary end to end: exit codes, emitted files.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace {
int run(const std::string& args) {
  const int status = std::system((std::string(SWE_BENCH_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int count_data_rows(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  std::string line;
  int rows = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    ++rows;
  }
  return rows;
}
} // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("converge --bogus-flag 3") == 2);
}

TEST_CASE("converge with zero refinements emits a single-row record") {
  const auto dir = std::filesystem::temp_directory_path() / "stswe_cli_converge";
  std::filesystem::remove_all(dir);
  CHECK(run("converge --refinements 0 --mesh 1x1 --out " + dir.string()) == 0);
  CHECK(count_data_rows(dir / "record.csv") == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("lake runs and emits record, series and mesh files") {
  const auto dir = std::filesystem::temp_directory_path() / "stswe_cli_lake";
  std::filesystem::remove_all(dir);
  CHECK(run("lake --out " + dir.string()) == 0);
  CHECK(std::filesystem::exists(dir / "record.csv"));
  CHECK(std::filesystem::exists(dir / "newton.csv"));
  CHECK(std::filesystem::exists(dir / "mesh_solution.vtk"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("record output is deterministic across runs") {
  const auto a = std::filesystem::temp_directory_path() / "stswe_cli_det_a";
  const auto b = std::filesystem::temp_directory_path() / "stswe_cli_det_b";
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  CHECK(run("converge --refinements 2 --out " + a.string()) == 0);
  CHECK(run("converge --refinements 2 --out " + b.string()) == 0);
  std::ifstream fa(a / "record.csv"), fb(b / "record.csv");
  std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  CHECK(!sa.empty());
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("config file sets subcommand options") {
  const auto dir = std::filesystem::temp_directory_path() / "stswe_cli_cfg";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "run.ini";
  {
    std::ofstream f(cfg);
    f << "[converge]\n"
      << "refinements = 1\n"
      << "mesh = 2x1\n"
      << "out = " << (dir / "result").string() << "\n";
  }
  CHECK(run("converge --config " + cfg.string()) == 0);
  CHECK(count_data_rows(dir / "result" / "record.csv") == 2);
  std::filesystem::remove_all(dir);
}
