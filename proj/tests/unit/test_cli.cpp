#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + MCBOOST_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string iris = std::string(MCBOOST_DATA_DIR) + "/iris.csv";

}  // namespace

TEST_CASE("command line") {
  const fs::path dir = fs::temp_directory_path() / "mcboost_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path log = dir / "log.txt";

  CHECK(run("codegen --classes 3 --kind exhaustive", log) == 0);
  CHECK(slurp(log) == "1,1,1\n-1,-1,1\n-1,1,-1\n");

  const fs::path out = dir / "train";
  CHECK(run("train --dataset " + iris + " --booster TC.ECC --rounds 20 --seed 3 --out " + out.string(), log) == 0);
  CHECK(slurp(log).find("TC.ECC rounds=20") != std::string::npos);
  for (const char* f : {"ensemble.txt", "curve.csv", "dual.csv", "manifest.txt"}) CHECK(fs::exists(out / f));

  CHECK(run("evaluate --ensemble " + (out / "ensemble.txt").string() + " --dataset " + iris, log) == 0);
  CHECK(slurp(log).find("examples=150") != std::string::npos);

  CHECK(run("experiment --dataset " + iris + " --booster AB.MO,TC.MO --rounds 5 --trials 2 --threads 1", log) == 0);
  CHECK(slurp(log).find("iris,TC.MO,") != std::string::npos);

  CHECK(run("train --dataset " + (dir / "missing.csv").string(), log) == 2);
  CHECK(run("train --dataset " + iris + " --theta=-3", log) == 1);
  CHECK(run("train --dataset " + iris + " --booster XYZ", log) == 1);
  CHECK(run("train", log) == 1);
  CHECK(run("codegen --classes 1", log) == 1);
  fs::remove_all(dir);
}
