#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hqml/dataset.hpp"
#include "hqml/harness.hpp"
#include "hqml/io.hpp"

using namespace hqml;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "hqml_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(HQML_CLI_PATH) + " " + args + " > " + (kDir / "stdout.txt").string() +
                          " 2> " + (kDir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string path(const std::string& name) { return (kDir / name).string(); }

struct Fixtures {
  Fixtures() {
    fs::create_directories(kDir);
    write_csv(kDir / "sep.csv", separable_fixture());
    write_csv(kDir / "imb.csv", imbalanced_fixture());
    write_csv(kDir / "wide.csv", planted_signal_fixture(60, 4, 1));
    std::ofstream(kDir / "dup.csv") << "a,b,label\n0.5,0.5,1\n0.5,0.5,1\n2,2,0\n2,2,0\n";
    std::ofstream(kDir / "bad.csv") << "a,b,label\n0.5,x,1\n";
  }
};
const Fixtures fixtures;

}  // namespace

TEST_CASE("embed") {
  REQUIRE(run("embed --x 0,0 --reps 1 --circuit --out " + path("embed.json")) == 0);
  const auto j = read_json(kDir / "embed.json");
  CHECK(j["n_qubits"] == 2);
  CHECK(j["amplitudes"].size() == 4);
  CHECK(j["probabilities"].size() == 4);
  CHECK(j.contains("circuit"));
  CHECK(run("embed --x 0,9") == 2);
  CHECK(run("embed") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("kernel") {
  REQUIRE(run("kernel --data " + path("sep.csv") + " --out " + path("k.csv") + " --scaling-out " + path("s.json")) == 0);
  const auto k = read_matrix_csv(kDir / "k.csv");
  CHECK(k.rows() == 40);
  CHECK(k.cols() == 40);
  CHECK((k.diagonal().array() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK(fs::exists(kDir / "s.json"));
  CHECK(run("kernel --data " + path("absent.csv")) == 3);
  CHECK(run("kernel --data " + path("bad.csv")) == 3);
}

TEST_CASE("select-features and resample") {
  REQUIRE(run("select-features --data " + path("wide.csv") + " --k 2 --report " + path("imp.json") + " --out " +
              path("reduced.csv")) == 0);
  CHECK(read_json(kDir / "imp.json").size() == 5);
  CHECK(load_csv(kDir / "reduced.csv").dim() == 2);
  CHECK(run("select-features --data " + path("wide.csv") + " --k 9") == 2);

  REQUIRE(run("resample --data " + path("imb.csv") + " --method smote-enn --out " + path("res.csv")) == 0);
  const auto res = load_csv(kDir / "res.csv", "label");
  CHECK(res.dim() == 3);  // two features and the synthetic column
  CHECK(run("resample --data " + path("imb.csv") + " --method bogus --out " + path("x.csv")) == 2);
}

TEST_CASE("training commands") {
  REQUIRE(run("train-vqc --data " + path("sep.csv") + " --qubits 2 --iters 20 --out " + path("vqc.json") +
              " --metrics " + path("vqc_metrics.json")) == 0);
  const auto model = read_json(kDir / "vqc.json");
  CHECK(model.contains("theta"));
  const auto metrics = read_json(kDir / "vqc_metrics.json");
  CHECK(metrics["loss_history"].size() == 21);  // initial loss plus one per iteration
  CHECK(run("train-vqc --data " + path("sep.csv") + " --qubits 3 --out " + path("v.json")) == 2);

  REQUIRE(run("train-svm --data " + path("sep.csv") + " --form dual --out " + path("svm.json") + " --metrics " +
              path("svm_metrics.json")) == 0);
  CHECK(read_json(kDir / "svm.json")["type"] == "dual");
  CHECK(read_json(kDir / "svm_metrics.json").dump().find("accuracy") != std::string::npos);
  CHECK(run("train-svm --data " + path("sep.csv") + " --form dual --C 0 --out " + path("svm.json")) == 2);
  // duplicated rows with no regularisation make the LS system singular
  CHECK(run("train-svm --data " + path("dup.csv") + " --form ls --gamma inf --out " + path("ls.json")) == 4);
}

TEST_CASE("experiment") {
  std::ofstream(kDir / "exp.cfg") << "# desk run\ndata = " << path("sep.csv")
                                  << "\nclassifier = svm-dual\nrepeats = 3\nseed = 4\n";
  REQUIRE(run("experiment --config " + path("exp.cfg") + " --out " + path("a.json")) == 0);
  REQUIRE(run("experiment --config " + path("exp.cfg") + " --out " + path("b.json")) == 0);
  const auto a = read_json(kDir / "a.json");
  CHECK(strip_timing(a) == strip_timing(read_json(kDir / "b.json")));
  CHECK(a["config"]["classifier"] == "svm-dual");
  CHECK(a["per_repeat"].size() == 3);
  CHECK(a["ci_halfwidth"].is_number());

  // flags override the file
  REQUIRE(run("experiment --config " + path("exp.cfg") + " --repeats 2 --out " + path("c.json")) == 0);
  CHECK(read_json(kDir / "c.json")["per_repeat"].size() == 2);

  CHECK(run("experiment --config " + path("exp.cfg") + " --classifier forest") == 2);
  CHECK(run("experiment --config " + path("missing.cfg")) == 2);
  CHECK(run("experiment --classifier vqc") == 2);
  CHECK(run("experiment --data " + path("absent.csv")) == 3);
  CHECK(run("experiment --data " + path("wide.csv")) == 2);
}
