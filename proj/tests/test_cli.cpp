#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "tabsol/commands.hpp"
#include "tabsol/io.hpp"

using namespace tabsol;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "tabsol_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  write_file_atomic(dir / "run.cfg", text);
  return dir / "run.cfg";
}

// Runs the installed binary; returns its exit status.
int run_binary(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + " \"" TABSOL_CLI_PATH "\" " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

struct Captured {
  int code;
  std::string out;
  std::string err;
};

Captured run(const std::string& command, const fs::path& cfg, const fs::path& out_dir,
             CommandOptions options = {}) {
  options.out_dir = out_dir;
  std::ostringstream out, err;
  const int code = run_cli(command, cfg, options, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("train then eval reproduces the final error") {
  const fs::path dir = scratch_dir("train_eval");
  const fs::path cfg = write_config(dir, "schedule.epochs = 20\nnetwork.hidden_count = 30\n"
                                         "eval.model = " + (dir / "model.json").string() + "\n");
  const Captured train = run("train", cfg, dir);
  REQUIRE(train.code == 0);
  const Captured eval = run("eval", cfg, dir);
  REQUIRE(eval.code == 0);
  CHECK(train.out.substr(train.out.find("rms=")) == eval.out.substr(eval.out.find("rms=")));
  CHECK(read_file(dir / "eval.csv").rfind("input,target,predicted,error\n", 0) == 0);
}

TEST_CASE("zero epochs write a zero model and an empty trace") {
  const fs::path dir = scratch_dir("zero");
  const fs::path cfg = write_config(dir, "schedule.epochs = 0\n");
  const Captured r = run("train", cfg, dir);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("percent=100\n") != std::string::npos);
  CHECK(read_file(dir / "trace.csv") == "iteration,epoch,rms_error,percent_error\n");
  CHECK(load_model(dir / "model.json").weights().matrix.isZero());
}

TEST_CASE("every trainer runs through the command") {
  for (const char* kind : {"sol", "lms", "opium_full", "opium_normalized"}) {
    const fs::path dir = scratch_dir(std::string("trainer_") + kind);
    const fs::path cfg = write_config(
        dir, std::string("trainer.kind = ") + kind +
                 "\nschedule.epochs = 3\nnetwork.hidden_count = 10\n");
    CHECK(run("train", cfg, dir).code == 0);
    CHECK(!load_model(dir / "model.json").has_counters());
  }
}

TEST_CASE("reruns are byte-identical") {
  const std::string text =
      "schedule.epochs = 10\nnetwork.hidden_count = 20\nsweep.kind = bits\n"
      "sweep.bits = 6, 13\nsweep.seeds = 2\nsweep.epochs = 4\nvectors.count = 50\n";
  const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
  for (const fs::path& dir : {a, b}) {
    const fs::path cfg = write_config(dir, text);
    REQUIRE(run("train", cfg, dir).code == 0);
    REQUIRE(run("sweep", cfg, dir).code == 0);
    REQUIRE(run("vectors", cfg, dir).code == 0);
  }
  for (const char* f : {"trace.csv", "model.json", "sweep.csv", "vectors.txt"})
    CHECK(read_file(a / f) == read_file(b / f));
}

TEST_CASE("sweep command outputs") {
  const fs::path dir = scratch_dir("sweeps");
  const fs::path cfg = write_config(
      dir, "sweep.bits = 13\nsweep.seeds = 1\nsweep.epochs = 2\nsweep.iterations = 500\n"
           "sweep.hidden_counts = 10\nsweep.max_epochs = 2\n");
  REQUIRE(run("sweep", cfg, dir).code == 0);
  const std::string csv = read_file(dir / "sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

  CommandOptions schedule;
  schedule.sweep_kind = "schedule";
  REQUIRE(run("sweep", cfg, dir, schedule).code == 0);
  CHECK(fs::exists(dir / "schedule_variable.csv"));
  CHECK(fs::exists(dir / "schedule_fixed.csv"));

  CommandOptions capacity;
  capacity.sweep_kind = "capacity";
  REQUIRE(run("sweep", cfg, dir, capacity).code == 0);
  CHECK(read_file(dir / "sweep.csv").find(",-1\n") != std::string::npos);

  CommandOptions unknown;
  unknown.sweep_kind = "voltage";
  CHECK(run("sweep", cfg, dir, unknown).code == kExitConfig);
}

TEST_CASE("vector export") {
  const fs::path dir = scratch_dir("vectors");
  const fs::path cfg = write_config(dir, "vectors.count = 0\n");
  REQUIRE(run("vectors", cfg, dir).code == 0);
  CHECK(read_file(dir / "vectors.txt").empty());

  write_config(dir, "vectors.count = 200\nemulator.bits = 8\n");
  REQUIRE(run("vectors", cfg, dir).code == 0);
  std::istringstream lines(read_file(dir / "vectors.txt"));
  std::size_t n = 0;
  for (std::string line; std::getline(lines, line); ++n) {
    const DlbVector v = parse_vector(line, 8);
    CHECK(dlb_update(v.in, v.sign_e, v.sign_h) == v.out);
  }
  CHECK(n == 200);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch_dir("codes");
  const fs::path bad_key = write_config(dir, "network.typo = 1\n");
  CHECK(run("train", bad_key, dir).code == kExitConfig);

  const fs::path numeric = write_config(
      dir, "trainer.kind = opium_full\ntrainer.init_scale = 1e300\nschedule.epochs = 1\n");
  const Captured r = run("train", numeric, dir);
  CHECK(r.code == kExitNumeric);
  CHECK(r.err.find("numeric") != std::string::npos);

  CHECK(run("train", dir / "missing.cfg", dir).code == kExitIo);

  write_file_atomic(dir / "corrupt.json", "{\"format\": \"tabsol-model\"");
  const fs::path eval = write_config(dir, "eval.model = " + (dir / "corrupt.json").string());
  CHECK(run("eval", eval, dir).code == kExitIo);
  const fs::path no_model = write_config(dir, "");
  CHECK(run("eval", no_model, dir).code == kExitConfig);
}

TEST_CASE("binary entry point") {
  const fs::path dir = scratch_dir("binary");
  const fs::path cfg = write_config(dir, "schedule.epochs = 2\nnetwork.hidden_count = 10\n");
  const std::string common = "--config \"" + cfg.string() + "\" --out \"" + dir.string() + "\"";
  CHECK(run_binary("train " + common) == 0);
  CHECK(run_binary("eval " + common + " --model \"" + (dir / "model.json").string() + "\"") == 0);
  CHECK(run_binary("vectors " + common + " --count 5") == 0);
  CHECK(run_binary("sweep " + common + " --kind nope") == 2);
  CHECK(run_binary("train") == 2);
  CHECK(run_binary("frobnicate " + common) == 2);
  CHECK(run_binary("train " + common + " --jobs 0") == 2);
  CHECK(run_binary("train " + common, "TABSOL_SEED=abc") == 2);

  // The seed override changes the network and therefore the model.
  const std::string base = read_file(dir / "model.json");
  REQUIRE(run_binary("train " + common, "TABSOL_SEED=99") == 0);
  const std::string seeded = read_file(dir / "model.json");
  CHECK(seeded != base);
  REQUIRE(run_binary("train " + common, "TABSOL_SEED=99") == 0);
  CHECK(read_file(dir / "model.json") == seeded);
}
