// indexlab command-line runner. Talks to the shared library exclusively
// through the C API in indexlab.h.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "indexlab.h"

namespace {

int finish(indexlab_status st, indexlab_result* res) {
  if (st != INDEXLAB_OK) {
    std::fprintf(stderr, "error: %s\n", indexlab_last_error());
    return st == INDEXLAB_ERR_CONFIG ? 2 : 1;
  }
  std::fputs(indexlab_result_summary(res), stdout);
  const int code = indexlab_result_pass(res) ? 0 : 1;
  indexlab_result_free(res);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"indexlab: spectral and index experiments on discretized operators"};
  app.require_subcommand(1);

  std::string config_path, out_dir, tol_spec, suite_name;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
  run->add_option("config", config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory override");

  auto* suite = app.add_subcommand("suite", "run a named experiment suite");
  suite->add_option("name", suite_name, "suite name (paper-acceptance)")
      ->required();
  suite->add_option("--out", out_dir, "output directory");
  suite->add_option("--jobs", jobs, "criteria to run concurrently");
  suite->add_option("--tol", tol_spec, "tolerance overrides KEY=VAL[,KEY=VAL...]");

  auto* list = app.add_subcommand("list", "list available experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    std::fputs(indexlab_experiments(), stdout);
    return 0;
  }

  indexlab_result* res = nullptr;
  if (run->parsed()) {
    const indexlab_status st = indexlab_run_config_file(
        config_path.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), &res);
    return finish(st, res);
  }
  const indexlab_status st = indexlab_suite_run(
      suite_name.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), jobs,
      tol_spec.empty() ? nullptr : tol_spec.c_str(), &res);
  return finish(st, res);
}
