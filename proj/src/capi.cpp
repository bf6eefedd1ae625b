#include "indexlab.h"

#include <string>

#include "indexlab/experiments.hpp"
#include "indexlab/suite.hpp"

struct indexlab_result {
  std::string json;
  std::string summary;
  bool pass = false;
};

namespace {

thread_local std::string g_last_error;

indexlab_status status_of(const indexlab::Error& e) {
  switch (e.code()) {
    case indexlab::ErrorCode::config:
      return INDEXLAB_ERR_CONFIG;
    case indexlab::ErrorCode::invalid_argument:
      return INDEXLAB_ERR_CONFIG;
    case indexlab::ErrorCode::precondition:
      return INDEXLAB_ERR_PRECONDITION;
    case indexlab::ErrorCode::numerical_failure:
      return INDEXLAB_ERR_NUMERICAL;
    case indexlab::ErrorCode::io:
      return INDEXLAB_ERR_IO;
  }
  return INDEXLAB_ERR_INTERNAL;
}

template <typename Fn>
indexlab_status guarded(indexlab_result** out, Fn&& fn) {
  if (out == nullptr) {
    g_last_error = "output handle pointer is NULL";
    return INDEXLAB_ERR_CONFIG;
  }
  *out = nullptr;
  try {
    *out = fn();
    return INDEXLAB_OK;
  } catch (const indexlab::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return INDEXLAB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return INDEXLAB_ERR_INTERNAL;
  }
}

indexlab_result* run_config(indexlab::experiments::ExperimentConfig cfg,
                            const char* out_dir) {
  if (out_dir != nullptr) cfg.out_dir = out_dir;
  auto rec = indexlab::experiments::run(cfg);
  auto* r = new indexlab_result;
  r->json = rec.to_json().dump(2);
  r->pass = rec.pass;
  r->summary = std::string(rec.pass ? "[PASS] " : "[FAIL] ") + rec.experiment +
               " (" + rec.anchor + ")\n";
  return r;
}

}  // namespace

extern "C" {

const char* indexlab_version(void) { return "1.0.0"; }

const char* indexlab_last_error(void) { return g_last_error.c_str(); }

indexlab_status indexlab_run_config_json(const char* config_json,
                                         const char* out_dir,
                                         indexlab_result** out) {
  return guarded(out, [&]() {
    if (config_json == nullptr)
      indexlab::fail(indexlab::ErrorCode::config, "config string is NULL");
    indexlab::experiments::json j;
    try {
      j = indexlab::experiments::json::parse(config_json);
    } catch (const std::exception& e) {
      indexlab::fail(indexlab::ErrorCode::config,
                     std::string("config parse error: ") + e.what());
    }
    return run_config(indexlab::experiments::ExperimentConfig::from_json(j),
                      out_dir);
  });
}

indexlab_status indexlab_run_config_file(const char* path, const char* out_dir,
                                         indexlab_result** out) {
  return guarded(out, [&]() {
    if (path == nullptr)
      indexlab::fail(indexlab::ErrorCode::config, "config path is NULL");
    return run_config(
        indexlab::experiments::ExperimentConfig::from_file(path), out_dir);
  });
}

indexlab_status indexlab_suite_run(const char* suite_name, const char* out_dir,
                                   int jobs, const char* tol_overrides,
                                   indexlab_result** out) {
  return guarded(out, [&]() {
    if (suite_name == nullptr)
      indexlab::fail(indexlab::ErrorCode::config, "suite name is NULL");
    indexlab::Tolerances tol;
    if (tol_overrides != nullptr)
      indexlab::experiments::apply_tolerance_overrides(tol, tol_overrides);
    const std::string dir = out_dir ? out_dir : "acceptance-out";
    auto report = indexlab::suite::run_suite(suite_name, dir, jobs, tol);
    auto* r = new indexlab_result;
    r->json = report.to_json().dump(2);
    r->summary = report.summary_lines();
    r->pass = report.pass;
    return r;
  });
}

int indexlab_result_pass(const indexlab_result* r) {
  return (r != nullptr && r->pass) ? 1 : 0;
}

const char* indexlab_result_json(const indexlab_result* r) {
  return r ? r->json.c_str() : "";
}

const char* indexlab_result_summary(const indexlab_result* r) {
  return r ? r->summary.c_str() : "";
}

void indexlab_result_free(indexlab_result* r) { delete r; }

const char* indexlab_experiments(void) {
  static const std::string names = [] {
    std::string out;
    for (const auto& n : indexlab::experiments::experiment_names()) {
      out += n;
      out += '\n';
    }
    return out;
  }();
  return names.c_str();
}

}  // extern "C"
