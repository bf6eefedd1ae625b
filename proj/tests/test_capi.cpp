#include <doctest.h>

#include <cstring>
#include <string>

#include "indexlab.h"

TEST_CASE("version and experiment listing") {
  CHECK(std::strlen(indexlab_version()) > 0);
  const std::string names = indexlab_experiments();
  CHECK(names.find("bott-index\n") != std::string::npos);
  CHECK(names.find("index-check\n") != std::string::npos);
}

TEST_CASE("run a config through the C surface") {
  const char* cfg = R"({
    "experiment": "bott-index",
    "parameters": {"n": 1, "t": 1.0, "N": 32, "L": 7.0},
    "out_dir": "/tmp/indexlab-capi"
  })";
  indexlab_result* res = nullptr;
  CHECK(indexlab_run_config_json(cfg, nullptr, &res) == INDEXLAB_OK);
  REQUIRE(res != nullptr);
  CHECK(indexlab_result_pass(res) == 1);
  const std::string j = indexlab_result_json(res);
  CHECK(j.find("\"index\"") != std::string::npos);
  const std::string s = indexlab_result_summary(res);
  CHECK(s.find("[PASS]") != std::string::npos);
  indexlab_result_free(res);
}

TEST_CASE("config errors surface as INDEXLAB_ERR_CONFIG with a message") {
  indexlab_result* res = nullptr;
  CHECK(indexlab_run_config_json("{not json", nullptr, &res) ==
        INDEXLAB_ERR_CONFIG);
  CHECK(res == nullptr);
  CHECK(std::strlen(indexlab_last_error()) > 0);

  CHECK(indexlab_run_config_json(R"({"experiment":"nope"})", nullptr, &res) ==
        INDEXLAB_ERR_CONFIG);
  CHECK(indexlab_run_config_json(nullptr, nullptr, &res) == INDEXLAB_ERR_CONFIG);
  CHECK(indexlab_run_config_file("/does/not/exist.json", nullptr, &res) ==
        INDEXLAB_ERR_IO);
}

TEST_CASE("precondition failures map to their own status") {
  // box too small for the oscillator
  const char* cfg = R"({
    "experiment": "bott-index",
    "parameters": {"n": 1, "t": 1.0, "N": 32, "L": 1.0},
    "out_dir": "/tmp/indexlab-capi"
  })";
  indexlab_result* res = nullptr;
  const indexlab_status st = indexlab_run_config_json(cfg, nullptr, &res);
  CHECK(st == INDEXLAB_ERR_CONFIG);  // invalid_argument from validation
  CHECK(res == nullptr);
}

TEST_CASE("unknown suite names are rejected") {
  indexlab_result* res = nullptr;
  CHECK(indexlab_suite_run("not-a-suite", "/tmp/indexlab-suite-x", 1, nullptr,
                           &res) == INDEXLAB_ERR_CONFIG);
  CHECK(indexlab_suite_run("", "/tmp/indexlab-suite-x", 1, nullptr, &res) ==
        INDEXLAB_ERR_CONFIG);
  CHECK(indexlab_suite_run("paper-acceptance", "/tmp/x", 1, "bogus=1", &res) ==
        INDEXLAB_ERR_CONFIG);
}

TEST_CASE("null-handle accessors are safe") {
  CHECK(indexlab_result_pass(nullptr) == 0);
  CHECK(std::strlen(indexlab_result_json(nullptr)) == 0);
  indexlab_result_free(nullptr);
}
