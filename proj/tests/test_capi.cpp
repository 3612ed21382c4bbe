#include "qwbc.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "doctest.h"

namespace {

struct Cleanup {
  qwbc_config* cfg = nullptr;
  qwbc_graph* graph = nullptr;
  qwbc_series* series = nullptr;
  qwbc_sweep* sweep = nullptr;
  ~Cleanup() {
    qwbc_config_free(cfg);
    qwbc_graph_free(graph);
    qwbc_series_free(series);
    qwbc_sweep_free(sweep);
  }
};

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("graph generation, save, and reload") {
  Cleanup c;
  REQUIRE(qwbc_graph_generate(6, 0.2, 1, &c.graph) == QWBC_OK);
  CHECK(qwbc_graph_nodes(c.graph) == 6);
  CHECK(qwbc_graph_edge_count(c.graph) >= 6);
  CHECK(qwbc_graph_strongly_connected(c.graph) == 1);

  const char* path = "capi_graph_test.txt";
  REQUIRE(qwbc_graph_save(c.graph, path) == QWBC_OK);
  qwbc_graph* loaded = nullptr;
  REQUIRE(qwbc_graph_load(path, &loaded) == QWBC_OK);
  CHECK(qwbc_graph_edge_count(loaded) == qwbc_graph_edge_count(c.graph));
  qwbc_graph_free(loaded);
  std::remove(path);
}

TEST_CASE("bad parameters produce config errors with messages") {
  qwbc_graph* g = nullptr;
  CHECK(qwbc_graph_generate(1, 0.2, 1, &g) == QWBC_ERR_CONFIG);
  CHECK(g == nullptr);
  CHECK(std::strlen(qwbc_error_message()) > 0);

  qwbc_graph* missing = nullptr;
  CHECK(qwbc_graph_load("no_such_file_anywhere.txt", &missing) == QWBC_ERR_RUNTIME);
}

TEST_CASE("config set, get, and validation") {
  Cleanup c;
  REQUIRE(qwbc_config_create(&c.cfg) == QWBC_OK);
  CHECK(qwbc_config_set(c.cfg, "nodes", "4") == QWBC_OK);
  CHECK(qwbc_config_set(c.cfg, "bits", "simultaneous") == QWBC_OK);
  CHECK(qwbc_config_set(c.cfg, "no_such_key", "1") == QWBC_ERR_CONFIG);
  CHECK(qwbc_config_set(c.cfg, "c1", "1") == QWBC_OK);       // stored...
  CHECK(qwbc_config_validate(c.cfg) == QWBC_ERR_CONFIG);    // ...rejected here
  CHECK(std::string(qwbc_error_message()).find("c1") != std::string::npos);
  CHECK(qwbc_config_set(c.cfg, "c1", "2") == QWBC_OK);
  CHECK(qwbc_config_validate(c.cfg) == QWBC_OK);

  char buf[32];
  REQUIRE(qwbc_config_get(c.cfg, "nodes", buf, sizeof buf) == QWBC_OK);
  CHECK(std::string(buf) == "4");
}

TEST_CASE("config file loading") {
  const char* path = "capi_cfg_test.txt";
  {
    std::ofstream os(path);
    os << "nodes = 5\nbits = simultaneous\ngraphs = 2\ninits = 1\nmax_rounds = 200\n";
  }
  Cleanup c;
  REQUIRE(qwbc_config_load(path, &c.cfg) == QWBC_OK);
  char buf[32];
  REQUIRE(qwbc_config_get(c.cfg, "nodes", buf, sizeof buf) == QWBC_OK);
  CHECK(std::string(buf) == "5");
  std::remove(path);
}

TEST_CASE("balance and consensus studies produce series") {
  Cleanup c;
  REQUIRE(qwbc_config_create(&c.cfg) == QWBC_OK);
  REQUIRE(qwbc_config_set(c.cfg, "graphs", "2") == QWBC_OK);
  REQUIRE(qwbc_config_set(c.cfg, "inits", "2") == QWBC_OK);
  REQUIRE(qwbc_config_set(c.cfg, "max_rounds", "300") == QWBC_OK);
  REQUIRE(qwbc_config_set(c.cfg, "bits", "simultaneous") == QWBC_OK);

  REQUIRE(qwbc_run_balance(c.cfg, nullptr, nullptr, nullptr, &c.series) == QWBC_OK);
  REQUIRE(qwbc_series_rows(c.series) > 0);
  const size_t last = qwbc_series_rows(c.series) - 1;
  CHECK(qwbc_series_round(c.series, last) == 300);
  CHECK(qwbc_series_mean_imbalance(c.series, last) <=
        qwbc_series_mean_imbalance(c.series, 0));
  qwbc_series_free(c.series);
  c.series = nullptr;

  const char* csv = "capi_series_test.csv";
  REQUIRE(qwbc_run_consensus(c.cfg, nullptr, csv, nullptr, &c.series) == QWBC_OK);
  CHECK(qwbc_series_mean_mse(c.series, qwbc_series_rows(c.series) - 1) >= 0.0);
  std::ifstream is(csv);
  std::string header;
  std::getline(is, header);
  CHECK(header == "k,mean_imbalance,se_imbalance,mean_mse,se_mse");
  is.close();
  std::remove(csv);
}

TEST_CASE("a pinned graph collapses the graph axis") {
  Cleanup c;
  REQUIRE(qwbc_graph_generate(4, 0.0, 9, &c.graph) == QWBC_OK);  // pure cycle: balanced
  REQUIRE(qwbc_config_create(&c.cfg) == QWBC_OK);
  REQUIRE(qwbc_config_set(c.cfg, "graphs", "5") == QWBC_OK);
  REQUIRE(qwbc_config_set(c.cfg, "nodes", "4") == QWBC_OK);
  REQUIRE(qwbc_config_set(c.cfg, "max_rounds", "50") == QWBC_OK);
  REQUIRE(qwbc_run_balance(c.cfg, c.graph, nullptr, nullptr, &c.series) == QWBC_OK);
  for (size_t r = 0; r < qwbc_series_rows(c.series); ++r)
    CHECK(qwbc_series_mean_imbalance(c.series, r) == 0.0);
}

TEST_CASE("sweep handles strict mode") {
  Cleanup c;
  REQUIRE(qwbc_config_create(&c.cfg) == QWBC_OK);
  REQUIRE(qwbc_config_set(c.cfg, "graphs", "1") == QWBC_OK);
  REQUIRE(qwbc_config_set(c.cfg, "inits", "2") == QWBC_OK);
  REQUIRE(qwbc_config_set(c.cfg, "max_rounds", "50") == QWBC_OK);

  const int32_t totals[] = {2};
  // 50 rounds cannot reach an MSE of 1e-12: strict mode must flag it
  CHECK(qwbc_sweep_run(c.cfg, totals, 1, 1e-12, 1, &c.sweep) == QWBC_ERR_NOT_CONVERGED);
  REQUIRE(c.sweep != nullptr);
  REQUIRE(qwbc_sweep_rows(c.sweep) == 3);
  for (size_t r = 0; r < 3; ++r) {
    CHECK(qwbc_sweep_converged(c.sweep, r) == 0);
    CHECK(qwbc_sweep_comm_cost(c.sweep, r) ==
          qwbc_sweep_total_bits(c.sweep, r) * qwbc_sweep_iterations(c.sweep, r));
  }
  const char* csv = "capi_sweep_test.csv";
  REQUIRE(qwbc_sweep_write_csv(c.sweep, csv) == QWBC_OK);
  std::remove(csv);
}

TEST_CASE("a disconnected pinned graph is a config error") {
  const char* path = "capi_disconnected_test.txt";
  {
    std::ofstream os(path);
    os << "n 3\n0 1\n1 2\n";
  }
  Cleanup c;
  REQUIRE(qwbc_graph_load(path, &c.graph) == QWBC_OK);
  CHECK(qwbc_graph_strongly_connected(c.graph) == 0);
  REQUIRE(qwbc_config_create(&c.cfg) == QWBC_OK);
  REQUIRE(qwbc_config_set(c.cfg, "nodes", "3") == QWBC_OK);
  CHECK(qwbc_run_balance(c.cfg, c.graph, nullptr, nullptr, &c.series) == QWBC_ERR_CONFIG);
  std::remove(path);
}

TEST_CASE("null handles are rejected, not dereferenced") {
  CHECK(qwbc_graph_generate(6, 0.2, 1, nullptr) == QWBC_ERR_CONFIG);
  CHECK(qwbc_config_set(nullptr, "nodes", "4") == QWBC_ERR_CONFIG);
  CHECK(qwbc_run_balance(nullptr, nullptr, nullptr, nullptr, nullptr) == QWBC_ERR_CONFIG);
  CHECK(qwbc_series_rows(nullptr) == 0);
  CHECK(qwbc_sweep_rows(nullptr) == 0);
}

}  // TEST_SUITE
