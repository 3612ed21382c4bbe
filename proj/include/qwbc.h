/*
 * qwbc — quantized weight-balancing and average consensus over digraphs.
 *
 * C interface to the simulation core. All objects are opaque handles created
 * and destroyed through this API; every fallible call returns a qwbc_status,
 * and qwbc_error_message() describes the most recent failure on the calling
 * thread. Runs are deterministic functions of (config, seed).
 */
#ifndef QWBC_H
#define QWBC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QWBC_API __declspec(dllexport)
#else
#define QWBC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qwbc_status {
  QWBC_OK = 0,
  QWBC_ERR_RUNTIME = 1,       /* I/O failures and other runtime errors */
  QWBC_ERR_CONFIG = 2,        /* invalid parameters or config */
  QWBC_ERR_ENGINE = 3,        /* exact-count ledger overflow; run aborted */
  QWBC_ERR_NOT_CONVERGED = 4  /* sweep strict mode: some row missed the target */
} qwbc_status;

typedef struct qwbc_graph qwbc_graph;
typedef struct qwbc_config qwbc_config;
typedef struct qwbc_series qwbc_series;
typedef struct qwbc_sweep qwbc_sweep;

/* Message for the most recent failing call on this thread (errno-style:
 * successes do not clear it); empty string until the first failure. */
QWBC_API const char* qwbc_error_message(void);

/* ---- graphs ---------------------------------------------------------- */

/* Directed ring on n nodes plus independent extra edges with probability p,
 * sampled in lexicographic pair order from the seeded stream. */
QWBC_API qwbc_status qwbc_graph_generate(int32_t n_nodes, double edge_prob, uint64_t seed,
                                         qwbc_graph** out);
/* Edge-list text format: header "n <count>", then one "src dst" pair per line. */
QWBC_API qwbc_status qwbc_graph_load(const char* path, qwbc_graph** out);
QWBC_API qwbc_status qwbc_graph_save(const qwbc_graph* g, const char* path);
QWBC_API int32_t qwbc_graph_nodes(const qwbc_graph* g);
QWBC_API int32_t qwbc_graph_edge_count(const qwbc_graph* g);
QWBC_API int qwbc_graph_strongly_connected(const qwbc_graph* g);
QWBC_API void qwbc_graph_free(qwbc_graph* g);

/* ---- configuration --------------------------------------------------- */

/* Keys: nodes, edge_prob, graphs, inits, max_rounds, target_mse, gamma0, c1,
 * c2, cij, alpha, bits, qmin, qmax, y0, seed, diag_u, trace. Values are the
 * same strings accepted in config files ("key = value" lines). */
QWBC_API qwbc_status qwbc_config_create(qwbc_config** out);
QWBC_API qwbc_status qwbc_config_load(const char* path, qwbc_config** out);
QWBC_API qwbc_status qwbc_config_set(qwbc_config* cfg, const char* key, const char* value);
QWBC_API qwbc_status qwbc_config_get(const qwbc_config* cfg, const char* key, char* buf,
                                     size_t buf_size);
QWBC_API qwbc_status qwbc_config_validate(const qwbc_config* cfg);
QWBC_API void qwbc_config_free(qwbc_config* cfg);

/* ---- experiment runs -------------------------------------------------- */

/* Monte-Carlo study of the weight-balancing algorithm alone (one trial per
 * graph realization). Any of out_csv, trace_dir, out may be NULL. Passing a
 * graph pins the topology instead of generating one per trial. */
QWBC_API qwbc_status qwbc_run_balance(const qwbc_config* cfg, const qwbc_graph* graph_or_null,
                                      const char* out_csv, const char* trace_dir,
                                      qwbc_series** out);

/* Monte-Carlo study of the joint consensus + weight-balancing algorithm
 * (graphs x inits trials). */
QWBC_API qwbc_status qwbc_run_consensus(const qwbc_config* cfg, const qwbc_graph* graph_or_null,
                                        const char* out_csv, const char* trace_dir,
                                        qwbc_series** out);

/* Aggregated series at log-spaced rounds. */
QWBC_API size_t qwbc_series_rows(const qwbc_series* s);
QWBC_API int64_t qwbc_series_round(const qwbc_series* s, size_t row);
QWBC_API double qwbc_series_mean_imbalance(const qwbc_series* s, size_t row);
QWBC_API double qwbc_series_se_imbalance(const qwbc_series* s, size_t row);
QWBC_API double qwbc_series_mean_mse(const qwbc_series* s, size_t row);
QWBC_API double qwbc_series_se_mse(const qwbc_series* s, size_t row);
/* 0 when some trial's initial average fell outside [qmin, qmax]; such runs
 * proceed, but convergence to the average is unguaranteed. */
QWBC_API int qwbc_series_averages_informative(const qwbc_series* s);
QWBC_API qwbc_status qwbc_series_write_csv(const qwbc_series* s, const char* path);
QWBC_API void qwbc_series_free(qwbc_series* s);

/* ---- bit-allocation sweep --------------------------------------------- */

/* Runs equal_split / one_bit_wb / one_bit_cons at each total bit budget and
 * records rounds-to-target on the aggregate mean MSE plus the communication
 * cost total_bits * iterations. With strict nonzero, an unconverged row turns
 * into QWBC_ERR_NOT_CONVERGED (the table is still produced). */
QWBC_API qwbc_status qwbc_sweep_run(const qwbc_config* cfg, const int32_t* totals,
                                    size_t n_totals, double target_mse, int strict,
                                    qwbc_sweep** out);
QWBC_API size_t qwbc_sweep_rows(const qwbc_sweep* s);
QWBC_API const char* qwbc_sweep_scheme(const qwbc_sweep* s, size_t row);
QWBC_API int32_t qwbc_sweep_total_bits(const qwbc_sweep* s, size_t row);
QWBC_API int32_t qwbc_sweep_bits_wb(const qwbc_sweep* s, size_t row);
QWBC_API int32_t qwbc_sweep_bits_cons(const qwbc_sweep* s, size_t row);
QWBC_API int64_t qwbc_sweep_iterations(const qwbc_sweep* s, size_t row);
QWBC_API int64_t qwbc_sweep_comm_cost(const qwbc_sweep* s, size_t row);
QWBC_API int qwbc_sweep_converged(const qwbc_sweep* s, size_t row);
QWBC_API qwbc_status qwbc_sweep_write_csv(const qwbc_sweep* s, const char* path);
QWBC_API void qwbc_sweep_free(qwbc_sweep* s);

#ifdef __cplusplus
}
#endif

#endif /* QWBC_H */
