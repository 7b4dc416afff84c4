/* C interface to the SABER engine. All strings are UTF-8. Functions that
 * return a status use SABER_OK or one of the error codes below; the message of
 * the most recent failure on a handle is available from saber_last_error. */
#ifndef SABER_SABER_H
#define SABER_SABER_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SABER_API __declspec(dllexport)
#else
#define SABER_API __attribute__((visibility("default")))
#endif

typedef enum saber_status {
   SABER_OK = 0,
   SABER_ERR_CONFIG = 1,
   SABER_ERR_SYNTAX = 2,
   SABER_ERR_BINDING = 3,
   SABER_ERR_BACKEND = 4,
   SABER_ERR_IO = 5,
   SABER_ERR_INTERNAL = 6
} saber_status;

typedef enum saber_output {
   SABER_OUTPUT_ALIGNED = 0,
   SABER_OUTPUT_CSV = 1,
   SABER_OUTPUT_JSON = 2
} saber_output;

typedef struct saber_engine saber_engine;
typedef struct saber_result saber_result;

/* config_path may be NULL for defaults (mock backend, no tables). On failure
 * *out is NULL and, if err is non-NULL, *err receives a message to release
 * with saber_string_free. */
SABER_API saber_status saber_engine_new(const char* config_path, saber_engine** out, char** err);
/* Same, from config text; relative paths resolve against base_dir. */
SABER_API saber_status saber_engine_from_json(const char* json, const char* base_dir, saber_engine** out, char** err);
SABER_API void saber_engine_free(saber_engine* engine);

/* Message of the last failed call on engine; empty after a success. Owned by
 * the engine, valid until the next call. */
SABER_API const char* saber_last_error(const saber_engine* engine);
/* Line and column of the last syntax error, 0 if none. */
SABER_API size_t saber_last_error_line(const saber_engine* engine);
SABER_API size_t saber_last_error_column(const saber_engine* engine);

SABER_API saber_status saber_set_backend(saber_engine* engine, const char* name);
SABER_API saber_status saber_set_threshold(saber_engine* engine, double theta);
SABER_API saber_status saber_set_optimize(saber_engine* engine, int enabled);
/* Output format named by the config file. */
SABER_API saber_output saber_default_output(const saber_engine* engine);

/* format: "csv", "tsv", "jsonl" or NULL to infer from the extension. */
SABER_API saber_status saber_load_table(saber_engine* engine, const char* name, const char* path, const char* format, int header);
/* Writes the movie fixture into dir. */
SABER_API saber_status saber_build_fixture(const char* dir, char** err);

/* Strings returned through char** are heap-allocated; free with
 * saber_string_free. */
SABER_API saber_status saber_tables(saber_engine* engine, char** out);
SABER_API saber_status saber_schema(saber_engine* engine, const char* table, char** out);
SABER_API saber_status saber_explain(saber_engine* engine, const char* sql, char** out);
SABER_API saber_status saber_rewrite(saber_engine* engine, const char* sql, const char* target, char** out);

SABER_API saber_status saber_query(saber_engine* engine, const char* sql, saber_result** out);
SABER_API void saber_result_free(saber_result* result);
SABER_API size_t saber_result_rows(const saber_result* result);
SABER_API size_t saber_result_columns(const saber_result* result);
/* Borrowed; NULL when out of range. */
SABER_API const char* saber_result_column_name(const saber_result* result, size_t column);
/* Borrowed; NULL for SQL NULL or out of range. */
SABER_API const char* saber_result_value(const saber_result* result, size_t row, size_t column);
SABER_API saber_status saber_result_render(const saber_result* result, saber_output format, char** out);
SABER_API saber_status saber_result_stats_json(const saber_result* result, char** out);
SABER_API size_t saber_result_semantic_calls(const saber_result* result);

/* Calls logged since creation or the last reset. */
SABER_API size_t saber_call_count(const saber_engine* engine);
SABER_API saber_status saber_call_log_jsonl(const saber_engine* engine, char** out);
SABER_API void saber_call_log_reset(saber_engine* engine);

SABER_API void saber_string_free(char* s);
SABER_API const char* saber_status_name(saber_status status);

#ifdef __cplusplus
}
#endif

#endif
