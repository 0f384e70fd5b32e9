/*
 * atm: acoustic topic models for music genre interpretation.
 *
 * C interface to the shared library. Every handle is opaque and owned by the
 * caller; release it with the matching *_destroy function. Functions return
 * ATM_OK or an error status; atm_last_error() then holds a message for the
 * calling thread. Strings returned through char** must be freed with
 * atm_free_string().
 */
#ifndef ATM_ATM_H_
#define ATM_ATM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef ATM_BUILDING_LIBRARY
#    define ATM_API __declspec(dllexport)
#  else
#    define ATM_API __declspec(dllimport)
#  endif
#elif defined(__GNUC__) || defined(__clang__)
#  define ATM_API __attribute__((visibility("default")))
#else
#  define ATM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define ATM_VERSION_MAJOR 0
#define ATM_VERSION_MINOR 3
#define ATM_VERSION_PATCH 0

typedef enum atm_status {
  ATM_OK = 0,
  ATM_ERR_INVALID_ARGUMENT = 1,
  ATM_ERR_IO,
  ATM_ERR_MALFORMED_WAV,
  ATM_ERR_UNSUPPORTED_ENCODING,
  ATM_ERR_SIGNAL_TOO_SHORT,
  ATM_ERR_CLIP_TOO_SHORT,
  ATM_ERR_DEGENERATE_BAND,
  ATM_ERR_INSUFFICIENT_DATA,
  ATM_ERR_DIMENSION_MISMATCH,
  ATM_ERR_EMPTY_DOCUMENT,
  ATM_ERR_MISSING_LABEL,
  ATM_ERR_EMPTY_CORPUS,
  ATM_ERR_UNKNOWN_WORD,
  ATM_ERR_ZERO_PROBABILITY_WORD,
  ATM_ERR_UNUSED_WORD,
  ATM_ERR_MISSING_WORD_PROFILE,
  ATM_ERR_MISSING_TOPIC_PROFILE,
  ATM_ERR_WINDOW_TOO_LARGE,
  ATM_ERR_GENRE_TOO_SMALL,
  ATM_ERR_SINGLE_CLASS,
  ATM_ERR_EMPTY_TEST_SET,
  ATM_ERR_UNKNOWN_GENRE,
  ATM_ERR_TIMELINE_TOO_SHORT,
  ATM_ERR_EMPTY_DATASET,
  ATM_ERR_DUPLICATE_SONG_ID,
  ATM_ERR_MISSING_ARTIFACT,
  ATM_ERR_SCHEMA,
  ATM_ERR_INTERNAL
} atm_status;

typedef enum atm_stage {
  ATM_STAGE_FEATURES = 0,
  ATM_STAGE_VOCAB,
  ATM_STAGE_TRAIN,
  ATM_STAGE_EVAL,
  ATM_STAGE_INTERPRET,
  ATM_STAGE_VIZ
} atm_stage;

typedef struct atm_config atm_config;
typedef struct atm_manifest atm_manifest;
typedef struct atm_vocab atm_vocab;
typedef struct atm_model atm_model;

ATM_API const char* atm_version(void);
ATM_API const char* atm_status_name(atm_status status);
/* Message for the last failing call on this thread; "" if none. */
ATM_API const char* atm_last_error(void);
ATM_API void atm_free_string(char* s);

/* ---- run configuration ---- */
ATM_API atm_status atm_config_create(atm_config** out);
/* Applies the keys of a JSON object on top of the current values. */
ATM_API atm_status atm_config_merge_json(atm_config* config, const char* json);
ATM_API atm_status atm_config_to_json(const atm_config* config, char** out_json);
ATM_API void atm_config_destroy(atm_config* config);

/* ---- dataset manifest ---- */
ATM_API atm_status atm_scan_dataset(const char* root, atm_manifest** out);
ATM_API atm_status atm_manifest_load(const char* path, atm_manifest** out);
ATM_API atm_status atm_manifest_save(const atm_manifest* manifest, const char* path);
ATM_API size_t atm_manifest_size(const atm_manifest* manifest);
/* Borrowed pointers, valid until the manifest is destroyed. */
ATM_API atm_status atm_manifest_entry(const atm_manifest* manifest, size_t index, const char** song_id,
                                      const char** genre, const char** path);
ATM_API void atm_manifest_destroy(atm_manifest* manifest);

/* ---- pipeline ---- */
ATM_API atm_status atm_run_stage(const atm_manifest* manifest, const atm_config* config, int bucket_id,
                                 atm_stage stage);
/* Every configured bucket, every stage, plus the combined accuracy grid. */
ATM_API atm_status atm_run_all(const atm_manifest* manifest, const atm_config* config);
/* Synthetic rock/metal/pop dataset for tests and demos. */
ATM_API atm_status atm_make_fixture(const char* dir, uint64_t seed, size_t songs_per_genre, double seconds);

/* ---- per-song features ---- */
/* Row-major [n_clips x n_coeffs] MFCC matrix for one WAV file; free with
 * atm_free_doubles. A null config selects the defaults. */
ATM_API atm_status atm_song_features(const char* wav_path, const atm_config* config, double** out_values,
                                     size_t* out_clips, size_t* out_coeffs);
ATM_API void atm_free_doubles(double* values);

/* ---- codebook ---- */
ATM_API atm_status atm_vocab_load(const char* path, atm_vocab** out);
ATM_API size_t atm_vocab_size(const atm_vocab* vocab);
ATM_API size_t atm_vocab_feature_dim(const atm_vocab* vocab);
ATM_API atm_status atm_vocab_assign(const atm_vocab* vocab, const double* feature, size_t dim, uint32_t* out_word);
ATM_API void atm_vocab_destroy(atm_vocab* vocab);

/* ---- topic model ---- */
ATM_API atm_status atm_model_load(const char* path, atm_model** out);
ATM_API size_t atm_model_topics(const atm_model* model);
ATM_API size_t atm_model_vocab_size(const atm_model* model);
/* out must hold atm_model_topics() doubles. */
ATM_API atm_status atm_model_term_topic_posterior(const atm_model* model, uint32_t word, double* out, size_t out_len);
ATM_API atm_status atm_model_infer_theta(const atm_model* model, const uint32_t* tokens, size_t n_tokens,
                                         size_t n_iters, uint64_t seed, double* out, size_t out_len);
ATM_API void atm_model_destroy(atm_model* model);

#ifdef __cplusplus
}
#endif

#endif /* ATM_ATM_H_ */
