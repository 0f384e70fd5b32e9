#include "atm/atm.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "atm/error.hpp"
#include "atm/fixture.hpp"
#include "atm/lda.hpp"
#include "atm/pipeline.hpp"
#include "atm/serialize.hpp"
#include "atm/vocab.hpp"

struct atm_config {
  atm::RunConfig value;
};
struct atm_manifest {
  atm::DatasetManifest value;
};
struct atm_vocab {
  atm::Vocabulary value;
};
struct atm_model {
  atm::LdaModel value;
};

namespace {

thread_local std::string g_last_error;

template <class F>
atm_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return ATM_OK;
  } catch (const atm::Error& e) {
    g_last_error = e.what();
    return static_cast<atm_status>(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("Schema: ") + e.what();
    return ATM_ERR_SCHEMA;
  } catch (const std::exception& e) {
    g_last_error = std::string("Internal: ") + e.what();
    return ATM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "Internal: unknown exception";
    return ATM_ERR_INTERNAL;
  }
}

void require_arg(bool ok, const char* what) {
  if (!ok) atm::fail(atm::ErrorCode::InvalidArgument, what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* atm_version(void) { return "0.3.0"; }

const char* atm_status_name(atm_status status) {
  if (status == ATM_OK) return "Ok";
  return atm::error_code_name(static_cast<atm::ErrorCode>(status));
}

const char* atm_last_error(void) { return g_last_error.c_str(); }

void atm_free_string(char* s) { std::free(s); }

atm_status atm_config_create(atm_config** out) {
  return guarded([&] {
    require_arg(out, "out is null");
    *out = new atm_config{};
  });
}

atm_status atm_config_merge_json(atm_config* config, const char* json) {
  return guarded([&] {
    require_arg(config && json, "null argument");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      atm::fail(atm::ErrorCode::InvalidArgument, std::string("config JSON: ") + e.what());
    }
    atm::RunConfig merged = atm::config_from_json(j, config->value);
    atm::validate(merged);
    config->value = std::move(merged);
  });
}

atm_status atm_config_to_json(const atm_config* config, char** out_json) {
  return guarded([&] {
    require_arg(config && out_json, "null argument");
    *out_json = copy_string(atm::config_to_json(config->value).dump(2));
  });
}

void atm_config_destroy(atm_config* config) { delete config; }

atm_status atm_scan_dataset(const char* root, atm_manifest** out) {
  return guarded([&] {
    require_arg(root && out, "null argument");
    *out = new atm_manifest{atm::scan_dataset(root)};
  });
}

atm_status atm_manifest_load(const char* path, atm_manifest** out) {
  return guarded([&] {
    require_arg(path && out, "null argument");
    *out = new atm_manifest{atm::manifest_from_json(atm::read_json_file(path))};
  });
}

atm_status atm_manifest_save(const atm_manifest* manifest, const char* path) {
  return guarded([&] {
    require_arg(manifest && path, "null argument");
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    const std::string text = atm::manifest_to_json(manifest->value).dump(1) + "\n";
    std::FILE* f = std::fopen(path, "wb");
    if (!f) atm::fail(atm::ErrorCode::Io, std::string("cannot write ") + path);
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    std::fclose(f);
    if (!ok) atm::fail(atm::ErrorCode::Io, std::string("short write to ") + path);
  });
}

size_t atm_manifest_size(const atm_manifest* manifest) {
  return manifest ? manifest->value.entries.size() : 0;
}

atm_status atm_manifest_entry(const atm_manifest* manifest, size_t index, const char** song_id,
                              const char** genre, const char** path) {
  return guarded([&] {
    require_arg(manifest, "null manifest");
    require_arg(index < manifest->value.entries.size(), "index out of range");
    const auto& e = manifest->value.entries[index];
    if (song_id) *song_id = e.song_id.c_str();
    if (genre) *genre = e.genre.c_str();
    if (path) *path = e.path.c_str();
  });
}

void atm_manifest_destroy(atm_manifest* manifest) { delete manifest; }

atm_status atm_run_stage(const atm_manifest* manifest, const atm_config* config, int bucket_id, atm_stage stage) {
  return guarded([&] {
    require_arg(manifest && config, "null argument");
    require_arg(stage >= ATM_STAGE_FEATURES && stage <= ATM_STAGE_VIZ, "unknown stage");
    atm::Pipeline pipeline(manifest->value, config->value);
    pipeline.run_stage(static_cast<atm::Stage>(stage), bucket_id);
  });
}

atm_status atm_run_all(const atm_manifest* manifest, const atm_config* config) {
  return guarded([&] {
    require_arg(manifest && config, "null argument");
    atm::Pipeline pipeline(manifest->value, config->value);
    pipeline.run_all();
  });
}

atm_status atm_make_fixture(const char* dir, uint64_t seed, size_t songs_per_genre, double seconds) {
  return guarded([&] {
    require_arg(dir, "null dir");
    atm::make_fixture(dir, {seed, songs_per_genre, seconds});
  });
}

atm_status atm_song_features(const char* wav_path, const atm_config* config, double** out_values,
                             size_t* out_clips, size_t* out_coeffs) {
  return guarded([&] {
    require_arg(wav_path && out_values && out_clips && out_coeffs, "null argument");
    const atm::RunConfig defaults;
    const auto& c = config ? config->value : defaults;
    const atm::MfccExtractor extractor(c.mfcc, c.sample_rate);
    const auto signal = atm::load_song(wav_path, c.sample_rate);
    const auto clips = atm::segment_clips(signal, std::filesystem::path(wav_path).stem().string(), c.clip_seconds);
    const std::size_t dim = c.mfcc.n_coeffs;
    auto* values = static_cast<double*>(std::malloc(clips.size() * dim * sizeof(double)));
    if (!values) throw std::bad_alloc();
    try {
      for (std::size_t i = 0; i < clips.size(); ++i) {
        const auto f = extractor.compute(clips[i]);
        std::memcpy(values + i * dim, f.values.data(), dim * sizeof(double));
      }
    } catch (...) {
      std::free(values);
      throw;
    }
    *out_values = values;
    *out_clips = clips.size();
    *out_coeffs = dim;
  });
}

void atm_free_doubles(double* values) { std::free(values); }

atm_status atm_vocab_load(const char* path, atm_vocab** out) {
  return guarded([&] {
    require_arg(path && out, "null argument");
    *out = new atm_vocab{atm::vocabulary_from_json(atm::read_json_file(path))};
  });
}

size_t atm_vocab_size(const atm_vocab* vocab) { return vocab ? vocab->value.size() : 0; }
size_t atm_vocab_feature_dim(const atm_vocab* vocab) { return vocab ? vocab->value.feature_dim() : 0; }

atm_status atm_vocab_assign(const atm_vocab* vocab, const double* feature, size_t dim, uint32_t* out_word) {
  return guarded([&] {
    require_arg(vocab && feature && out_word, "null argument");
    *out_word = atm::assign_word(vocab->value, std::span<const double>(feature, dim));
  });
}

void atm_vocab_destroy(atm_vocab* vocab) { delete vocab; }

atm_status atm_model_load(const char* path, atm_model** out) {
  return guarded([&] {
    require_arg(path && out, "null argument");
    *out = new atm_model{atm::model_from_json(atm::read_json_file(path))};
  });
}

size_t atm_model_topics(const atm_model* model) { return model ? model->value.n_topics : 0; }
size_t atm_model_vocab_size(const atm_model* model) { return model ? model->value.vocab_size : 0; }

atm_status atm_model_term_topic_posterior(const atm_model* model, uint32_t word, double* out, size_t out_len) {
  return guarded([&] {
    require_arg(model && out, "null argument");
    require_arg(out_len >= model->value.n_topics, "output buffer shorter than topic count");
    const auto post = atm::term_topic_posterior(model->value, word);
    std::copy(post.begin(), post.end(), out);
  });
}

atm_status atm_model_infer_theta(const atm_model* model, const uint32_t* tokens, size_t n_tokens, size_t n_iters,
                                 uint64_t seed, double* out, size_t out_len) {
  return guarded([&] {
    require_arg(model && out && (tokens || n_tokens == 0), "null argument");
    require_arg(out_len >= model->value.n_topics, "output buffer shorter than topic count");
    const std::span<const atm::WordId> span(tokens, n_tokens);
    const auto theta = atm::infer_theta(model->value, span, n_iters, seed);
    std::copy(theta.begin(), theta.end(), out);
  });
}

void atm_model_destroy(atm_model* model) { delete model; }

}  // extern "C"
