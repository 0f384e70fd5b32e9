#pragma once

#include <filesystem>
#include <string>

#include "atm/eval.hpp"
#include "atm/interpret.hpp"
#include "atm/lda.hpp"
#include "atm/viz.hpp"
#include "atm/vocab.hpp"
#include "json.hpp"

namespace atm {

inline constexpr int kVocabSchemaVersion = 1;
inline constexpr int kModelSchemaVersion = 1;

nlohmann::json vocabulary_to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const LdaModel& model);
LdaModel model_from_json(const nlohmann::json& j);

nlohmann::json distribution_to_json(const GenreDistribution& dist, int significant_digits = 17);
GenreDistribution distribution_from_json(const nlohmann::json& j);

nlohmann::json accuracy_to_json(const AccuracyTable& table);
AccuracyTable accuracy_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

/// Reads a whole file; throws Io when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Throws Schema with the field name when a required key is absent.
const nlohmann::json& require(const nlohmann::json& j, const char* key);

}  // namespace atm
