#pragma once

// On-disk formats: dataset, hypothesis and teaching-set files (JSON, UTF-8).

#include <filesystem>
#include <optional>

#include "json.hpp"
#include "teach/core.hpp"

namespace teach {

using json = nlohmann::json;

json read_json_file(const std::filesystem::path& path);
/// Writes `doc` pretty-printed with a trailing newline. Output is byte-stable for equal documents.
void write_json_file(const std::filesystem::path& path, const json& doc);

/// Non-finite reals are written as the strings "inf" / "-inf".
json real_to_json(double v);
double real_from_json(const json& j);

Dataset dataset_from_json(const json& j);
json dataset_to_json(const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

/// A hypothesis space plus the train/test split it was generated from, when known.
struct HypothesisFile {
    HypothesisSpace space;
    std::optional<Split> split;
};

HypothesisFile hypothesis_file_from_json(const json& j);
json hypothesis_file_to_json(const HypothesisFile& hf);
HypothesisFile load_hypotheses(const std::filesystem::path& path);
void write_hypotheses(const HypothesisFile& hf, const std::filesystem::path& path);

json params_to_json(const LearnerParams& p);
LearnerParams params_from_json(const json& j);

TeachingSet teaching_set_from_json(const json& j);
json teaching_set_to_json(const TeachingSet& ts);
TeachingSet load_teaching_set(const std::filesystem::path& path);
void write_teaching_set(const TeachingSet& ts, const std::filesystem::path& path);

} // namespace teach
