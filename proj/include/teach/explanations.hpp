#pragma once

// Class-activation style explanation maps and their entropy difficulty.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "teach/core.hpp"

namespace teach {

/// Final-layer feature maps for one item: K row-major grids of width x height.
struct FeatureMapStack {
    std::string item_id;
    int width = 0;
    int height = 0;
    std::vector<std::vector<double>> maps;

    std::size_t channels() const noexcept { return maps.size(); }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
};

/// Fully connected weights per class: weights[c] has one entry per channel.
struct ClassWeights {
    std::vector<std::vector<double>> weights;
    std::vector<double> biases;
};

/// Offsets used to keep centered difficulties strictly positive.
inline constexpr double kDifficultyEpsilon = 1e-6;

/// Cell j of the result is sum_k w_c[k] * maps[k][j] + b_c.
std::vector<double> compose_explanation(const FeatureMapStack& fm, const ClassWeights& cw, int class_index);

/// Min-max rescale to [0,1]. A constant grid maps to all zeros.
std::vector<double> normalize_map(std::span<const double> raw);

/// -(1/J) sum_j e(j) ln e(j), with 0 ln 0 = 0. Values must lie in [0,1].
double entropy_difficulty(std::span<const double> e);

/// Difficulty the learner model sees: the override if present, else the explanation's.
std::optional<double> effective_difficulty(const Item& item);

/// Per-class mean removal followed by a shift so each class minimum is kDifficultyEpsilon.
/// Overridden items keep their override (0 is clamped to kDifficultyEpsilon).
Dataset center_difficulties(const Dataset& ds);

struct FeatureMapFile {
    int channels = 0;
    int width = 0;
    int height = 0;
    ClassWeights class_weights;
    std::vector<FeatureMapStack> items;
};

FeatureMapFile load_feature_maps(const std::filesystem::path& path);
FeatureMapFile feature_maps_from_json(const nlohmann::json& j);

/// Builds normalized explanations with raw entropy difficulties for every item that has feature
/// maps, then centers difficulties class by class.
Dataset attach_explanations(const Dataset& ds, const FeatureMapFile& fm);

} // namespace teach
