#include "teach/explanations.hpp"

#include <algorithm>
#include <numeric>

#include "teach/io.hpp"

namespace teach {

std::vector<double> compose_explanation(const FeatureMapStack& fm, const ClassWeights& cw, int class_index) {
    if (class_index < 0 || static_cast<std::size_t>(class_index) >= cw.weights.size() ||
        static_cast<std::size_t>(class_index) >= cw.biases.size())
        throw UsageError("class index " + std::to_string(class_index) + " has no class weights");
    const auto& w = cw.weights[class_index];
    if (w.size() != fm.channels())
        throw DataError("item '" + fm.item_id + "': " + std::to_string(fm.channels()) + " feature channels but " +
                        std::to_string(w.size()) + " class weights");
    const std::size_t n = fm.pixel_count();
    std::vector<double> out(n, cw.biases[class_index]);
    for (std::size_t k = 0; k < fm.channels(); ++k) {
        if (fm.maps[k].size() != n)
            throw DataError("item '" + fm.item_id + "': channel " + std::to_string(k) + " has wrong size");
        for (std::size_t j = 0; j < n; ++j) out[j] += w[k] * fm.maps[k][j];
    }
    return out;
}

std::vector<double> normalize_map(std::span<const double> raw) {
    if (raw.empty()) throw UsageError("cannot normalize an empty map");
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    const double min = *lo;
    const double range = *hi - min;
    std::vector<double> out(raw.size(), 0.0);
    if (range > 0.0)
        for (std::size_t j = 0; j < raw.size(); ++j) out[j] = std::clamp((raw[j] - min) / range, 0.0, 1.0);
    return out;
}

double entropy_difficulty(std::span<const double> e) {
    if (e.empty()) throw UsageError("entropy of an empty map");
    double sum = 0.0;
    for (double v : e) {
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("explanation value " + std::to_string(v) + " outside [0,1]");
        if (v > 0.0) sum += v * std::log(v);
    }
    return -sum / static_cast<double>(e.size());
}

std::optional<double> effective_difficulty(const Item& item) {
    if (item.difficulty_override) return item.difficulty_override;
    if (item.explanation) return item.explanation->difficulty;
    return std::nullopt;
}

Dataset center_difficulties(const Dataset& ds) {
    std::vector<Item> items = ds.items();
    const std::size_t C = ds.num_classes();
    std::vector<std::vector<std::size_t>> centered(C);
    std::vector<std::size_t> explained(C, 0);

    for (std::size_t i = 0; i < items.size(); ++i) {
        Item& it = items[i];
        if (it.difficulty_override) {
            if (*it.difficulty_override == 0.0) it.difficulty_override = kDifficultyEpsilon;
            ++explained[it.class_index];
        } else if (it.explanation) {
            centered[it.class_index].push_back(i);
            ++explained[it.class_index];
        } else {
            throw DataError("item '" + it.id + "' has neither an explanation nor a difficulty override");
        }
    }

    for (std::size_t c = 0; c < C; ++c) {
        if (explained[c] == 0) throw DataError("class '" + ds.classes()[c] + "' has no explained items");
        const auto& members = centered[c];
        if (members.empty()) continue;
        double mean = 0.0;
        for (std::size_t i : members) mean += items[i].explanation->difficulty;
        mean /= static_cast<double>(members.size());
        double min_dev = kInf;
        for (std::size_t i : members) min_dev = std::min(min_dev, items[i].explanation->difficulty - mean);
        const double shift = std::max(0.0, -min_dev) + kDifficultyEpsilon;
        for (std::size_t i : members) {
            double& d = items[i].explanation->difficulty;
            d = std::max(d - mean + shift, kDifficultyEpsilon);
        }
    }
    return Dataset(ds.classes(), ds.dim(), std::move(items));
}

FeatureMapFile feature_maps_from_json(const nlohmann::json& j) {
    FeatureMapFile f;
    try {
        f.channels = j.at("K").get<int>();
        f.width = j.at("width").get<int>();
        f.height = j.at("height").get<int>();
        f.class_weights.weights = j.at("class_weights").get<std::vector<std::vector<double>>>();
        f.class_weights.biases = j.at("class_biases").get<std::vector<double>>();
        for (const auto& ji : j.at("items")) {
            FeatureMapStack s;
            s.item_id = ji.at("id").get<std::string>();
            s.width = f.width;
            s.height = f.height;
            s.maps = ji.at("maps").get<std::vector<std::vector<double>>>();
            f.items.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("feature-map file: ") + e.what());
    }
    if (f.channels < 1 || f.width < 1 || f.height < 1) throw DataError("feature-map file: K, width and height must be positive");
    if (f.class_weights.weights.size() != f.class_weights.biases.size())
        throw DataError("feature-map file: class_weights and class_biases differ in length");
    for (const auto& w : f.class_weights.weights)
        if (w.size() != static_cast<std::size_t>(f.channels))
            throw DataError("feature-map file: class weight vector length differs from K");
    for (const auto& s : f.items) {
        if (s.channels() != static_cast<std::size_t>(f.channels))
            throw DataError("feature-map file: item '" + s.item_id + "' does not have K maps");
        for (const auto& m : s.maps)
            if (m.size() != s.pixel_count())
                throw DataError("feature-map file: item '" + s.item_id + "' has a map of the wrong size");
    }
    return f;
}

FeatureMapFile load_feature_maps(const std::filesystem::path& path) { return feature_maps_from_json(read_json_file(path)); }

Dataset attach_explanations(const Dataset& ds, const FeatureMapFile& fm) {
    if (fm.class_weights.weights.size() != ds.num_classes())
        throw DataError("feature-map file has weights for " + std::to_string(fm.class_weights.weights.size()) +
                        " classes, dataset has " + std::to_string(ds.num_classes()));
    std::vector<Item> items = ds.items();
    for (const auto& stack : fm.items) {
        Item& it = items[ds.index_of(stack.item_id)];
        ExplanationMap e;
        e.width = stack.width;
        e.height = stack.height;
        e.values = normalize_map(compose_explanation(stack, fm.class_weights, it.class_index));
        e.difficulty = entropy_difficulty(e.values);
        it.explanation = std::move(e);
    }
    return center_difficulties(Dataset(ds.classes(), ds.dim(), std::move(items)));
}

} // namespace teach
