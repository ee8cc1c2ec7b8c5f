#include "teach/core.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

namespace teach {

Dataset::Dataset(std::vector<std::string> classes, std::size_t d, std::vector<Item> items)
    : classes_(std::move(classes)), d_(d), items_(std::move(items)) {
    if (classes_.size() < 2) throw DataError("dataset needs at least 2 classes");
    if (d_ == 0) throw DataError("feature dimensionality must be positive");

    std::optional<std::pair<int, int>> grid;
    index_.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const Item& it = items_[i];
        if (!index_.emplace(it.id, i).second) throw DataError("duplicate item id '" + it.id + "'");
        if (it.features.size() != d_)
            throw DataError("item '" + it.id + "' has " + std::to_string(it.features.size()) +
                            " features, expected " + std::to_string(d_));
        if (it.class_index < 0 || static_cast<std::size_t>(it.class_index) >= classes_.size())
            throw DataError("item '" + it.id + "' has invalid class " + std::to_string(it.class_index));
        for (double v : it.features)
            if (!std::isfinite(v)) throw DataError("item '" + it.id + "' has a non-finite feature");
        if (it.difficulty_override && !(*it.difficulty_override >= 0.0))
            throw DataError("item '" + it.id + "' has a negative difficulty override");
        if (it.explanation) {
            const ExplanationMap& e = *it.explanation;
            if (e.width <= 0 || e.height <= 0)
                throw DataError("item '" + it.id + "' has non-positive explanation dimensions");
            if (e.values.size() != e.pixel_count())
                throw DataError("item '" + it.id + "' explanation has wrong value count");
            for (double v : e.values)
                if (!(v >= 0.0 && v <= 1.0))
                    throw DataError("item '" + it.id + "' explanation value outside [0,1]");
            if (!(e.difficulty >= 0.0))
                throw DataError("item '" + it.id + "' explanation has negative difficulty");
            if (!grid) {
                grid = {e.width, e.height};
            } else if (grid->first != e.width || grid->second != e.height) {
                throw DataError("mixed explanation dimensions: item '" + it.id + "' is " +
                                std::to_string(e.width) + "x" + std::to_string(e.height) + ", expected " +
                                std::to_string(grid->first) + "x" + std::to_string(grid->second));
            }
        }
    }
}

std::size_t Dataset::index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw DataError("unknown item id '" + std::string(id) + "'");
    return it->second;
}

bool Dataset::contains(std::string_view id) const { return index_.count(std::string(id)) != 0; }

HypothesisSpace::HypothesisSpace(std::size_t d, std::vector<Hypothesis> hypotheses,
                                 std::vector<std::size_t> h_star)
    : d_(d), hypotheses_(std::move(hypotheses)), h_star_(std::move(h_star)) {
    for (std::size_t i = 0; i < hypotheses_.size(); ++i) {
        const Hypothesis& h = hypotheses_[i];
        if (h.weights.size() != d_)
            throw DataError("hypothesis " + std::to_string(i) + " has " + std::to_string(h.weights.size()) +
                            " weights, expected " + std::to_string(d_));
        const bool all_zero = std::all_of(h.weights.begin(), h.weights.end(), [](double w) { return w == 0.0; });
        if (all_zero && h.bias == 0.0) throw DataError("hypothesis " + std::to_string(i) + " is the zero hypothesis");
    }
    if (h_star_.size() < 2) throw DataError("h_star must name one hypothesis per class (C >= 2)");
    if (hypotheses_.size() < h_star_.size()) throw DataError("hypothesis space smaller than the class count");
    std::set<std::size_t> seen;
    for (std::size_t idx : h_star_) {
        if (idx >= hypotheses_.size()) throw DataError("h_star index " + std::to_string(idx) + " out of range");
        if (!seen.insert(idx).second) throw DataError("h_star indices must be distinct");
    }
}

void LearnerParams::validate() const {
    if (!(alpha > 0.0) || std::isinf(alpha)) throw UsageError("alpha must be a positive finite number");
    if (!(beta > 0.0)) throw UsageError("beta must be positive or inf");
    if (!(gamma > 0.0)) throw UsageError("gamma must be positive or inf");
}

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
    case Strategy::RandIm: return "RAND_IM";
    case Strategy::RandExp: return "RAND_EXP";
    case Strategy::Strict: return "STRICT";
    case Strategy::Explain: return "EXPLAIN";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char ch) { return std::toupper(ch); });
    for (Strategy s : {Strategy::RandIm, Strategy::RandExp, Strategy::Strict, Strategy::Explain})
        if (upper == to_string(s)) return s;
    throw UsageError("unknown strategy '" + std::string(name) + "'");
}

bool is_random(Strategy s) noexcept { return s == Strategy::RandIm || s == Strategy::RandExp; }

bool shows_explanation(Strategy s) noexcept { return s == Strategy::RandExp || s == Strategy::Explain; }

Split split_dataset(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw UsageError("train fraction must lie strictly between 0 and 1");

    std::vector<std::vector<std::size_t>> by_class(ds.num_classes());
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.item(i).class_index].push_back(i);

    std::vector<char> in_train(ds.size(), 0);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        if (members.size() < 2)
            throw DataError("class '" + ds.classes()[c] + "' has fewer than 2 items; cannot stratify");
        std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (c + 1));
        std::shuffle(members.begin(), members.end(), rng);
        auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(members.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
        for (std::size_t k = 0; k < n_train; ++k) in_train[members[k]] = 1;
    }

    Split split;
    for (std::size_t i = 0; i < ds.size(); ++i) (in_train[i] ? split.train : split.test).push_back(ds.item(i).id);
    return split;
}

std::vector<std::size_t> indices_of(const Dataset& ds, std::span<const std::string> ids) {
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(ds.index_of(id));
    return out;
}

} // namespace teach
