#pragma once

// Synthetic datasets and random problem instances shared by unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "teach/core.hpp"
#include "teach/explanations.hpp"

namespace fixtures {

inline teach::Item item(std::string id, int cls, std::vector<double> features) {
    teach::Item it;
    it.id = std::move(id);
    it.class_index = cls;
    it.features = std::move(features);
    return it;
}

inline std::vector<std::string> class_names(std::size_t C) {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < C; ++c) names.push_back("class" + std::to_string(c));
    return names;
}

inline std::vector<std::string> all_ids(const teach::Dataset& ds) {
    std::vector<std::string> ids;
    for (const auto& it : ds.items()) ids.push_back(it.id);
    return ids;
}

/// An 8x8 explanation grid: a blob of `hot` bright pixels over faint noise, normalized.
inline teach::ExplanationMap synthetic_explanation(std::mt19937_64& rng, int hot) {
    std::uniform_real_distribution<double> noise(0.0, 0.3);
    std::vector<double> raw(64);
    for (double& v : raw) v = noise(rng);
    std::uniform_int_distribution<int> pos(0, 63);
    for (int k = 0; k < hot; ++k) raw[pos(rng)] = 1.0;
    teach::ExplanationMap e;
    e.width = 8;
    e.height = 8;
    e.values = teach::normalize_map(raw);
    e.difficulty = teach::entropy_difficulty(e.values);
    return e;
}

struct GaussianSpec {
    std::vector<std::vector<double>> means; // one per class
    double sigma = 1.0;
    std::size_t per_class = 100;
    double outlier_fraction = 0.0; // planted per class
    double outlier_sigmas = 10.0;  // distance of outliers from their class mean, in sigma
    bool explanations = false;
    std::uint64_t seed = 1;
};

/// Isotropic Gaussian classes. Outliers sit outlier_sigmas * sigma from the class mean, pushed
/// directly away from the centroid of all class means so they keep their label.
inline teach::Dataset gaussian_dataset(const GaussianSpec& spec) {
    const std::size_t C = spec.means.size();
    const std::size_t d = spec.means[0].size();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> hot(2, 40);

    std::vector<double> centroid(d, 0.0);
    for (const auto& m : spec.means)
        for (std::size_t k = 0; k < d; ++k) centroid[k] += m[k] / static_cast<double>(C);

    std::vector<teach::Item> items;
    const auto n_out = static_cast<std::size_t>(std::lround(spec.outlier_fraction * static_cast<double>(spec.per_class)));
    for (std::size_t c = 0; c < C; ++c) {
        std::vector<double> away(d);
        double norm = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            away[k] = spec.means[c][k] - centroid[k];
            norm += away[k] * away[k];
        }
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < spec.per_class; ++i) {
            std::vector<double> x(d);
            const bool outlier = i < n_out;
            for (std::size_t k = 0; k < d; ++k) {
                x[k] = spec.means[c][k] + spec.sigma * normal(rng);
                if (outlier && norm > 0) x[k] += spec.outlier_sigmas * spec.sigma * away[k] / norm;
            }
            auto it = item((outlier ? "out" : "c") + std::to_string(c) + "_" + std::to_string(i), static_cast<int>(c), x);
            if (spec.explanations) it.explanation = synthetic_explanation(rng, hot(rng));
            items.push_back(std::move(it));
        }
    }
    teach::Dataset ds(class_names(C), d, std::move(items));
    return spec.explanations ? teach::center_difficulties(ds) : ds;
}

/// Small random instance for oracle comparisons: random features, labels, hypotheses and
/// difficulty overrides.
struct RandomInstance {
    teach::Dataset ds;
    teach::HypothesisSpace hs;
    teach::LearnerParams params;
    std::vector<std::string> pool;
};

inline RandomInstance random_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_c(2, 4), pick_h(2, 20), pick_x(4, 50), pick_d(2, 4);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const std::size_t C = pick_c(rng);
    std::size_t H = std::max(pick_h(rng), C);
    const std::size_t X = std::max(pick_x(rng), 2 * C);
    const std::size_t d = pick_d(rng);

    std::vector<teach::Item> items;
    for (std::size_t i = 0; i < X; ++i) {
        std::vector<double> x(d);
        for (double& v : x) v = 2.0 * normal(rng);
        const int cls = static_cast<int>(i < C ? i : std::uniform_int_distribution<std::size_t>(0, C - 1)(rng));
        auto it = item("x" + std::to_string(i), cls, x);
        it.difficulty_override = uni(rng);
        items.push_back(std::move(it));
    }

    std::vector<teach::Hypothesis> hyps;
    for (std::size_t h = 0; h < H; ++h) {
        teach::Hypothesis hy;
        hy.weights.resize(d);
        for (double& w : hy.weights) w = normal(rng);
        hy.bias = 0.5 * normal(rng);
        hy.tag = "h" + std::to_string(h);
        hyps.push_back(std::move(hy));
    }
    std::vector<std::size_t> h_star;
    for (std::size_t c = 0; c < C; ++c) h_star.push_back(c);

    teach::LearnerParams params;
    params.alpha = 0.1 + 1.9 * uni(rng);
    params.beta = uni(rng) < 0.5 ? 1.0 : teach::kInf;
    params.gamma = uni(rng) < 0.5 ? 1.0 : teach::kInf;

    RandomInstance inst{teach::Dataset(class_names(C), d, std::move(items)),
                        teach::HypothesisSpace(d, std::move(hyps), std::move(h_star)), params, {}};
    inst.pool = all_ids(inst.ds);
    return inst;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("teach_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace fixtures
