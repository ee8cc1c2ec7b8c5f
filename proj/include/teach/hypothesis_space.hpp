#pragma once

// Construction of the learner's candidate hypothesis set from item features.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "teach/core.hpp"

namespace teach {

struct HypothesisGenConfig {
    std::size_t target_count = 100;
    std::uint64_t seed = 0;
    double svm_lambda = 1e-3;
    std::size_t svm_epochs = 200;
    std::size_t kmeans_max_iters = 100;

    void validate() const;
};

using FeatureView = std::span<const double>;

/// Lloyd's k-means with k = 2. Returns indices into `points`; neither cluster is ever empty.
///
/// Initialization is deterministic: the first center is the point nearest the mean, the second
/// the point farthest from the first. `seed` is accepted for interface symmetry with the other
/// builders and does not influence the result.
std::array<std::vector<std::size_t>, 2> two_means(std::span<const FeatureView> points, std::uint64_t seed,
                                                   std::size_t max_iters);

/// L2-regularized hinge-loss classifier, positives scored >= 0.
///
/// Pegasos schedule: step 1/(lambda t), one seeded shuffle per epoch, projection onto the
/// 1/sqrt(lambda) ball. The bias is learned as the weight of a constant feature.
Hypothesis train_linear_svm(std::span<const FeatureView> pos, std::span<const FeatureView> neg,
                            const HypothesisGenConfig& cfg);

/// Number of trained (non-random) hypotheses the recipe produces for C classes.
std::size_t deterministic_hypothesis_count(std::size_t num_classes) noexcept;

/// Subcluster-vs-rest (2 per class), one-vs-rest (recorded as h*), pair-vs-rest (C >= 3 only),
/// then seeded unit-norm random directions up to cfg.target_count. Trains on `train_ids` only.
HypothesisSpace build_hypothesis_space(const Dataset& ds, std::span<const std::string> train_ids,
                                       const HypothesisGenConfig& cfg);

/// Keeps the items every optimal hypothesis classifies correctly in its one-vs-all task.
/// Order is preserved. Throws DataError if nothing survives.
std::vector<std::string> teachability_filter(const Dataset& ds, std::span<const std::string> train_ids,
                                             const HypothesisSpace& hs);

} // namespace teach
