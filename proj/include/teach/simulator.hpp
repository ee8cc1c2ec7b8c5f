#pragma once

// Random-walk learners that consume teaching sequences, and strategy comparisons over them.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "teach/core.hpp"
#include "teach/teacher.hpp"

namespace teach {

/// Precomputed hypothesis scores for every item of a dataset.
class SimulationContext {
public:
    SimulationContext(const Dataset& ds, const HypothesisSpace& hs, double alpha);

    const Dataset& dataset() const noexcept { return *ds_; }
    const HypothesisSpace& space() const noexcept { return *hs_; }
    double alpha() const noexcept { return alpha_; }
    std::size_t num_hypotheses() const noexcept { return hs_->size(); }
    std::size_t num_classes() const noexcept { return ds_->num_classes(); }

    double score(std::size_t h, std::size_t item) const { return scores_[h * ds_->size() + item]; }
    /// 1 when h agrees with the one-vs-all label of `item` for class c, else P(y|h,x).
    double update_factor(std::size_t c, std::size_t h, std::size_t item) const;

private:
    const Dataset* ds_;
    const HypothesisSpace* hs_;
    double alpha_;
    std::vector<double> scores_;
};

/// One hypothesis and one normalized belief per class. Predicts by argmax of the per-class
/// hypothesis scores, ties to the smallest class index.
class SimulatedLearner {
public:
    SimulatedLearner(const SimulationContext& ctx, std::uint64_t seed);

    std::size_t current(std::size_t c) const { return current_.at(c); }
    const std::vector<double>& belief(std::size_t c) const { return belief_.at(c); }

    int predict(std::size_t item) const;
    /// Shows a labeled teaching item: every class posterior absorbs it, and each class whose
    /// current hypothesis disagrees resamples from its updated posterior.
    void observe(std::size_t item);

private:
    std::size_t sample(std::size_t c);

    const SimulationContext* ctx_;
    std::mt19937_64 rng_;
    std::vector<std::size_t> current_;
    std::vector<std::vector<double>> belief_;
};

struct LearnerOutcome {
    double accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion; // [truth][prediction]
    std::vector<bool> teaching_correct;               // prediction before each feedback
};

/// Teaches one learner with `teaching` then tests it on `test` without updates (dataset indices).
LearnerOutcome simulate_learner(std::span<const std::size_t> teaching, std::span<const std::size_t> test,
                                const SimulationContext& ctx, std::uint64_t seed);

struct SimulationReport {
    Strategy strategy = Strategy::RandIm;
    std::size_t learners = 0;
    std::size_t test_items = 0;
    double mean_accuracy = 0.0;
    double stddev_accuracy = 0.0;
    double standard_error = 0.0;
    std::vector<std::vector<std::size_t>> confusion;
    std::vector<double> teaching_curve;
    std::vector<std::string> teaching_ids; // empty for random strategies (drawn per learner)
};

struct ExperimentConfig {
    std::vector<Strategy> strategies;
    std::size_t learners_per_strategy = 0;
    std::size_t budget = 20;
    std::uint64_t seed = 0;
};

/// Greedy strategies teach every learner the same sequence; random strategies draw a fresh
/// sequence per learner. Learner i of every strategy uses seed + i.
std::vector<SimulationReport> run_experiment(const ExperimentConfig& cfg, const TeachingProblem& problem,
                                             std::span<const std::string> test_ids);

nlohmann::json report_to_json(const SimulationReport& r);
nlohmann::json reports_to_json(std::span<const SimulationReport> reports, const ExperimentConfig& cfg,
                               const LearnerParams& params);

} // namespace teach
