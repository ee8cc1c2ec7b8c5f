#pragma once

// Teaching-set selection: expected-error objective, greedy selection and the matrix engine.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "teach/core.hpp"
#include "teach/learner.hpp"

namespace teach {

/// Candidates whose selection value is within this of the best are tied; the smallest position wins.
/// Exact ties are common late in a sequence, and the two selection routes round them differently.
inline constexpr double kTieTolerance = 1e-12;

/// Fraction of eligible items on which h disagrees with the one-vs-all label of class c.
double class_error(const Hypothesis& h, const Dataset& ds, std::span<const std::string> eligible_ids, int class_index);

/// sum_h posterior(h) * err(h).
double expected_error(std::span<const double> posterior, std::span<const double> errs);

/// A candidate pool together with every per-candidate quantity the learner model needs.
///
/// Candidates are referred to by their position in the pool (0..num_candidates()-1), which
/// follows dataset order. The dataset and hypothesis space must outlive the problem.
class TeachingProblem {
public:
    TeachingProblem(const Dataset& ds, const HypothesisSpace& hs, LearnerParams params,
                    std::span<const std::string> candidate_ids);

    /// Same pool, different learner parameters (discounts recomputed).
    TeachingProblem with_params(LearnerParams params) const;

    const Dataset& dataset() const noexcept { return *ds_; }
    const HypothesisSpace& space() const noexcept { return *hs_; }
    const LearnerParams& params() const noexcept { return params_; }

    std::size_t num_candidates() const noexcept { return candidates_.size(); }
    std::size_t num_classes() const noexcept { return ds_->num_classes(); }
    std::size_t num_hypotheses() const noexcept { return hs_->size(); }

    std::size_t dataset_index(std::size_t candidate) const { return candidates_.at(candidate); }
    const Item& item(std::size_t candidate) const { return ds_->item(candidates_.at(candidate)); }
    /// Mean squared distance to the same-class members of the pool.
    double distance(std::size_t candidate) const { return distances_.at(candidate); }
    /// E(e) * D(x) under the current parameters.
    double discount(std::size_t candidate) const { return discounts_.at(candidate); }
    /// err_c(h) for every hypothesis, measured over the pool.
    const std::vector<double>& errors(std::size_t c) const { return errors_.at(c); }
    const std::vector<double>& prior() const noexcept { return prior_; }

    ShownExample shown(std::size_t candidate) const;
    std::vector<ShownExample> shown(std::span<const std::size_t> candidates) const;

private:
    void compute_discounts();

    const Dataset* ds_ = nullptr;
    const HypothesisSpace* hs_ = nullptr;
    LearnerParams params_;
    std::vector<std::size_t> candidates_;
    std::vector<double> distances_;
    std::vector<double> discounts_;
    std::vector<std::vector<double>> errors_;
    std::vector<double> prior_;
};

/// R(T) = (1/C) sum_c sum_h (P_c(h) - P_c(h|T)) err_c(h), from naive posteriors.
double objective_R(const TeachingProblem& problem, std::span<const std::size_t> teaching);

struct SelectionStep {
    std::size_t candidate = 0;
    double score = 0.0;     // -(1/C) sum_c (e^c o p^c) . Lp^c[:, x]
    double objective = 0.0; // R(T + x) implied by the score
};

/// Reference greedy selection: argmax_x objective_R(T + x), ties to the smallest position.
std::vector<SelectionStep> naive_greedy(const TeachingProblem& problem, std::size_t budget);

/// Matrix form of greedy selection with per-class error vectors, confidence matrices and
/// running unnormalized posteriors.
class FastEngine {
public:
    explicit FastEngine(const TeachingProblem& problem);

    std::size_t num_classes() const noexcept { return errors_.size(); }
    std::size_t num_hypotheses() const noexcept { return H_; }
    std::size_t num_candidates() const noexcept { return X_; }
    std::size_t remaining() const noexcept { return remaining_count_; }
    bool is_remaining(std::size_t candidate) const { return remaining_.at(candidate) != 0; }

    /// L^c[h][x]: 1 when h agrees with the one-vs-all label, else P(y|h,x).
    double confidence(std::size_t c, std::size_t h, std::size_t x) const { return L_[c][h * X_ + x]; }
    /// L^c[h][x] scaled by the candidate's discount.
    double discounted(std::size_t c, std::size_t h, std::size_t x) const { return Lp_[c][h * X_ + x]; }
    const std::vector<double>& posterior(std::size_t c) const { return p_.at(c); }
    const std::vector<double>& errors(std::size_t c) const { return errors_.at(c); }

    /// (1/C) sum_c prior . e^c, i.e. the expected error before teaching.
    double base_error() const noexcept { return base_; }
    /// R of the items selected so far.
    double objective() const;

    /// Combined score for every candidate; removed candidates get -inf.
    std::vector<double> scores() const;

    /// Selects the best remaining candidate and updates the posteriors.
    SelectionStep step();
    /// Forces `candidate` as the next selection.
    SelectionStep apply(std::size_t candidate);

private:
    std::size_t H_ = 0;
    std::size_t X_ = 0;
    double base_ = 0.0;
    std::vector<std::vector<double>> errors_;
    std::vector<std::vector<double>> L_;
    std::vector<std::vector<double>> Lp_;
    std::vector<std::vector<double>> p_;
    std::vector<char> remaining_;
    std::size_t remaining_count_ = 0;
};

/// RAND_IM / RAND_EXP sample the pool uniformly without replacement; STRICT runs the greedy
/// engine with infinite beta and gamma; EXPLAIN runs it with the problem's parameters.
TeachingSet greedy_select(Strategy strategy, std::size_t budget, const TeachingProblem& problem, std::uint64_t seed);

/// First k positions of a seeded shuffle of 0..n-1.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::uint64_t seed);

/// Parameters a strategy actually selects with.
LearnerParams effective_params(Strategy strategy, const LearnerParams& params) noexcept;

} // namespace teach
