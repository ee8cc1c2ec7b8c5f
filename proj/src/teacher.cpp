#include "teach/teacher.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace teach {

namespace {

double class_error_indices(const Hypothesis& h, const Dataset& ds, std::span<const std::size_t> eligible, int c) {
    if (eligible.empty()) throw DataError("class error over an empty item set");
    std::size_t wrong = 0;
    for (std::size_t i : eligible) {
        const Item& it = ds.item(i);
        if (h.predict(it.features) != binary_label(it.class_index, c)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(eligible.size());
}

} // namespace

double class_error(const Hypothesis& h, const Dataset& ds, std::span<const std::string> eligible_ids, int class_index) {
    const auto idx = indices_of(ds, eligible_ids);
    return class_error_indices(h, ds, idx, class_index);
}

double expected_error(std::span<const double> posterior, std::span<const double> errs) {
    if (posterior.size() != errs.size()) throw UsageError("posterior and error vectors differ in length");
    return std::inner_product(posterior.begin(), posterior.end(), errs.begin(), 0.0);
}

TeachingProblem::TeachingProblem(const Dataset& ds, const HypothesisSpace& hs, LearnerParams params,
                                 std::span<const std::string> candidate_ids)
    : ds_(&ds), hs_(&hs), params_(params) {
    params_.validate();
    if (hs.dim() != ds.dim()) throw DataError("hypothesis dimensionality differs from the dataset's");
    if (hs.num_classes() != ds.num_classes()) throw DataError("hypothesis space and dataset disagree on class count");
    if (candidate_ids.empty()) throw DataError("empty candidate pool");

    candidates_ = indices_of(ds, candidate_ids);
    std::sort(candidates_.begin(), candidates_.end());
    if (std::adjacent_find(candidates_.begin(), candidates_.end()) != candidates_.end())
        throw DataError("duplicate ids in the candidate pool");

    const std::size_t C = ds.num_classes();
    std::vector<std::vector<FeatureView>> members(C);
    for (std::size_t i : candidates_) members[ds.item(i).class_index].emplace_back(ds.item(i).features);
    distances_.reserve(candidates_.size());
    for (std::size_t i : candidates_)
        distances_.push_back(representativeness_distance(ds.item(i).features, members[ds.item(i).class_index]));

    errors_.assign(C, std::vector<double>(hs.size()));
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t h = 0; h < hs.size(); ++h)
            errors_[c][h] = class_error_indices(hs[h], ds, candidates_, static_cast<int>(c));

    prior_ = uniform_prior(hs.size());
    compute_discounts();
}

void TeachingProblem::compute_discounts() {
    discounts_.resize(candidates_.size());
    for (std::size_t j = 0; j < candidates_.size(); ++j)
        discounts_[j] = example_discount(ds_->item(candidates_[j]), distances_[j], params_);
}

TeachingProblem TeachingProblem::with_params(LearnerParams params) const {
    params.validate();
    TeachingProblem copy = *this;
    copy.params_ = params;
    copy.compute_discounts();
    return copy;
}

ShownExample TeachingProblem::shown(std::size_t candidate) const {
    const Item& it = item(candidate);
    return ShownExample{it.features, it.class_index, discounts_.at(candidate)};
}

std::vector<ShownExample> TeachingProblem::shown(std::span<const std::size_t> candidates) const {
    std::vector<ShownExample> out;
    out.reserve(candidates.size());
    for (std::size_t j : candidates) out.push_back(shown(j));
    return out;
}

double objective_R(const TeachingProblem& problem, std::span<const std::size_t> teaching) {
    const auto shown = problem.shown(teaching);
    const auto& prior = problem.prior();
    double total = 0.0;
    for (std::size_t c = 0; c < problem.num_classes(); ++c) {
        const auto post = naive_posterior(prior, shown, problem.space(), problem.params().alpha, static_cast<int>(c));
        const auto& err = problem.errors(c);
        for (std::size_t h = 0; h < prior.size(); ++h) total += (prior[h] - post.weights[h]) * err[h];
    }
    return total / static_cast<double>(problem.num_classes());
}

namespace {

// Smallest unused position whose value is within kTieTolerance of the maximum.
std::size_t best_candidate(const std::vector<double>& values, const std::vector<char>& used) {
    double top = -kInf;
    for (std::size_t x = 0; x < values.size(); ++x)
        if (!used[x]) top = std::max(top, values[x]);
    for (std::size_t x = 0; x < values.size(); ++x)
        if (!used[x] && values[x] >= top - kTieTolerance) return x;
    throw UsageError("no candidates left to select");
}

} // namespace

std::vector<SelectionStep> naive_greedy(const TeachingProblem& problem, std::size_t budget) {
    if (budget > problem.num_candidates()) throw UsageError("budget exceeds the candidate pool");
    std::vector<std::size_t> chosen;
    std::vector<char> used(problem.num_candidates(), 0);
    std::vector<SelectionStep> steps;
    for (std::size_t t = 0; t < budget; ++t) {
        std::vector<double> r(problem.num_candidates(), -kInf);
        chosen.push_back(0);
        for (std::size_t x = 0; x < problem.num_candidates(); ++x) {
            if (used[x]) continue;
            chosen.back() = x;
            r[x] = objective_R(problem, chosen);
        }
        const std::size_t x = best_candidate(r, used);
        const SelectionStep best{x, 0.0, r[x]};
        chosen.back() = best.candidate;
        used[best.candidate] = 1;
        steps.push_back(best);
    }
    return steps;
}

FastEngine::FastEngine(const TeachingProblem& problem)
    : H_(problem.num_hypotheses()), X_(problem.num_candidates()) {
    const std::size_t C = problem.num_classes();
    const auto& hs = problem.space();
    const double alpha = problem.params().alpha;

    std::vector<double> scores(H_ * X_);
    for (std::size_t h = 0; h < H_; ++h)
        for (std::size_t x = 0; x < X_; ++x) scores[h * X_ + x] = hs[h].score(problem.item(x).features);

    errors_.resize(C);
    L_.assign(C, std::vector<double>(H_ * X_));
    Lp_.assign(C, std::vector<double>(H_ * X_));
    p_.assign(C, problem.prior());
    for (std::size_t c = 0; c < C; ++c) {
        errors_[c] = problem.errors(c);
        for (std::size_t h = 0; h < H_; ++h) {
            for (std::size_t x = 0; x < X_; ++x) {
                const int y = binary_label(problem.item(x).class_index, static_cast<int>(c));
                const double s = scores[h * X_ + x];
                const double l = sgn(s) == y ? 1.0 : likelihood_from_score(s, y, alpha);
                L_[c][h * X_ + x] = l;
                Lp_[c][h * X_ + x] = l * problem.discount(x);
            }
        }
        base_ += expected_error(problem.prior(), errors_[c]);
    }
    base_ /= static_cast<double>(C);
    remaining_.assign(X_, 1);
    remaining_count_ = X_;
}

double FastEngine::objective() const {
    double expected = 0.0;
    for (std::size_t c = 0; c < num_classes(); ++c) expected += expected_error(p_[c], errors_[c]);
    return base_ - expected / static_cast<double>(num_classes());
}

std::vector<double> FastEngine::scores() const {
    std::vector<double> r(X_, 0.0);
    std::vector<double> weighted(H_);
    for (std::size_t c = 0; c < num_classes(); ++c) {
        for (std::size_t h = 0; h < H_; ++h) weighted[h] = errors_[c][h] * p_[c][h];
        for (std::size_t h = 0; h < H_; ++h) {
            if (weighted[h] == 0.0) continue;
            const double* row = &Lp_[c][h * X_];
            for (std::size_t x = 0; x < X_; ++x) r[x] -= weighted[h] * row[x];
        }
    }
    const double inv_c = 1.0 / static_cast<double>(num_classes());
    for (std::size_t x = 0; x < X_; ++x) r[x] = remaining_[x] ? r[x] * inv_c : -kInf;
    return r;
}

SelectionStep FastEngine::step() {
    if (remaining_count_ == 0) throw UsageError("no candidates left to select");
    std::vector<char> used(X_);
    for (std::size_t x = 0; x < X_; ++x) used[x] = !remaining_[x];
    return apply(best_candidate(scores(), used));
}

SelectionStep FastEngine::apply(std::size_t candidate) {
    if (candidate >= X_ || !remaining_[candidate]) throw UsageError("candidate is not available for selection");
    // Same accumulation order as scores(), so the reported score matches bit for bit.
    double score = 0.0;
    for (std::size_t c = 0; c < num_classes(); ++c) {
        for (std::size_t h = 0; h < H_; ++h) {
            const double weighted = errors_[c][h] * p_[c][h];
            if (weighted != 0.0) score -= weighted * Lp_[c][h * X_ + candidate];
        }
    }
    score *= 1.0 / static_cast<double>(num_classes());

    for (std::size_t c = 0; c < num_classes(); ++c)
        for (std::size_t h = 0; h < H_; ++h) p_[c][h] *= Lp_[c][h * X_ + candidate];
    remaining_[candidate] = 0;
    --remaining_count_;
    return SelectionStep{candidate, score, base_ + score};
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k > n) throw UsageError("cannot draw more items than the pool holds");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(k);
    return order;
}

LearnerParams effective_params(Strategy strategy, const LearnerParams& params) noexcept {
    if (strategy == Strategy::Strict) return LearnerParams{params.alpha, kInf, kInf};
    return params;
}

TeachingSet greedy_select(Strategy strategy, std::size_t budget, const TeachingProblem& problem, std::uint64_t seed) {
    if (budget == 0) throw UsageError("budget must be positive");
    if (budget > problem.num_candidates())
        throw UsageError("budget " + std::to_string(budget) + " exceeds the candidate pool of " +
                         std::to_string(problem.num_candidates()));

    const LearnerParams params = effective_params(strategy, problem.params());
    const TeachingProblem scoped = problem.with_params(params);
    FastEngine engine(scoped);

    std::vector<std::size_t> order;
    if (is_random(strategy)) order = sample_without_replacement(problem.num_candidates(), budget, seed);

    TeachingSet ts;
    ts.strategy = strategy;
    ts.budget = budget;
    ts.params = params;
    for (std::size_t t = 0; t < budget; ++t) {
        const SelectionStep s = is_random(strategy) ? engine.apply(order[t]) : engine.step();
        TeachingStep diag;
        diag.item_id = scoped.item(s.candidate).id;
        diag.objective = s.objective;
        for (std::size_t c = 0; c < engine.num_classes(); ++c) {
            const auto& p = engine.posterior(c);
            diag.class_mass.push_back(std::accumulate(p.begin(), p.end(), 0.0));
        }
        ts.item_ids.push_back(diag.item_id);
        ts.per_step.push_back(std::move(diag));
    }
    return ts;
}

} // namespace teach
