#include "teach/simulator.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "teach/io.hpp"

namespace teach {

namespace {

enum class Stream : std::uint32_t { Teaching = 1, Learner = 2, TestOrder = 3 };

std::uint64_t stream_seed(std::uint64_t seed, Stream s) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

} // namespace

SimulationContext::SimulationContext(const Dataset& ds, const HypothesisSpace& hs, double alpha)
    : ds_(&ds), hs_(&hs), alpha_(alpha), scores_(hs.size() * ds.size()) {
    if (!(alpha > 0.0)) throw UsageError("alpha must be positive");
    if (hs.dim() != ds.dim()) throw DataError("hypothesis dimensionality differs from the dataset's");
    if (hs.num_classes() != ds.num_classes()) throw DataError("hypothesis space and dataset disagree on class count");
    for (std::size_t h = 0; h < hs.size(); ++h)
        for (std::size_t i = 0; i < ds.size(); ++i) scores_[h * ds.size() + i] = hs[h].score(ds.item(i).features);
}

double SimulationContext::update_factor(std::size_t c, std::size_t h, std::size_t item) const {
    const int y = binary_label(ds_->item(item).class_index, static_cast<int>(c));
    const double s = score(h, item);
    return sgn(s) == y ? 1.0 : likelihood_from_score(s, y, alpha_);
}

SimulatedLearner::SimulatedLearner(const SimulationContext& ctx, std::uint64_t seed)
    : ctx_(&ctx), rng_(seed) {
    const std::size_t C = ctx.num_classes();
    belief_.assign(C, uniform_prior(ctx.num_hypotheses()));
    current_.resize(C);
    for (std::size_t c = 0; c < C; ++c) current_[c] = sample(c);
}

std::size_t SimulatedLearner::sample(std::size_t c) {
    std::discrete_distribution<std::size_t> pick(belief_[c].begin(), belief_[c].end());
    return pick(rng_);
}

int SimulatedLearner::predict(std::size_t item) const {
    int best = 0;
    double best_score = ctx_->score(current_[0], item);
    for (std::size_t c = 1; c < current_.size(); ++c) {
        const double s = ctx_->score(current_[c], item);
        if (s > best_score) {
            best_score = s;
            best = static_cast<int>(c);
        }
    }
    return best;
}

void SimulatedLearner::observe(std::size_t item) {
    const int truth = ctx_->dataset().item(item).class_index;
    for (std::size_t c = 0; c < current_.size(); ++c) {
        auto& b = belief_[c];
        for (std::size_t h = 0; h < b.size(); ++h) b[h] *= ctx_->update_factor(c, h, item);
        b = normalized(b);
        const int y = binary_label(truth, static_cast<int>(c));
        if (sgn(ctx_->score(current_[c], item)) != y) current_[c] = sample(c);
    }
}

LearnerOutcome simulate_learner(std::span<const std::size_t> teaching, std::span<const std::size_t> test,
                                const SimulationContext& ctx, std::uint64_t seed) {
    const std::unordered_set<std::size_t> taught(teaching.begin(), teaching.end());
    for (std::size_t i : test)
        if (taught.count(i)) throw UsageError("item '" + ctx.dataset().item(i).id + "' is in both teaching and test sets");

    SimulatedLearner learner(ctx, seed);
    LearnerOutcome out;
    const std::size_t C = ctx.num_classes();
    out.confusion.assign(C, std::vector<std::size_t>(C, 0));
    for (std::size_t i : teaching) {
        out.teaching_correct.push_back(learner.predict(i) == ctx.dataset().item(i).class_index);
        learner.observe(i);
    }
    std::size_t correct = 0;
    for (std::size_t i : test) {
        const int truth = ctx.dataset().item(i).class_index;
        const int guess = learner.predict(i);
        ++out.confusion[truth][guess];
        correct += guess == truth;
    }
    out.accuracy = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
    return out;
}

std::vector<SimulationReport> run_experiment(const ExperimentConfig& cfg, const TeachingProblem& problem,
                                             std::span<const std::string> test_ids) {
    if (test_ids.empty()) throw DataError("simulation needs a non-empty test split");
    const Dataset& ds = problem.dataset();
    const SimulationContext ctx(ds, problem.space(), problem.params().alpha);
    const auto test = indices_of(ds, test_ids);
    const std::size_t C = ds.num_classes();

    std::vector<SimulationReport> reports;
    for (Strategy strategy : cfg.strategies) {
        SimulationReport rep;
        rep.strategy = strategy;
        rep.learners = cfg.learners_per_strategy;
        rep.test_items = test.size();
        rep.confusion.assign(C, std::vector<std::size_t>(C, 0));
        rep.teaching_curve.assign(cfg.budget, 0.0);

        std::vector<std::size_t> fixed;
        if (!is_random(strategy)) {
            const auto ts = greedy_select(strategy, cfg.budget, problem, cfg.seed);
            rep.teaching_ids = ts.item_ids;
            fixed = indices_of(ds, ts.item_ids);
        } else if (cfg.budget > problem.num_candidates()) {
            throw UsageError("budget exceeds the candidate pool");
        }

        std::vector<double> accuracies;
        accuracies.reserve(cfg.learners_per_strategy);
        std::vector<std::size_t> order(test);
        for (std::size_t l = 0; l < cfg.learners_per_strategy; ++l) {
            const std::uint64_t learner_seed = cfg.seed + l;
            std::vector<std::size_t> teaching = fixed;
            if (is_random(strategy)) {
                for (std::size_t j : sample_without_replacement(problem.num_candidates(), cfg.budget,
                                                                stream_seed(learner_seed, Stream::Teaching)))
                    teaching.push_back(problem.dataset_index(j));
            }
            std::mt19937_64 order_rng(stream_seed(learner_seed, Stream::TestOrder));
            std::shuffle(order.begin(), order.end(), order_rng);

            const auto outcome = simulate_learner(teaching, order, ctx, stream_seed(learner_seed, Stream::Learner));
            accuracies.push_back(outcome.accuracy);
            for (std::size_t a = 0; a < C; ++a)
                for (std::size_t b = 0; b < C; ++b) rep.confusion[a][b] += outcome.confusion[a][b];
            for (std::size_t t = 0; t < outcome.teaching_correct.size(); ++t)
                rep.teaching_curve[t] += outcome.teaching_correct[t] ? 1.0 : 0.0;
        }

        const auto n = static_cast<double>(accuracies.size());
        if (!accuracies.empty()) {
            rep.mean_accuracy = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / n;
            double ss = 0.0;
            for (double a : accuracies) ss += (a - rep.mean_accuracy) * (a - rep.mean_accuracy);
            rep.stddev_accuracy = accuracies.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            rep.standard_error = rep.stddev_accuracy / std::sqrt(n);
            for (double& v : rep.teaching_curve) v /= n;
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

nlohmann::json report_to_json(const SimulationReport& r) {
    nlohmann::json j{{"strategy", std::string(to_string(r.strategy))},
                     {"learners", r.learners},
                     {"test_items", r.test_items},
                     {"mean_accuracy", r.mean_accuracy},
                     {"stddev_accuracy", r.stddev_accuracy},
                     {"standard_error", r.standard_error},
                     {"confusion", r.confusion},
                     {"teaching_curve", r.teaching_curve},
                     {"teaching_ids", r.teaching_ids}};
    // Explanations cancel under normalization, so the simulated learner cannot tell these apart.
    if (r.strategy == Strategy::RandExp) j["same_dynamics_as"] = "RAND_IM";
    return j;
}

nlohmann::json reports_to_json(std::span<const SimulationReport> reports, const ExperimentConfig& cfg,
                               const LearnerParams& params) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : reports) rows.push_back(report_to_json(r));
    return nlohmann::json{{"seed", cfg.seed},
                          {"budget", cfg.budget},
                          {"learners_per_strategy", cfg.learners_per_strategy},
                          {"params", params_to_json(params)},
                          {"reports", std::move(rows)}};
}

} // namespace teach
