#include "doctest.h"
#include "fixtures.hpp"
#include "teach/simulator.hpp"

#include <numeric>

using namespace teach;

namespace {

// Exact test accuracy of a learner holding uniformly drawn hypotheses, one per class, with no
// teaching: average over all |H|^C joint draws.
double prior_mixture_accuracy(const Dataset& ds, const HypothesisSpace& hs, const std::vector<std::size_t>& test) {
    const std::size_t C = ds.num_classes(), H = hs.size();
    std::size_t combos = 1;
    for (std::size_t c = 0; c < C; ++c) combos *= H;
    double total = 0.0;
    for (std::size_t k = 0; k < combos; ++k) {
        std::vector<std::size_t> pick(C);
        for (std::size_t c = 0, r = k; c < C; ++c, r /= H) pick[c] = r % H;
        std::size_t correct = 0;
        for (std::size_t i : test) {
            const auto& x = ds.item(i).features;
            std::size_t best = 0;
            for (std::size_t c = 1; c < C; ++c)
                if (hs[pick[c]].score(x) > hs[pick[best]].score(x)) best = c;
            correct += static_cast<int>(best) == ds.item(i).class_index;
        }
        total += static_cast<double>(correct) / static_cast<double>(test.size());
    }
    return total / static_cast<double>(combos);
}

} // namespace

TEST_CASE("a sharp learner shown witnesses settles on the optimal hypotheses") {
    std::vector<Item> items;
    for (int k = 1; k <= 6; ++k) {
        items.push_back(fixtures::item("n" + std::to_string(k), 0, {-double(k)}));
        items.push_back(fixtures::item("p" + std::to_string(k), 1, {double(k)}));
    }
    const Dataset ds({"neg", "pos"}, 1, items);
    const HypothesisSpace hs(1, {{{-1.0}, 0.0, "a"}, {{1.0}, 0.0, "b"}}, {0, 1});
    const SimulationContext ctx(ds, hs, 1000.0);
    std::vector<std::size_t> teach, test;
    for (std::size_t i = 0; i < ds.size(); ++i) (i < 4 ? teach : test).push_back(i);

    std::size_t correct = 0;
    for (std::size_t i : test) {
        const auto& x = ds.item(i).features;
        correct += (hs.optimal(1).score(x) > hs.optimal(0).score(x) ? 1 : 0) == ds.item(i).class_index;
    }
    const double h_star_accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SimulatedLearner learner(ctx, seed);
        for (std::size_t i : teach) learner.observe(i);
        CHECK(learner.current(0) == 0);
        CHECK(learner.current(1) == 1);
        CHECK(simulate_learner(teach, test, ctx, seed).accuracy == h_star_accuracy);
    }
}

TEST_CASE("resampling follows the normalized prefix posterior") {
    // One class-1 item at x = 1. Class-0 task (y = -1): "agree" scores -1, "tie" scores 0 and
    // disagrees at logistic(0) = 1/2. Beliefs become {2/3, 1/3}.
    const Dataset ds({"a", "b"}, 1, {fixtures::item("x", 1, {1.0})});
    const HypothesisSpace hs(1, {{{-1.0}, 0.0, "agree"}, {{1.0}, -1.0, "tie"}}, {0, 1});
    const SimulationContext ctx(ds, hs, 0.5);

    std::size_t resampled = 0, landed_on_agree = 0;
    for (std::uint64_t seed = 0; seed < 20000; ++seed) {
        SimulatedLearner learner(ctx, seed);
        const bool disagrees = learner.current(0) == 1;
        learner.observe(0);
        CHECK(learner.belief(0)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(learner.belief(0)[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        if (!disagrees) {
            CHECK(learner.current(0) == 0);
            continue;
        }
        ++resampled;
        landed_on_agree += learner.current(0) == 0;
    }
    const double p = static_cast<double>(landed_on_agree) / static_cast<double>(resampled);
    const double se = std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / static_cast<double>(resampled));
    CHECK(std::abs(p - 2.0 / 3.0) < 4.0 * se);
}

TEST_CASE("beliefs match the normalized naive posterior and stay normalized") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto inst = fixtures::random_instance(seed);
        const SimulationContext ctx(inst.ds, inst.hs, inst.params.alpha);
        SimulatedLearner learner(ctx, seed);
        std::vector<ShownExample> shown;
        for (std::size_t i = 0; i < std::min<std::size_t>(inst.ds.size(), 10); ++i) {
            learner.observe(i);
            shown.push_back({inst.ds.item(i).features, inst.ds.item(i).class_index, 0.7});
            for (std::size_t c = 0; c < inst.ds.num_classes(); ++c) {
                const auto ref = normalized(
                    naive_posterior(uniform_prior(inst.hs.size()), shown, inst.hs, inst.params.alpha, static_cast<int>(c)).weights);
                double sum = 0.0;
                for (std::size_t h = 0; h < ref.size(); ++h) {
                    CHECK(std::abs(learner.belief(c)[h] - ref[h]) <= 1e-9);
                    sum += learner.belief(c)[h];
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
                CHECK(learner.current(c) < inst.hs.size());
            }
        }
    }
}

TEST_CASE("an untaught learner matches the prior mixture") {
    const Dataset ds = fixtures::gaussian_dataset({{{-2, 0}, {2, 0}, {0, 3}}, 1.0, 10, 0.0, 10.0, false, 6});
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<Hypothesis> hyps;
    for (int h = 0; h < 5; ++h) hyps.push_back({{n(rng), n(rng)}, n(rng), "h"});
    const HypothesisSpace hs(2, hyps, {0, 1, 2});
    const SimulationContext ctx(ds, hs, 0.5);
    std::vector<std::size_t> test(ds.size());
    std::iota(test.begin(), test.end(), 0);

    const double oracle = prior_mixture_accuracy(ds, hs, test);
    const std::size_t learners = 10000;
    double sum = 0.0, sq = 0.0;
    for (std::uint64_t seed = 0; seed < learners; ++seed) {
        const double a = simulate_learner({}, test, ctx, seed).accuracy;
        sum += a;
        sq += a * a;
    }
    const double mean = sum / learners;
    const double sd = std::sqrt((sq - learners * mean * mean) / (learners - 1));
    CHECK(std::abs(mean - oracle) <= 2.0 * sd / std::sqrt(double(learners)));
}

TEST_CASE("simulate_learner rejects overlapping teaching and test items") {
    const auto inst = fixtures::random_instance(3);
    const SimulationContext ctx(inst.ds, inst.hs, inst.params.alpha);
    const std::vector<std::size_t> teach{0, 1}, test{1, 2};
    CHECK_THROWS_AS(simulate_learner(teach, test, ctx, 0), UsageError);
}

TEST_CASE("run_experiment") {
    const Dataset ds = fixtures::gaussian_dataset({{{0, 3}, {-3, -2}, {3, -2}}, 1.0, 20, 0.0, 10.0, true, 10});
    const HypothesisSpace hs(2, {{{0, 1}, -1, "a"}, {{-1, -0.5}, -1, "b"}, {{1, -0.5}, -1, "c"}, {{1, 1}, 0, "r"}},
                             {0, 1, 2});
    const Split split = split_dataset(ds, 0.8, 1);
    const TeachingProblem problem(ds, hs, {0.5, 1.0, 1.0}, split.train);

    ExperimentConfig cfg{{Strategy::RandIm, Strategy::Explain}, 100, 5, 42};
    const auto a = run_experiment(cfg, problem, split.test);
    const auto b = run_experiment(cfg, problem, split.test);
    const LearnerParams params{0.5, 1.0, 1.0};
    CHECK(reports_to_json(a, cfg, params).dump(2) == reports_to_json(b, cfg, params).dump(2));

    REQUIRE(a.size() == 2);
    for (const auto& r : a) {
        CHECK(r.learners == 100);
        std::vector<std::size_t> per_class(3, 0);
        for (const auto& id : split.test) per_class[ds.item(ds.index_of(id)).class_index]++;
        for (std::size_t c = 0; c < 3; ++c) {
            std::size_t row = 0;
            for (std::size_t v : r.confusion[c]) row += v;
            CHECK(row == 100 * per_class[c]);
        }
        CHECK(r.teaching_curve.size() == 5);
        for (double v : r.teaching_curve) CHECK((v >= 0.0 && v <= 1.0));
        CHECK((r.mean_accuracy >= 0.0 && r.mean_accuracy <= 1.0));
    }
    CHECK(a[0].teaching_ids.empty());
    CHECK(a[1].teaching_ids.size() == 5);

    cfg.seed = 43;
    CHECK(reports_to_json(run_experiment(cfg, problem, split.test), cfg, params).dump() !=
          reports_to_json(a, cfg, params).dump());

    SUBCASE("zero learners") {
        cfg.learners_per_strategy = 0;
        const auto empty = run_experiment(cfg, problem, split.test);
        REQUIRE(empty.size() == 2);
        CHECK(empty[0].learners == 0);
        CHECK(empty[0].mean_accuracy == 0.0);
    }
    SUBCASE("RAND_EXP is reported with RAND_IM dynamics") {
        cfg.strategies = {Strategy::RandIm, Strategy::RandExp};
        const auto r = run_experiment(cfg, problem, split.test);
        CHECK(r[0].mean_accuracy == r[1].mean_accuracy);
        CHECK(report_to_json(r[1]).at("same_dynamics_as") == "RAND_IM");
    }
}
