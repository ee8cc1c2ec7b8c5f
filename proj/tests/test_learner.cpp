#include "doctest.h"
#include "fixtures.hpp"
#include "teach/learner.hpp"

using namespace teach;

TEST_CASE("likelihood") {
    const Hypothesis flat{{0.0}, 0.0, ""};
    const std::vector<double> x{3.0};
    for (double alpha : {0.1, 0.5, 7.0}) CHECK(likelihood(flat, x, 1, alpha) == 0.5);
    CHECK(likelihood_from_score(2.0, 1, 0.5) == doctest::Approx(0.731059).epsilon(1e-6));
    CHECK(likelihood_from_score(2.0, -1, 0.5) == doctest::Approx(0.268941).epsilon(1e-6));
    CHECK(likelihood_from_score(2.0, 1, 0.5) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));
    CHECK(likelihood_from_score(2.0, 1, 0.5) + likelihood_from_score(2.0, -1, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("logistic stays finite and ordered at the extremes") {
    CHECK(logistic(0.0) == 0.5);
    CHECK(logistic(1000.0) == 1.0);
    CHECK(logistic(-1000.0) >= 0.0);
    CHECK(logistic(-1000.0) < 1e-300);
    CHECK(logistic(-30.0) == doctest::Approx(std::exp(-30.0) / (1.0 + std::exp(-30.0))).epsilon(1e-14));
}

TEST_CASE("discounts") {
    CHECK(explanation_discount(0.0, 1.0) == 0.5);
    CHECK(explanation_discount(1.0, 1.0) == doctest::Approx(0.731059).epsilon(1e-6));
    CHECK(explanation_discount(0.3, kInf) == 1.0);
    CHECK(density_discount(0.0, 1.0) == 0.5);
    CHECK(density_discount(1.666667, 1.0) == doctest::Approx(0.841131).epsilon(1e-6));
    CHECK(density_discount(5.0, kInf) == 1.0);
    CHECK_THROWS_AS(explanation_discount(-0.1, 1.0), UsageError);
    CHECK_THROWS_AS(density_discount(-0.1, 1.0), UsageError);
}

TEST_CASE("representativeness_distance") {
    const std::vector<std::vector<double>> cls{{0}, {1}, {2}};
    const std::vector<FeatureView> members(cls.begin(), cls.end());
    CHECK(representativeness_distance(cls[0], std::span(members).first(1)) == 0.0);
    CHECK(representativeness_distance(cls[0], members) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    CHECK(representativeness_distance(cls[0], members) == doctest::Approx(1.666667).epsilon(1e-6));
    CHECK(representativeness_distance(cls[1], members) == doctest::Approx(0.666667).epsilon(1e-6));
}

TEST_CASE("example_discount") {
    Item it = fixtures::item("x", 0, {0.0});
    it.difficulty_override = 1.0;
    CHECK(example_discount(it, 0.0, {0.5, 1.0, 1.0}) == doctest::Approx(logistic(1.0) * 0.5));
    CHECK(example_discount(it, 7.0, {0.5, kInf, kInf}) == 1.0);
    CHECK(example_discount(it, 0.0, {0.5, kInf, 1.0}) == 0.5);
    const Item bare = fixtures::item("y", 0, {0.0});
    CHECK_THROWS_AS(example_discount(bare, 0.0, {0.5, 1.0, 1.0}), DataError);
    CHECK(example_discount(bare, 0.0, {0.5, kInf, 1.0}) == 0.5);
}

TEST_CASE("naive_posterior") {
    // A disagreeing likelihood is logistic of a non-positive argument, so it never exceeds 0.5.
    // alpha = ln 1.5 makes it exactly 0.4 for |h(x)| = 1.
    const double alpha = std::log(1.5);
    const HypothesisSpace hs(1, {{{-1.0}, 0.0, "agree"}, {{1.0}, 0.0, "disagree"}}, {0, 1});
    const std::vector<double> x{1.0};
    const std::vector<double> prior{0.5, 0.5};

    SUBCASE("empty T") {
        CHECK(naive_posterior(prior, {}, hs, alpha, 0).weights == prior);
    }
    SUBCASE("one class-1 example seen by the class-0 task") {
        const std::vector<ShownExample> shown{{x, 1, 1.0}};
        const auto post = naive_posterior(prior, shown, hs, alpha, 0);
        CHECK(post.weights[0] == 0.5);
        CHECK(post.weights[1] == doctest::Approx(0.2).epsilon(1e-15));
    }
    SUBCASE("the same example with E*D = 0.36 scales both masses") {
        const std::vector<ShownExample> shown{{x, 1, 0.36}};
        const auto post = naive_posterior(prior, shown, hs, alpha, 0);
        CHECK(post.weights[0] == doctest::Approx(0.18).epsilon(1e-15));
        CHECK(post.weights[1] == doctest::Approx(0.072).epsilon(1e-15));
    }
    SUBCASE("the class-1 task sees the opposite agreement") {
        const std::vector<ShownExample> shown{{x, 1, 1.0}};
        const auto post = naive_posterior(prior, shown, hs, alpha, 1);
        CHECK(post.weights[0] == doctest::Approx(0.2).epsilon(1e-15));
        CHECK(post.weights[1] == 0.5);
    }
    SUBCASE("a zero score disagrees with y = -1 at exactly one half") {
        const HypothesisSpace tie(1, {{{-1.0}, 0.0, "agree"}, {{1.0}, -1.0, "tie"}}, {0, 1});
        const std::vector<ShownExample> shown{{x, 1, 1.0}};
        CHECK(naive_posterior(prior, shown, tie, 3.0, 0).weights[1] == 0.25);
    }
}

TEST_CASE("naive_posterior properties on random instances") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto inst = fixtures::random_instance(seed);
        const auto prior = uniform_prior(inst.hs.size());
        std::vector<ShownExample> shown;
        for (std::size_t i = 0; i < std::min<std::size_t>(inst.ds.size(), 6); ++i)
            shown.push_back({inst.ds.item(i).features, inst.ds.item(i).class_index, 1.0});
        for (int c = 0; c < static_cast<int>(inst.ds.num_classes()); ++c) {
            const auto post = naive_posterior(prior, shown, inst.hs, inst.params.alpha, c);
            for (std::size_t h = 0; h < post.weights.size(); ++h) {
                CHECK(post.weights[h] > 0.0);
                CHECK(post.weights[h] <= prior[h]);
            }
            // appending an example on which h agrees leaves its mass unchanged
            for (std::size_t h = 0; h < inst.hs.size(); ++h) {
                for (std::size_t i = 0; i < inst.ds.size(); ++i) {
                    const auto& it = inst.ds.item(i);
                    if (inst.hs[h].predict(it.features) != binary_label(it.class_index, c)) continue;
                    auto more = shown;
                    more.push_back({it.features, it.class_index, 1.0});
                    CHECK(naive_posterior(prior, more, inst.hs, inst.params.alpha, c).weights[h] == post.weights[h]);
                    break;
                }
            }
        }
    }
}

TEST_CASE("a large alpha discards hypotheses that contradict a label") {
    const HypothesisSpace hs(1, {{{1.0}, 0.0, "right"}, {{-1.0}, 0.0, "wrong"}}, {0, 1});
    const std::vector<double> x{2.0};
    const std::vector<ShownExample> shown{{x, 0, 1.0}};
    const auto prior = uniform_prior(2);
    double last = 1.0;
    for (double alpha : {1.0, 10.0, 100.0, 1000.0}) {
        const double m = naive_posterior(prior, shown, hs, alpha, 0).weights[1];
        CHECK(m < last);
        last = m;
    }
    CHECK(last < 1e-300);
}

TEST_CASE("normalized") {
    const auto n = normalized(std::vector<double>{1, 3});
    CHECK(n == std::vector<double>{0.25, 0.75});
    CHECK(uniform_prior(4) == std::vector<double>(4, 0.25));
}
