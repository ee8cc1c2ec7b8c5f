#pragma once

// Probabilistic learner: likelihoods, discount factors and the reference posterior.

#include <span>
#include <vector>

#include "teach/core.hpp"

namespace teach {

using FeatureView = std::span<const double>;

/// Numerically stable 1 / (1 + exp(-z)).
double logistic(double z) noexcept;

/// P(y | h, x) = logistic(alpha * h(x) * y) for y in {-1, +1}.
double likelihood(const Hypothesis& h, FeatureView x, int y, double alpha);
double likelihood_from_score(double score, int y, double alpha) noexcept;

/// E = logistic(beta * diff); exactly 1 when beta is infinite.
double explanation_discount(double diff, double beta);
/// D = logistic(gamma * dist); exactly 1 when gamma is infinite.
double density_discount(double dist, double gamma);

/// Mean squared Euclidean distance from x to every member (x itself included).
double representativeness_distance(FeatureView x, std::span<const FeatureView> class_members);

/// Per-example product E(e) * D(x). Throws DataError when explanation discounting is enabled
/// and the item has no difficulty.
double example_discount(const Item& item, double dist, const LearnerParams& params);

std::vector<double> uniform_prior(std::size_t n);

/// One example as the learner sees it, with its hypothesis-independent discount.
struct ShownExample {
    FeatureView features;
    int class_index = 0;
    double discount = 1.0;
};

struct ClassPosterior {
    int class_index = 0;
    std::vector<double> weights; // unnormalized mass per hypothesis
};

/// prior(h) * prod_{t: sgn h(x_t) != y_t} P(y_t | h, x_t) * prod_t discount_t, for the
/// one-vs-all task of `class_index`. Not normalized.
ClassPosterior naive_posterior(std::span<const double> prior, std::span<const ShownExample> shown,
                               const HypothesisSpace& hs, double alpha, int class_index);

std::vector<double> normalized(std::span<const double> weights);

} // namespace teach
