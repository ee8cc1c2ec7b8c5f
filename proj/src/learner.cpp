#include "teach/learner.hpp"

#include <numeric>

#include "teach/explanations.hpp"

namespace teach {

double logistic(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double likelihood_from_score(double score, int y, double alpha) noexcept {
    return logistic(alpha * score * static_cast<double>(y));
}

double likelihood(const Hypothesis& h, FeatureView x, int y, double alpha) {
    if (!(alpha > 0.0)) throw UsageError("alpha must be positive");
    return likelihood_from_score(h.score(x), y, alpha);
}

double explanation_discount(double diff, double beta) {
    if (!(diff >= 0.0)) throw UsageError("explanation difficulty must be non-negative");
    if (std::isinf(beta)) return 1.0;
    return logistic(beta * diff);
}

double density_discount(double dist, double gamma) {
    if (!(dist >= 0.0)) throw UsageError("representativeness distance must be non-negative");
    if (std::isinf(gamma)) return 1.0;
    return logistic(gamma * dist);
}

double representativeness_distance(FeatureView x, std::span<const FeatureView> class_members) {
    if (class_members.empty()) throw DataError("representativeness distance over an empty class");
    double total = 0.0;
    for (const auto& m : class_members) {
        if (m.size() != x.size()) throw DataError("feature dimension mismatch");
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double diff = x[k] - m[k];
            total += diff * diff;
        }
    }
    return total / static_cast<double>(class_members.size());
}

double example_discount(const Item& item, double dist, const LearnerParams& params) {
    double factor = density_discount(dist, params.gamma);
    if (params.explanation_discount_enabled()) {
        const auto diff = effective_difficulty(item);
        if (!diff) throw DataError("item '" + item.id + "' has no explanation difficulty but beta is finite");
        factor *= explanation_discount(*diff, params.beta);
    }
    return factor;
}

std::vector<double> uniform_prior(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

ClassPosterior naive_posterior(std::span<const double> prior, std::span<const ShownExample> shown,
                               const HypothesisSpace& hs, double alpha, int class_index) {
    if (prior.size() != hs.size()) throw UsageError("prior length differs from the hypothesis count");
    ClassPosterior post{class_index, std::vector<double>(prior.begin(), prior.end())};
    for (std::size_t h = 0; h < hs.size(); ++h) {
        double mass = post.weights[h];
        for (const auto& ex : shown) {
            const int y = binary_label(ex.class_index, class_index);
            const double score = hs[h].score(ex.features);
            if (sgn(score) != y) mass *= likelihood_from_score(score, y, alpha);
            mass *= ex.discount;
        }
        post.weights[h] = mass;
    }
    return post;
}

std::vector<double> normalized(std::span<const double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw DataError("cannot normalize a posterior with no mass");
    std::vector<double> out(weights.begin(), weights.end());
    for (double& w : out) w /= total;
    return out;
}

} // namespace teach
