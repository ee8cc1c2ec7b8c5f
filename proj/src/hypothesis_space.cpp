#include "teach/hypothesis_space.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace teach {

namespace {

double squared_distance(FeatureView a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
    }
    return s;
}

void check_dims(std::span<const FeatureView> points, std::size_t d) {
    for (const auto& p : points)
        if (p.size() != d) throw DataError("feature dimension mismatch in classifier training data");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

} // namespace

void HypothesisGenConfig::validate() const {
    if (target_count == 0) throw UsageError("target hypothesis count must be positive");
    if (!(svm_lambda > 0.0)) throw UsageError("svm lambda must be positive");
    if (svm_epochs == 0) throw UsageError("svm epochs must be positive");
    if (kmeans_max_iters == 0) throw UsageError("k-means iteration cap must be positive");
}

std::array<std::vector<std::size_t>, 2> two_means(std::span<const FeatureView> points, std::uint64_t /*seed*/,
                                                   std::size_t max_iters) {
    const std::size_t n = points.size();
    if (n < 2) throw DataError("two_means needs at least 2 points");
    const std::size_t d = points[0].size();
    check_dims(points, d);

    std::vector<double> mean(d, 0.0);
    for (const auto& p : points)
        for (std::size_t k = 0; k < d; ++k) mean[k] += p[k];
    for (double& m : mean) m /= static_cast<double>(n);

    std::size_t first = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (squared_distance(points[i], mean) < squared_distance(points[first], mean)) first = i;
    std::size_t second = first == 0 ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i)
        if (i != first && squared_distance(points[i], points[first]) > squared_distance(points[second], points[first]))
            second = i;

    std::array<std::vector<double>, 2> centers{std::vector<double>(points[first].begin(), points[first].end()),
                                               std::vector<double>(points[second].begin(), points[second].end())};
    std::vector<int> assign(n, -1);

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double d0 = squared_distance(points[i], centers[0]);
            const double d1 = squared_distance(points[i], centers[1]);
            // Ties keep the current cluster (cluster 0 on the first pass).
            const int a = d1 < d0 ? 1 : (d0 < d1 ? 0 : std::max(assign[i], 0));
            changed |= assign[i] != a;
            assign[i] = a;
        }

        // Repair an empty cluster with the point farthest from its own center.
        std::array<std::size_t, 2> counts{0, 0};
        for (int a : assign) ++counts[a];
        for (int empty = 0; empty < 2; ++empty) {
            if (counts[empty] != 0) continue;
            const int donor = 1 - empty;
            std::size_t far = n;
            double far_dist = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dist = squared_distance(points[i], centers[donor]);
                if (dist > far_dist) {
                    far_dist = dist;
                    far = i;
                }
            }
            assign[far] = empty;
            counts[empty] = 1;
            --counts[donor];
            changed = true;
        }

        for (int c = 0; c < 2; ++c) {
            std::fill(centers[c].begin(), centers[c].end(), 0.0);
            for (std::size_t i = 0; i < n; ++i)
                if (assign[i] == c)
                    for (std::size_t k = 0; k < d; ++k) centers[c][k] += points[i][k];
            for (double& v : centers[c]) v /= static_cast<double>(counts[c]);
        }
        if (!changed) break;
    }

    std::array<std::vector<std::size_t>, 2> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters[assign[i]].push_back(i);
    return clusters;
}

Hypothesis train_linear_svm(std::span<const FeatureView> pos, std::span<const FeatureView> neg,
                            const HypothesisGenConfig& cfg) {
    if (pos.empty() || neg.empty()) throw DataError("linear SVM needs both positive and negative examples");
    const std::size_t d = pos[0].size();
    check_dims(pos, d);
    check_dims(neg, d);

    struct Sample {
        FeatureView x;
        double y;
    };
    std::vector<Sample> samples;
    samples.reserve(pos.size() + neg.size());
    for (const auto& p : pos) samples.push_back({p, 1.0});
    for (const auto& p : neg) samples.push_back({p, -1.0});

    const double lambda = cfg.svm_lambda;
    const double radius = 1.0 / std::sqrt(lambda);
    std::vector<double> w(d + 1, 0.0); // last entry is the bias
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    std::uint64_t t = 0;
    for (std::size_t epoch = 0; epoch < cfg.svm_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            ++t;
            const Sample& s = samples[idx];
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            double margin = w[d];
            for (std::size_t k = 0; k < d; ++k) margin += w[k] * s.x[k];
            margin *= s.y;

            const double shrink = 1.0 - eta * lambda;
            for (double& v : w) v *= shrink;
            if (margin < 1.0) {
                for (std::size_t k = 0; k < d; ++k) w[k] += eta * s.y * s.x[k];
                w[d] += eta * s.y;
            }

            double norm2 = 0.0;
            for (double v : w) norm2 += v * v;
            if (norm2 > radius * radius) {
                const double scale = radius / std::sqrt(norm2);
                for (double& v : w) v *= scale;
            }
        }
    }

    Hypothesis h;
    h.bias = w[d];
    w.pop_back();
    h.weights = std::move(w);
    return h;
}

std::size_t deterministic_hypothesis_count(std::size_t num_classes) noexcept {
    const std::size_t pairs = num_classes >= 3 ? num_classes * (num_classes - 1) / 2 : 0;
    return 3 * num_classes + pairs;
}

HypothesisSpace build_hypothesis_space(const Dataset& ds, std::span<const std::string> train_ids,
                                       const HypothesisGenConfig& cfg) {
    cfg.validate();
    const std::size_t C = ds.num_classes();
    const std::size_t fixed = deterministic_hypothesis_count(C);
    if (cfg.target_count < fixed)
        throw UsageError("target count " + std::to_string(cfg.target_count) + " is below the " + std::to_string(fixed) +
                         " trained hypotheses required for " + std::to_string(C) + " classes");

    const auto train = indices_of(ds, train_ids);
    std::vector<std::vector<std::size_t>> by_class(C);
    for (std::size_t i : train) by_class[ds.item(i).class_index].push_back(i);
    for (std::size_t c = 0; c < C; ++c)
        if (by_class[c].size() < 2)
            throw DataError("class '" + ds.classes()[c] + "' needs at least 2 training items");

    auto view = [&](std::size_t i) { return FeatureView(ds.item(i).features); };
    auto views_where = [&](auto&& keep) {
        std::vector<FeatureView> out;
        for (std::size_t i : train)
            if (keep(i)) out.push_back(view(i));
        return out;
    };

    std::vector<Hypothesis> hyps;
    std::uint64_t stream = 0;
    auto train_tagged = [&](const std::vector<FeatureView>& pos, const std::vector<FeatureView>& neg, std::string tag) {
        HypothesisGenConfig local = cfg;
        local.seed = mix_seed(cfg.seed, ++stream);
        Hypothesis h = train_linear_svm(pos, neg, local);
        h.tag = std::move(tag);
        hyps.push_back(std::move(h));
    };

    for (std::size_t c = 0; c < C; ++c) {
        std::vector<FeatureView> members;
        for (std::size_t i : by_class[c]) members.push_back(view(i));
        const auto clusters = two_means(members, cfg.seed, cfg.kmeans_max_iters);
        for (int k = 0; k < 2; ++k) {
            std::vector<char> in_cluster(ds.size(), 0);
            for (std::size_t m : clusters[k]) in_cluster[by_class[c][m]] = 1;
            train_tagged(views_where([&](std::size_t i) { return in_cluster[i] != 0; }),
                         views_where([&](std::size_t i) { return in_cluster[i] == 0; }),
                         "subcluster:" + ds.classes()[c] + "/" + std::to_string(k));
        }
    }

    std::vector<std::size_t> h_star;
    for (std::size_t c = 0; c < C; ++c) {
        const int ci = static_cast<int>(c);
        h_star.push_back(hyps.size());
        train_tagged(views_where([&](std::size_t i) { return ds.item(i).class_index == ci; }),
                     views_where([&](std::size_t i) { return ds.item(i).class_index != ci; }),
                     "one_vs_rest:" + ds.classes()[c]);
    }

    if (C >= 3) {
        for (std::size_t a = 0; a < C; ++a) {
            for (std::size_t b = a + 1; b < C; ++b) {
                auto in_pair = [&](std::size_t i) {
                    const auto k = static_cast<std::size_t>(ds.item(i).class_index);
                    return k == a || k == b;
                };
                train_tagged(views_where(in_pair), views_where([&](std::size_t i) { return !in_pair(i); }),
                             "pair_vs_rest:" + ds.classes()[a] + "+" + ds.classes()[b]);
            }
        }
    }

    std::mt19937_64 rng(mix_seed(cfg.seed, 0xA11CE));
    std::normal_distribution<double> normal(0.0, 1.0);
    while (hyps.size() < cfg.target_count) {
        Hypothesis h;
        h.weights.resize(ds.dim());
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (double& w : h.weights) {
                w = normal(rng);
                norm2 += w * w;
            }
        } while (norm2 == 0.0);
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& w : h.weights) w *= inv;
        h.tag = "random";
        hyps.push_back(std::move(h));
    }

    return HypothesisSpace(ds.dim(), std::move(hyps), std::move(h_star));
}

std::vector<std::string> teachability_filter(const Dataset& ds, std::span<const std::string> train_ids,
                                             const HypothesisSpace& hs) {
    if (hs.num_classes() != ds.num_classes())
        throw DataError("hypothesis space has h* for " + std::to_string(hs.num_classes()) + " classes, dataset has " +
                        std::to_string(ds.num_classes()));
    std::vector<std::string> kept;
    for (const auto& id : train_ids) {
        const Item& it = ds.item(ds.index_of(id));
        bool ok = true;
        for (std::size_t c = 0; c < hs.num_classes() && ok; ++c)
            ok = hs.optimal(c).predict(it.features) == binary_label(it.class_index, static_cast<int>(c));
        if (ok) kept.push_back(id);
    }
    if (kept.empty()) throw DataError("teachability filter removed every training item");
    return kept;
}

} // namespace teach
