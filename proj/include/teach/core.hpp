#pragma once

// Shared domain types for the teaching engine.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace teach {

/// Raised for malformed inputs and violated data invariants.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a caller passes arguments that break an operation's precondition.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sign with the tie rule sgn(0) = +1.
inline int sgn(double v) noexcept { return v >= 0.0 ? 1 : -1; }

/// One-vs-all label of an item for class c.
inline int binary_label(int item_class, int c) noexcept { return item_class == c ? 1 : -1; }

struct ExplanationMap {
    int width = 0;
    int height = 0;
    std::vector<double> values; // row-major, width * height
    double difficulty = 0.0;

    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    bool operator==(const ExplanationMap&) const = default;
};

struct Item {
    std::string id;
    int class_index = 0;
    std::vector<double> features;
    std::optional<ExplanationMap> explanation;
    std::optional<std::string> image_uri;
    std::optional<double> difficulty_override;

    bool operator==(const Item&) const = default;
};

class Dataset {
public:
    Dataset() = default;
    /// Validates every invariant; throws DataError naming the offending item.
    Dataset(std::vector<std::string> classes, std::size_t d, std::vector<Item> items);

    std::size_t num_classes() const noexcept { return classes_.size(); }
    std::size_t dim() const noexcept { return d_; }
    std::size_t size() const noexcept { return items_.size(); }

    const std::vector<std::string>& classes() const noexcept { return classes_; }
    const std::vector<Item>& items() const noexcept { return items_; }
    const Item& item(std::size_t index) const { return items_.at(index); }

    /// Position of an id in items(); throws DataError if absent.
    std::size_t index_of(std::string_view id) const;
    bool contains(std::string_view id) const;

    bool operator==(const Dataset& other) const {
        return classes_ == other.classes_ && d_ == other.d_ && items_ == other.items_;
    }

private:
    std::vector<std::string> classes_;
    std::size_t d_ = 0;
    std::vector<Item> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct Hypothesis {
    std::vector<double> weights;
    double bias = 0.0;
    std::string tag;

    double score(std::span<const double> x) const noexcept {
        double s = bias;
        for (std::size_t k = 0; k < weights.size(); ++k) s += weights[k] * x[k];
        return s;
    }
    int predict(std::span<const double> x) const noexcept { return sgn(score(x)); }

    bool operator==(const Hypothesis&) const = default;
};

class HypothesisSpace {
public:
    HypothesisSpace() = default;
    /// Throws DataError on any invariant violation (zero hypothesis, bad h*, |H| < C).
    HypothesisSpace(std::size_t d, std::vector<Hypothesis> hypotheses, std::vector<std::size_t> h_star);

    std::size_t size() const noexcept { return hypotheses_.size(); }
    std::size_t dim() const noexcept { return d_; }
    std::size_t num_classes() const noexcept { return h_star_.size(); }
    const std::vector<Hypothesis>& hypotheses() const noexcept { return hypotheses_; }
    const Hypothesis& operator[](std::size_t i) const { return hypotheses_.at(i); }
    const std::vector<std::size_t>& h_star() const noexcept { return h_star_; }
    const Hypothesis& optimal(std::size_t c) const { return hypotheses_.at(h_star_.at(c)); }

    bool operator==(const HypothesisSpace&) const = default;

private:
    std::size_t d_ = 0;
    std::vector<Hypothesis> hypotheses_;
    std::vector<std::size_t> h_star_;
};

/// Learner noise and discount sharpness. beta/gamma may be kInf.
struct LearnerParams {
    double alpha = 0.5;
    double beta = 1.0;
    double gamma = 1.0;

    void validate() const;
    bool explanation_discount_enabled() const noexcept { return !std::isinf(beta); }
    bool density_discount_enabled() const noexcept { return !std::isinf(gamma); }
};

enum class Strategy { RandIm, RandExp, Strict, Explain };

std::string_view to_string(Strategy s) noexcept;
/// Accepts "RAND_IM"/"rand_im" etc.; throws UsageError otherwise.
Strategy parse_strategy(std::string_view name);
bool is_random(Strategy s) noexcept;
/// Whether feedback for this strategy shows the explanation alongside the label.
bool shows_explanation(Strategy s) noexcept;

struct TeachingStep {
    std::string item_id;
    double objective = 0.0;           // R(T) after adding the item
    std::vector<double> class_mass;   // sum of unnormalized posterior per class
    bool operator==(const TeachingStep&) const = default;
};

struct TeachingSet {
    Strategy strategy = Strategy::Explain;
    std::size_t budget = 0;
    LearnerParams params;
    std::vector<std::string> item_ids;
    std::vector<TeachingStep> per_step;
};

struct Split {
    std::vector<std::string> train;
    std::vector<std::string> test;
    bool operator==(const Split&) const = default;
};

/// Stratified per-class split; each class is shuffled independently with the seed.
Split split_dataset(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Item indices for the given ids, in the given order.
std::vector<std::size_t> indices_of(const Dataset& ds, std::span<const std::string> ids);

} // namespace teach
