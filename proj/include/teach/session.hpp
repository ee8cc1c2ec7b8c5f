#pragma once

// Human teaching sessions: tutorial, timed teaching feedback, unscored-feedback testing, results.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "teach/core.hpp"

namespace teach {

class ServiceError : public std::runtime_error {
public:
    enum class Kind { BadRequest, NotFound, Conflict, TooFast, NotFinished };
    ServiceError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }
    int http_status() const noexcept;

private:
    Kind kind_;
};

struct ServiceConfig {
    std::string host = "0.0.0.0";
    int port = 8080;
    std::filesystem::path dataset;
    std::map<Strategy, std::filesystem::path> teaching_sets;
    std::filesystem::path data_dir = "sessions";
    std::filesystem::path asset_dir;  // optional, served under /assets/
    std::filesystem::path static_dir; // optional, served under /
    std::size_t teach_length = 20;
    std::size_t test_length = 20;
    int alternate_ms = 500;
    int min_wait_ms = 2000;
    std::vector<std::string> test_ids; // explicit test pool; otherwise derived from the split below
    double train_fraction = 0.8;
    std::uint64_t split_seed = 0;
    std::optional<std::uint64_t> seed; // service-level randomness; random_device when absent
    std::string tutorial = "You will see a series of images. Pick the category you think each belongs to. "
                           "During teaching you will be shown the correct answer; during testing you will not.";

    /// Relative paths resolve against `base_dir`.
    static ServiceConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static ServiceConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

enum class Phase { Tutorial, Teaching, Testing, Done };
std::string_view to_string(Phase p) noexcept;

struct SessionResponse {
    Phase phase = Phase::Teaching;
    std::size_t index = 0;
    std::string item_id;
    int choice = 0;
    bool correct = false;
    std::int64_t timestamp_ms = 0;
};

struct SessionState {
    std::string id;
    Strategy strategy = Strategy::Explain;
    Phase phase = Phase::Tutorial;
    std::size_t cursor = 0;
    std::vector<std::string> teaching_ids;
    std::vector<std::string> test_ids;
    std::vector<int> button_order;
    std::vector<SessionResponse> responses;
    std::int64_t created_at_ms = 0;
    std::optional<std::int64_t> feedback_at_ms;
    bool served = false;

    const std::vector<std::string>& phase_items() const;
};

/// Folds a session's JSONL event log into its state. Throws DataError on malformed logs.
SessionState fold_session_log(const std::filesystem::path& path);

struct ReplayResult {
    bool finished = false;
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy = 0.0;
};

/// Recomputes the test score from a log, re-deriving correctness from the dataset labels.
ReplayResult replay_session_log(const std::filesystem::path& path, const Dataset& ds);

/// Session lifecycle and protocol. Thread-safe; each session is guarded by its own mutex.
class SessionService {
public:
    using Clock = std::function<std::int64_t()>; // milliseconds

    SessionService(ServiceConfig cfg, Dataset ds, std::map<Strategy, TeachingSet> teaching_sets,
                   Clock clock = {});

    /// Loads the dataset and teaching sets named by the config.
    static std::unique_ptr<SessionService> from_config(const ServiceConfig& cfg, Clock clock = {});

    /// `strategy` is a strategy name or "random" (uniform over configured strategies).
    nlohmann::json create_session(std::string_view strategy, std::optional<std::uint64_t> seed = std::nullopt);
    nlohmann::json next_item(const std::string& session_id);
    nlohmann::json respond(const std::string& session_id, std::size_t index, int choice);
    nlohmann::json result(const std::string& session_id);

    /// Explanation grid of an item as served under /assets/explanations/.
    nlohmann::json explanation_asset(const std::string& item_id) const;

    const ServiceConfig& config() const noexcept { return cfg_; }
    const Dataset& dataset() const noexcept { return ds_; }
    std::filesystem::path log_path(const std::string& session_id) const;
    std::size_t session_count() const;

private:
    struct Entry {
        std::mutex mu;
        SessionState state;
    };

    std::shared_ptr<Entry> find(const std::string& id) const;
    void append_event(const SessionState& s, const nlohmann::json& event) const;
    nlohmann::json item_payload(const SessionState& s) const;
    nlohmann::json result_payload(const SessionState& s) const;
    void load_existing();

    ServiceConfig cfg_;
    Dataset ds_;
    std::map<Strategy, TeachingSet> teaching_sets_;
    std::vector<std::string> test_pool_;
    Clock clock_;

    mutable std::shared_mutex sessions_mu_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::mutex rng_mu_;
    std::mt19937_64 rng_;
};

} // namespace teach
