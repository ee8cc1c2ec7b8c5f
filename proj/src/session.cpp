#include "teach/session.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "teach/io.hpp"

namespace teach {

using nlohmann::json;

namespace {

std::int64_t system_now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

Phase parse_phase(std::string_view s) {
    for (Phase p : {Phase::Tutorial, Phase::Teaching, Phase::Testing, Phase::Done})
        if (s == to_string(p)) return p;
    throw DataError("unknown phase '" + std::string(s) + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

// Applies one response to the phase machine. Shared by the live service and log folding.
void advance(SessionState& s, const SessionResponse& r) {
    s.responses.push_back(r);
    s.feedback_at_ms = s.phase == Phase::Teaching ? std::optional<std::int64_t>(r.timestamp_ms) : std::nullopt;
    s.served = false;
    if (++s.cursor < s.phase_items().size()) return;
    s.cursor = 0;
    s.phase = s.phase == Phase::Teaching ? Phase::Testing : Phase::Done;
}

std::size_t correct_tests(const SessionState& s) {
    return static_cast<std::size_t>(std::count_if(s.responses.begin(), s.responses.end(), [](const SessionResponse& r) {
        return r.phase == Phase::Testing && r.correct;
    }));
}

double test_accuracy(const SessionState& s) {
    return s.test_ids.empty() ? 0.0 : static_cast<double>(correct_tests(s)) / static_cast<double>(s.test_ids.size());
}

json response_to_json(const SessionResponse& r) {
    return json{{"phase", std::string(to_string(r.phase))},
                {"index", r.index},
                {"item_id", r.item_id},
                {"choice", r.choice},
                {"correct", r.correct},
                {"timestamp", r.timestamp_ms}};
}

} // namespace

int ServiceError::http_status() const noexcept {
    switch (kind_) {
    case Kind::BadRequest: return 400;
    case Kind::NotFound: return 404;
    case Kind::Conflict: return 409;
    case Kind::TooFast: return 429;
    case Kind::NotFinished: return 409;
    }
    return 500;
}

std::string_view to_string(Phase p) noexcept {
    switch (p) {
    case Phase::Tutorial: return "tutorial";
    case Phase::Teaching: return "teaching";
    case Phase::Testing: return "testing";
    case Phase::Done: return "done";
    }
    return "?";
}

const std::vector<std::string>& SessionState::phase_items() const {
    static const std::vector<std::string> none;
    if (phase == Phase::Teaching) return teaching_ids;
    if (phase == Phase::Testing) return test_ids;
    return none;
}

ServiceConfig ServiceConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    ServiceConfig c;
    try {
        c.host = j.value("host", c.host);
        c.port = j.value("port", c.port);
        c.dataset = resolve(base_dir, j.at("dataset").get<std::string>());
        for (const auto& [name, path] : j.at("teaching_sets").items())
            c.teaching_sets[parse_strategy(name)] = resolve(base_dir, path.get<std::string>());
        c.data_dir = resolve(base_dir, j.value("data_dir", c.data_dir.string()));
        if (j.contains("asset_dir")) c.asset_dir = resolve(base_dir, j.at("asset_dir").get<std::string>());
        if (j.contains("static_dir")) c.static_dir = resolve(base_dir, j.at("static_dir").get<std::string>());
        c.teach_length = j.value("teach_length", c.teach_length);
        c.test_length = j.value("test_length", c.test_length);
        c.alternate_ms = j.value("alternate_ms", c.alternate_ms);
        c.min_wait_ms = j.value("min_wait_ms", c.min_wait_ms);
        c.test_ids = j.value("test_ids", c.test_ids);
        c.train_fraction = j.value("train_fraction", c.train_fraction);
        c.split_seed = j.value("split_seed", c.split_seed);
        if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
        c.tutorial = j.value("tutorial", c.tutorial);
    } catch (const json::exception& e) {
        throw DataError(std::string("service config: ") + e.what());
    }
    if (c.teaching_sets.empty()) throw DataError("service config names no teaching sets");
    if (c.teach_length == 0 || c.test_length == 0) throw DataError("teach_length and test_length must be positive");
    if (c.alternate_ms <= 0 || c.min_wait_ms < 0) throw DataError("timing values must be positive");
    return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path), path.parent_path());
}

json ServiceConfig::to_json() const {
    json sets = json::object();
    for (const auto& [s, p] : teaching_sets) sets[std::string(teach::to_string(s))] = p.string();
    return json{{"host", host},
                {"port", port},
                {"dataset", dataset.string()},
                {"teaching_sets", sets},
                {"data_dir", data_dir.string()},
                {"asset_dir", asset_dir.string()},
                {"static_dir", static_dir.string()},
                {"teach_length", teach_length},
                {"test_length", test_length},
                {"alternate_ms", alternate_ms},
                {"min_wait_ms", min_wait_ms},
                {"test_ids", test_ids},
                {"train_fraction", train_fraction},
                {"split_seed", split_seed},
                {"seed", seed ? json(*seed) : json(nullptr)}};
}

SessionState fold_session_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open session log '" + path.string() + "'");
    SessionState s;
    bool created = false;
    std::string line;
    std::size_t lineno = 0;
    try {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const json ev = json::parse(line);
            const auto type = ev.at("event").get<std::string>();
            if (type == "created") {
                s.id = ev.at("session_id").get<std::string>();
                s.strategy = parse_strategy(ev.at("strategy").get<std::string>());
                s.teaching_ids = ev.at("teaching_ids").get<std::vector<std::string>>();
                s.test_ids = ev.at("test_ids").get<std::vector<std::string>>();
                s.button_order = ev.at("button_order").get<std::vector<int>>();
                s.created_at_ms = ev.at("created_at").get<std::int64_t>();
                created = true;
            } else if (!created) {
                throw DataError("event before 'created'");
            } else if (type == "started") {
                if (s.phase != Phase::Tutorial) throw DataError("'started' outside the tutorial phase");
                s.phase = Phase::Teaching;
            } else if (type == "response") {
                SessionResponse r;
                r.phase = parse_phase(ev.at("phase").get<std::string>());
                r.index = ev.at("index").get<std::size_t>();
                r.item_id = ev.at("item_id").get<std::string>();
                r.choice = ev.at("choice").get<int>();
                r.correct = ev.at("correct").get<bool>();
                r.timestamp_ms = ev.at("timestamp").get<std::int64_t>();
                if (r.phase != s.phase || r.index != s.cursor || s.phase_items().at(r.index) != r.item_id)
                    throw DataError("response out of sequence");
                advance(s, r);
            } else if (type == "finished") {
                if (s.phase != Phase::Done) throw DataError("'finished' before the testing phase completed");
            } else {
                throw DataError("unknown event '" + type + "'");
            }
        }
    } catch (const json::exception& e) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const std::out_of_range& e) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!created) throw DataError("session log '" + path.string() + "' has no 'created' event");
    return s;
}

ReplayResult replay_session_log(const std::filesystem::path& path, const Dataset& ds) {
    const SessionState s = fold_session_log(path);
    ReplayResult r;
    r.finished = s.phase == Phase::Done;
    r.total = s.test_ids.size();
    for (const auto& resp : s.responses)
        if (resp.phase == Phase::Testing && ds.item(ds.index_of(resp.item_id)).class_index == resp.choice) ++r.correct;
    r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
    return r;
}

SessionService::SessionService(ServiceConfig cfg, Dataset ds, std::map<Strategy, TeachingSet> teaching_sets, Clock clock)
    : cfg_(std::move(cfg)), ds_(std::move(ds)), teaching_sets_(std::move(teaching_sets)), clock_(std::move(clock)) {
    if (!clock_) clock_ = system_now_ms;
    if (teaching_sets_.empty()) throw DataError("no teaching sets configured");

    std::set<std::string> taught;
    for (auto& [strategy, ts] : teaching_sets_) {
        if (ts.item_ids.size() < cfg_.teach_length)
            throw DataError(std::string(to_string(strategy)) + " teaching set has " + std::to_string(ts.item_ids.size()) +
                            " items, sessions need " + std::to_string(cfg_.teach_length));
        ts.item_ids.resize(cfg_.teach_length);
        for (const auto& id : ts.item_ids) {
            const Item& it = ds_.item(ds_.index_of(id));
            if (shows_explanation(strategy) && !it.explanation)
                throw DataError("item '" + id + "' in the " + std::string(to_string(strategy)) +
                                " teaching set has no explanation to show");
            taught.insert(id);
        }
    }

    const auto pool = cfg_.test_ids.empty() ? split_dataset(ds_, cfg_.train_fraction, cfg_.split_seed).test : cfg_.test_ids;
    for (const auto& id : pool) {
        ds_.index_of(id);
        if (!taught.count(id)) test_pool_.push_back(id);
    }
    if (test_pool_.size() < cfg_.test_length)
        throw DataError("test pool has " + std::to_string(test_pool_.size()) + " items, sessions need " +
                        std::to_string(cfg_.test_length));

    rng_.seed(cfg_.seed ? *cfg_.seed : std::random_device{}());
    std::filesystem::create_directories(cfg_.data_dir);
    load_existing();
}

std::unique_ptr<SessionService> SessionService::from_config(const ServiceConfig& cfg, Clock clock) {
    Dataset ds = load_dataset(cfg.dataset);
    std::map<Strategy, TeachingSet> sets;
    for (const auto& [strategy, path] : cfg.teaching_sets) {
        TeachingSet ts = load_teaching_set(path);
        ts.strategy = strategy;
        sets.emplace(strategy, std::move(ts));
    }
    return std::make_unique<SessionService>(cfg, std::move(ds), std::move(sets), std::move(clock));
}

void SessionService::load_existing() {
    std::vector<std::filesystem::path> logs;
    for (const auto& entry : std::filesystem::directory_iterator(cfg_.data_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") logs.push_back(entry.path());
    std::sort(logs.begin(), logs.end());
    std::unique_lock lock(sessions_mu_);
    for (const auto& path : logs) {
        auto e = std::make_shared<Entry>();
        e->state = fold_session_log(path);
        sessions_[e->state.id] = std::move(e);
    }
}

std::filesystem::path SessionService::log_path(const std::string& session_id) const {
    return cfg_.data_dir / (session_id + ".jsonl");
}

std::size_t SessionService::session_count() const {
    std::shared_lock lock(sessions_mu_);
    return sessions_.size();
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) const {
    std::shared_lock lock(sessions_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(ServiceError::Kind::NotFound, "unknown session '" + id + "'");
    return it->second;
}

void SessionService::append_event(const SessionState& s, const json& event) const {
    std::ofstream out(log_path(s.id), std::ios::app | std::ios::binary);
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("failed to append to session log for '" + s.id + "'");
}

json SessionService::create_session(std::string_view strategy_name, std::optional<std::uint64_t> seed) {
    Strategy strategy{};
    std::string id;
    std::uint64_t session_seed = 0;
    {
        std::lock_guard lock(rng_mu_);
        if (strategy_name == "random") {
            std::uniform_int_distribution<std::size_t> pick(0, teaching_sets_.size() - 1);
            strategy = std::next(teaching_sets_.begin(), static_cast<std::ptrdiff_t>(pick(rng_)))->first;
        } else {
            try {
                strategy = parse_strategy(strategy_name);
            } catch (const UsageError& e) {
                throw ServiceError(ServiceError::Kind::BadRequest, e.what());
            }
            if (!teaching_sets_.count(strategy))
                throw ServiceError(ServiceError::Kind::BadRequest,
                                   "strategy " + std::string(to_string(strategy)) + " is not configured");
        }
        session_seed = seed ? *seed : rng_();
        std::shared_lock sl(sessions_mu_);
        do {
            std::ostringstream os;
            os << std::hex;
            os.width(16);
            os.fill('0');
            os << rng_();
            id = os.str();
        } while (sessions_.count(id));
    }

    std::mt19937_64 srng(session_seed);
    auto entry = std::make_shared<Entry>();
    SessionState& s = entry->state;
    s.id = id;
    s.strategy = strategy;
    s.teaching_ids = teaching_sets_.at(strategy).item_ids;
    s.test_ids = test_pool_;
    std::shuffle(s.test_ids.begin(), s.test_ids.end(), srng);
    s.test_ids.resize(cfg_.test_length);
    s.button_order.resize(ds_.num_classes());
    std::iota(s.button_order.begin(), s.button_order.end(), 0);
    std::shuffle(s.button_order.begin(), s.button_order.end(), srng);
    s.created_at_ms = clock_();

    append_event(s, json{{"event", "created"},
                         {"session_id", s.id},
                         {"strategy", std::string(to_string(s.strategy))},
                         {"teaching_ids", s.teaching_ids},
                         {"test_ids", s.test_ids},
                         {"button_order", s.button_order},
                         {"created_at", s.created_at_ms}});
    {
        std::unique_lock lock(sessions_mu_);
        sessions_[id] = entry;
    }
    return json{{"session_id", s.id},
                {"strategy", std::string(to_string(s.strategy))},
                {"phase", std::string(to_string(s.phase))},
                {"tutorial", cfg_.tutorial},
                {"teach_length", s.teaching_ids.size()},
                {"test_length", s.test_ids.size()}};
}

json SessionService::item_payload(const SessionState& s) const {
    const Item& it = ds_.item(ds_.index_of(s.phase_items().at(s.cursor)));
    json options = json::array();
    for (int k : s.button_order) options.push_back({{"choice", k}, {"label", ds_.classes()[k]}});
    return json{{"phase", std::string(to_string(s.phase))},
                {"index", s.cursor},
                {"position", s.cursor + 1},
                {"total", s.phase_items().size()},
                {"image_uri", it.image_uri ? json(*it.image_uri) : json(nullptr)},
                {"options", std::move(options)}};
}

json SessionService::next_item(const std::string& session_id) {
    auto entry = find(session_id);
    std::lock_guard lock(entry->mu);
    SessionState& s = entry->state;
    if (s.phase == Phase::Done) return json{{"phase", "done"}, {"score", test_accuracy(s)}};
    if (s.phase == Phase::Tutorial) {
        append_event(s, json{{"event", "started"}, {"at", clock_()}});
        s.phase = Phase::Teaching;
        s.cursor = 0;
    }
    s.served = true;
    return item_payload(s);
}

json SessionService::respond(const std::string& session_id, std::size_t index, int choice) {
    using Kind = ServiceError::Kind;
    auto entry = find(session_id);
    std::lock_guard lock(entry->mu);
    SessionState& s = entry->state;
    if (s.phase == Phase::Done) throw ServiceError(Kind::Conflict, "session is finished");
    if (s.phase == Phase::Tutorial) throw ServiceError(Kind::Conflict, "request the first item before responding");
    if (index != s.cursor)
        throw ServiceError(Kind::Conflict, "stale index " + std::to_string(index) + ", expected " + std::to_string(s.cursor));
    if (!s.served) throw ServiceError(Kind::Conflict, "item " + std::to_string(index) + " has not been served yet");
    if (choice < 0 || static_cast<std::size_t>(choice) >= ds_.num_classes())
        throw ServiceError(Kind::BadRequest, "invalid choice " + std::to_string(choice));
    const std::int64_t now = clock_();
    if (s.feedback_at_ms && now - *s.feedback_at_ms < cfg_.min_wait_ms)
        throw ServiceError(Kind::TooFast, "response arrived " + std::to_string(now - *s.feedback_at_ms) +
                                              " ms after feedback; minimum is " + std::to_string(cfg_.min_wait_ms) + " ms");

    const std::string item_id = s.phase_items()[s.cursor];
    const Item& it = ds_.item(ds_.index_of(item_id));
    SessionResponse r{s.phase, s.cursor, item_id, choice, choice == it.class_index, now};
    append_event(s, json{{"event", "response"},
                         {"phase", std::string(to_string(r.phase))},
                         {"index", r.index},
                         {"item_id", r.item_id},
                         {"choice", r.choice},
                         {"correct", r.correct},
                         {"timestamp", r.timestamp_ms}});
    const Phase answered_in = s.phase;
    advance(s, r);
    if (s.phase == Phase::Done) append_event(s, json{{"event", "finished"}, {"accuracy", test_accuracy(s)}, {"at", now}});

    if (answered_in == Phase::Testing) return json{{"acknowledged", true}};

    const bool show = shows_explanation(s.strategy) && it.explanation.has_value();
    json explanation = nullptr;
    json explanation_uri = nullptr;
    if (show) {
        explanation = {{"width", it.explanation->width}, {"height", it.explanation->height}, {"values", it.explanation->values}};
        explanation_uri = "/assets/explanations/" + it.id + ".json";
    }
    return json{{"phase", "teaching"},
                {"index", r.index},
                {"correct", r.correct},
                {"correct_class", it.class_index},
                {"correct_label", ds_.classes()[it.class_index]},
                {"image_uri", it.image_uri ? json(*it.image_uri) : json(nullptr)},
                {"show_explanation", show},
                {"explanation", std::move(explanation)},
                {"explanation_uri", std::move(explanation_uri)},
                {"alternate_ms", cfg_.alternate_ms},
                {"min_wait_ms", cfg_.min_wait_ms}};
}

json SessionService::result_payload(const SessionState& s) const {
    const std::size_t C = ds_.num_classes();
    std::vector<std::vector<std::size_t>> confusion(C, std::vector<std::size_t>(C, 0));
    json records = json::array();
    for (const auto& r : s.responses) {
        records.push_back(response_to_json(r));
        if (r.phase == Phase::Testing) ++confusion[ds_.item(ds_.index_of(r.item_id)).class_index][r.choice];
    }
    return json{{"session_id", s.id},
                {"strategy", std::string(to_string(s.strategy))},
                {"accuracy", test_accuracy(s)},
                {"correct", correct_tests(s)},
                {"total", s.test_ids.size()},
                {"classes", ds_.classes()},
                {"confusion", confusion},
                {"responses", std::move(records)}};
}

json SessionService::result(const std::string& session_id) {
    auto entry = find(session_id);
    std::lock_guard lock(entry->mu);
    if (entry->state.phase != Phase::Done)
        throw ServiceError(ServiceError::Kind::NotFinished, "session '" + session_id + "' is not finished");
    return result_payload(entry->state);
}

json SessionService::explanation_asset(const std::string& item_id) const {
    if (!ds_.contains(item_id)) throw ServiceError(ServiceError::Kind::NotFound, "unknown item '" + item_id + "'");
    const Item& it = ds_.item(ds_.index_of(item_id));
    if (!it.explanation) throw ServiceError(ServiceError::Kind::NotFound, "item '" + item_id + "' has no explanation");
    return json{{"width", it.explanation->width}, {"height", it.explanation->height}, {"values", it.explanation->values}};
}

} // namespace teach
