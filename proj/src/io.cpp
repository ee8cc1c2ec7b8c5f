#include "teach/io.hpp"

#include <fstream>
#include <sstream>

namespace teach {

namespace {

template <typename Fn>
auto wrap_parse(std::string_view what, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw DataError(std::string(what) + ": " + e.what());
    }
}

bool present(const json& j, const char* key) { return j.contains(key) && !j.at(key).is_null(); }

std::vector<double> reals(const json& arr) {
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) out.push_back(v.get<double>());
    return out;
}

json split_to_json(const Split& s) { return json{{"train", s.train}, {"test", s.test}}; }

} // namespace

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

json real_to_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double real_from_json(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "Infinity") return kInf;
        if (s == "-inf" || s == "-Infinity") return -kInf;
        throw DataError("expected a number or \"inf\", got \"" + s + "\"");
    }
    return j.get<double>();
}

Dataset dataset_from_json(const json& j) {
    auto [classes, d, items] = wrap_parse("dataset", [&] {
        auto classes = j.at("classes").get<std::vector<std::string>>();
        const auto d = j.at("d").get<std::size_t>();
        std::vector<Item> items;
        for (const auto& ji : j.at("items")) {
            Item it;
            it.id = ji.at("id").get<std::string>();
            try {
                it.class_index = ji.at("class").get<int>();
                it.features = reals(ji.at("features"));
                if (present(ji, "image_uri")) it.image_uri = ji.at("image_uri").get<std::string>();
                if (present(ji, "difficulty_override")) it.difficulty_override = ji.at("difficulty_override").get<double>();
                if (present(ji, "explanation")) {
                    const auto& je = ji.at("explanation");
                    ExplanationMap e;
                    e.width = je.at("width").get<int>();
                    e.height = je.at("height").get<int>();
                    e.values = reals(je.at("values"));
                    e.difficulty = je.value("difficulty", 0.0);
                    it.explanation = std::move(e);
                }
            } catch (const json::exception& e) {
                throw DataError("item '" + it.id + "': " + e.what());
            }
            items.push_back(std::move(it));
        }
        return std::tuple{std::move(classes), d, std::move(items)};
    });
    return Dataset(std::move(classes), d, std::move(items));
}

json dataset_to_json(const Dataset& ds) {
    json items = json::array();
    for (const Item& it : ds.items()) {
        json ji;
        ji["id"] = it.id;
        ji["class"] = it.class_index;
        ji["features"] = it.features;
        ji["image_uri"] = it.image_uri ? json(*it.image_uri) : json(nullptr);
        if (it.explanation) {
            const auto& e = *it.explanation;
            ji["explanation"] = {{"width", e.width}, {"height", e.height}, {"values", e.values}, {"difficulty", e.difficulty}};
        } else {
            ji["explanation"] = nullptr;
        }
        ji["difficulty_override"] = it.difficulty_override ? json(*it.difficulty_override) : json(nullptr);
        items.push_back(std::move(ji));
    }
    return json{{"classes", ds.classes()}, {"d", ds.dim()}, {"items", std::move(items)}};
}

Dataset load_dataset(const std::filesystem::path& path) { return dataset_from_json(read_json_file(path)); }

void write_dataset(const Dataset& ds, const std::filesystem::path& path) { write_json_file(path, dataset_to_json(ds)); }

HypothesisFile hypothesis_file_from_json(const json& j) {
    auto [d, hyps, h_star, split] = wrap_parse("hypothesis file", [&] {
        const auto d = j.at("d").get<std::size_t>();
        std::vector<Hypothesis> hyps;
        for (const auto& jh : j.at("hypotheses")) {
            Hypothesis h;
            h.weights = reals(jh.at("weights"));
            h.bias = jh.value("bias", 0.0);
            h.tag = jh.value("tag", std::string{});
            hyps.push_back(std::move(h));
        }
        auto h_star = j.at("h_star").get<std::vector<std::size_t>>();
        std::optional<Split> split;
        if (present(j, "split"))
            split = Split{j.at("split").at("train").get<std::vector<std::string>>(),
                          j.at("split").at("test").get<std::vector<std::string>>()};
        return std::tuple{d, std::move(hyps), std::move(h_star), std::move(split)};
    });
    return HypothesisFile{HypothesisSpace(d, std::move(hyps), std::move(h_star)), std::move(split)};
}

json hypothesis_file_to_json(const HypothesisFile& hf) {
    json hyps = json::array();
    for (const auto& h : hf.space.hypotheses())
        hyps.push_back({{"weights", h.weights}, {"bias", h.bias}, {"tag", h.tag}});
    json j{{"d", hf.space.dim()}, {"hypotheses", std::move(hyps)}, {"h_star", hf.space.h_star()}};
    if (hf.split) j["split"] = split_to_json(*hf.split);
    return j;
}

HypothesisFile load_hypotheses(const std::filesystem::path& path) {
    return hypothesis_file_from_json(read_json_file(path));
}

void write_hypotheses(const HypothesisFile& hf, const std::filesystem::path& path) {
    write_json_file(path, hypothesis_file_to_json(hf));
}

json params_to_json(const LearnerParams& p) {
    return json{{"alpha", real_to_json(p.alpha)}, {"beta", real_to_json(p.beta)}, {"gamma", real_to_json(p.gamma)}};
}

LearnerParams params_from_json(const json& j) {
    LearnerParams p;
    p.alpha = real_from_json(j.at("alpha"));
    p.beta = real_from_json(j.at("beta"));
    p.gamma = real_from_json(j.at("gamma"));
    return p;
}

TeachingSet teaching_set_from_json(const json& j) {
    return wrap_parse("teaching set", [&] {
        TeachingSet ts;
        try {
            ts.strategy = parse_strategy(j.at("strategy").get<std::string>());
        } catch (const UsageError& e) {
            throw DataError(e.what());
        }
        ts.budget = j.at("budget").get<std::size_t>();
        if (present(j, "params")) ts.params = params_from_json(j.at("params"));
        ts.item_ids = j.at("item_ids").get<std::vector<std::string>>();
        if (j.contains("per_step")) {
            for (const auto& js : j.at("per_step")) {
                TeachingStep step;
                step.item_id = js.at("id").get<std::string>();
                step.objective = js.at("objective").get<double>();
                step.class_mass = reals(js.at("class_mass"));
                ts.per_step.push_back(std::move(step));
            }
        }
        if (ts.item_ids.size() > ts.budget) throw DataError("teaching set longer than its budget");
        return ts;
    });
}

json teaching_set_to_json(const TeachingSet& ts) {
    json steps = json::array();
    for (const auto& s : ts.per_step)
        steps.push_back({{"id", s.item_id}, {"objective", s.objective}, {"class_mass", s.class_mass}});
    return json{{"strategy", std::string(to_string(ts.strategy))},
                {"budget", ts.budget},
                {"show_explanation", shows_explanation(ts.strategy)},
                {"params", params_to_json(ts.params)},
                {"item_ids", ts.item_ids},
                {"per_step", std::move(steps)}};
}

TeachingSet load_teaching_set(const std::filesystem::path& path) {
    return teaching_set_from_json(read_json_file(path));
}

void write_teaching_set(const TeachingSet& ts, const std::filesystem::path& path) {
    write_json_file(path, teaching_set_to_json(ts));
}

} // namespace teach
