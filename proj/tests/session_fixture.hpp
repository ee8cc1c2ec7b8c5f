#pragma once

#include <atomic>
#include <map>

#include "fixtures.hpp"
#include "teach/session.hpp"

namespace fixtures {

// 3 classes x 40 items with explanations and image URIs; every strategy teaches the first 20
// items of a class-interleaved ordering.
inline teach::Dataset session_dataset() {
    teach::Dataset base = gaussian_dataset({{{0, 3}, {-3, -2}, {3, -2}}, 1.0, 40, 0.0, 10.0, true, 17});
    std::vector<teach::Item> items = base.items();
    for (auto& it : items) it.image_uri = "/assets/img/" + it.id + ".png";
    return teach::Dataset(base.classes(), base.dim(), std::move(items));
}

inline std::map<teach::Strategy, teach::TeachingSet> session_teaching_sets(const teach::Dataset& ds) {
    std::map<teach::Strategy, teach::TeachingSet> sets;
    for (auto s : {teach::Strategy::RandIm, teach::Strategy::RandExp, teach::Strategy::Strict, teach::Strategy::Explain}) {
        teach::TeachingSet ts;
        ts.strategy = s;
        ts.budget = 20;
        for (std::size_t k = 0; k < 20; ++k) ts.item_ids.push_back(ds.item((k % 3) * 40 + k / 3).id);
        sets.emplace(s, std::move(ts));
    }
    return sets;
}

struct FakeClock {
    std::shared_ptr<std::atomic<std::int64_t>> now = std::make_shared<std::atomic<std::int64_t>>(1'000'000);
    teach::SessionService::Clock fn() const {
        auto p = now;
        return [p] { return p->load(); };
    }
    void advance(std::int64_t ms) const { *now += ms; }
};

inline teach::ServiceConfig session_config(const std::filesystem::path& data_dir) {
    teach::ServiceConfig cfg;
    cfg.data_dir = data_dir;
    cfg.seed = 99;
    cfg.split_seed = 3;
    cfg.train_fraction = 0.5;
    return cfg;
}

} // namespace fixtures
