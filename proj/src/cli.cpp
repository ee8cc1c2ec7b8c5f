#include "teach/cli.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "CLI11.hpp"
#include "teach/explanations.hpp"
#include "teach/http_server.hpp"
#include "teach/hypothesis_space.hpp"
#include "teach/io.hpp"
#include "teach/session.hpp"
#include "teach/simulator.hpp"
#include "teach/teacher.hpp"

namespace teach::cli {

namespace {

struct Options {
    std::string dataset;
    std::string hypotheses;
    std::string feature_maps;
    std::string out;
    std::string config;
    std::string strategy = "explain";
    std::vector<std::string> strategies{"rand_im", "strict", "explain"};
    double alpha = 0.5;
    std::string beta = "1";
    std::string gamma = "1";
    std::size_t budget = 20;
    std::uint64_t seed = 0;
    std::size_t learners = 1000;
    std::size_t num = 100;
    double train_fraction = 0.8;
    double svm_lambda = 1e-3;
    std::size_t svm_epochs = 200;
    std::size_t kmeans_iters = 100;
    int port = 0;
};

LearnerParams learner_params(const Options& o) {
    LearnerParams p{o.alpha, parse_positive_or_inf(o.beta), parse_positive_or_inf(o.gamma)};
    p.validate();
    return p;
}

void log_config(std::ostream& log, std::string_view command, json cfg) {
    cfg["command"] = command;
    log << "effective config: " << cfg.dump() << '\n';
}

// Train/test split recorded with the hypotheses, or recomputed from the seed.
Split resolve_split(const Dataset& ds, const HypothesisFile& hf, const Options& o) {
    if (hf.split) return *hf.split;
    return split_dataset(ds, o.train_fraction, o.seed);
}

int cmd_gen_hyp(const Options& o, std::ostream& log) {
    HypothesisGenConfig cfg;
    cfg.target_count = o.num;
    cfg.seed = o.seed;
    cfg.svm_lambda = o.svm_lambda;
    cfg.svm_epochs = o.svm_epochs;
    cfg.kmeans_max_iters = o.kmeans_iters;
    log_config(log, "gen-hyp",
               {{"dataset", o.dataset}, {"out", o.out}, {"num", o.num}, {"seed", o.seed},
                {"train_fraction", o.train_fraction}, {"svm_lambda", o.svm_lambda}, {"svm_epochs", o.svm_epochs},
                {"kmeans_iters", o.kmeans_iters}});

    const Dataset ds = load_dataset(o.dataset);
    Split split = split_dataset(ds, o.train_fraction, o.seed);
    HypothesisSpace hs = build_hypothesis_space(ds, split.train, cfg);
    const auto kept = teachability_filter(ds, split.train, hs);
    log << "built " << hs.size() << " hypotheses; " << kept.size() << " of " << split.train.size()
        << " training items pass the teachability filter\n";
    write_hypotheses(HypothesisFile{std::move(hs), std::move(split)}, o.out);
    return kOk;
}

int cmd_select(const Options& o, std::ostream& log) {
    const Strategy strategy = parse_strategy(o.strategy);
    const LearnerParams params = learner_params(o);
    log_config(log, "select",
               {{"dataset", o.dataset}, {"hypotheses", o.hypotheses}, {"out", o.out},
                {"strategy", std::string(to_string(strategy))}, {"params", params_to_json(params)},
                {"budget", o.budget}, {"seed", o.seed}, {"train_fraction", o.train_fraction}});

    const Dataset ds = load_dataset(o.dataset);
    const HypothesisFile hf = load_hypotheses(o.hypotheses);
    const Split split = resolve_split(ds, hf, o);
    const auto pool = teachability_filter(ds, split.train, hf.space);
    const TeachingProblem problem(ds, hf.space, params, pool);
    const TeachingSet ts = greedy_select(strategy, o.budget, problem, o.seed);
    log << "selected " << ts.item_ids.size() << " items from a pool of " << pool.size() << '\n';
    write_teaching_set(ts, o.out);
    return kOk;
}

int cmd_difficulty(const Options& o, std::ostream& log) {
    log_config(log, "difficulty", {{"dataset", o.dataset}, {"feature_maps", o.feature_maps}, {"out", o.out}});
    const Dataset ds = load_dataset(o.dataset);
    Dataset out;
    if (!o.feature_maps.empty()) {
        out = attach_explanations(ds, load_feature_maps(o.feature_maps));
    } else {
        // Recompute raw entropies from the stored grids, then center.
        std::vector<Item> items = ds.items();
        for (Item& it : items)
            if (it.explanation) it.explanation->difficulty = entropy_difficulty(it.explanation->values);
        out = center_difficulties(Dataset(ds.classes(), ds.dim(), std::move(items)));
    }
    write_dataset(out, o.out);
    return kOk;
}

int cmd_simulate(const Options& o, std::ostream& log) {
    ExperimentConfig cfg;
    for (const auto& s : o.strategies) cfg.strategies.push_back(parse_strategy(s));
    cfg.learners_per_strategy = o.learners;
    cfg.budget = o.budget;
    cfg.seed = o.seed;
    const LearnerParams params = learner_params(o);
    json names = json::array();
    for (Strategy s : cfg.strategies) names.push_back(std::string(to_string(s)));
    log_config(log, "simulate",
               {{"dataset", o.dataset}, {"hypotheses", o.hypotheses}, {"out", o.out}, {"strategies", names},
                {"learners", o.learners}, {"budget", o.budget}, {"params", params_to_json(params)}, {"seed", o.seed},
                {"train_fraction", o.train_fraction}});

    const Dataset ds = load_dataset(o.dataset);
    const HypothesisFile hf = load_hypotheses(o.hypotheses);
    const Split split = resolve_split(ds, hf, o);
    const auto pool = teachability_filter(ds, split.train, hf.space);
    const TeachingProblem problem(ds, hf.space, params, pool);
    const auto reports = run_experiment(cfg, problem, split.test);
    for (const auto& r : reports)
        log << to_string(r.strategy) << ": mean accuracy " << r.mean_accuracy << " (se " << r.standard_error << ")\n";
    write_json_file(o.out, reports_to_json(reports, cfg, params));
    return kOk;
}

int cmd_serve(const Options& o, std::ostream& log) {
    ServiceConfig cfg = ServiceConfig::load(o.config);
    if (o.port > 0) cfg.port = o.port;
    log_config(log, "serve", cfg.to_json());
    auto service = SessionService::from_config(cfg);
    HttpServer server(*service);
    if (!server.listen()) {
        log << "error: could not bind " << cfg.host << ":" << cfg.port << '\n';
        return kInternal;
    }
    return kOk;
}

} // namespace

double parse_positive_or_inf(const std::string& text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "inf" || lower == "infinity") return kInf;
    double v = 0.0;
    std::size_t used = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw UsageError("expected a positive number or 'inf', got '" + text + "'");
    }
    if (used != text.size() || !(v > 0.0)) throw UsageError("expected a positive number or 'inf', got '" + text + "'");
    return v;
}

int run(const std::vector<std::string>& args, std::ostream& log) {
    CLI::App app{"Interpretable machine teaching: hypothesis generation, teaching-set selection, simulation, serving"};
    app.require_subcommand(1);
    Options o;

    auto* gen = app.add_subcommand("gen-hyp", "Build the hypothesis space from dataset features");
    gen->add_option("--dataset", o.dataset, "Dataset JSON")->required();
    gen->add_option("--out", o.out, "Hypothesis JSON to write")->required();
    gen->add_option("--num", o.num, "Total number of hypotheses")->capture_default_str();
    gen->add_option("--seed", o.seed, "Seed for the split, SVM shuffles and random fill")->required();
    gen->add_option("--train-fraction", o.train_fraction)->capture_default_str();
    gen->add_option("--svm-lambda", o.svm_lambda)->capture_default_str();
    gen->add_option("--svm-epochs", o.svm_epochs)->capture_default_str();
    gen->add_option("--kmeans-iters", o.kmeans_iters)->capture_default_str();

    auto add_params = [&](CLI::App* sub) {
        sub->add_option("--alpha", o.alpha, "Learner consistency")->capture_default_str();
        sub->add_option("--beta", o.beta, "Explanation discount sharpness, or inf")->capture_default_str();
        sub->add_option("--gamma", o.gamma, "Representativeness discount sharpness, or inf")->capture_default_str();
        sub->add_option("--budget", o.budget, "Teaching set size")->capture_default_str();
        sub->add_option("--seed", o.seed)->required();
        sub->add_option("--train-fraction", o.train_fraction, "Used only when the hypothesis file has no split")
            ->capture_default_str();
    };

    auto* sel = app.add_subcommand("select", "Select a teaching set");
    sel->add_option("--dataset", o.dataset)->required();
    sel->add_option("--hypotheses", o.hypotheses)->required();
    sel->add_option("--out", o.out)->required();
    sel->add_option("--strategy", o.strategy, "rand_im | rand_exp | strict | explain")->capture_default_str();
    add_params(sel);

    auto* diff = app.add_subcommand("difficulty", "Compose explanations and centered difficulties");
    diff->add_option("--dataset", o.dataset)->required();
    diff->add_option("--feature-maps", o.feature_maps, "Feature-map JSON; without it stored grids are rescored");
    diff->add_option("--out", o.out)->required();

    auto* sim = app.add_subcommand("simulate", "Compare strategies on simulated learners");
    sim->add_option("--dataset", o.dataset)->required();
    sim->add_option("--hypotheses", o.hypotheses)->required();
    sim->add_option("--out", o.out)->required();
    sim->add_option("--strategies", o.strategies)->delimiter(',')->capture_default_str();
    sim->add_option("--learners", o.learners)->capture_default_str();
    add_params(sim);

    auto* serve = app.add_subcommand("serve", "Run the teaching-session HTTP service");
    serve->add_option("--config", o.config)->required();
    serve->add_option("--port", o.port, "Overrides the configured port");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream out, err;
        const int code = app.exit(e, out, err);
        log << out.str() << err.str();
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen_hyp(o, log);
        if (sel->parsed()) return cmd_select(o, log);
        if (diff->parsed()) return cmd_difficulty(o, log);
        if (sim->parsed()) return cmd_simulate(o, log);
        if (serve->parsed()) return cmd_serve(o, log);
    } catch (const UsageError& e) {
        log << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        log << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        log << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}

} // namespace teach::cli
