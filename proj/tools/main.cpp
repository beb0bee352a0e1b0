#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "httplib.h"
#include "tracepress/config.hpp"
#include "tracepress/data.hpp"
#include "tracepress/error.hpp"
#include "tracepress/harness.hpp"
#include "tracepress/pipeline.hpp"
#include "tracepress/rng.hpp"
#include "tracepress/toysim.hpp"

namespace {

using namespace tracepress;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::string thinker_override;
    std::string answerer_override;
    uint64_t seed = 0;
    bool seed_set = false;
    int ratio = 0;
    bool ratio_set = false;
};

RunConfig require_config(const GlobalArgs &args) {
    if (args.config_path.empty()) {
        raise(ErrorCode::config_error, "this subcommand needs --config <path>");
    }
    RunConfig cfg = load_config(args.config_path);
    if (!args.thinker_override.empty()) {
        cfg.thinker = args.thinker_override;
    }
    if (!args.answerer_override.empty()) {
        cfg.answerer = args.answerer_override;
    }
    if (args.seed_set) {
        cfg.seed = args.seed;
    }
    return cfg;
}

Dataset dataset_from_config(const RunConfig &cfg) {
    if (cfg.dataset.empty()) {
        raise(ErrorCode::config_error, "config has no 'dataset' path");
    }
    return load_jsonl(cfg.dataset);
}

std::function<bool()> health_probe_for(const RunConfig &cfg, const std::string &name) {
    const auto it = cfg.backends.find(name);
    if (it == cfg.backends.end() || it->second.kind != "http") {
        return nullptr;  // mock backends are always reachable
    }
    const std::string base_url = it->second.http.base_url;
    return [base_url]() {
        httplib::Client probe(base_url);
        probe.set_connection_timeout(2, 0);
        auto res = probe.Get("/v1/models");
        return static_cast<bool>(res);  // any HTTP response counts as reachable
    };
}

int cmd_compress(const GlobalArgs &args, const std::string &sample_id) {
    RunConfig cfg = require_config(args);
    Dataset ds = dataset_from_config(cfg);

    const CompressionSample *sample = nullptr;
    if (sample_id.empty()) {
        sample = &ds.samples.at(0);
    } else {
        for (const auto &s : ds.samples) {
            if (s.id == sample_id) {
                sample = &s;
                break;
            }
        }
        if (sample == nullptr) {
            raise(ErrorCode::invalid_input, "no sample with id '" + sample_id + "'");
        }
    }

    int ratio = args.ratio;
    if (!args.ratio_set) {
        Rng rng(cfg.seed);
        ratio = sample_ratio(rng, cfg.ratios);
    }

    auto thinker = make_backend(cfg, cfg.thinker, cfg.thinker_max_tokens);
    auto answerer = make_backend(cfg, cfg.answerer);
    const CompressionRecord record =
        run_sample(*sample, ratio, *thinker, *answerer, cfg.pipeline());
    std::cout << serialize_record(record) << "\n";
    return 0;
}

int cmd_eval(const GlobalArgs &args) {
    RunConfig cfg = require_config(args);
    Dataset ds = dataset_from_config(cfg);

    std::vector<int> ratios = cfg.ratios;
    if (args.ratio_set) {
        ratios = {args.ratio};
    }

    const std::string out_dir = args.out_dir.empty() ? "." : args.out_dir;
    std::filesystem::create_directories(out_dir);

    EvalReport report;
    report.config_echo_json = config_to_json(cfg);
    std::vector<CompressionRecord> all_records;
    for (int ratio : ratios) {
        auto thinker = make_backend(cfg, cfg.thinker, cfg.thinker_max_tokens);
        auto answerer = make_backend(cfg, cfg.answerer);
        EvalOutput out = evaluate(ds, ratio, *thinker, *answerer, cfg.pipeline());
        report.rows.push_back(out.row);
        all_records.insert(all_records.end(), out.records.begin(), out.records.end());
    }

    emit_report(report, ReportFormat::csv, out_dir + "/report.csv");
    emit_report(report, ReportFormat::json, out_dir + "/report.json");
    emit_records(all_records, out_dir + "/records.jsonl");
    std::cerr << "wrote " << out_dir << "/report.{csv,json} and records.jsonl ("
              << all_records.size() << " records)\n";
    std::cout << report_to_csv(report);
    return 0;
}

int cmd_serve(const GlobalArgs &args) {
    RunConfig cfg = require_config(args);
    auto answerer = make_backend(cfg, cfg.answerer);
    RewardService service(*answerer, cfg.pipeline(), health_probe_for(cfg, cfg.answerer));
    std::cerr << "reward service listening on " << cfg.serve_host << ":" << cfg.serve_port
              << "\n";
    if (!service.run(cfg.serve_host, cfg.serve_port)) {
        raise(ErrorCode::io_error, "cannot listen on " + cfg.serve_host + ":" +
                                       std::to_string(cfg.serve_port));
    }
    return 0;
}

int cmd_simulate(const GlobalArgs &args, SimConfig sim) {
    if (args.seed_set) {
        sim.seed = args.seed;
    }
    const SimCurves curves = train(sim);
    const std::string csv = curves.to_csv();
    if (args.out_dir.empty()) {
        std::cout << csv;
    } else {
        std::filesystem::create_directories(args.out_dir);
        const std::string path = args.out_dir + "/curves.csv";
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            raise(ErrorCode::io_error, "cannot open for writing: " + path);
        }
        out << csv;
        std::cerr << "wrote " << path << "\n";
    }
    return 0;
}

int cmd_stats(const GlobalArgs &args, const std::string &dataset_path) {
    Dataset ds;
    TokenizerSpec tok;
    if (!dataset_path.empty()) {
        ds = load_jsonl(dataset_path);
        if (!args.config_path.empty()) {
            tok = load_config(args.config_path).tokenizer;
        }
    } else {
        RunConfig cfg = require_config(args);
        ds = dataset_from_config(cfg);
        tok = cfg.tokenizer;
    }
    const DataStats st = stats(ds, tok);
    std::printf("{\"name\":\"%s\",\"n_samples\":%zu,\"avg_tokens\":%.2f,"
                "\"min_tokens\":%zu,\"max_tokens\":%zu}\n",
                ds.name.c_str(), st.n_samples, st.avg_tokens, st.min_tokens, st.max_tokens);
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Budget-aware context compression harness"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "Run config JSON path");
    auto *seed_opt = app.add_option("--seed", args.seed, "Override the config seed");
    auto *ratio_opt =
        app.add_option("--ratio", args.ratio, "Fixed compression ratio")->check(CLI::Range(1, 1 << 20));
    app.add_option("--backend-thinker", args.thinker_override,
                   "Config backend name for the thinker");
    app.add_option("--backend-answerer", args.answerer_override,
                   "Config backend name for the answerer");
    app.add_option("--out", args.out_dir, "Output directory");

    std::string sample_id;
    auto *compress =
        app.add_subcommand("compress", "Compress one sample and print its record as JSON");
    compress->add_option("--id", sample_id, "Sample id (default: first sample)");

    auto *eval = app.add_subcommand("eval", "Evaluate a dataset and write report files");

    auto *serve = app.add_subcommand("serve", "Run the reward HTTP service");

    SimConfig sim;
    auto *simulate =
        app.add_subcommand("simulate", "Train the synthetic selection policy, print curves CSV");
    for (auto *sub : {compress, eval, serve, simulate}) {
        sub->fallthrough();  // global flags may follow the subcommand
    }
    simulate->add_option("--steps", sim.steps, "Training steps")->check(CLI::PositiveNumber);
    simulate->add_flag("--no-hack-gate{false}", sim.hack_gate_enabled,
                       "Disable the anti-hack gate");
    simulate->add_flag("--no-budget-reward{false}", sim.budget_reward_enabled,
                       "Disable the budget reward factor");
    simulate->add_flag("--no-utility-reward{false}", sim.utility_reward_enabled,
                       "Disable the utility reward factor");

    std::string stats_path;
    auto *stats_cmd = app.add_subcommand("stats", "Print dataset context-length statistics");
    stats_cmd->add_option("dataset", stats_path, "Dataset JSONL (default: config dataset)");
    stats_cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }
    args.seed_set = seed_opt->count() > 0;
    args.ratio_set = ratio_opt->count() > 0;

    try {
        if (compress->parsed()) {
            return cmd_compress(args, sample_id);
        }
        if (eval->parsed()) {
            return cmd_eval(args);
        }
        if (serve->parsed()) {
            return cmd_serve(args);
        }
        if (simulate->parsed()) {
            return cmd_simulate(args, sim);
        }
        if (stats_cmd->parsed()) {
            return cmd_stats(args, stats_path);
        }
    } catch (const tracepress::Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
