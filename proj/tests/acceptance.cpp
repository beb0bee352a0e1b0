// End-to-end acceptance checks, one independently stated criterion per
// function. Each prints a single PASS/FAIL/SKIP line; the process exits
// nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "tracepress/config.hpp"
#include "tracepress/data.hpp"
#include "tracepress/error.hpp"
#include "tracepress/grpo.hpp"
#include "tracepress/harness.hpp"
#include "tracepress/metrics.hpp"
#include "tracepress/pipeline.hpp"
#include "tracepress/rewards.hpp"
#include "tracepress/rng.hpp"
#include "tracepress/toysim.hpp"
#include "tracepress/trace.hpp"

using namespace tracepress;

namespace {

int g_failures = 0;

class Timer {
  public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

void report(int criterion, bool ok, const std::string &what, double elapsed_s,
            double limit_s) {
    const bool in_time = elapsed_s <= limit_s;
    if (ok && in_time) {
        std::printf("PASS criterion %d: %s (%.2fs)\n", criterion, what.c_str(), elapsed_s);
    } else if (!ok) {
        std::printf("FAIL criterion %d: %s (%.2fs)\n", criterion, what.c_str(), elapsed_s);
        ++g_failures;
    } else {
        std::printf("FAIL criterion %d: %s exceeded time limit (%.2fs > %.0fs)\n", criterion,
                    what.c_str(), elapsed_s, limit_s);
        ++g_failures;
    }
}

double tail_mean(const std::vector<double> &series, double frac) {
    const size_t start = static_cast<size_t>(static_cast<double>(series.size()) * (1.0 - frac));
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = start; i < series.size(); ++i) {
        sum += series[i];
        ++n;
    }
    return sum / static_cast<double>(n);
}

double head_mean(const std::vector<double> &series, double frac) {
    const size_t stop = static_cast<size_t>(static_cast<double>(series.size()) * frac);
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < stop && i < series.size(); ++i) {
        sum += series[i];
        ++n;
    }
    return sum / static_cast<double>(n);
}

// ---- criterion 1: budget reward closed form -------------------------------

void criterion_1() {
    Timer timer;
    bool ok = true;
    Rng rng(101);
    for (int i = 0; i < 1000; ++i) {
        const size_t b = 1 + rng.uniform_below(2000);
        const double gamma = 0.01 + rng.uniform_real();
        const double len = rng.uniform_real() * static_cast<double>(b) * (1.0 + gamma) * 1.3;

        // Independent statement of the piecewise form.
        double want;
        const double bd = static_cast<double>(b);
        if (len <= 0.0 || len >= bd * (1.0 + gamma)) {
            want = 0.0;
        } else if (len <= bd) {
            want = 1.0;
        } else {
            want = 1.0 - (len - bd) / (gamma * bd);
        }
        if (std::abs(budget_reward(len, BudgetGate{b, gamma}) - want) > 1e-12) {
            ok = false;
        }
    }
    // Values at the two breakpoints.
    ok = ok && budget_reward(100.0, BudgetGate{100, 0.2}) == 1.0;
    ok = ok && budget_reward(120.0, BudgetGate{100, 0.2}) == 0.0;
    report(1, ok, "budget reward matches its closed form on 1000 triples", timer.seconds(), 1.0);
}

// ---- criterion 2: reward composition ---------------------------------------

void criterion_2() {
    Timer timer;
    bool ok = true;
    const RewardWeights w;  // 0.05 / 0.95
    Rng rng(202);
    for (int i = 0; i < 10000; ++i) {
        const int format = static_cast<int>(rng.uniform_below(2));
        const double utility = rng.uniform_real();
        const double budget = rng.uniform_real();
        const int gate = static_cast<int>(rng.uniform_below(2));
        const RewardBreakdown r = combined_reward(format, utility, budget, gate, w);
        const double want = gate * (0.05 * format + 0.95 * utility * budget);
        if (std::abs(r.total - want) > 1e-12) ok = false;
        if (gate == 0 && r.total != 0.0) ok = false;
        if (r.format != format || r.hack_gate != gate) ok = false;
    }
    report(2, ok, "combined reward composes components exactly over 10000 tuples",
           timer.seconds(), 1.0);
}

// ---- criterion 3: metrics fixture ------------------------------------------

void criterion_3() {
    Timer timer;
    bool ok = true;
    size_t n = 0;
    std::ifstream in("fixtures/metrics_cases.jsonl");
    if (!in) {
        report(3, false, "fixtures/metrics_cases.jsonl missing", timer.seconds(), 1.0);
        return;
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json doc = nlohmann::json::parse(line);
        std::vector<std::string> golds;
        for (const auto &g : doc["golds"]) golds.push_back(g.get<std::string>());
        const ScorePair got = score_against_golds(doc["pred"].get<std::string>(), golds);
        if (got.em != doc["em"].get<int>()) ok = false;
        if (std::abs(got.f1 - doc["f1"].get<double>()) > 1e-6) ok = false;
        ++n;
    }
    ok = ok && n == 50;
    report(3, ok, "EM/F1 agree with the independently generated 50-case fixture",
           timer.seconds(), 1.0);
}

// ---- criterion 4: group normalization and analytic gradients ---------------

void criterion_4() {
    Timer timer;
    bool ok = true;
    Rng rng(404);

    for (int trial = 0; trial < 1000; ++trial) {
        const size_t n = 2 + rng.uniform_below(15);
        std::vector<double> rewards(n);
        for (size_t i = 0; i < n; ++i) {
            rewards[i] = rng.uniform_real(-2.0, 2.0);
        }
        // Pin a spread so the group is non-degenerate: near-constant rewards
        // make the epsilon_std stabilizer visible at the 1e-6 scale.
        rewards[0] = -2.1;
        rewards[1] = 2.1;
        const std::vector<double> a = group_advantages(rewards);

        double mean = 0.0;
        for (double v : a) mean += v;
        mean /= static_cast<double>(n);
        if (std::abs(mean) > 1e-9) ok = false;

        double var = 0.0;
        for (double v : a) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);
        if (std::abs(std::sqrt(var) - 1.0) > 1e-6) ok = false;
    }

    for (double v : group_advantages({0.3, 0.3, 0.3})) {
        if (v != 0.0) ok = false;
    }

    // Analytic gradients vs central finite differences, 100 random points
    // split across the two differentiable pieces.
    int points = 0;
    while (points < 100) {
        const size_t n = 1 + rng.uniform_below(5);
        SelectionPolicy policy;
        std::vector<double> ref(n);
        std::vector<int> actions(n);
        for (size_t i = 0; i < n; ++i) {
            policy.logits.push_back(rng.uniform_real(-3.0, 3.0));
            ref[i] = rng.uniform_real(-3.0, 3.0);
            actions[i] = rng.bernoulli(0.5) ? 1 : 0;
        }
        const std::vector<double> g_lp = episode_logprob_grad(policy, actions);
        const std::vector<double> g_kl = bernoulli_kl_grad(policy, ref);
        const double h = 1e-6;
        for (size_t j = 0; j < n && points < 100; ++j, ++points) {
            SelectionPolicy hi = policy, lo = policy;
            hi.logits[j] += h;
            lo.logits[j] -= h;
            const double fd_lp =
                (episode_logprob(hi, actions) - episode_logprob(lo, actions)) / (2 * h);
            const double fd_kl = (bernoulli_kl(hi, ref) - bernoulli_kl(lo, ref)) / (2 * h);
            if (std::abs(g_lp[j] - fd_lp) / std::max(1.0, std::abs(fd_lp)) > 1e-5) ok = false;
            if (std::abs(g_kl[j] - fd_kl) / std::max(1.0, std::abs(fd_kl)) > 1e-5) ok = false;
        }
    }
    report(4, ok, "group advantages normalize and analytic gradients match finite differences",
           timer.seconds(), 5.0);
}

// ---- criterion 5: truncation safety ----------------------------------------

void criterion_5() {
    Timer timer;
    bool ok = true;
    Rng rng(505);
    const std::string alphabet = "abc def.,!?  xy\n\tz";
    for (int trial = 0; trial < 10000; ++trial) {
        const size_t len = rng.uniform_below(120);
        std::string text;
        for (size_t i = 0; i < len; ++i) {
            text += alphabet[rng.uniform_below(alphabet.size())];
        }
        const size_t budget = 1 + rng.uniform_below(20);
        const std::string cut = truncate_to_budget(text, budget);
        if (count_tokens(cut) > budget) ok = false;
        if (truncate_to_budget(cut, budget) != cut) ok = false;
        if (text.rfind(cut, 0) != 0) ok = false;  // always a byte prefix
    }
    report(5, ok, "budget truncation is safe and idempotent on 10000 random inputs",
           timer.seconds(), 5.0);
}

// ---- criterion 6: deterministic compression record -------------------------

void criterion_6() {
    Timer timer;
    bool ok = true;

    CompressionSample sample;
    sample.id = "golden-1";
    sample.question = "Who maintained the north beacon?";
    sample.documents = {
        {"Beacon log", "Keeper Odile Brandt maintained the north beacon from 1911 to 1934."},
        {"Harbor notes", "Freight volumes doubled after the channel was dredged."}};
    sample.golds = {"Odile Brandt"};

    const PipelineConfig cfg;
    const ContextText ctx = concat_context(sample.documents);
    const BudgetSpec budget = compute_budget(ctx.tokens, 4);
    const std::string thinker_prompt = build_thinker_prompt(sample.question, ctx.text, budget);
    const std::string trace_text = "Odile Brandt kept the north beacon";
    const std::string answer_prompt = build_answer_prompt(sample.question, trace_text);

    std::string first_line;
    for (int run = 0; run < 3; ++run) {
        MockBackend thinker(
            {{message_digest({{"user", thinker_prompt}}), "<think>" + trace_text + "</think>"}});
        MockBackend answerer({{message_digest({{"user", answer_prompt}}), "Odile Brandt"}});
        const CompressionRecord rec = run_sample(sample, 4, thinker, answerer, cfg);
        const std::string line = serialize_record(rec);
        if (run == 0) {
            first_line = line;
        } else if (line != first_line) {
            ok = false;
        }

        // The answer request must carry only the trace, never the documents.
        if (answerer.requests().size() != 1) {
            ok = false;
        } else {
            const std::string &prompt = answerer.requests()[0][0].content;
            for (const auto &doc : sample.documents) {
                if (prompt.find(doc.text) != std::string::npos) ok = false;
                if (prompt.find(doc.title) != std::string::npos) ok = false;
            }
            if (prompt.find(trace_text) == std::string::npos) ok = false;
        }
    }
    ok = ok && !first_line.empty();
    report(6, ok, "compression records are byte-identical across runs and isolate the answerer",
           timer.seconds(), 1.0);
}

// ---- criterion 7: simulated training dynamics ------------------------------

void criterion_7() {
    Timer timer;
    bool ok = true;
    std::string detail;

    SimConfig cfg;  // seed 42, 500 steps, budget 16
    const SimCurves full = train(cfg);

    const double tail_tokens = tail_mean(full.mean_trace_tokens, 0.2);
    const double budget_cap = 1.05 * static_cast<double>(cfg.budget_tokens);
    if (tail_tokens > budget_cap) {
        ok = false;
        detail += " trace length stays above budget;";
    }

    const double early_utility = head_mean(full.mean_utility, 0.1);
    const double late_utility = tail_mean(full.mean_utility, 0.1);
    if (late_utility <= early_utility) {
        ok = false;
        detail += " utility does not improve;";
    }

    const double hack_on = tail_mean(full.hack_rate, 0.1);
    if (hack_on >= 0.05) {
        ok = false;
        detail += " hack rate stays high with the gate on;";
    }

    SimConfig no_gate = cfg;
    no_gate.hack_gate_enabled = false;
    const SimCurves ungated = train(no_gate);
    const double hack_off = tail_mean(ungated.hack_rate, 0.1);
    if (hack_off <= hack_on) {
        ok = false;
        detail += " disabling the gate does not raise the hack rate;";
    }

    SimConfig no_utility = cfg;
    no_utility.utility_reward_enabled = false;
    const SimCurves blind = train(no_utility);
    const double blind_early = head_mean(blind.mean_utility, 0.1);
    const double blind_late = tail_mean(blind.mean_utility, 0.1);
    if (blind_late > blind_early) {
        ok = false;
        detail += " utility still improves without its reward;";
    }

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "training dynamics: tokens %.1f<=%.1f, utility %.2f->%.2f, hack %.3f vs %.3f "
                  "ungated%s",
                  tail_tokens, budget_cap, early_utility, late_utility, hack_on, hack_off,
                  detail.c_str());
    report(7, ok, buf, timer.seconds(), 120.0);
}

// ---- criterion 8: reward service equivalence -------------------------------

void criterion_8() {
    Timer timer;
    bool ok = true;

    // Identical sequence scripts for the served and in-process answerers.
    // Requests are posted serially, so reply i pairs with request i on both
    // routes; format failures consume no reply on either.
    std::vector<MockReply> script;
    Rng seed_rng(808);
    for (int i = 0; i < 100; ++i) {
        script.push_back({std::nullopt, "prediction " + std::to_string(seed_rng.next_u64() % 97)});
    }
    MockBackend served_answerer(script);
    MockBackend local_answerer(script);

    const PipelineConfig cfg;
    RewardService service(served_answerer, cfg);
    const int port = service.start("127.0.0.1", 0);
    if (port <= 0) {
        report(8, false, "reward service failed to bind", timer.seconds(), 10.0);
        return;
    }
    httplib::Client client("127.0.0.1", port);

    Rng rng(808);
    const char *phrases[] = {"alpha beta gamma", "delta epsilon", "zeta eta theta iota",
                             "the answer is kappa", "lambda mu nu xi omicron pi rho"};
    for (int i = 0; i < 100 && ok; ++i) {
        RewardRequest req;
        std::string body_text = phrases[rng.uniform_below(5)];
        for (uint64_t extra = rng.uniform_below(30); extra > 0; --extra) {
            body_text += " w" + std::to_string(rng.uniform_below(50));
        }
        const bool well_formed = rng.uniform_real() < 0.8;
        req.response_text = well_formed ? "<think>" + body_text + "</think>" : body_text;
        req.golds = {"kappa"};
        req.context_tokens = 1 + rng.uniform_below(200);
        req.ratio = rng.bernoulli(0.5) ? 4 : 8;
        req.question = "which word?";

        nlohmann::ordered_json doc;
        doc["response_text"] = req.response_text;
        doc["golds"] = req.golds;
        doc["context_tokens"] = req.context_tokens;
        doc["ratio"] = req.ratio;
        doc["question"] = req.question;

        auto res = client.Post("/v1/reward", doc.dump(), "application/json");
        if (!res || res->status != 200) {
            ok = false;
            break;
        }
        const std::string expected =
            reward_response_to_json(score_reward_request(req, local_answerer, cfg));
        if (res->body != expected) ok = false;
    }

    // Malformed bodies must 400 without taking the service down.
    auto bad = client.Post("/v1/reward", "{\"golds\": []}", "application/json");
    if (!bad || bad->status != 400) ok = false;
    auto not_json = client.Post("/v1/reward", "][", "application/json");
    if (!not_json || not_json->status != 400) ok = false;
    auto health = client.Get("/healthz");
    if (!health || health->status != 200) ok = false;

    service.stop();
    report(8, ok, "served reward breakdowns equal the in-process path on 100 requests",
           timer.seconds(), 10.0);
}

// ---- criterion 9: live-endpoint direction check (opt-in) --------------------

void criterion_9() {
    const char *base_url = std::getenv("TRACEPRESS_LIVE_BASE_URL");
    if (base_url == nullptr || *base_url == '\0') {
        std::printf(
            "SKIP criterion 9: live-endpoint check (set TRACEPRESS_LIVE_BASE_URL, optionally "
            "TRACEPRESS_LIVE_MODEL / TRACEPRESS_LIVE_API_KEY_ENV, to enable)\n");
        return;
    }
    Timer timer;
    bool ok = true;
    std::string what;
    try {
        HttpBackendConfig http;
        http.base_url = base_url;
        const char *model = std::getenv("TRACEPRESS_LIVE_MODEL");
        http.model = (model != nullptr && *model != '\0') ? model : "default";
        const char *key_env = std::getenv("TRACEPRESS_LIVE_API_KEY_ENV");
        if (key_env != nullptr && *key_env != '\0') {
            http.api_key_env = key_env;
        }
        HttpBackend thinker(http);
        HttpBackend answerer(http);

        Dataset ds = load_jsonl("fixtures/smoke_qa.jsonl");
        ds = subsample(ds, 20, 42);
        PipelineConfig cfg;

        const EvalOutput compressed = evaluate(ds, 4, thinker, answerer, cfg);
        double closed_em = 0.0;
        for (const auto &sample : ds.samples) {
            closed_em += run_closed_book(sample, answerer, cfg).em;
        }
        closed_em /= static_cast<double>(ds.samples.size());

        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "compressed em_avg %.3f vs closed-book %.3f on 20 live samples",
                      compressed.row.em_avg, closed_em);
        what = buf;
        ok = compressed.row.em_avg > closed_em;
    } catch (const std::exception &e) {
        ok = false;
        what = std::string("live run failed: ") + e.what();
    }
    report(9, ok, what, timer.seconds(), 600.0);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
