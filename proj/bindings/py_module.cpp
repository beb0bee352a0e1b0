#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>

#include "tracepress/error.hpp"
#include "tracepress/grpo.hpp"
#include "tracepress/metrics.hpp"
#include "tracepress/pipeline.hpp"
#include "tracepress/rewards.hpp"
#include "tracepress/toysim.hpp"
#include "tracepress/trace.hpp"

namespace py = pybind11;
using namespace tracepress;

namespace {

py::dict breakdown_to_dict(const RewardBreakdown &r) {
    py::dict d;
    d["format"] = r.format;
    d["utility"] = r.utility;
    d["budget"] = r.budget;
    d["hack_gate"] = r.hack_gate;
    d["total"] = r.total;
    return d;
}

py::dict trace_to_dict(const ThinkTrace &t) {
    py::dict d;
    d["raw_text"] = t.raw_text;
    d["raw_tokens"] = t.raw_tokens;
    d["truncated_text"] = t.truncated_text;
    d["truncated_tokens"] = t.truncated_tokens;
    return d;
}

}  // namespace

PYBIND11_MODULE(_tracepress, m) {
    m.doc() = "Budget-aware context compression: scoring, rewards, and training primitives";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error &e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    // ---- answer metrics ----
    m.def(
        "normalize_tokens",
        [](const std::string &text) { return normalize_answer(text).tokens; },
        py::arg("text"),
        "QA answer normalization: lowercase, strip punctuation, drop articles, split.");
    m.def("exact_match", &exact_match, py::arg("pred"), py::arg("gold"));
    m.def("token_f1", &token_f1, py::arg("pred"), py::arg("gold"));
    m.def(
        "score",
        [](const std::string &pred, const std::vector<std::string> &golds) {
            const ScorePair s = score_against_golds(pred, golds);
            py::dict d;
            d["em"] = s.em;
            d["f1"] = s.f1;
            return d;
        },
        py::arg("pred"), py::arg("golds"),
        "Best exact-match and token F1 over all gold aliases.");

    // ---- tokens and traces ----
    m.def(
        "count_tokens", [](const std::string &text) { return count_tokens(text); },
        py::arg("text"), "Reference token count: non-whitespace runs, punctuation split off.");
    m.def(
        "extract_think",
        [](const std::string &response) { return trace_to_dict(extract_think(response)); },
        py::arg("response"),
        "First <think>...</think> block, trimmed; raises ValueError when absent or empty.");
    m.def("format_reward", &format_reward, py::arg("response"),
          "1 iff the response carries a well-formed think block.");
    m.def(
        "truncate_to_budget",
        [](const std::string &text, size_t budget) { return truncate_to_budget(text, budget); },
        py::arg("text"), py::arg("budget"),
        "Longest token-prefix of text that fits the budget.");
    m.def(
        "compute_budget",
        [](size_t context_tokens, int ratio) {
            const BudgetSpec b = compute_budget(context_tokens, ratio);
            py::dict d;
            d["context_tokens"] = b.context_tokens;
            d["ratio"] = b.ratio;
            d["budget"] = b.budget;
            return d;
        },
        py::arg("context_tokens"), py::arg("ratio"),
        "budget = max(1, context_tokens // ratio).");
    m.def("actual_ratio", &actual_ratio, py::arg("trace_tokens"), py::arg("context_tokens"),
          "Achieved compression: trace tokens over context tokens.");

    // ---- rewards ----
    m.def(
        "budget_reward",
        [](double length, size_t budget, double gamma) {
            return budget_reward(length, BudgetGate{budget, gamma});
        },
        py::arg("length"), py::arg("budget"), py::arg("gamma") = 0.2,
        "1 within the budget, linear decay to 0 at budget * (1 + gamma).");
    m.def(
        "combined_reward",
        [](int format, double utility, double budget, int hack_gate, double lambda_fmt,
           double lambda_utility) {
            return breakdown_to_dict(combined_reward(format, utility, budget, hack_gate,
                                                     RewardWeights{lambda_fmt, lambda_utility}));
        },
        py::arg("format"), py::arg("utility"), py::arg("budget"), py::arg("hack_gate"),
        py::arg("lambda_fmt") = 0.05, py::arg("lambda_utility") = 0.95,
        "total = gate * (lambda_fmt * format + lambda_utility * utility * budget).");
    m.def(
        "detect_hack",
        [](const std::string &trace_text, const std::vector<std::string> &golds) {
            return detect_hack(trace_text, HackRules{}, golds);
        },
        py::arg("trace_text"), py::arg("golds"),
        "True when the trace declares an answer outright (default rule set).");

    // ---- group-relative policy math ----
    m.def(
        "group_advantages",
        [](const std::vector<double> &rewards) { return group_advantages(rewards); },
        py::arg("rewards"), "(r - mean) / (population std + 1e-8); exact zeros when constant.");
    m.def("kl_to_reference", &kl_to_reference, py::arg("logp_new"), py::arg("logp_ref"),
          "Mean nonnegative KL estimate exp(d) - d - 1 with d = ref - new.");

    // ---- prompts ----
    m.def(
        "build_thinker_prompt",
        [](const std::string &question, const std::string &context_text, size_t context_tokens,
           int ratio) {
            return build_thinker_prompt(question, context_text,
                                        compute_budget(context_tokens, ratio));
        },
        py::arg("question"), py::arg("context_text"), py::arg("context_tokens"), py::arg("ratio"),
        "Compressor instruction with context, question, and budget figures filled in.");
    m.def(
        "build_answer_prompt",
        [](const std::string &question, const std::string &trace_text) {
            return build_answer_prompt(question, trace_text);
        },
        py::arg("question"), py::arg("trace_text"),
        "Answer instruction over the trace only; empty trace gives the closed-book form.");
    m.def(
        "concat_context",
        [](const std::vector<std::pair<std::string, std::string>> &documents) {
            std::vector<Document> docs;
            docs.reserve(documents.size());
            for (const auto &[title, text] : documents) {
                docs.push_back({title, text});
            }
            const ContextText ctx = concat_context(docs);
            py::dict d;
            d["text"] = ctx.text;
            d["tokens"] = ctx.tokens;
            return d;
        },
        py::arg("documents"),
        "Join (title, text) pairs into the canonical context block and count its tokens.");

    // ---- simulated training ----
    m.def(
        "simulate",
        [](int steps, uint64_t seed, size_t budget_tokens, int group_size, double gamma,
           double learning_rate, bool hack_gate, bool budget_reward_on, bool utility_reward_on) {
            SimConfig cfg;
            cfg.steps = steps;
            cfg.seed = seed;
            cfg.budget_tokens = budget_tokens;
            cfg.group_size = group_size;
            cfg.gamma = gamma;
            cfg.learning_rate = learning_rate;
            cfg.hack_gate_enabled = hack_gate;
            cfg.budget_reward_enabled = budget_reward_on;
            cfg.utility_reward_enabled = utility_reward_on;
            const SimCurves curves = train(cfg);
            py::dict d;
            d["mean_total"] = curves.mean_total_reward;
            d["mean_utility"] = curves.mean_utility;
            d["mean_budget"] = curves.mean_budget_reward;
            d["hack_rate"] = curves.hack_rate;
            d["mean_tokens"] = curves.mean_trace_tokens;
            return d;
        },
        py::arg("steps") = 500, py::arg("seed") = 42, py::arg("budget_tokens") = 16,
        py::arg("group_size") = 8, py::arg("gamma") = 0.2, py::arg("learning_rate") = 0.25,
        py::arg("hack_gate") = true, py::arg("budget_reward_on") = true,
        py::arg("utility_reward_on") = true,
        "Policy-gradient training on the synthetic selection task; returns per-step curves.");
}
