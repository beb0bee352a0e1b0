"""Budget-aware context compression: scoring, rewards, and training primitives.

Thin Python surface over the C++ core. All functions raise ValueError on
invalid inputs, mirroring the core library's single error type.
"""

from tracepress._tracepress import (
    actual_ratio,
    budget_reward,
    build_answer_prompt,
    build_thinker_prompt,
    combined_reward,
    compute_budget,
    concat_context,
    count_tokens,
    detect_hack,
    exact_match,
    extract_think,
    format_reward,
    group_advantages,
    kl_to_reference,
    normalize_tokens,
    score,
    simulate,
    token_f1,
    truncate_to_budget,
)

__all__ = [
    "actual_ratio",
    "budget_reward",
    "build_answer_prompt",
    "build_thinker_prompt",
    "combined_reward",
    "compute_budget",
    "concat_context",
    "count_tokens",
    "detect_hack",
    "exact_match",
    "extract_think",
    "format_reward",
    "group_advantages",
    "kl_to_reference",
    "normalize_tokens",
    "score",
    "simulate",
    "token_f1",
    "truncate_to_budget",
]
