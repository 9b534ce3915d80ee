//! Model evaluation: prompting, answer parsing, scoring and analysis tables.

mod adapter;
mod analysis;
mod harness;
mod prompt;
mod scoring;

pub use adapter::{HttpChatAdapter, ModelAdapter, OracleAdapter, Request, UniformRandomAdapter};
pub use analysis::{
    compare_sets, correlate_with_cognition, heatmap_csv, parse_cognition_csv, pearson,
    ComparisonReport, ComparisonRow, Correlation, DEFAULT_BAND,
};
pub use harness::{
    parse_records_jsonl, records_to_jsonl, run_eval, EvalOptions, EvalRecord, TransportPolicy,
    DEFAULT_MAX_INFLIGHT, DEFAULT_RETRIES,
};
pub use prompt::{option_block, parse_answer, render_prompt, PROMPT_TEMPLATE};
pub use scoring::{
    random_baseline, BASELINE_MODEL, score, scorecards_csv, subtask_label, weighted_average, BaselineMode,
    Scorecard, SubtaskScore,
};
