use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adapter::{ModelAdapter, Request};
use super::prompt::{parse_answer, render_prompt};
use crate::benchkit::{BenchmarkManifest, TestSample};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_INFLIGHT: usize = 4;
pub const DEFAULT_RETRIES: u32 = 2;

/// Treatment of samples whose adapter call still fails after all retries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportPolicy {
    /// Kept in the denominator and scored incorrect.
    #[default]
    CountIncorrect,
    /// Dropped from accuracy denominators.
    Exclude,
    /// The whole run fails.
    Abort,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalOptions {
    pub max_inflight: usize,
    pub retries: u32,
    pub transport: TransportPolicy,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_inflight: DEFAULT_MAX_INFLIGHT,
            retries: DEFAULT_RETRIES,
            transport: TransportPolicy::CountIncorrect,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub sample_id: String,
    pub model: String,
    pub subtask: usize,
    pub raw_response: Option<String>,
    pub parsed: Option<char>,
    pub parse_failure: bool,
    pub transport_error: Option<String>,
    /// Left out of accuracy denominators.
    pub excluded: bool,
    pub correct: bool,
    pub attempts: u32,
    pub latency_ms: f64,
}

fn evaluate(
    sample: &TestSample,
    adapter: &dyn ModelAdapter,
    options: &EvalOptions,
) -> Result<EvalRecord> {
    let prompt = render_prompt(sample);
    let request = Request {
        sample_id: &sample.id,
        image_ref: &sample.image_ref,
        prompt: &prompt,
        option_count: sample.subtask,
    };
    let start = Instant::now();
    let mut attempts = 0;
    let outcome = loop {
        attempts += 1;
        match adapter.invoke(&request) {
            Ok(text) => break Ok(text),
            Err(e) if attempts > options.retries => break Err(e),
            Err(_) => {}
        }
    };
    let latency_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut record = EvalRecord {
        sample_id: sample.id.clone(),
        model: adapter.name().to_string(),
        subtask: sample.subtask,
        raw_response: None,
        parsed: None,
        parse_failure: false,
        transport_error: None,
        excluded: false,
        correct: false,
        attempts,
        latency_ms,
    };
    match outcome {
        Ok(text) => {
            record.parsed = parse_answer(&text, sample.subtask);
            record.parse_failure = record.parsed.is_none();
            record.correct = record.parsed == Some(sample.answer_letter);
            record.raw_response = Some(text);
        }
        Err(e) => match options.transport {
            TransportPolicy::Abort => return Err(e),
            policy => {
                record.transport_error = Some(e.to_string());
                record.excluded = policy == TransportPolicy::Exclude;
            }
        },
    }
    Ok(record)
}

/// Runs every sample with at most `max_inflight` concurrent adapter calls.
/// Records come back sorted by sample id.
pub fn run_eval(
    manifest: &BenchmarkManifest,
    adapter: &dyn ModelAdapter,
    options: &EvalOptions,
) -> Result<Vec<EvalRecord>> {
    if options.max_inflight < 1 {
        return Err(Error::Config("max_inflight must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.max_inflight)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let mut records = pool.install(|| {
        manifest
            .samples
            .par_iter()
            .map(|s| evaluate(s, adapter, options))
            .collect::<Result<Vec<_>>>()
    })?;
    records.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    Ok(records)
}

/// One compact sorted-key JSON object per line.
pub fn records_to_jsonl(records: &[EvalRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(&serde_json::to_value(r)?)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_records_jsonl(text: &str) -> Result<Vec<EvalRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Flaky {
        failures_before_success: usize,
        calls: AtomicUsize,
    }

    impl ModelAdapter for Flaky {
        fn name(&self) -> &str {
            "flaky"
        }

        fn invoke(&self, _: &Request<'_>) -> Result<String> {
            if self.calls.fetch_add(1, Ordering::SeqCst) < self.failures_before_success {
                Err(Error::Adapter {
                    model: "flaky".into(),
                    reason: "timeout".into(),
                })
            } else {
                Ok("A".into())
            }
        }
    }

    fn sample() -> TestSample {
        TestSample {
            id: "s1".into(),
            image_ref: "i".into(),
            subtask: 4,
            template_id: "t".into(),
            question_text: "q".into(),
            options: (0..4)
                .map(|k| crate::benchkit::OptionEntry {
                    letter: crate::benchkit::letter(k),
                    label: format!("l{k}"),
                })
                .collect(),
            answer_letter: 'A',
        }
    }

    fn flaky(n: usize) -> Flaky {
        Flaky {
            failures_before_success: n,
            calls: AtomicUsize::new(0),
        }
    }

    #[test]
    fn retries_twice_then_gives_up() {
        let opts = EvalOptions::default();
        let r = evaluate(&sample(), &flaky(2), &opts).unwrap();
        assert!(r.correct);
        assert_eq!(r.attempts, 3);

        let r = evaluate(&sample(), &flaky(3), &opts).unwrap();
        assert!(!r.correct && !r.excluded);
        assert!(r.transport_error.is_some());
        assert_eq!(r.attempts, 3);

        let excl = EvalOptions {
            transport: TransportPolicy::Exclude,
            ..EvalOptions::default()
        };
        assert!(evaluate(&sample(), &flaky(3), &excl).unwrap().excluded);

        let abort = EvalOptions {
            transport: TransportPolicy::Abort,
            ..EvalOptions::default()
        };
        assert!(evaluate(&sample(), &flaky(3), &abort).is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let r = evaluate(&sample(), &flaky(0), &EvalOptions::default()).unwrap();
        let text = records_to_jsonl(&[r.clone(), r.clone()]).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(parse_records_jsonl(&text).unwrap(), vec![r.clone(), r]);
    }
}
