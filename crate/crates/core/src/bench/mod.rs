//! Timing engine and experiment orchestration.
//!
//! A comparison runs `warmup` untimed passes of each form, then `reps` timed
//! passes of the inline kernel followed by `reps` timed passes of the call
//! kernel (or alternating passes, for drift diagnosis). Only the traversal is
//! timed; the checksum is consumed through an optimization barrier after the
//! clock stops.

mod clock;
mod fit;
mod scaling;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusError, CorpusStats, InvertedIndex};
use crate::kernels::{
    kernel_pair_equivalence, EquivalenceReport, Form, KernelError, KernelId, KernelPlan, Model,
};
use crate::weighting::{Bm25Params, DEFAULT_PAD};

pub use clock::{clock_resolution_ns, time_once};
pub use fit::{linear_fit, FitError, FitStatus, ScalingFit};
pub use scaling::{
    run_scaling, run_scaling_with, ScalingError, ScalingReport, ScalingRow, ScalingSchedule,
    DEFAULT_FACTORS,
};

pub const DEFAULT_REPS: u32 = 3;
pub const DEFAULT_WARMUP: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("repetition count must be at least 1")]
    ZeroReps,
    #[error("inline mean must be positive to compute an overhead, got {0}")]
    NonPositiveInlineMean(f64),
    #[error("clock failure: {0}")]
    Clock(String),
    #[error("a measurement needs at least one timing")]
    EmptyMeasurement,
    #[error("result failed its self-consistency check: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepetitionOrder {
    /// All inline repetitions, then all call repetitions.
    #[default]
    Blocked,
    /// inline, call, inline, call, ...
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchSettings {
    pub params: Bm25Params,
    pub pad: f64,
    pub reps: u32,
    pub warmup: u32,
    pub order: RepetitionOrder,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            params: Bm25Params::default(),
            pad: DEFAULT_PAD,
            reps: DEFAULT_REPS,
            warmup: DEFAULT_WARMUP,
            order: RepetitionOrder::Blocked,
        }
    }
}

/// Per-repetition timings of one kernel, in nanoseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub kernel: KernelId,
    pub times_ns: Vec<u64>,
    pub mean_ns: f64,
}

impl Measurement {
    pub fn new(kernel: KernelId, times_ns: Vec<u64>) -> Result<Self, BenchError> {
        if times_ns.is_empty() {
            return Err(BenchError::EmptyMeasurement);
        }
        let mean_ns = mean(&times_ns);
        Ok(Self {
            kernel,
            times_ns,
            mean_ns,
        })
    }

    pub fn min_ns(&self) -> u64 {
        self.times_ns.iter().copied().min().unwrap_or(0)
    }

    pub fn median_ns(&self) -> f64 {
        let mut sorted = self.times_ns.clone();
        sorted.sort_unstable();
        let mid = sorted.len() / 2;
        if sorted.len() % 2 == 0 {
            (sorted[mid - 1] as f64 + sorted[mid] as f64) / 2.0
        } else {
            sorted[mid] as f64
        }
    }
}

fn mean(values: &[u64]) -> f64 {
    let total: u128 = values.iter().map(|&v| u128::from(v)).sum();
    total as f64 / values.len() as f64
}

/// `100 × (call − inline) / inline`
pub fn overhead_pct(inline_mean: f64, call_mean: f64) -> Result<f64, BenchError> {
    if inline_mean.is_nan() || inline_mean <= 0.0 {
        return Err(BenchError::NonPositiveInlineMean(inline_mean));
    }
    Ok(100.0 * (call_mean - inline_mean) / inline_mean)
}

/// Inline and call measurements of one model on one index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub model: Model,
    pub inline: Measurement,
    pub call: Measurement,
    pub overhead_pct: f64,
    /// Extra nanoseconds per weight computation in the call form.
    pub per_call_ns: f64,
    pub weight_count: u64,
    /// Present when the result was measured (absent when rebuilt from a raw file).
    pub equivalence: Option<EquivalenceReport>,
}

impl ComparisonResult {
    pub fn from_measurements(
        model: Model,
        inline: Measurement,
        call: Measurement,
        weight_count: u64,
    ) -> Result<Self, BenchError> {
        let overhead_pct = overhead_pct(inline.mean_ns, call.mean_ns)?;
        let per_call_ns = if weight_count == 0 {
            0.0
        } else {
            (call.mean_ns - inline.mean_ns) / weight_count as f64
        };
        let result = Self {
            model,
            inline,
            call,
            overhead_pct,
            per_call_ns,
            weight_count,
            equivalence: None,
        };
        result.check_consistency()?;
        Ok(result)
    }

    /// Re-derives every computed field from the stored timings.
    pub fn check_consistency(&self) -> Result<(), BenchError> {
        let fail = |what: String| Err(BenchError::Inconsistent(format!("{}: {what}", self.model)));
        for m in [&self.inline, &self.call] {
            if m.times_ns.is_empty() || (mean(&m.times_ns) - m.mean_ns).abs() > 1.0 {
                return fail(format!("{} mean does not match its repetitions", m.kernel));
            }
        }
        if self.inline.kernel != KernelId::new(self.model, Form::Inline)
            || self.call.kernel != KernelId::new(self.model, Form::Call)
        {
            return fail("kernel ids do not match the model".into());
        }
        let expected = 100.0 * (self.call.mean_ns - self.inline.mean_ns) / self.inline.mean_ns;
        if (expected - self.overhead_pct).abs() > 1e-9 {
            return fail(format!(
                "overhead {} should be {expected}",
                self.overhead_pct
            ));
        }
        if self.weight_count > 0 {
            let per_call = (self.call.mean_ns - self.inline.mean_ns) / self.weight_count as f64;
            if (per_call - self.per_call_ns).abs() > 1e-9 * per_call.abs().max(1.0) {
                return fail(format!(
                    "per-call cost {} should be {per_call}",
                    self.per_call_ns
                ));
            }
        }
        if let Some(eq) = &self.equivalence {
            if eq.inline.weight_count != self.weight_count
                || eq.call.weight_count != self.weight_count
            {
                return fail("weight count differs from the equivalence run".into());
            }
        }
        Ok(())
    }

    /// Whether the call form was slower on average.
    pub fn call_is_slower(&self) -> bool {
        self.call.mean_ns > self.inline.mean_ns
    }
}

fn timed_run(plan: &KernelPlan, id: KernelId, settings: &BenchSettings) -> Result<u64, BenchError> {
    let (ns, outcome) = time_once(|| plan.run(id, &settings.params, settings.pad))?;
    outcome.consume();
    Ok(ns)
}

/// Gates on kernel equivalence, then times both forms of `model`.
pub fn run_comparison(
    model: Model,
    plan: &KernelPlan,
    settings: &BenchSettings,
) -> Result<ComparisonResult, BenchError> {
    if settings.reps == 0 {
        return Err(BenchError::ZeroReps);
    }
    let equivalence = kernel_pair_equivalence(model, plan, &settings.params, settings.pad)?;

    let inline_id = KernelId::new(model, Form::Inline);
    let call_id = KernelId::new(model, Form::Call);
    for _ in 0..settings.warmup {
        for id in [inline_id, call_id] {
            plan.run(id, &settings.params, settings.pad).consume();
        }
    }

    let reps = settings.reps as usize;
    let mut inline_times = Vec::with_capacity(reps);
    let mut call_times = Vec::with_capacity(reps);
    match settings.order {
        RepetitionOrder::Blocked => {
            for _ in 0..reps {
                inline_times.push(timed_run(plan, inline_id, settings)?);
            }
            for _ in 0..reps {
                call_times.push(timed_run(plan, call_id, settings)?);
            }
        }
        RepetitionOrder::Alternating => {
            for _ in 0..reps {
                inline_times.push(timed_run(plan, inline_id, settings)?);
                call_times.push(timed_run(plan, call_id, settings)?);
            }
        }
    }

    finish_comparison(equivalence, inline_times, call_times)
}

/// Builds the result of a gated, timed comparison and checks it.
fn finish_comparison(
    equivalence: EquivalenceReport,
    inline_times: Vec<u64>,
    call_times: Vec<u64>,
) -> Result<ComparisonResult, BenchError> {
    let model = equivalence.model;
    let mut result = ComparisonResult::from_measurements(
        model,
        Measurement::new(KernelId::new(model, Form::Inline), inline_times)?,
        Measurement::new(KernelId::new(model, Form::Call), call_times)?,
        equivalence.inline.weight_count,
    )?;
    result.equivalence = Some(equivalence);
    result.check_consistency()?;
    Ok(result)
}

/// Convenience wrapper that prepares the kernel plan from an index.
pub fn compare(
    model: Model,
    index: &InvertedIndex,
    stats: &CorpusStats,
    settings: &BenchSettings,
) -> Result<ComparisonResult, BenchError> {
    let plan = KernelPlan::prepare(index, stats)?;
    run_comparison(model, &plan, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_index, generate_synthetic_corpus};
    use proptest::prelude::*;

    fn ms(values: &[f64]) -> Vec<u64> {
        values.iter().map(|v| (v * 1e6).round() as u64).collect()
    }

    #[test]
    fn published_overheads() {
        let cases = [
            (27.7957, 42.2777, 52.10),
            (45.5493, 65.2803, 43.32),
            (57.5558, 74.8626, 30.07),
            (47.0267, 69.7313, 48.28),
            (245.3276, 357.9202, 45.89),
        ];
        for (inline, call, pct) in cases {
            let got = overhead_pct(inline, call).unwrap();
            assert!((got - pct).abs() <= 0.01, "{inline} / {call}: {got}");
        }
        assert_eq!(overhead_pct(3.5, 3.5).unwrap(), 0.0);
        assert!(matches!(
            overhead_pct(0.0, 1.0),
            Err(BenchError::NonPositiveInlineMean(_))
        ));
        assert!(overhead_pct(-1.0, 1.0).is_err());
    }

    #[test]
    fn comparison_from_published_pair() {
        let inline = Measurement::new(
            KernelId::new(Model::Tfidf, Form::Inline),
            ms(&[26.782, 29.032, 27.5731]),
        )
        .unwrap();
        let call = Measurement::new(
            KernelId::new(Model::Tfidf, Form::Call),
            ms(&[41.4691, 42.3369, 43.0271]),
        )
        .unwrap();
        let r = ComparisonResult::from_measurements(Model::Tfidf, inline, call, 21624).unwrap();
        assert!((r.inline.mean_ns / 1e6 - 27.7957).abs() < 1e-9);
        assert!((r.call.mean_ns / 1e6 - 42.2777).abs() < 1e-9);
        assert!((r.overhead_pct - 52.10).abs() < 0.01);
        assert!((r.per_call_ns - (r.call.mean_ns - r.inline.mean_ns) / 21624.0).abs() < 1e-9);
    }

    #[test]
    fn measurement_statistics() {
        let m = Measurement::new(KernelId::new(Model::Bm25, Form::Call), vec![5, 1, 9, 3]).unwrap();
        assert_eq!(m.mean_ns, 4.5);
        assert_eq!(m.min_ns(), 1);
        assert_eq!(m.median_ns(), 4.0);
        assert!(Measurement::new(m.kernel, vec![]).is_err());
    }

    #[test]
    fn mismatched_kernels_rejected() {
        let inline = Measurement::new(KernelId::new(Model::Bm25, Form::Inline), vec![10]).unwrap();
        let call = Measurement::new(KernelId::new(Model::Tfidf, Form::Call), vec![12]).unwrap();
        assert!(matches!(
            ComparisonResult::from_measurements(Model::Bm25, inline, call, 1),
            Err(BenchError::Inconsistent(_))
        ));
    }

    #[test]
    fn measured_comparison() {
        let docs = generate_synthetic_corpus(50, 300, 40, 9).unwrap();
        let (index, stats) = build_index(&docs).unwrap();
        let plan = KernelPlan::prepare(&index, &stats).unwrap();
        for order in [RepetitionOrder::Blocked, RepetitionOrder::Alternating] {
            let settings = BenchSettings {
                reps: 4,
                order,
                ..BenchSettings::default()
            };
            for model in Model::ALL {
                let r = run_comparison(model, &plan, &settings).unwrap();
                assert_eq!(r.inline.times_ns.len(), 4);
                assert_eq!(r.call.times_ns.len(), 4);
                assert_eq!(r.weight_count, index.total_postings());
                assert!(r.inline.times_ns.iter().all(|&t| t > 0));
                r.check_consistency().unwrap();
            }
        }
        let zero = BenchSettings {
            reps: 0,
            ..BenchSettings::default()
        };
        assert!(matches!(
            run_comparison(Model::Tfidf, &plan, &zero),
            Err(BenchError::ZeroReps)
        ));
    }

    proptest! {
        #[test]
        fn overhead_inverts(a in 1e-3f64..1e9, p in -99.0f64..1e4) {
            let got = overhead_pct(a, a * (1.0 + p / 100.0)).unwrap();
            prop_assert!((got - p).abs() <= 1e-9, "{} vs {}", got, p);
        }

        #[test]
        fn mean_properties(c in 0u64..1_000_000_000, n in 1usize..20, mut v in proptest::collection::vec(0u64..1_000_000_000, 1..20)) {
            prop_assert_eq!(mean(&vec![c; n]), c as f64);
            let before = mean(&v);
            v.reverse();
            prop_assert_eq!(mean(&v), before);
        }
    }
}
