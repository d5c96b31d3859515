use std::fmt;

use serde::{Deserialize, Serialize};

use super::fit::{linear_fit, FitError, ScalingFit};
use super::{
    finish_comparison, run_comparison, timed_run, BenchError, BenchSettings, ComparisonResult,
};
use crate::corpus::{replicate_index, CorpusStats, InvertedIndex};
use crate::kernels::{kernel_pair_equivalence, Form, KernelId, KernelPlan, Model};

pub const DEFAULT_FACTORS: [u32; 5] = [1, 5, 10, 15, 20];

/// Allowed drop of a mean between consecutive (larger) dataset sizes before
/// a warning is raised.
const MONOTONE_SLACK: f64 = 0.05;

/// Order in which the replicated sizes are measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingSchedule {
    /// Every repetition round times each size once, so slow drift in machine
    /// speed is shared by all sizes instead of bending a single point.
    /// Holds the kernel plans of all sizes in memory at once.
    #[default]
    Interleaved,
    /// Each size is measured to completion before the next is replicated.
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub factor: u32,
    /// Number of index entries (words) after replication.
    pub element_count: u64,
    pub comparison: ComparisonResult,
}

impl ScalingRow {
    pub fn mean_ns(&self, form: Form) -> f64 {
        match form {
            Form::Inline => self.comparison.inline.mean_ns,
            Form::Call => self.comparison.call.mean_ns,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub model: Model,
    pub rows: Vec<ScalingRow>,
    pub inline_fit: ScalingFit,
    pub call_fit: ScalingFit,
    pub warnings: Vec<String>,
}

impl ScalingReport {
    /// Builds the report (fits and monotonicity warnings) from measured rows.
    pub fn from_rows(model: Model, mut rows: Vec<ScalingRow>) -> Result<Self, FitError> {
        rows.sort_by_key(|r| (r.element_count, r.factor));
        let fit = |form| {
            let points = points(&rows, form);
            match linear_fit(&points) {
                Err(FitError::Degenerate) | Err(FitError::TooFewPoints(1)) => {
                    Ok(ScalingFit::degenerate(&points))
                }
                other => other,
            }
        };
        let inline_fit = fit(Form::Inline)?;
        let call_fit = fit(Form::Call)?;

        let mut warnings = Vec::new();
        for form in Form::ALL {
            for pair in rows.windows(2) {
                let (prev, next) = (pair[0].mean_ns(form), pair[1].mean_ns(form));
                if next < prev * (1.0 - MONOTONE_SLACK) {
                    warnings.push(format!(
                        "{model} {form}: mean fell from {prev:.0} ns at {} entries to {next:.0} ns at {} entries",
                        pair[0].element_count, pair[1].element_count
                    ));
                }
            }
        }
        Ok(Self {
            model,
            rows,
            inline_fit,
            call_fit,
            warnings,
        })
    }

    pub fn points(&self, form: Form) -> Vec<(f64, f64)> {
        points(&self.rows, form)
    }

    pub fn fit(&self, form: Form) -> &ScalingFit {
        match form {
            Form::Inline => &self.inline_fit,
            Form::Call => &self.call_fit,
        }
    }
}

fn points(rows: &[ScalingRow], form: Form) -> Vec<(f64, f64)> {
    rows.iter()
        .map(|r| (r.element_count as f64, r.mean_ns(form)))
        .collect()
}

/// A scaling run that stopped early, with every row completed before the failure.
#[derive(Debug)]
pub struct ScalingError {
    pub partial: Vec<ScalingRow>,
    pub factor: Option<u32>,
    pub source: BenchError,
}

impl fmt::Display for ScalingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.factor {
            Some(factor) => write!(f, "scaling run failed at factor {factor}")?,
            None => write!(f, "scaling run failed")?,
        }
        write!(
            f,
            " after {} completed factor(s): {}",
            self.partial.len(),
            self.source
        )
    }
}

impl std::error::Error for ScalingError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

/// Replicates the index by each factor and compares both forms at every size,
/// using the interleaved schedule.
pub fn run_scaling(
    model: Model,
    index: &InvertedIndex,
    stats: &CorpusStats,
    settings: &BenchSettings,
    factors: &[u32],
) -> Result<ScalingReport, ScalingError> {
    run_scaling_with(
        model,
        index,
        stats,
        settings,
        factors,
        ScalingSchedule::default(),
    )
}

pub fn run_scaling_with(
    model: Model,
    index: &InvertedIndex,
    stats: &CorpusStats,
    settings: &BenchSettings,
    factors: &[u32],
    schedule: ScalingSchedule,
) -> Result<ScalingReport, ScalingError> {
    if factors.is_empty() {
        return Err(ScalingError {
            partial: vec![],
            factor: None,
            source: BenchError::Inconsistent("at least one replication factor is required".into()),
        });
    }
    let rows = match schedule {
        ScalingSchedule::Sequential => sequential(model, index, stats, settings, factors)?,
        ScalingSchedule::Interleaved => interleaved(model, index, stats, settings, factors)?,
    };
    ScalingReport::from_rows(model, rows.clone()).map_err(|e| ScalingError {
        partial: rows,
        factor: None,
        source: BenchError::Inconsistent(e.to_string()),
    })
}

fn replicated_plan(
    index: &InvertedIndex,
    stats: &CorpusStats,
    factor: u32,
) -> Result<(KernelPlan, u64), BenchError> {
    let replica = replicate_index(index, factor)?;
    let plan = KernelPlan::prepare(&replica, stats)?;
    Ok((plan, replica.len() as u64))
}

fn sequential(
    model: Model,
    index: &InvertedIndex,
    stats: &CorpusStats,
    settings: &BenchSettings,
    factors: &[u32],
) -> Result<Vec<ScalingRow>, ScalingError> {
    let mut rows = Vec::with_capacity(factors.len());
    for &factor in factors {
        let measured = replicated_plan(index, stats, factor).and_then(|(plan, element_count)| {
            Ok(ScalingRow {
                factor,
                element_count,
                comparison: run_comparison(model, &plan, settings)?,
            })
        });
        match measured {
            Ok(row) => rows.push(row),
            Err(source) => {
                return Err(ScalingError {
                    partial: rows,
                    factor: Some(factor),
                    source,
                })
            }
        }
    }
    Ok(rows)
}

fn interleaved(
    model: Model,
    index: &InvertedIndex,
    stats: &CorpusStats,
    settings: &BenchSettings,
    factors: &[u32],
) -> Result<Vec<ScalingRow>, ScalingError> {
    let fail = |factor, source| ScalingError {
        partial: vec![],
        factor,
        source,
    };
    if settings.reps == 0 {
        return Err(fail(None, BenchError::ZeroReps));
    }

    let mut sizes = Vec::with_capacity(factors.len());
    for &factor in factors {
        let prepared = replicated_plan(index, stats, factor).and_then(|(plan, element_count)| {
            let gate = kernel_pair_equivalence(model, &plan, &settings.params, settings.pad)?;
            Ok((factor, plan, element_count, gate))
        });
        sizes.push(prepared.map_err(|e| fail(Some(factor), e))?);
    }

    let inline_id = KernelId::new(model, Form::Inline);
    let call_id = KernelId::new(model, Form::Call);
    for (_, plan, _, _) in &sizes {
        for _ in 0..settings.warmup {
            for id in [inline_id, call_id] {
                plan.run(id, &settings.params, settings.pad).consume();
            }
        }
    }

    let reps = settings.reps as usize;
    let mut times = vec![(Vec::with_capacity(reps), Vec::with_capacity(reps)); sizes.len()];
    for _ in 0..reps {
        for ((factor, plan, _, _), (inline, call)) in sizes.iter().zip(&mut times) {
            let timed = |id| timed_run(plan, id, settings).map_err(|e| fail(Some(*factor), e));
            inline.push(timed(inline_id)?);
            call.push(timed(call_id)?);
        }
    }

    sizes
        .into_iter()
        .zip(times)
        .map(|((factor, _, element_count, gate), (inline, call))| {
            Ok(ScalingRow {
                factor,
                element_count,
                comparison: finish_comparison(gate, inline, call)
                    .map_err(|e| fail(Some(factor), e))?,
            })
        })
        .collect()
}
