use callcost::bench::{clock_resolution_ns, ComparisonResult, ScalingFit, ScalingReport};
use callcost::corpus::{CorpusStats, InvertedIndex};
use callcost::kernels::Model;
use serde::Serialize;

use crate::config::RunConfig;

/// Description of the never-inline build contract recorded with every run.
pub const CALL_CONTRACT: &str =
    "call-form routines are #[inline(never)]; kernel parameters, pad and checksums pass \
    through std::hint::black_box";

#[derive(Debug, Serialize)]
pub struct Toolchain {
    pub rustc: &'static str,
    pub profile: &'static str,
    pub opt_level: &'static str,
    pub target: &'static str,
}

impl Toolchain {
    pub fn current() -> Self {
        Self {
            rustc: env!("CALLCOST_RUSTC_VERSION"),
            profile: env!("CALLCOST_PROFILE"),
            opt_level: env!("CALLCOST_OPT_LEVEL"),
            target: env!("CALLCOST_TARGET"),
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "{} ({}, opt-level {}, {})",
            self.rustc, self.profile, self.opt_level, self.target
        )
    }
}

#[derive(Debug, Serialize)]
pub struct IndexSummary {
    pub entries: usize,
    pub postings: u64,
    pub d: u32,
    pub avdl: f64,
}

impl IndexSummary {
    pub fn new(index: &InvertedIndex, stats: &CorpusStats) -> Self {
        Self {
            entries: index.len(),
            postings: index.total_postings(),
            d: stats.d(),
            avdl: stats.avdl(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ResultRecord {
    pub model: Model,
    pub factor: u32,
    pub element_count: u64,
    pub weight_count: u64,
    pub inline_checksum: Option<f64>,
    pub call_checksum: Option<f64>,
    pub checksum_relative_diff: Option<f64>,
    pub inline_mean_ns: f64,
    pub call_mean_ns: f64,
    pub inline_min_ns: u64,
    pub call_min_ns: u64,
    pub inline_median_ns: f64,
    pub call_median_ns: f64,
    pub overhead_pct: f64,
    pub per_call_ns: f64,
}

impl ResultRecord {
    pub fn new(factor: u32, element_count: u64, r: &ComparisonResult) -> Self {
        Self {
            model: r.model,
            factor,
            element_count,
            weight_count: r.weight_count,
            inline_checksum: r.equivalence.map(|e| e.inline.checksum),
            call_checksum: r.equivalence.map(|e| e.call.checksum),
            checksum_relative_diff: r.equivalence.map(|e| e.relative_diff),
            inline_mean_ns: r.inline.mean_ns,
            call_mean_ns: r.call.mean_ns,
            inline_min_ns: r.inline.min_ns(),
            call_min_ns: r.call.min_ns(),
            inline_median_ns: r.inline.median_ns(),
            call_median_ns: r.call.median_ns(),
            overhead_pct: r.overhead_pct,
            per_call_ns: r.per_call_ns,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Ordering {
    /// True when the call form was slower for every comparison.
    pub call_slower_everywhere: bool,
    pub violations: Vec<String>,
    pub waiver: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct FitRecord {
    pub model: Model,
    pub inline: ScalingFit,
    pub call: ScalingFit,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub command: &'static str,
    pub toolchain: String,
    pub toolchain_detail: Toolchain,
    pub call_contract: &'static str,
    pub clock: &'static str,
    pub clock_resolution_ns: Option<u64>,
    pub seed: u64,
    pub config: RunConfig,
    pub index: IndexSummary,
    pub results: Vec<ResultRecord>,
    pub ordering: Option<Ordering>,
    pub fits: Vec<FitRecord>,
}

impl Metadata {
    pub fn new(command: &'static str, cfg: &RunConfig, index: IndexSummary) -> Self {
        let toolchain = Toolchain::current();
        Self {
            tool: format!("callcost {}", env!("CARGO_PKG_VERSION")),
            command,
            toolchain: toolchain.describe(),
            toolchain_detail: toolchain,
            call_contract: CALL_CONTRACT,
            clock: "std::time::Instant (monotonic)",
            clock_resolution_ns: clock_resolution_ns(),
            seed: cfg.seed,
            config: cfg.clone(),
            index,
            results: Vec::new(),
            ordering: None,
            fits: Vec::new(),
        }
    }

    pub fn record_ordering(&mut self, results: &[(u32, ComparisonResult)], waiver: Option<&str>) {
        let violations: Vec<String> = results
            .iter()
            .filter(|(_, r)| !r.call_is_slower())
            .map(|(factor, r)| format!("{} at factor {factor}", r.model))
            .collect();
        self.ordering = Some(Ordering {
            call_slower_everywhere: violations.is_empty(),
            violations,
            waiver: waiver.map(str::to_owned),
        });
    }

    pub fn record_scaling(&mut self, reports: &[ScalingReport]) {
        self.fits = reports
            .iter()
            .map(|r| FitRecord {
                model: r.model,
                inline: r.inline_fit,
                call: r.call_fit,
                warnings: r.warnings.clone(),
            })
            .collect();
    }
}
