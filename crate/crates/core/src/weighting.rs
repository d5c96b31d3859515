//! Document-side term weights: tf-idf, Okapi BM25, and the padded BM25
//! variant that performs extra (result-neutral) arithmetic.
//!
//! All logarithms are natural. The expressions are written in the same
//! operation order as the measurement kernels so results agree bitwise.

use std::hint::black_box;

use serde::{Deserialize, Serialize};

pub const DEFAULT_K1: f64 = 1.2;
pub const DEFAULT_B: f64 = 0.2;
pub const DEFAULT_PAD: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WeightError {
    #[error("tf must be at least 1")]
    ZeroTf,
    #[error("df must be at least 1")]
    ZeroDf,
    #[error("df = {df} exceeds the document count d = {d}")]
    DfExceedsDocCount { df: u32, d: u32 },
    #[error("document length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("average document length must be positive, got {0}")]
    NonPositiveAvdl(f64),
    #[error("pad constant must be non-zero and finite, got {0}")]
    InvalidPad(f64),
    #[error("k1 must be positive and finite, got {0}")]
    InvalidK1(f64),
    #[error("b must lie in [0, 1], got {0}")]
    InvalidB(f64),
}

/// BM25 saturation (`k1`) and length-normalization slope (`b`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Bm25Params {
    pub fn new(k1: f64, b: f64) -> Result<Self, WeightError> {
        let params = Self { k1, b };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), WeightError> {
        if !(self.k1 > 0.0 && self.k1.is_finite()) {
            return Err(WeightError::InvalidK1(self.k1));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(WeightError::InvalidB(self.b));
        }
        Ok(())
    }
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self {
            k1: DEFAULT_K1,
            b: DEFAULT_B,
        }
    }
}

/// Inputs of a single weight computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightInputs {
    pub tf: u32,
    pub df: u32,
    pub d: u32,
    pub dl: f64,
    pub avdl: f64,
}

impl WeightInputs {
    fn check_counts(tf: u32, df: u32, d: u32) -> Result<(), WeightError> {
        if tf == 0 {
            return Err(WeightError::ZeroTf);
        }
        if df == 0 {
            return Err(WeightError::ZeroDf);
        }
        if df > d {
            return Err(WeightError::DfExceedsDocCount { df, d });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), WeightError> {
        Self::check_counts(self.tf, self.df, self.d)?;
        if !(self.dl > 0.0 && self.dl.is_finite()) {
            return Err(WeightError::NonPositiveLength(self.dl));
        }
        if !(self.avdl > 0.0 && self.avdl.is_finite()) {
            return Err(WeightError::NonPositiveAvdl(self.avdl));
        }
        Ok(())
    }
}

/// `(1 + ln tf) * ln(d / df + 1)`
pub fn tfidf_weight(tf: u32, df: u32, d: u32) -> Result<f64, WeightError> {
    WeightInputs::check_counts(tf, df, d)?;
    let (tf, df, d) = (f64::from(tf), f64::from(df), f64::from(d));
    Ok((1.0 + tf.ln()) * (d / df + 1.0).ln())
}

/// `(k1 + 1) tf / (k1 (1 - b + b dl/avdl) + tf) * ln(1 + d / df)`
pub fn bm25_weight(inputs: &WeightInputs, params: &Bm25Params) -> Result<f64, WeightError> {
    inputs.validate()?;
    params.validate()?;
    let (mul, idf) = bm25_terms(inputs, params);
    Ok(mul * idf)
}

/// BM25 with both factors multiplied and then divided by `pad`. The pad goes
/// through an optimization barrier so the extra operations are really executed.
pub fn bm25_modified_weight(
    inputs: &WeightInputs,
    params: &Bm25Params,
    pad: f64,
) -> Result<f64, WeightError> {
    inputs.validate()?;
    params.validate()?;
    if pad == 0.0 || !pad.is_finite() {
        return Err(WeightError::InvalidPad(pad));
    }
    let pad = black_box(pad);
    let (mul, idf) = bm25_terms(inputs, params);
    Ok(((mul * pad) / pad) * ((idf * pad) / pad))
}

#[inline(always)]
fn bm25_terms(inputs: &WeightInputs, params: &Bm25Params) -> (f64, f64) {
    let Bm25Params { k1, b } = *params;
    let tf = f64::from(inputs.tf);
    let df = f64::from(inputs.df);
    let d = f64::from(inputs.d);
    let mul = ((k1 + 1.0) * tf) / (k1 * (1.0 - b + b * (inputs.dl / inputs.avdl)) + tf);
    let idf = (1.0 + (d / df)).ln();
    (mul, idf)
}
