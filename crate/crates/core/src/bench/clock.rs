use std::time::Instant;

use super::BenchError;

/// Times a single invocation of `f` on the monotonic clock.
///
/// Only the call itself is inside the timed span; the returned value is
/// handed back so the caller can consume it after the clock stops.
pub fn time_once<R>(f: impl FnOnce() -> R) -> Result<(u64, R), BenchError> {
    let start = Instant::now();
    let out = f();
    let end = Instant::now();
    let elapsed = end.checked_duration_since(start).ok_or_else(|| {
        BenchError::Clock(format!(
            "monotonic clock went backwards: {end:?} precedes {start:?}"
        ))
    })?;
    Ok((u64::try_from(elapsed.as_nanos()).unwrap_or(u64::MAX), out))
}

/// Smallest non-zero step observed between consecutive clock readings, in
/// nanoseconds. Returns `None` if the clock never advanced during sampling.
pub fn clock_resolution_ns() -> Option<u64> {
    let mut best: Option<u64> = None;
    for _ in 0..200 {
        let start = Instant::now();
        let mut now = Instant::now();
        let mut spins = 0;
        while now == start && spins < 1_000_000 {
            now = Instant::now();
            spins += 1;
        }
        let step = now.saturating_duration_since(start).as_nanos() as u64;
        if step > 0 {
            best = Some(best.map_or(step, |b| b.min(step)));
        }
    }
    best
}
