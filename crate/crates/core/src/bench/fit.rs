use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitStatus {
    Ok,
    /// Every y is equal; r² is 1 by convention.
    Constant,
    /// Fewer than two distinct x values; slope is 0 and r² is 1 by convention.
    Degenerate,
}

/// Least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub status: FitStatus,
}

impl ScalingFit {
    /// Placeholder fit for a series that has a single x value.
    pub fn degenerate(points: &[(f64, f64)]) -> Self {
        let mean = if points.is_empty() {
            0.0
        } else {
            points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64
        };
        Self {
            slope: 0.0,
            intercept: mean,
            r2: 1.0,
            status: FitStatus::Degenerate,
        }
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("a linear fit needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("all x values are equal; the fit is degenerate")]
    Degenerate,
    #[error("non-finite coordinate in fit input")]
    NonFinite,
}

/// Ordinary least squares with r² = 1 − SS_res / SS_tot.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<ScalingFit, FitError> {
    if points.len() < 2 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(FitError::Degenerate);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    if syy == 0.0 {
        return Ok(ScalingFit {
            slope,
            intercept,
            r2: 1.0,
            status: FitStatus::Constant,
        });
    }
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(ScalingFit {
        slope,
        intercept,
        r2: (1.0 - ss_res / syy).clamp(0.0, 1.0),
        status: FitStatus::Ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ssr(points: &[(f64, f64)], slope: f64, intercept: f64) -> f64 {
        points
            .iter()
            .map(|&(x, y)| (y - slope * x - intercept).powi(2))
            .sum()
    }

    #[test]
    fn exact_line() {
        let fit = linear_fit(&[(0.0, 0.0), (1.0, 2.0), (2.0, 4.0)]).unwrap();
        assert_eq!(fit.slope, 2.0);
        assert_eq!(fit.intercept, 0.0);
        assert_eq!(fit.r2, 1.0);
        assert_eq!(fit.status, FitStatus::Ok);
    }

    #[test]
    fn constant_series() {
        let fit = linear_fit(&[(0.0, 1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.intercept, 1.0);
        assert_eq!(fit.r2, 1.0);
        assert_eq!(fit.status, FitStatus::Constant);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(linear_fit(&[(1.0, 1.0)]), Err(FitError::TooFewPoints(1)));
        assert_eq!(
            linear_fit(&[(3.0, 1.0), (3.0, 2.0)]),
            Err(FitError::Degenerate)
        );
        assert_eq!(
            linear_fit(&[(0.0, f64::NAN), (1.0, 2.0)]),
            Err(FitError::NonFinite)
        );
        let d = ScalingFit::degenerate(&[(5.0, 4.0)]);
        assert_eq!(
            (d.slope, d.intercept, d.r2, d.status),
            (0.0, 4.0, 1.0, FitStatus::Degenerate)
        );
    }

    #[test]
    fn minimizes_squared_residuals_on_grid() {
        let points = [(1.0, 2.3), (2.0, 2.9), (3.0, 4.4), (4.0, 4.8), (5.0, 6.1)];
        let fit = linear_fit(&points).unwrap();
        let best = ssr(&points, fit.slope, fit.intercept);
        for i in -20..=20 {
            for j in -20..=20 {
                let s = fit.slope + f64::from(i) * 0.01;
                let c = fit.intercept + f64::from(j) * 0.01;
                assert!(
                    ssr(&points, s, c) >= best - 1e-12,
                    "({s}, {c}) beats the fit"
                );
            }
        }
        assert!(fit.r2 > 0.0 && fit.r2 < 1.0);
    }

    #[test]
    fn collinear_r2_is_one() {
        let points: Vec<_> = (0..8)
            .map(|i| (f64::from(i) * 1000.0, 3.5 * f64::from(i) * 1000.0 + 17.0))
            .collect();
        let fit = linear_fit(&points).unwrap();
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn recovers_noise_free_line(alpha in -1e3f64..1e3, beta in -1e3f64..1e3, n in 2usize..30, step in 0.1f64..100.0) {
            let points: Vec<_> = (0..n).map(|i| {
                let x = i as f64 * step;
                (x, alpha * x + beta)
            }).collect();
            let fit = linear_fit(&points).unwrap();
            let tol = 1e-9 * (1.0 + alpha.abs() + beta.abs());
            prop_assert!((fit.slope - alpha).abs() <= tol, "slope {} vs {}", fit.slope, alpha);
            prop_assert!((fit.intercept - beta).abs() <= tol * (1.0 + n as f64 * step), "intercept {} vs {}", fit.intercept, beta);
            prop_assert!((0.0..=1.0).contains(&fit.r2));
        }
    }
}
