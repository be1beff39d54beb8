//! Empirical convergence orders from `(h, err)` tables.
//!
//! Slopes are reported as orders: the slope of `log err` against `log h`,
//! positive when the error decreases with the step.

use crate::analysis::mc::ErrorTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    Interval(usize),
    MaxOverIntervals,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseSlope {
    pub from_steps: usize,
    pub to_steps: usize,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeReport {
    pub pairwise: Vec<PairwiseSlope>,
    pub ols_slope: f64,
    pub ols_intercept: f64,
    pub r_squared: f64,
    /// Points dropped from the fit, with the reason.
    pub notices: Vec<String>,
}

impl SlopeReport {
    pub fn mean_pairwise(&self) -> f64 {
        self.pairwise.iter().map(|s| s.slope).sum::<f64>() / self.pairwise.len() as f64
    }

    pub fn min_pairwise(&self) -> f64 {
        self.pairwise.iter().map(|s| s.slope).fold(f64::INFINITY, f64::min)
    }
}

pub fn fit_slopes(table: &ErrorTable, aggregate: Aggregate) -> Result<SlopeReport> {
    let series = match aggregate {
        Aggregate::Interval(j) => table.interval_series(j),
        Aggregate::MaxOverIntervals => table.max_series(),
    };
    fit_series(&series)
}

/// Fit `(N, h, err)` points sorted by `N`. Non-positive or non-finite
/// errors are dropped with a notice rather than clamped.
pub fn fit_series(series: &[(usize, f64, f64)]) -> Result<SlopeReport> {
    let mut notices = Vec::new();
    let mut points: Vec<(usize, f64, f64)> = Vec::with_capacity(series.len());
    for &(steps, h, err) in series {
        if err > 0.0 && err.is_finite() {
            points.push((steps, h, err));
        } else {
            notices.push(format!("N = {steps}: error {err} excluded from log-log fit"));
        }
    }
    points.sort_by_key(|p| p.0);
    points.dedup_by_key(|p| p.0);
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} usable point(s) out of {}",
            points.len(),
            series.len()
        )));
    }

    let pairwise = points
        .windows(2)
        .map(|w| PairwiseSlope {
            from_steps: w[0].0,
            to_steps: w[1].0,
            slope: (w[1].2 / w[0].2).ln() / (w[1].1 / w[0].1).ln(),
        })
        .collect();

    let xs: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.2.ln()).collect();
    let (ols_slope, ols_intercept, r_squared) = least_squares(&xs, &ys);

    Ok(SlopeReport {
        pairwise,
        ols_slope,
        ols_intercept,
        r_squared,
        notices,
    })
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, r^2)`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::mc::ErrorRow;

    fn table(points: &[(usize, f64)], tau: f64) -> ErrorTable {
        ErrorTable::new(
            points
                .iter()
                .map(|&(steps, err)| ErrorRow {
                    steps,
                    h: tau / steps as f64,
                    interval: 0,
                    err,
                    spread: 0.0,
                    samples: 1,
                    p: 2.0,
                })
                .collect(),
        )
    }

    #[test]
    fn exact_first_order() {
        let c = 3.7;
        let r = fit_series(&[(10, 0.1, 0.1 * c), (100, 0.01, 0.01 * c)]).unwrap();
        assert!((r.pairwise[0].slope - 1.0).abs() < 1e-12);
        assert!((r.ols_slope - 1.0).abs() < 1e-12);
        assert!((r.ols_intercept - c.ln()).abs() < 1e-12);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_half_order() {
        let c = 0.2;
        let pts: Vec<(usize, f64)> = [8, 16, 32, 64, 128]
            .iter()
            .map(|&n| (n, c * (1.0 / n as f64).sqrt()))
            .collect();
        let r = fit_slopes(&table(&pts, 1.0), Aggregate::Interval(0)).unwrap();
        assert_eq!(r.pairwise.len(), 4);
        for s in &r.pairwise {
            assert!((s.slope - 0.5).abs() < 1e-12);
        }
        assert!((r.ols_slope - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zeros_dropped_with_notice() {
        let r = fit_series(&[(10, 0.1, 0.0), (20, 0.05, 0.2), (40, 0.025, 0.1)]).unwrap();
        assert_eq!(r.pairwise.len(), 1);
        assert_eq!(r.notices.len(), 1);
        assert!(fit_series(&[(10, 0.1, 0.0), (20, 0.05, 0.0)]).is_err());
        assert!(fit_series(&[(10, 0.1, 1.0)]).is_err());
    }

    #[test]
    fn max_aggregate() {
        let mut rows = Vec::new();
        for &(steps, e0, e1) in &[(10usize, 1.0, 4.0), (40, 0.5, 1.0)] {
            for (j, err) in [(0, e0), (1, e1)] {
                rows.push(ErrorRow {
                    steps,
                    h: 1.0 / steps as f64,
                    interval: j,
                    err,
                    spread: 0.0,
                    samples: 1,
                    p: 2.0,
                });
            }
        }
        let t = ErrorTable::new(rows);
        let max = fit_slopes(&t, Aggregate::MaxOverIntervals).unwrap();
        assert!((max.ols_slope - 1.0).abs() < 1e-12);
        let j0 = fit_slopes(&t, Aggregate::Interval(0)).unwrap();
        assert!((j0.ols_slope - 0.5).abs() < 1e-12);
    }
}
