//! Wiener path realizations on a uniform grid, evaluated by piecewise
//! linear interpolation.

use crate::error::{invalid, Error, Result};
use crate::rng::RandomStream;

/// Grid values `Z(i h)` for `i = 0..len`, with `Z(t) = 0` for `t < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePath {
    step: f64,
    values: Vec<f64>,
}

impl PiecewisePath {
    pub fn from_values(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("h_ref", format!("must be positive, got {step}")));
        }
        if values.len() < 2 {
            return Err(invalid("values", "a path needs at least two nodes"));
        }
        Ok(Self { step, values })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// Node time `i h`.
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    /// `Z(t)`, linear between nodes, exact at nodes, zero for `t < 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t > self.horizon() {
            return Err(Error::IndexOutOfRange(format!(
                "t = {t} beyond path horizon {}",
                self.horizon()
            )));
        }
        Ok(self.eval_clamped(t))
    }

    /// As [`eval`](Self::eval) without the horizon check; times past the end
    /// extrapolate from the last segment.
    #[inline]
    pub(crate) fn eval_clamped(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let s = t / self.step;
        let nearest = s.round() as usize;
        if nearest < self.values.len() && self.time(nearest) == t {
            return self.values[nearest];
        }
        let i = (s.floor() as usize).min(self.values.len() - 2);
        let frac = s - i as f64;
        let (a, b) = (self.values[i], self.values[i + 1]);
        a + frac * (b - a)
    }
}

/// Cumulative sum of independent `N(0, h_ref)` increments over `[0, T]`,
/// with `ceil(T / h_ref) + 1` nodes and `Z(0) = 0`.
pub fn brownian_path(horizon: f64, step: f64, stream: &mut RandomStream) -> Result<PiecewisePath> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(invalid("T", format!("must be positive, got {horizon}")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(invalid("h_ref", format!("must be positive, got {step}")));
    }
    let nodes = (horizon / step).ceil() as usize;
    let sd = step.sqrt();
    let mut values = Vec::with_capacity(nodes + 1);
    let mut z = 0.0;
    values.push(z);
    for _ in 0..nodes {
        z += sd * stream.next_normal();
        values.push(z);
    }
    PiecewisePath::from_values(step, values)
}
