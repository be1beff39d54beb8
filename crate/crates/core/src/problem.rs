//! Right-hand sides and problem statements for
//! `x'(t) = f(t, x(t), x(t - tau))` on `[0, (n + 1) tau]` with a constant
//! initial segment `x(t) = x0` on `[-tau, 0)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

/// The vector field `f(t, x, z)`, where `z` is the delayed state.
///
/// Implementations must be pure: equal arguments give equal outputs. The
/// solvers call `eval` with `x`, `z` and `out` all of length [`dim`](Self::dim).
pub trait RightHandSide: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, t: f64, x: &[f64], z: &[f64], out: &mut [f64]);
}

/// Scalar right-hand side backed by a closure `(t, x, z) -> f`.
pub struct ScalarFn<F>(pub F);

impl<F> RightHandSide for ScalarFn<F>
where
    F: Fn(f64, f64, f64) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        1
    }

    #[inline]
    fn eval(&self, t: f64, x: &[f64], z: &[f64], out: &mut [f64]) {
        out[0] = (self.0)(t, x[0], z[0]);
    }
}

/// Vector right-hand side backed by a closure writing into `out`.
pub struct VectorFn<F> {
    dim: usize,
    f: F,
}

impl<F> VectorFn<F>
where
    F: Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> RightHandSide for VectorFn<F>
where
    F: Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn eval(&self, t: f64, x: &[f64], z: &[f64], out: &mut [f64]) {
        (self.f)(t, x, z, out)
    }
}

/// A delay differential equation with constant lag and constant history.
#[derive(Clone)]
pub struct DdeProblem {
    rhs: Arc<dyn RightHandSide>,
    tau: f64,
    horizon: usize,
    x0: Vec<f64>,
}

impl DdeProblem {
    /// `horizon` is the number of lag intervals after the first one, so the
    /// problem lives on `[0, (horizon + 1) tau]`.
    pub fn new(
        rhs: Arc<dyn RightHandSide>,
        tau: f64,
        horizon: usize,
        x0: Vec<f64>,
    ) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(invalid("tau", format!("must be positive and finite, got {tau}")));
        }
        let dim = rhs.dim();
        if dim == 0 {
            return Err(invalid("dim", "state dimension must be positive"));
        }
        if x0.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: x0.len(),
            });
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(invalid("x0", "initial value must be finite"));
        }
        Ok(Self {
            rhs,
            tau,
            horizon,
            x0,
        })
    }

    /// Convenience constructor for scalar problems.
    pub fn scalar<F>(f: F, tau: f64, horizon: usize, x0: f64) -> Result<Self>
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(Arc::new(ScalarFn(f)), tau, horizon, vec![x0])
    }

    pub fn rhs(&self) -> &dyn RightHandSide {
        self.rhs.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn intervals(&self) -> usize {
        self.horizon + 1
    }

    pub fn end_time(&self) -> f64 {
        self.intervals() as f64 * self.tau
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn with_x0(&self, x0: Vec<f64>) -> Result<Self> {
        Self::new(self.rhs.clone(), self.tau, self.horizon, x0)
    }

    pub fn with_horizon(&self, horizon: usize) -> Self {
        Self {
            horizon,
            ..self.clone()
        }
    }
}

impl fmt::Debug for DdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DdeProblem")
            .field("dim", &self.dim())
            .field("tau", &self.tau)
            .field("horizon", &self.horizon)
            .field("x0", &self.x0)
            .finish_non_exhaustive()
    }
}
