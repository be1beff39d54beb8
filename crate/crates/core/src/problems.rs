//! Test problems: two singular-weight fields, a delayed oscillator with a
//! closed-form solution, a highly oscillatory forcing that defeats the
//! classical scheme, and a Wiener-perturbed linear delay equation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::brownian::{brownian_path, PiecewisePath};
use crate::error::{invalid, Error, Result};
use crate::problem::{DdeProblem, RightHandSide};
use crate::rng::derive_stream;

/// Periodic weight `k(t) = ((j + 1) tau - t)^(-1/gamma)` on `[j tau, (j + 1) tau)`.
///
/// Intervals are half-open, so an interior multiple of `tau` belongs to the
/// interval it starts and the weight is finite wherever it is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularWeight {
    gamma: f64,
    tau: f64,
    horizon: usize,
}

impl SingularWeight {
    pub fn new(gamma: f64, tau: f64, horizon: usize) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(invalid("gamma", format!("must be positive, got {gamma}")));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(invalid("tau", format!("must be positive, got {tau}")));
        }
        Ok(Self { gamma, tau, horizon })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Checked evaluation on `[0, (n + 1) tau)`.
    pub fn value(&self, t: f64) -> Result<f64> {
        let end = (self.horizon + 1) as f64 * self.tau;
        if !(t >= 0.0 && t < end) {
            return Err(invalid("t", format!("outside [0, {end}): {t}")));
        }
        Ok(self.eval(t))
    }

    /// Unchecked evaluation; `t` must lie in the domain.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let mut j = (t / self.tau).floor().max(0.0) as usize;
        while j > 0 && t < j as f64 * self.tau {
            j -= 1;
        }
        while t >= (j + 1) as f64 * self.tau {
            j += 1;
        }
        ((j + 1) as f64 * self.tau - t).powf(-1.0 / self.gamma)
    }

    /// `||k||_{L^1}` over one interval: `tau^(1 - 1/gamma) / (1 - 1/gamma)`,
    /// infinite for `gamma <= 1`.
    pub fn l1_norm(&self) -> f64 {
        self.lp_norm(1.0)
    }

    /// `||k||_{L^p}` over one interval; finite iff `gamma > p`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return f64::INFINITY;
        }
        let e = 1.0 - p / self.gamma;
        if e <= 0.0 {
            f64::INFINITY
        } else {
            (self.tau.powf(e) / e).powf(1.0 / p)
        }
    }
}

/// `k(t)` for the given exponent, lag and horizon.
pub fn k_weight(t: f64, gamma: f64, tau: f64, horizon: usize) -> Result<f64> {
    SingularWeight::new(gamma, tau, horizon)?.value(t)
}

#[inline]
fn abs_pow(z: f64, alpha: f64) -> f64 {
    z.abs().powf(alpha)
}

/// `f1(t, x, z) = k(t) (x + 0.01 |z|^a + sin(M x) cos(P |z|^a))`, componentwise.
#[derive(Debug, Clone, Copy)]
pub struct F1 {
    pub m: f64,
    pub p: f64,
    pub alpha: f64,
    pub weight: SingularWeight,
    pub dim: usize,
}

impl RightHandSide for F1 {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, x: &[f64], z: &[f64], out: &mut [f64]) {
        let k = self.weight.eval(t);
        for i in 0..self.dim {
            let za = abs_pow(z[i], self.alpha);
            out[i] = k * (x[i] + 0.01 * za + (self.m * x[i]).sin() * (self.p * za).cos());
        }
    }
}

/// `f2(t, x, z) = k(t) sin(10 x) P |z|^a / M`, componentwise.
#[derive(Debug, Clone, Copy)]
pub struct F2 {
    pub m: f64,
    pub p: f64,
    pub alpha: f64,
    pub weight: SingularWeight,
    pub dim: usize,
}

impl RightHandSide for F2 {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, x: &[f64], z: &[f64], out: &mut [f64]) {
        let k = self.weight.eval(t);
        for i in 0..self.dim {
            out[i] = k * (10.0 * x[i]).sin() * self.p * abs_pow(z[i], self.alpha) / self.m;
        }
    }
}

/// `f(t, x, z) = 3 z sin(lambda t)`.
#[derive(Debug, Clone, Copy)]
pub struct Kainhofer {
    pub lambda: f64,
}

impl RightHandSide for Kainhofer {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, t: f64, _x: &[f64], z: &[f64], out: &mut [f64]) {
        out[0] = 3.0 * z[0] * (self.lambda * t).sin();
    }
}

/// `f(t, x, z) = sin(lambda1 t) + x + |z|^alpha`.
#[derive(Debug, Clone, Copy)]
pub struct Oscillatory {
    pub lambda1: f64,
    pub alpha: f64,
}

impl RightHandSide for Oscillatory {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, t: f64, x: &[f64], z: &[f64], out: &mut [f64]) {
        out[0] = (self.lambda1 * t).sin() + x[0] + abs_pow(z[0], self.alpha);
    }
}

/// `f(t, x, z) = x + Z(t) + z + Z(t - tau)` for a fixed path `Z`.
#[derive(Debug, Clone)]
pub struct WienerPerturbed {
    pub path: Arc<PiecewisePath>,
    pub tau: f64,
}

impl RightHandSide for WienerPerturbed {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, t: f64, x: &[f64], z: &[f64], out: &mut [f64]) {
        out[0] = x[0] + self.path.eval_clamped(t) + z[0] + self.path.eval_clamped(t - self.tau);
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(invalid("alpha", format!("must lie in (0, 1], got {alpha}")))
    }
}

fn check_m(m: f64) -> Result<()> {
    if m != 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(invalid("M", format!("must be finite and nonzero, got {m}")))
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive, got {v}")))
    }
}

pub fn make_f1(params: &PresetParams) -> Result<DdeProblem> {
    check_alpha(params.alpha)?;
    check_m(params.m)?;
    let weight = SingularWeight::new(params.gamma, params.tau, params.horizon)?;
    let rhs = F1 {
        m: params.m,
        p: params.p,
        alpha: params.alpha,
        weight,
        dim: 1,
    };
    DdeProblem::new(Arc::new(rhs), params.tau, params.horizon, vec![params.x0])
}

pub fn make_f2(params: &PresetParams) -> Result<DdeProblem> {
    check_alpha(params.alpha)?;
    check_m(params.m)?;
    let weight = SingularWeight::new(params.gamma, params.tau, params.horizon)?;
    let rhs = F2 {
        m: params.m,
        p: params.p,
        alpha: params.alpha,
        weight,
        dim: 1,
    };
    DdeProblem::new(Arc::new(rhs), params.tau, params.horizon, vec![params.x0])
}

pub fn make_kainhofer(lambda: f64, tau: f64, x0: f64, horizon: usize) -> Result<DdeProblem> {
    check_positive("lambda", lambda)?;
    DdeProblem::new(Arc::new(Kainhofer { lambda }), tau, horizon, vec![x0])
}

pub fn make_comparison(lambda1: f64, alpha: f64, tau: f64, horizon: usize) -> Result<DdeProblem> {
    check_alpha(alpha)?;
    if !lambda1.is_finite() {
        return Err(invalid("lambda1", "must be finite"));
    }
    DdeProblem::new(Arc::new(Oscillatory { lambda1, alpha }), tau, horizon, vec![1.0])
}

/// Wiener-perturbed problem with `U0 = 1`. The path must reach `(n + 1) tau`.
pub fn make_wiener_perturbed(path: Arc<PiecewisePath>, tau: f64, horizon: usize) -> Result<DdeProblem> {
    let end = (horizon + 1) as f64 * tau;
    if path.horizon() < end {
        return Err(invalid(
            "path",
            format!("horizon {} shorter than problem end {end}", path.horizon()),
        ));
    }
    DdeProblem::new(Arc::new(WienerPerturbed { path, tau }), tau, horizon, vec![1.0])
}

/// Closed-form solution of `x' = 3 x(t - tau) sin(lambda t)`, `x = x0` for
/// `t <= 0`, valid on `[0, 2 tau]`.
pub fn kainhofer_exact(t: f64, lambda: f64, tau: f64, x0: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_positive("tau", tau)?;
    if !(0.0..=2.0 * tau).contains(&t) {
        return Err(invalid("t", format!("closed form only covers [0, {}], got {t}", 2.0 * tau)));
    }
    Ok(KainhoferExact { lambda, tau, x0 }.value_at(t))
}

/// A known exact solution usable as the error reference.
pub trait ExactSolution: Send + Sync {
    fn dim(&self) -> usize;

    /// Last time at which the closed form is valid.
    fn horizon(&self) -> f64;

    fn eval(&self, t: f64, out: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub struct KainhoferExact {
    pub lambda: f64,
    pub tau: f64,
    pub x0: f64,
}

impl KainhoferExact {
    fn first(&self, t: f64) -> f64 {
        let (l, x0) = (self.lambda, self.x0);
        x0 + 3.0 * x0 * (1.0 - (l * t).cos()) / l
    }

    pub fn value_at(&self, t: f64) -> f64 {
        if t <= self.tau {
            self.first(t)
        } else {
            self.second(t)
        }
    }

    fn second(&self, t: f64) -> f64 {
        let (l, tau, x0) = (self.lambda, self.tau, self.x0);
        let c = (l * tau).cos();
        self.first(tau) - (9.0 * x0 / (l * l) + 3.0 * x0 / l) * ((l * t).cos() - c)
            + 9.0 * x0 / (2.0 * l) * (t - tau) * (-l * tau).sin()
            + 9.0 * x0 / (4.0 * l * l) * ((2.0 * l * t - l * tau).cos() - c)
    }
}

impl ExactSolution for KainhoferExact {
    fn dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> f64 {
        2.0 * self.tau
    }

    fn eval(&self, t: f64, out: &mut [f64]) {
        out[0] = self.value_at(t);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetKind {
    F1,
    F2,
    Kainhofer,
    Comparison,
    Wiener,
}

impl PresetKind {
    pub const ALL: [PresetKind; 5] = [
        PresetKind::F1,
        PresetKind::F2,
        PresetKind::Kainhofer,
        PresetKind::Comparison,
        PresetKind::Wiener,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetKind::F1 => "f1",
            PresetKind::F2 => "f2",
            PresetKind::Kainhofer => "kainhofer",
            PresetKind::Comparison => "comparison",
            PresetKind::Wiener => "wiener",
        }
    }

    /// Default parameters for this preset. `x0 = 1` everywhere; for `f1`
    /// and `f2` that value is a free choice.
    pub fn defaults(self) -> PresetParams {
        let base = PresetParams::default();
        match self {
            PresetKind::F1 | PresetKind::F2 => base,
            PresetKind::Kainhofer => PresetParams { horizon: 1, ..base },
            PresetKind::Comparison => PresetParams { horizon: 2, alpha: 0.2, ..base },
            PresetKind::Wiener => PresetParams { horizon: 1, tau: 2.0, ..base },
        }
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid("problem", format!("unknown preset `{s}`")))
    }
}

/// Union of all preset parameters; each preset reads the ones it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetParams {
    pub m: f64,
    pub p: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub lambda1: f64,
    pub tau: f64,
    pub horizon: usize,
    pub x0: f64,
    /// Seed of the Wiener path (wiener preset only).
    pub seed: u64,
    /// Grid step of the Wiener path (wiener preset only).
    pub path_step: f64,
}

impl Default for PresetParams {
    fn default() -> Self {
        Self {
            m: 10.0,
            p: 100.0,
            alpha: 1.0,
            gamma: 5.0,
            lambda: 256.0,
            lambda1: 512.0 * PI,
            tau: 1.0,
            horizon: 5,
            x0: 1.0,
            seed: 0,
            path_step: 1.0 / 65536.0,
        }
    }
}

/// A named test problem with its parameters and the assembled DDE.
#[derive(Clone)]
pub struct ProblemPreset {
    kind: PresetKind,
    params: PresetParams,
    problem: DdeProblem,
    path: Option<Arc<PiecewisePath>>,
}

impl ProblemPreset {
    pub fn new(kind: PresetKind, params: PresetParams) -> Result<Self> {
        let mut path = None;
        let problem = match kind {
            PresetKind::F1 => make_f1(&params)?,
            PresetKind::F2 => make_f2(&params)?,
            PresetKind::Kainhofer => {
                make_kainhofer(params.lambda, params.tau, params.x0, params.horizon)?
            }
            PresetKind::Comparison => {
                make_comparison(params.lambda1, params.alpha, params.tau, params.horizon)?
                    .with_x0(vec![params.x0])?
            }
            PresetKind::Wiener => {
                check_positive("tau", params.tau)?;
                let end = (params.horizon + 1) as f64 * params.tau;
                let mut stream = derive_stream(params.seed, "wiener-path", &[]);
                let z = Arc::new(brownian_path(end, params.path_step, &mut stream)?);
                path = Some(z.clone());
                make_wiener_perturbed(z, params.tau, params.horizon)?
                    .with_x0(vec![params.x0])?
            }
        };
        Ok(Self {
            kind,
            params,
            problem,
            path,
        })
    }

    pub fn with_defaults(kind: PresetKind) -> Result<Self> {
        Self::new(kind, kind.defaults())
    }

    pub fn kind(&self) -> PresetKind {
        self.kind
    }

    pub fn params(&self) -> &PresetParams {
        &self.params
    }

    pub fn problem(&self) -> &DdeProblem {
        &self.problem
    }

    /// The Wiener path behind the `wiener` preset.
    pub fn path(&self) -> Option<&Arc<PiecewisePath>> {
        self.path.as_ref()
    }

    /// Closed-form solution, where one is known for the configured horizon.
    pub fn exact(&self) -> Option<Arc<dyn ExactSolution>> {
        match self.kind {
            PresetKind::Kainhofer if self.params.horizon <= 1 => Some(Arc::new(KainhoferExact {
                lambda: self.params.lambda,
                tau: self.params.tau,
                x0: self.params.x0,
            })),
            _ => None,
        }
    }

    /// Per-interval `(||K||_{L^1}, ||K||_{L^p})` for an envelope
    /// `K(t)` with `|f(t, x, z)| <= K(t) (1 + |x|) (1 + |z|)`.
    pub fn envelope_norms(&self, p: f64) -> (Vec<f64>, Vec<f64>) {
        let pr = &self.params;
        let tau = pr.tau;
        let intervals = pr.horizon + 1;
        // Constant envelope c: L^1 = c tau, L^p = c tau^(1/p).
        let constant = |c: f64| {
            let lp = if p.is_infinite() { c } else { c * tau.powf(1.0 / p) };
            (vec![c * tau; intervals], vec![lp; intervals])
        };
        match self.kind {
            PresetKind::Kainhofer => constant(3.0),
            // |sin| + |x| + |z|^a <= 1 + |x| + 1 + |z| <= 2 (1 + |x|)(1 + |z|)
            PresetKind::Comparison => constant(2.0),
            PresetKind::Wiener => {
                let sup = self
                    .path
                    .as_ref()
                    .map(|z| z.values().iter().fold(0.0f64, |m, v| m.max(v.abs())))
                    .unwrap_or(0.0);
                constant((2.0 * sup).max(1.0))
            }
            PresetKind::F1 | PresetKind::F2 => {
                // f1: |x| + 0.01 |z|^a + 1 <= 1.01 (1 + |x|)(1 + |z|)
                // f2: |P/M| |z|^a <= |P/M| (1 + |x|)(1 + |z|)
                let c = if self.kind == PresetKind::F1 {
                    1.01
                } else {
                    (pr.p / pr.m).abs()
                };
                let w = SingularWeight::new(pr.gamma, tau, pr.horizon)
                    .expect("validated at construction");
                (vec![c * w.l1_norm(); intervals], vec![c * w.lp_norm(p); intervals])
            }
        }
    }
}

impl fmt::Debug for ProblemPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemPreset")
            .field("kind", &self.kind)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}
