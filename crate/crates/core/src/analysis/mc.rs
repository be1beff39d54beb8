//! Monte Carlo estimation of `|| max_i |y~_i^j - y_i^j| ||_{L^p(Omega)}` per
//! lag interval.
//!
//! Sample `s` draws from streams derived from `(seed, "sample", [s])`. The
//! coarse run and its fine reference use distinct child streams, so the
//! reference is an independent realization on the refined mesh. Samples are
//! evaluated in parallel and reduced in sample-index order, which makes the
//! table independent of scheduling.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::mesh::Trajectory;
use crate::problem::DdeProblem;
use crate::problems::ExactSolution;
use crate::rng::{derive_stream, RandomStream};
use crate::solver::{self, coarse_stream, PairConfig, Scheme, SolverConfig};

/// What the coarse solution is compared against.
#[derive(Clone)]
pub enum ReferenceSpec {
    /// Fine run with `m N` steps per interval.
    Refine(usize),
    /// Fine run with an absolute step; `tau / (N step)` must be an integer.
    Step(f64),
    /// Closed-form solution on the coarse grid.
    Exact(Arc<dyn ExactSolution>),
}

impl ReferenceSpec {
    /// Refinement factor for `steps` coarse steps, or `None` in exact mode.
    pub fn refinement(&self, tau: f64, steps: usize) -> Result<Option<usize>> {
        match self {
            ReferenceSpec::Refine(m) => Ok(Some(*m)),
            ReferenceSpec::Step(step) => {
                if !(step.is_finite() && *step > 0.0) {
                    return Err(invalid("ref-step", format!("must be positive, got {step}")));
                }
                let ratio = tau / (steps as f64 * step);
                let m = ratio.round();
                if m < 1.0 || (ratio - m).abs() > 1e-9 * ratio {
                    return Err(invalid(
                        "ref-step",
                        format!("h = {} is not an integer multiple of {step}", tau / steps as f64),
                    ));
                }
                Ok(Some(m as usize))
            }
            ReferenceSpec::Exact(_) => Ok(None),
        }
    }
}

impl fmt::Debug for ReferenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceSpec::Refine(m) => write!(f, "Refine({m})"),
            ReferenceSpec::Step(s) => write!(f, "Step({s})"),
            ReferenceSpec::Exact(e) => write!(f, "Exact(horizon = {})", e.horizon()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct McConfig {
    pub steps: usize,
    pub samples: usize,
    pub reference: ReferenceSpec,
    pub seed: u64,
    /// Norm order over the sample space; `f64::INFINITY` takes the maximum.
    pub p: f64,
    pub scheme: Scheme,
    pub reference_scheme: Scheme,
    /// Drive the reference with the coarse stream. Required for `m = 1`,
    /// which only makes sense as a self-test.
    pub shared_streams: bool,
}

impl McConfig {
    pub fn new(steps: usize, samples: usize, reference: ReferenceSpec, seed: u64) -> Self {
        Self {
            steps,
            samples,
            reference,
            seed,
            p: 2.0,
            scheme: Scheme::Randomized,
            reference_scheme: Scheme::Randomized,
            shared_streams: false,
        }
    }

    fn validate(&self, problem: &DdeProblem) -> Result<Option<usize>> {
        if self.steps == 0 {
            return Err(invalid("N", "steps per interval must be at least 1"));
        }
        if self.samples == 0 {
            return Err(invalid("K", "sample count must be at least 1"));
        }
        if self.p.is_nan() || self.p < 1.0 {
            return Err(invalid("p", format!("norm order must be >= 1, got {}", self.p)));
        }
        let m = self.reference.refinement(problem.tau(), self.steps)?;
        match (&self.reference, m) {
            (ReferenceSpec::Exact(exact), _) => {
                if exact.dim() != problem.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: problem.dim(),
                        got: exact.dim(),
                    });
                }
                if exact.horizon() < problem.end_time() {
                    return Err(invalid(
                        "oracle",
                        format!(
                            "closed form covers [0, {}] but the problem runs to {}",
                            exact.horizon(),
                            problem.end_time()
                        ),
                    ));
                }
            }
            (_, Some(0)) => return Err(invalid("m", "refinement factor must be at least 1")),
            (_, Some(1)) if !self.shared_streams => {
                return Err(invalid("m", "refinement factor 1 is only allowed with shared streams"))
            }
            _ => {}
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub steps: usize,
    pub h: f64,
    pub interval: usize,
    pub err: f64,
    /// Sample standard deviation of the per-sample maxima.
    pub spread: f64,
    /// Number of samples that entered the estimate.
    pub samples: usize,
    pub p: f64,
}

/// Rows sorted by `(N, j)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorTable {
    rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub fn new(mut rows: Vec<ErrorRow>) -> Self {
        rows.sort_by_key(|r| (r.steps, r.interval));
        Self { rows }
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = ErrorRow>) {
        self.rows.extend(rows);
        self.rows.sort_by_key(|r| (r.steps, r.interval));
    }

    pub fn rows(&self) -> &[ErrorRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct step counts, ascending.
    pub fn steps(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.rows.iter().map(|r| r.steps).collect();
        out.dedup();
        out
    }

    pub fn intervals(&self) -> usize {
        self.rows.iter().map(|r| r.interval + 1).max().unwrap_or(0)
    }

    /// `(N, h, err)` for interval `j`.
    pub fn interval_series(&self, j: usize) -> Vec<(usize, f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.interval == j)
            .map(|r| (r.steps, r.h, r.err))
            .collect()
    }

    /// `(N, h, max_j err)`.
    pub fn max_series(&self) -> Vec<(usize, f64, f64)> {
        let mut out: Vec<(usize, f64, f64)> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some(last) if last.0 == r.steps => last.2 = last.2.max(r.err),
                _ => out.push((r.steps, r.h, r.err)),
            }
        }
        out
    }
}

#[derive(Debug)]
pub struct SampleFailure {
    pub steps: usize,
    pub sample: usize,
    pub error: Error,
}

#[derive(Debug)]
pub struct McOutcome {
    pub rows: Vec<ErrorRow>,
    pub failures: Vec<SampleFailure>,
}

impl McOutcome {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }
}

/// Stream for Monte Carlo sample `s`.
pub fn sample_stream(seed: u64, sample: usize) -> RandomStream {
    derive_stream(seed, "sample", &[sample as u64])
}

/// Per-interval maxima `max_i ||y~_i^j - y_i^j||` for one sample.
pub fn sample_deviations(problem: &DdeProblem, cfg: &McConfig, sample: usize) -> Result<Vec<f64>> {
    let m = cfg.validate(problem)?;
    run_sample(problem, cfg, m, sample)
}

fn run_sample(problem: &DdeProblem, cfg: &McConfig, m: Option<usize>, sample: usize) -> Result<Vec<f64>> {
    let stream = sample_stream(cfg.seed, sample);
    match (m, &cfg.reference) {
        (Some(refinement), _) => {
            let pair = PairConfig {
                steps: cfg.steps,
                refinement,
                scheme: cfg.scheme,
                reference_scheme: cfg.reference_scheme,
                shared_streams: cfg.shared_streams,
            };
            let (coarse, reference) = solver::solve_pair_with(problem, &pair, &stream)?;
            Ok(max_deviation(&coarse, |j, k, out| out.copy_from_slice(reference.get(j, k))))
        }
        (None, ReferenceSpec::Exact(exact)) => {
            let solver_cfg = SolverConfig::new(cfg.steps, cfg.scheme)?;
            let coarse = solver::solve(problem, &solver_cfg, &mut coarse_stream(&stream, cfg.steps))?;
            let mesh = *coarse.mesh();
            Ok(max_deviation(&coarse, |j, k, out| exact.eval(mesh.time(j, k), out)))
        }
        (None, _) => unreachable!("only exact references lack a refinement factor"),
    }
}

fn max_deviation<F>(traj: &Trajectory, mut reference: F) -> Vec<f64>
where
    F: FnMut(usize, usize, &mut [f64]),
{
    let mesh = traj.mesh();
    let mut target = vec![0.0; traj.dim()];
    (0..mesh.intervals())
        .map(|j| {
            (0..=mesh.steps())
                .map(|k| {
                    reference(j, k, &mut target);
                    euclidean_distance(traj.get(j, k), &target)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

pub(crate) fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Estimate the per-interval `L^p(Omega)` error for one step count.
pub fn mc_error(problem: &DdeProblem, cfg: &McConfig) -> Result<McOutcome> {
    let m = cfg.validate(problem)?;
    let per_sample: Vec<Result<Vec<f64>>> = (0..cfg.samples)
        .into_par_iter()
        .map(|s| run_sample(problem, cfg, m, s))
        .collect();
    Ok(aggregate(problem, cfg, per_sample))
}

/// Reduce per-sample results, in the order given, into table rows.
pub fn aggregate(problem: &DdeProblem, cfg: &McConfig, per_sample: Vec<Result<Vec<f64>>>) -> McOutcome {
    let intervals = problem.intervals();
    let mut maxima: Vec<Vec<f64>> = vec![Vec::with_capacity(per_sample.len()); intervals];
    let mut failures = Vec::new();
    for (sample, result) in per_sample.into_iter().enumerate() {
        match result {
            Ok(devs) => {
                for (j, d) in devs.into_iter().enumerate() {
                    maxima[j].push(d);
                }
            }
            Err(error) => {
                log::warn!("sample {sample} at N = {} failed: {error}", cfg.steps);
                failures.push(SampleFailure {
                    steps: cfg.steps,
                    sample,
                    error,
                });
            }
        }
    }

    let h = problem.tau() / cfg.steps as f64;
    let rows = maxima
        .iter()
        .enumerate()
        .filter(|(_, xs)| !xs.is_empty())
        .map(|(j, xs)| ErrorRow {
            steps: cfg.steps,
            h,
            interval: j,
            err: lp_mean(xs, cfg.p),
            spread: sample_std(xs),
            samples: xs.len(),
            p: cfg.p,
        })
        .collect();
    McOutcome { rows, failures }
}

fn lp_mean(xs: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return xs.iter().copied().fold(0.0, f64::max);
    }
    let n = xs.len() as f64;
    if p == 2.0 {
        (xs.iter().map(|x| x * x).sum::<f64>() / n).sqrt()
    } else {
        (xs.iter().map(|x| x.powf(p)).sum::<f64>() / n).powf(1.0 / p)
    }
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}
