//! Explicit Euler schemes for constant-lag DDEs, solved interval by
//! interval (method of steps).
//!
//! On interval `j` the scheme reads the delayed state from the stored row
//! `j - 1` (the history `x0` for `j = 0`):
//!
//! ```text
//! y_0^j     = y_N^{j-1}
//! y_{k+1}^j = y_k^j + h f(s_k^j, y_k^j, y_k^{j-1})
//! ```
//!
//! The randomized scheme uses `s_k^j = theta_{k+1}^j`, uniform in
//! `[t_k^j, t_{k+1}^j)`; the classical scheme uses the left node `t_k^j`.
//! Uniforms are consumed one per step in `(j, k)` lexicographic order, for
//! `(n + 1) N` draws in total.

use crate::error::{invalid, Error, Result};
use crate::mesh::{Mesh, Trajectory};
use crate::problem::DdeProblem;
use crate::rng::{sample_theta, RandomStream, UniformSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Randomized,
    Classical,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Randomized => "randomized",
            Scheme::Classical => "classical",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "randomized" => Ok(Scheme::Randomized),
            "classical" => Ok(Scheme::Classical),
            other => Err(invalid("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub steps: usize,
    pub scheme: Scheme,
}

impl SolverConfig {
    pub fn new(steps: usize, scheme: Scheme) -> Result<Self> {
        if steps == 0 {
            return Err(invalid("N", "steps per interval must be at least 1"));
        }
        Ok(Self { steps, scheme })
    }

    /// The error bound for the randomized scheme is only established for
    /// `N >= ceil(tau)`. Smaller `N` is still a valid scheme.
    pub fn admissibility_warning(&self, tau: f64) -> Option<String> {
        let min = tau.ceil();
        ((self.steps as f64) < min).then(|| {
            format!(
                "N = {} is below ceil(tau) = {min}; the convergence rate guarantee does not apply",
                self.steps
            )
        })
    }
}

/// Randomized Euler scheme driven by an arbitrary uniform source.
pub fn randomized_euler<U: UniformSource + ?Sized>(
    problem: &DdeProblem,
    steps: usize,
    uniforms: &mut U,
) -> Result<Trajectory> {
    integrate(problem, steps, |mesh, j, k| sample_theta(uniforms, mesh, j, k))
}

/// Classical explicit Euler: the randomized recursion evaluated at the left
/// node of every step. Consumes no randomness.
pub fn classical_euler(problem: &DdeProblem, steps: usize) -> Result<Trajectory> {
    integrate(problem, steps, |mesh, j, k| mesh.time(j, k))
}

/// Dispatches on `cfg.scheme`. The stream is left untouched by the
/// classical scheme.
pub fn solve(problem: &DdeProblem, cfg: &SolverConfig, stream: &mut RandomStream) -> Result<Trajectory> {
    if let Some(w) = cfg.admissibility_warning(problem.tau()) {
        log::warn!("{w}");
    }
    match cfg.scheme {
        Scheme::Randomized => randomized_euler(problem, cfg.steps, stream),
        Scheme::Classical => classical_euler(problem, cfg.steps),
    }
}

fn integrate<F>(problem: &DdeProblem, steps: usize, mut node: F) -> Result<Trajectory>
where
    F: FnMut(&Mesh, usize, usize) -> f64,
{
    let mesh = Mesh::new(problem.tau(), steps, problem.horizon())?;
    let rhs = problem.rhs();
    let d = problem.dim();
    let x0 = problem.x0();
    let h = mesh.step_size();
    let row_len = (steps + 1) * d;

    let mut values = vec![0.0; mesh.intervals() * row_len];
    values[..d].copy_from_slice(x0);
    let mut deriv = vec![0.0; d];

    for j in 0..mesh.intervals() {
        let (done, rest) = values.split_at_mut(j * row_len);
        let row = &mut rest[..row_len];
        if j > 0 {
            row[..d].copy_from_slice(&done[done.len() - d..]);
        }
        let delayed_row: Option<&[f64]> = (j > 0).then(|| &done[(j - 1) * row_len..]);

        for k in 0..steps {
            let t = node(&mesh, j, k);
            let z = match delayed_row {
                Some(prev) => &prev[k * d..(k + 1) * d],
                None => x0,
            };
            let (head, tail) = row.split_at_mut((k + 1) * d);
            let x = &head[k * d..];
            rhs.eval(t, x, z, &mut deriv);
            let next = &mut tail[..d];
            let mut finite = true;
            for i in 0..d {
                next[i] = x[i] + h * deriv[i];
                finite &= next[i].is_finite();
            }
            if !finite {
                return Err(Error::Divergence { j, k, theta: t });
            }
        }
    }

    Ok(Trajectory::from_parts_unchecked(mesh, x0.to_vec(), values))
}

/// How to produce the coarse solution and its fine-mesh reference for one
/// Monte Carlo sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairConfig {
    pub steps: usize,
    pub refinement: usize,
    pub scheme: Scheme,
    pub reference_scheme: Scheme,
    /// Reuse the coarse stream for the reference run. Only meaningful for
    /// self-tests with `refinement = 1`.
    pub shared_streams: bool,
}

impl PairConfig {
    pub fn randomized(steps: usize, refinement: usize) -> Self {
        Self {
            steps,
            refinement,
            scheme: Scheme::Randomized,
            reference_scheme: Scheme::Randomized,
            shared_streams: false,
        }
    }
}

/// Coarse run at `N` and reference run at `m N`, both randomized, under
/// distinct streams derived from `sample`. The reference is returned
/// restricted to the coarse mesh.
pub fn solve_pair(
    problem: &DdeProblem,
    steps: usize,
    refinement: usize,
    sample: &RandomStream,
) -> Result<(Trajectory, Trajectory)> {
    solve_pair_with(problem, &PairConfig::randomized(steps, refinement), sample)
}

pub fn solve_pair_with(
    problem: &DdeProblem,
    cfg: &PairConfig,
    sample: &RandomStream,
) -> Result<(Trajectory, Trajectory)> {
    if cfg.refinement == 0 {
        return Err(invalid("m", "refinement factor must be at least 1"));
    }
    let fine_steps = cfg
        .steps
        .checked_mul(cfg.refinement)
        .ok_or_else(|| invalid("m", "refined step count overflows"))?;
    let coarse_cfg = SolverConfig::new(cfg.steps, cfg.scheme)?;
    let fine_cfg = SolverConfig::new(fine_steps, cfg.reference_scheme)?;

    let mut coarse_stream = coarse_stream(sample, cfg.steps);
    let mut fine_stream = if cfg.shared_streams {
        coarse_stream.clone()
    } else {
        sample.derive("reference", &[fine_steps as u64])
    };
    let coarse = solve(problem, &coarse_cfg, &mut coarse_stream)?;
    let fine = solve(problem, &fine_cfg, &mut fine_stream)?;
    Ok((coarse, fine.restrict(cfg.refinement)?))
}

pub(crate) fn coarse_stream(sample: &RandomStream, steps: usize) -> RandomStream {
    sample.derive("coarse", &[steps as u64])
}
