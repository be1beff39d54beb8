//! Convergence experiments: Monte Carlo errors over a list of step counts
//! followed by slope fits, for one scheme or both side by side.

use std::path::Path;

use crate::analysis::mc::{mc_error, ErrorTable, McConfig, ReferenceSpec, SampleFailure};
use crate::analysis::slopes::{fit_slopes, Aggregate, SlopeReport};
use crate::error::{invalid, Result};
use crate::io;
use crate::problem::DdeProblem;
use crate::solver::Scheme;
use crate::svg::{LogLogPlot, Series};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: DdeProblem,
    pub steps: Vec<usize>,
    pub samples: usize,
    pub reference: ReferenceSpec,
    pub seed: u64,
    pub p: f64,
    pub scheme: Scheme,
    pub reference_scheme: Scheme,
    pub aggregate: Aggregate,
}

impl ExperimentConfig {
    pub fn new(problem: DdeProblem, steps: Vec<usize>, samples: usize, reference: ReferenceSpec, seed: u64) -> Self {
        Self {
            problem,
            steps,
            samples,
            reference,
            seed,
            p: 2.0,
            scheme: Scheme::Randomized,
            reference_scheme: Scheme::Randomized,
            aggregate: Aggregate::MaxOverIntervals,
        }
    }

    fn validate(&self) -> Result<Vec<usize>> {
        if self.steps.is_empty() {
            return Err(invalid("N-list", "at least one step count is required"));
        }
        if self.steps.contains(&0) {
            return Err(invalid("N-list", "step counts must be positive"));
        }
        if let Aggregate::Interval(j) = self.aggregate {
            if j >= self.problem.intervals() {
                return Err(invalid("interval", format!("interval {j} beyond horizon")));
            }
        }
        let mut steps = self.steps.clone();
        steps.sort_unstable();
        steps.dedup();
        Ok(steps)
    }

    fn mc_config(&self, steps: usize) -> McConfig {
        McConfig {
            steps,
            samples: self.samples,
            reference: self.reference.clone(),
            seed: self.seed,
            p: self.p,
            scheme: self.scheme,
            reference_scheme: self.reference_scheme,
            shared_streams: false,
        }
    }
}

/// A slope fit, or the reason none could be made.
#[derive(Debug, Clone, PartialEq)]
pub enum SlopeFit {
    Fitted(SlopeReport),
    Degenerate(String),
}

impl SlopeFit {
    fn from_result(r: Result<SlopeReport>, all_zero: bool) -> Self {
        match r {
            Ok(report) => SlopeFit::Fitted(report),
            Err(_) if all_zero => SlopeFit::Degenerate("degenerate: zero errors".into()),
            Err(e) => SlopeFit::Degenerate(format!("degenerate: {e}")),
        }
    }

    pub fn report(&self) -> Option<&SlopeReport> {
        match self {
            SlopeFit::Fitted(r) => Some(r),
            SlopeFit::Degenerate(_) => None,
        }
    }
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub scheme: Scheme,
    pub table: ErrorTable,
    /// Fit for the configured aggregate.
    pub slopes: SlopeFit,
    /// Fit for every interval separately.
    pub interval_slopes: Vec<SlopeFit>,
    pub failures: Vec<SampleFailure>,
}

impl ExperimentOutcome {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        io::write_error_table(&self.table, file)
    }

    pub fn write_slopes_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        io::write_slopes(&self.slopes, file)
    }

    /// Log-log plot with one series per interval.
    pub fn plot(&self, title: &str) -> LogLogPlot {
        let mut plot = LogLogPlot::new(title, "h", "error");
        for (j, fit) in self.interval_slopes.iter().enumerate() {
            let points = self.table.interval_series(j).iter().map(|&(_, h, e)| (h, e)).collect();
            plot.push(Series::new(format!("{} j={j}", self.scheme.name()), points, fit.report()));
        }
        plot
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let steps = cfg.validate()?;
    let mut table = ErrorTable::default();
    let mut failures = Vec::new();
    for &n in &steps {
        let out = mc_error(&cfg.problem, &cfg.mc_config(n))?;
        log::info!("{} N = {n}: {} rows, {} failures", cfg.scheme.name(), out.rows.len(), out.failures.len());
        table.extend(out.rows);
        failures.extend(out.failures);
    }

    let all_zero = table.rows().iter().all(|r| r.err == 0.0);
    let slopes = SlopeFit::from_result(fit_slopes(&table, cfg.aggregate), all_zero);
    let interval_slopes = (0..cfg.problem.intervals())
        .map(|j| {
            let zero = table.interval_series(j).iter().all(|p| p.2 == 0.0);
            SlopeFit::from_result(fit_slopes(&table, Aggregate::Interval(j)), zero)
        })
        .collect();
    Ok(ExperimentOutcome {
        scheme: cfg.scheme,
        table,
        slopes,
        interval_slopes,
        failures,
    })
}

#[derive(Debug)]
pub struct SchemeComparison {
    pub randomized: ExperimentOutcome,
    pub classical: ExperimentOutcome,
}

impl SchemeComparison {
    pub fn is_partial(&self) -> bool {
        self.randomized.is_partial() || self.classical.is_partial()
    }

    pub fn plot(&self, title: &str) -> LogLogPlot {
        let mut plot = self.randomized.plot(title);
        for s in self.classical.plot(title).series {
            plot.push(s);
        }
        plot
    }
}

/// Runs the experiment once per scheme. Both runs use the same seed and
/// reference configuration, so they share identical reference solutions.
pub fn compare_schemes(cfg: &ExperimentConfig) -> Result<SchemeComparison> {
    let randomized = run_experiment(&ExperimentConfig {
        scheme: Scheme::Randomized,
        ..cfg.clone()
    })?;
    let classical = run_experiment(&ExperimentConfig {
        scheme: Scheme::Classical,
        ..cfg.clone()
    })?;
    Ok(SchemeComparison { randomized, classical })
}
