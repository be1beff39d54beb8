//! Acceptance suite. Each criterion prints one `[PASS]`/`[FAIL]` line to the
//! real stdout (bypassing libtest capture) and then asserts.
//!
//! Criteria run one at a time under a global lock so the reported wall-clock
//! times are not inflated by sibling tests. Runs shared between criteria
//! (the f1 and f2 rate experiments) are cached.

use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use dde_core::analysis::{ExperimentOutcome, SlopeFit};
use dde_core::problems::ExactSolution;
use dde_core::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const SEED: u64 = 1;
const OTHER_SEED: u64 = 2;
const SAMPLES: usize = 200;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(id: &str, title: &str, pass: bool, detail: &str, elapsed: Duration, limit: Duration) -> bool {
    let in_time = elapsed < limit;
    let ok = pass && in_time;
    let line = format!(
        "\n[{}] {id} {title}: {detail}; {:.2}s (limit {}s{})\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { ", exceeded" },
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    ok
}

fn fitted(fit: &SlopeFit) -> &SlopeReport {
    match fit {
        SlopeFit::Fitted(r) => r,
        SlopeFit::Degenerate(why) => panic!("no slope fit: {why}"),
    }
}

fn csv_bytes(out: &ExperimentOutcome) -> Vec<u8> {
    let mut buf = Vec::new();
    io::write_error_table(&out.table, &mut buf).unwrap();
    buf
}

struct Affine {
    x0: f64,
    c: f64,
    end: f64,
}

impl ExactSolution for Affine {
    fn dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> f64 {
        self.end
    }

    fn eval(&self, t: f64, out: &mut [f64]) {
        out[0] = self.x0 + self.c * t;
    }
}

#[test]
fn c01_exactness() {
    let _g = serial();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for c in [0.0, 0.5] {
        let problem = DdeProblem::scalar(move |_, _, _| c, 1.0, 2, 1.5).unwrap();
        let references = [
            ReferenceSpec::Refine(4),
            ReferenceSpec::Refine(16),
            ReferenceSpec::Step(1.0 / 256.0),
            ReferenceSpec::Exact(std::sync::Arc::new(Affine { x0: 1.5, c, end: 3.0 })),
        ];
        for reference in references {
            let cfg = ExperimentConfig::new(problem.clone(), vec![4, 8, 16], 20, reference, SEED);
            let cmp = compare_schemes(&cfg).unwrap();
            for out in [&cmp.randomized, &cmp.classical] {
                for row in out.table.rows() {
                    worst = worst.max(row.err);
                }
            }
        }
    }
    let ok = verdict(
        "C1",
        "constant and zero fields are exact",
        worst <= 1e-14,
        &format!("max error {worst:e} (tol 1e-14)"),
        start.elapsed(),
        Duration::from_secs(1),
    );
    assert!(ok);
}

#[test]
fn c02_autonomous_equivalence() {
    let _g = serial();
    let start = Instant::now();
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (
        -3.0..3.0f64,
        -3.0..3.0f64,
        -2.0..2.0f64,
        0.25..2.0f64,
        1usize..40,
        0usize..4,
        any::<u64>(),
    );
    let result = runner.run(&strategy, |(a, b, x0, tau, steps, horizon, seed)| {
        let problem = DdeProblem::scalar(move |_, x, z| a * x + b * z, tau, horizon, x0).unwrap();
        let mut stream = derive_stream(seed, "autonomous", &[]);
        let r = randomized_euler(&problem, steps, &mut stream).unwrap();
        let c = classical_euler(&problem, steps).unwrap();
        let same = r.values().iter().zip(c.values()).all(|(u, v)| u.to_bits() == v.to_bits());
        prop_assert!(same);
        Ok(())
    });
    let detail = match &result {
        Ok(()) => "100 random linear problems bitwise identical".to_string(),
        Err(e) => format!("counterexample: {e}"),
    };
    let ok = verdict(
        "C2",
        "autonomous fields give identical trajectories",
        result.is_ok(),
        &detail,
        start.elapsed(),
        Duration::from_secs(10),
    );
    assert!(ok);
}

#[test]
fn c03_closed_form_oracle() {
    let _g = serial();
    let start = Instant::now();
    let params = PresetParams {
        lambda: 256.0,
        tau: 1.0,
        x0: 1.0,
        horizon: 1,
        ..PresetKind::Kainhofer.defaults()
    };
    let preset = ProblemPreset::new(PresetKind::Kainhofer, params).unwrap();
    let cfg = ExperimentConfig::new(
        preset.problem().clone(),
        (5..=10).map(|l| 1usize << l).collect(),
        SAMPLES,
        ReferenceSpec::Exact(preset.exact().unwrap()),
        SEED,
    );
    let cmp = compare_schemes(&cfg).unwrap();
    let r0 = fitted(&cmp.randomized.interval_slopes[0]).ols_slope;
    let c0 = fitted(&cmp.classical.interval_slopes[0]).ols_slope;
    let c1 = fitted(&cmp.classical.interval_slopes[1]).ols_slope;
    let band = |s: f64| (0.8..=1.3).contains(&s);
    let ok = verdict(
        "C3",
        "kainhofer oracle slopes",
        band(r0) && band(c0) && c1 < c0,
        &format!(
            "randomized j=0 {r0:.3} in [0.8,1.3]: {}; classical j=0 {c0:.3} in [0.8,1.3]: {}; classical j=1 {c1:.3} < j=0: {}",
            band(r0),
            band(c0),
            c1 < c0
        ),
        start.elapsed(),
        Duration::from_secs(120),
    );
    assert!(ok);
}

fn f1_config(alpha: f64, seed: u64) -> ExperimentConfig {
    let params = PresetParams {
        m: 10.0,
        p: 100.0,
        alpha,
        gamma: 5.0,
        horizon: 5,
        ..PresetParams::default()
    };
    let preset = ProblemPreset::new(PresetKind::F1, params).unwrap();
    ExperimentConfig::new(
        preset.problem().clone(),
        vec![10, 100, 1000, 10_000],
        SAMPLES,
        ReferenceSpec::Step(1e-5),
        seed,
    )
}

struct F1Runs {
    /// `(alpha, outcome)` for alpha = 0.1 and 1.
    runs: Vec<(f64, ExperimentOutcome)>,
    elapsed: Duration,
}

fn f1_runs() -> &'static F1Runs {
    static CELL: OnceLock<F1Runs> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let runs = [0.1, 1.0]
            .into_iter()
            .map(|alpha| (alpha, run_experiment(&f1_config(alpha, SEED)).unwrap()))
            .collect();
        F1Runs {
            runs,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn c04_f1_rates() {
    let _g = serial();
    let runs = f1_runs();
    let mut pass = true;
    let mut parts = Vec::new();
    for (alpha, out) in &runs.runs {
        let target = if *alpha == 1.0 { 0.75 } else { 0.73 };
        let mean = fitted(&out.slopes).mean_pairwise();
        let ok = (mean - target).abs() <= 0.15;
        pass &= ok;
        parts.push(format!("alpha={alpha}: mean pairwise {mean:.3} vs {target}+-0.15 {ok}"));
    }
    let ok = verdict(
        "C4",
        "f1 gamma=5 rates",
        pass,
        &parts.join("; "),
        runs.elapsed,
        Duration::from_secs(900),
    );
    assert!(ok);
}

struct F2Runs {
    runs: Vec<(f64, ExperimentOutcome)>,
    elapsed: Duration,
}

fn f2_runs() -> &'static F2Runs {
    static CELL: OnceLock<F2Runs> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let runs = [0.1, 0.5, 1.0]
            .into_iter()
            .map(|alpha| {
                let params = PresetParams {
                    alpha,
                    gamma: 2.1,
                    horizon: 5,
                    ..PresetParams::default()
                };
                let preset = ProblemPreset::new(PresetKind::F2, params).unwrap();
                let cfg = ExperimentConfig::new(
                    preset.problem().clone(),
                    (3..=8).map(|l| 1usize << l).collect(),
                    SAMPLES,
                    ReferenceSpec::Refine(100),
                    SEED,
                );
                (alpha, run_experiment(&cfg).unwrap())
            })
            .collect();
        F2Runs {
            runs,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn c05_f2_rates() {
    let _g = serial();
    let runs = f2_runs();
    let mut pass = true;
    let mut parts = Vec::new();
    for (alpha, out) in &runs.runs {
        let mean = fitted(&out.slopes).mean_pairwise();
        let ok = (0.6..=0.95).contains(&mean);
        pass &= ok;
        parts.push(format!("alpha={alpha}: mean pairwise {mean:.3} in [0.6,0.95] {ok}"));
    }
    let ok = verdict(
        "C5",
        "f2 gamma=2.1 rates",
        pass,
        &parts.join("; "),
        runs.elapsed,
        Duration::from_secs(300),
    );
    assert!(ok);
}

#[test]
fn c06_classical_failure_mode() {
    let _g = serial();
    let start = Instant::now();
    let preset = ProblemPreset::with_defaults(PresetKind::Comparison).unwrap();
    let cfg = ExperimentConfig::new(
        preset.problem().clone(),
        (4..=8).map(|l| 1usize << l).collect(),
        SAMPLES,
        ReferenceSpec::Step(1.0 / 65536.0),
        SEED,
    );
    let cmp = compare_schemes(&cfg).unwrap();
    let r = fitted(&cmp.randomized.slopes).ols_slope;
    let c = fitted(&cmp.classical.slopes).ols_slope;
    let ok = verdict(
        "C6",
        "oscillatory forcing, classical vs randomized",
        c <= 0.1 && r >= 0.4,
        &format!("classical OLS {c:.3} <= 0.1: {}; randomized OLS {r:.3} >= 0.4: {}", c <= 0.1, r >= 0.4),
        start.elapsed(),
        Duration::from_secs(300),
    );
    assert!(ok);
}

#[test]
fn c07_certificates() {
    let _g = serial();
    let start = Instant::now();
    let preset = ProblemPreset::with_defaults(PresetKind::Kainhofer).unwrap();
    let problem = preset.problem();
    let (l1, lp) = preset.envelope_norms(f64::INFINITY);
    let cert = bound_certificate(&l1, &lp, problem.x0()[0].abs(), f64::INFINITY).unwrap();

    let steps = 1 << 12;
    let mut stream = derive_stream(SEED, "certificate", &[]);
    let traj = randomized_euler(problem, steps, &mut stream).unwrap();
    let bounds = check_bounds(&traj, &cert).unwrap();
    let holder = check_holder(&traj, &cert).unwrap();
    let fine_ok = bounds.passed() && holder.passed() && bounds.intervals.len() == 2;

    // A spike well above K_0 in the middle of the first interval.
    let mut values = traj.values().to_vec();
    values[steps / 2] = 10.0 * cert.bound(0);
    let spiked = Trajectory::from_values(*traj.mesh(), traj.x0().to_vec(), values).unwrap();
    let spike_bounds = check_bounds(&spiked, &cert).unwrap();
    let spike_holder = check_holder(&spiked, &cert).unwrap();
    let spike_caught = !spike_bounds.passed() && !spike_holder.passed();

    let ok = verdict(
        "C7",
        "a priori certificates",
        fine_ok && spike_caught,
        &format!(
            "fine N={steps} passes bounds {} and holder {}; spike rejected by bounds {} and holder {}",
            bounds.passed(),
            holder.passed(),
            !spike_bounds.passed(),
            !spike_holder.passed()
        ),
        start.elapsed(),
        Duration::from_secs(30),
    );
    assert!(ok);
}

#[test]
fn c08_rate_floor() {
    let _g = serial();
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    let f1 = f1_runs().runs.iter().filter(|(a, _)| *a == 1.0).map(|(_, o)| ("f1", o));
    let f2 = f2_runs().runs.iter().filter(|(a, _)| *a == 1.0).map(|(_, o)| ("f2", o));
    for (name, out) in f1.chain(f2) {
        let mut worst = f64::INFINITY;
        let mut at = 0;
        for (j, fit) in out.interval_slopes.iter().enumerate() {
            let min = fitted(fit).min_pairwise();
            if min < worst {
                worst = min;
                at = j;
            }
        }
        let ok = worst >= 0.4;
        pass &= ok;
        parts.push(format!("{name} alpha=1: min per-interval pairwise {worst:.3} (j={at}) >= 0.4 {ok}"));
    }
    let ok = verdict(
        "C8",
        "per-interval rate floor",
        pass,
        &parts.join("; "),
        start.elapsed(),
        Duration::from_secs(900),
    );
    assert!(ok);
}

#[test]
fn c09_determinism() {
    let _g = serial();
    let first = f1_runs();
    let start = Instant::now();
    let mut identical = true;
    let mut max_gap = 0.0f64;
    for (alpha, out) in &first.runs {
        let again = run_experiment(&f1_config(*alpha, SEED)).unwrap();
        identical &= csv_bytes(out) == csv_bytes(&again);
        let other = run_experiment(&f1_config(*alpha, OTHER_SEED)).unwrap();
        let gap = (fitted(&out.slopes).mean_pairwise() - fitted(&other.slopes).mean_pairwise()).abs();
        max_gap = max_gap.max(gap);
    }
    let ok = verdict(
        "C9",
        "seeded determinism",
        identical && max_gap <= 0.1,
        &format!("equal seeds byte-identical CSV: {identical}; seed {SEED} vs {OTHER_SEED} slope gap {max_gap:.3} <= 0.1"),
        start.elapsed(),
        Duration::from_secs(1800),
    );
    assert!(ok);
}

struct Recorder(Mutex<Vec<f64>>);

impl RightHandSide for Recorder {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, t: f64, _x: &[f64], _z: &[f64], out: &mut [f64]) {
        self.0.lock().unwrap().push(t);
        out[0] = 0.0;
    }
}

#[test]
fn c10_uniform_offsets() {
    let _g = serial();
    let start = Instant::now();
    let (steps, horizon, runs) = (100usize, 9usize, 10u64);
    let mut offsets = Vec::new();
    for s in 0..runs {
        let recorder = std::sync::Arc::new(Recorder(Mutex::new(Vec::new())));
        let problem = DdeProblem::new(recorder.clone(), 0.7, horizon, vec![1.0]).unwrap();
        let mut stream = derive_stream(SEED, "ks", &[s]);
        let traj = randomized_euler(&problem, steps, &mut stream).unwrap();
        let mesh = traj.mesh();
        let times = recorder.0.lock().unwrap();
        for (i, theta) in times.iter().enumerate() {
            let (j, k) = (i / steps, i % steps);
            offsets.push((theta - mesh.time(j, k)) / mesh.step_size());
        }
    }
    offsets.sort_by(f64::total_cmp);
    let n = offsets.len() as f64;
    let d = offsets
        .iter()
        .enumerate()
        .map(|(i, &u)| ((i + 1) as f64 / n - u).max(u - i as f64 / n))
        .fold(0.0f64, f64::max);
    let critical = 1.628 / n.sqrt();
    let in_range = offsets.iter().all(|u| (0.0..1.0).contains(u));
    let ok = verdict(
        "C10",
        "theta offsets are Uniform[0,1)",
        d < critical && in_range && offsets.len() == 10_000,
        &format!("{} draws, KS D = {d:.5} < {critical:.5}", offsets.len()),
        start.elapsed(),
        Duration::from_secs(60),
    );
    assert!(ok);
}
