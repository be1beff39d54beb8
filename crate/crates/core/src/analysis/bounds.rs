//! A priori solution bounds and Hölder constants from an integrable
//! envelope `K(t)` with `|f(t, x, z)| <= K(t) (1 + |x|) (1 + |z|)`.
//!
//! ```text
//! K_{-1} = |x0|
//! K_j    = (1 + K_{j-1}) (1 + |K|_1,j) exp((1 + K_{j-1}) |K|_1,j)
//! C_j    = (1 + K_{j-1}) (1 + K_j) |K|_p,j
//! ```
//!
//! where `|K|_q,j` is the `L^q` norm over `[j tau, (j + 1) tau]`. The exact
//! solution satisfies `sup |phi_j| <= K_j` and
//! `|phi_j(t) - phi_j(s)| <= C_j |t - s|^(1 - 1/p)`.

use crate::analysis::mc::euclidean_distance;
use crate::error::{invalid, Result};
use crate::mesh::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCertificate {
    pub p: f64,
    pub x0_norm: f64,
    pub l1_norms: Vec<f64>,
    pub lp_norms: Vec<f64>,
    /// `K_{-1}, K_0, ..., K_n`.
    pub bounds: Vec<f64>,
    /// `C_0, ..., C_n`.
    pub holder: Vec<f64>,
}

impl BoundCertificate {
    /// `K_j` for `j >= -1`.
    pub fn bound(&self, j: isize) -> f64 {
        self.bounds[(j + 1) as usize]
    }

    pub fn intervals(&self) -> usize {
        self.holder.len()
    }

    /// `1 - 1/p`, which is 1 for `p = inf`.
    pub fn holder_exponent(&self) -> f64 {
        1.0 - 1.0 / self.p
    }
}

pub fn bound_certificate(l1_norms: &[f64], lp_norms: &[f64], x0_norm: f64, p: f64) -> Result<BoundCertificate> {
    if l1_norms.len() != lp_norms.len() {
        return Err(invalid("norms", "L^1 and L^p norm lists differ in length"));
    }
    if p.is_nan() || p <= 1.0 {
        return Err(invalid("p", format!("must exceed 1, got {p}")));
    }
    if l1_norms.iter().chain(lp_norms).any(|v| v.is_nan() || *v < 0.0) || x0_norm.is_nan() || x0_norm < 0.0 {
        return Err(invalid("norms", "must be nonnegative"));
    }

    let mut bounds = Vec::with_capacity(l1_norms.len() + 1);
    bounds.push(x0_norm);
    let mut holder = Vec::with_capacity(l1_norms.len());
    for (l1, lp) in l1_norms.iter().zip(lp_norms) {
        let prev = *bounds.last().expect("seeded with K_{-1}");
        let next = (1.0 + prev) * (1.0 + l1) * ((1.0 + prev) * l1).exp();
        holder.push((1.0 + prev) * (1.0 + next) * lp);
        bounds.push(next);
    }
    Ok(BoundCertificate {
        p,
        x0_norm,
        l1_norms: l1_norms.to_vec(),
        lp_norms: lp_norms.to_vec(),
        bounds,
        holder,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalBound {
    pub interval: usize,
    pub max_norm: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub intervals: Vec<IntervalBound>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.intervals.iter().all(|i| i.ok)
    }

    pub fn violations(&self) -> impl Iterator<Item = &IntervalBound> {
        self.intervals.iter().filter(|i| !i.ok)
    }
}

/// Compare `max_k |y_k^j|` with `K_j` on each interval.
pub fn check_bounds(traj: &Trajectory, cert: &BoundCertificate) -> Result<BoundReport> {
    let mesh = traj.mesh();
    if cert.intervals() < mesh.intervals() {
        return Err(invalid("certificate", "does not cover every interval of the trajectory"));
    }
    let intervals = (0..mesh.intervals())
        .map(|j| {
            let max_norm = (0..=mesh.steps())
                .map(|k| traj.get(j, k).iter().map(|v| v * v).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            let bound = cert.bound(j as isize);
            IntervalBound {
                interval: j,
                max_norm,
                bound,
                ok: max_norm <= bound,
            }
        })
        .collect();
    Ok(BoundReport { intervals })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalHolder {
    pub interval: usize,
    pub constant: f64,
    /// Largest `|y_i - y_k| / |t_i - t_k|^e` over all grid pairs.
    pub worst_ratio: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub exponent: f64,
    pub intervals: Vec<IntervalHolder>,
}

impl HolderReport {
    pub fn passed(&self) -> bool {
        self.intervals.iter().all(|i| i.ok)
    }

    pub fn violations(&self) -> impl Iterator<Item = &IntervalHolder> {
        self.intervals.iter().filter(|i| !i.ok)
    }
}

/// Check `|y_i^j - y_k^j| <= C_j |t_i - t_k|^(1 - 1/p)` over all pairs of
/// grid points within each interval. Quadratic in `N`.
pub fn check_holder(traj: &Trajectory, cert: &BoundCertificate) -> Result<HolderReport> {
    let mesh = traj.mesh();
    if cert.intervals() < mesh.intervals() {
        return Err(invalid("certificate", "does not cover every interval of the trajectory"));
    }
    let exponent = cert.holder_exponent();
    let intervals = (0..mesh.intervals())
        .map(|j| {
            let constant = cert.holder[j];
            let mut worst_ratio = 0.0f64;
            let mut worst_pair = None;
            let mut ok = true;
            for i in 0..=mesh.steps() {
                for k in i + 1..=mesh.steps() {
                    let dy = euclidean_distance(traj.get(j, i), traj.get(j, k));
                    let dt = (mesh.time(j, k) - mesh.time(j, i)).powf(exponent);
                    if dy > constant * dt {
                        ok = false;
                    }
                    let ratio = dy / dt;
                    if ratio > worst_ratio {
                        worst_ratio = ratio;
                        worst_pair = Some((i, k));
                    }
                }
            }
            IntervalHolder {
                interval: j,
                constant,
                worst_ratio,
                worst_pair,
                ok,
            }
        })
        .collect();
    Ok(HolderReport { exponent, intervals })
}
