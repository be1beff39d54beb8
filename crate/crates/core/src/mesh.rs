//! Uniform meshes `t_k^j = j tau + k h` and trajectories stored on them.

use crate::error::{invalid, Error, Result};

/// Uniform mesh with `steps` steps per lag interval over `horizon + 1`
/// intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    tau: f64,
    steps: usize,
    horizon: usize,
    h: f64,
}

impl Mesh {
    pub fn new(tau: f64, steps: usize, horizon: usize) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(invalid("tau", format!("must be positive and finite, got {tau}")));
        }
        if steps == 0 {
            return Err(invalid("N", "steps per interval must be at least 1"));
        }
        Ok(Self {
            tau,
            steps,
            horizon,
            h: tau / steps as f64,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Steps per lag interval (`N`).
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn intervals(&self) -> usize {
        self.horizon + 1
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Grid time `t_k^j`. Never accumulated: the right endpoint `k = N` is
    /// evaluated as `(j + 1) tau`, bit-identical to `t_0^{j+1}`.
    #[inline]
    pub fn time(&self, j: usize, k: usize) -> f64 {
        if k == self.steps {
            (j + 1) as f64 * self.tau
        } else {
            j as f64 * self.tau + k as f64 * self.h
        }
    }

    /// All grid times of interval `j`.
    pub fn interval_times(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |k| self.time(j, k))
    }
}

/// Grid values `y_k^j` for `j = 0..=n`, `k = 0..=N`, plus the constant
/// history row `y^{-1} = x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    mesh: Mesh,
    dim: usize,
    x0: Vec<f64>,
    values: Vec<f64>,
}

impl Trajectory {
    /// `values` is laid out row-major by `(j, k, component)`. The continuity
    /// splice `y_0^j = y_N^{j-1}` must already hold.
    pub fn from_values(mesh: Mesh, x0: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let dim = x0.len();
        if dim == 0 {
            return Err(invalid("x0", "state dimension must be positive"));
        }
        let expected = mesh.intervals() * (mesh.steps() + 1) * dim;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        let traj = Self {
            mesh,
            dim,
            x0,
            values,
        };
        for j in 1..mesh.intervals() {
            if traj.get(j, 0) != traj.get(j - 1, mesh.steps()) {
                return Err(invalid(
                    "values",
                    format!("continuity splice violated between intervals {} and {j}", j - 1),
                ));
            }
        }
        Ok(traj)
    }

    pub(crate) fn from_parts_unchecked(mesh: Mesh, x0: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), mesh.intervals() * (mesh.steps() + 1) * x0.len());
        Self {
            dim: x0.len(),
            mesh,
            x0,
            values,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    /// Checked access; `j = -1` yields the history value `x0` for any `k`.
    pub fn at(&self, j: isize, k: usize) -> Result<&[f64]> {
        if j == -1 {
            return Ok(&self.x0);
        }
        let n = self.mesh.horizon() as isize;
        if j < -1 || j > n || k > self.mesh.steps() {
            return Err(Error::IndexOutOfRange(format!(
                "(j={j}, k={k}) outside j in -1..={n}, k in 0..={}",
                self.mesh.steps()
            )));
        }
        Ok(self.get(j as usize, k))
    }

    /// Unchecked-in-release access to `y_k^j`; panics on a bad index.
    #[inline]
    pub fn get(&self, j: usize, k: usize) -> &[f64] {
        let start = (j * (self.mesh.steps() + 1) + k) * self.dim;
        &self.values[start..start + self.dim]
    }

    /// The `(N + 1) * dim` values of interval `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        let len = (self.mesh.steps() + 1) * self.dim;
        &self.values[j * len..(j + 1) * len]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Subsample onto the mesh with `N / m` steps per interval, keeping
    /// every `m`-th node.
    pub fn restrict(&self, m: usize) -> Result<Trajectory> {
        let fine = self.mesh.steps();
        if m == 0 || !fine.is_multiple_of(m) {
            return Err(invalid(
                "m",
                format!("refinement factor {m} does not divide {fine} steps"),
            ));
        }
        if m == 1 {
            return Ok(self.clone());
        }
        let coarse = fine / m;
        let mesh = Mesh::new(self.mesh.tau(), coarse, self.mesh.horizon())?;
        let mut values = Vec::with_capacity(mesh.intervals() * (coarse + 1) * self.dim);
        for j in 0..mesh.intervals() {
            for i in 0..=coarse {
                values.extend_from_slice(self.get(j, i * m));
            }
        }
        Ok(Self::from_parts_unchecked(mesh, self.x0.clone(), values))
    }
}
