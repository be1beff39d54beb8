//! Keyed, splittable uniform streams.
//!
//! A stream is identified by a master seed and a path of `(role, indices)`
//! labels. The path is hashed with SHA-256 into a ChaCha8 key, so every
//! substream is addressed directly by its key rather than by jumping ahead
//! in a shared sequence. Deriving the same path twice yields the same
//! stream, in any order and on any thread.
//!
//! Uniforms take the top 53 bits of each 64-bit output, giving values in
//! `[0, 1)`. Normals use the Marsaglia polar transform on pairs of those
//! uniforms; the second variate of each accepted pair is cached.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::mesh::Mesh;

const DOMAIN_TAG: &[u8] = b"dde-core/stream/v1";

/// A source of uniform variates on `[0, 1)`.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSegment {
    pub role: String,
    pub indices: Vec<u64>,
}

#[derive(Clone)]
pub struct RandomStream {
    master_seed: u64,
    path: Vec<PathSegment>,
    key: [u8; 32],
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

/// Root stream for `(master_seed, role, indices)`.
pub fn derive_stream(master_seed: u64, role: &str, indices: &[u64]) -> RandomStream {
    let mut hasher = Sha256::new();
    hasher.update(DOMAIN_TAG);
    hasher.update([0u8]);
    hasher.update(master_seed.to_le_bytes());
    hash_segment(&mut hasher, role, indices);
    RandomStream::from_key(
        master_seed,
        vec![PathSegment {
            role: role.to_owned(),
            indices: indices.to_vec(),
        }],
        hasher.finalize().into(),
    )
}

fn hash_segment(hasher: &mut Sha256, role: &str, indices: &[u64]) {
    hasher.update((role.len() as u64).to_le_bytes());
    hasher.update(role.as_bytes());
    hasher.update((indices.len() as u64).to_le_bytes());
    for i in indices {
        hasher.update(i.to_le_bytes());
    }
}

impl RandomStream {
    fn from_key(master_seed: u64, path: Vec<PathSegment>, key: [u8; 32]) -> Self {
        Self {
            master_seed,
            path,
            key,
            rng: ChaCha8Rng::from_seed(key),
            spare_normal: None,
        }
    }

    /// Child stream keyed by this stream's key and `(role, indices)`.
    /// Independent of how many variates this stream has already produced.
    pub fn derive(&self, role: &str, indices: &[u64]) -> RandomStream {
        let mut hasher = Sha256::new();
        hasher.update(DOMAIN_TAG);
        hasher.update([1u8]);
        hasher.update(self.key);
        hash_segment(&mut hasher, role, indices);
        let mut path = self.path.clone();
        path.push(PathSegment {
            role: role.to_owned(),
            indices: indices.to_vec(),
        });
        Self::from_key(self.master_seed, path, hasher.finalize().into())
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[PathSegment] {
        &self.path
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Standard normal variate (Marsaglia polar method).
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_uniform() - 1.0;
            let v = 2.0 * self.next_uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let scale = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * scale);
                return u * scale;
            }
        }
    }
}

impl UniformSource for RandomStream {
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl std::fmt::Debug for RandomStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RandomStream")
            .field("master_seed", &self.master_seed)
            .field("path", &self.path)
            .finish_non_exhaustive()
    }
}

/// Replays a fixed list of uniforms, cycling when exhausted. Useful for
/// forcing specific evaluation nodes.
#[derive(Debug, Clone)]
pub struct ReplayUniforms {
    values: Vec<f64>,
    pos: usize,
}

impl ReplayUniforms {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "replay list must not be empty");
        assert!(
            values.iter().all(|u| (0.0..1.0).contains(u)),
            "replayed uniforms must lie in [0, 1)"
        );
        Self { values, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl UniformSource for ReplayUniforms {
    fn next_uniform(&mut self) -> f64 {
        let u = self.values[self.pos % self.values.len()];
        self.pos += 1;
        u
    }
}

/// Draws the randomized node `theta_{k+1}^j = t_k^j + h u` with `u` uniform
/// on `[0, 1)`. The result always satisfies `t_k^j <= theta < t_{k+1}^j`,
/// even when `t_k^j + h u` would round up onto the right node.
#[inline]
pub fn sample_theta<U: UniformSource + ?Sized>(source: &mut U, mesh: &Mesh, j: usize, k: usize) -> f64 {
    let left = mesh.time(j, k);
    let right = mesh.time(j, k + 1);
    let theta = left + mesh.step_size() * source.next_uniform();
    if theta < right {
        theta
    } else {
        right.next_down().max(left)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn take(stream: &mut RandomStream, n: usize) -> Vec<u64> {
        (0..n).map(|_| stream.next_u64()).collect()
    }

    #[test]
    fn same_path_same_sequence() {
        let mut a = derive_stream(7, "sample", &[3, 4]);
        let mut b = derive_stream(7, "sample", &[3, 4]);
        assert_eq!(take(&mut a, 100), take(&mut b, 100));
    }

    #[test]
    fn distinct_paths_distinct_sequences() {
        let base = take(&mut derive_stream(1, "sample", &[0]), 10_000);
        assert_ne!(base, take(&mut derive_stream(1, "sample", &[1]), 10_000));
        assert_ne!(base, take(&mut derive_stream(2, "sample", &[0]), 10_000));
        assert_ne!(base, take(&mut derive_stream(1, "other", &[0]), 10_000));
        // Length prefixes keep these apart.
        assert_ne!(
            take(&mut derive_stream(1, "ab", &[]), 8),
            take(&mut derive_stream(1, "a", &[u64::from_le_bytes(*b"b\0\0\0\0\0\0\0")]), 8)
        );
    }

    #[test]
    fn derivation_ignores_parent_position_and_order() {
        let parent = derive_stream(9, "sample", &[5]);
        let mut advanced = parent.clone();
        take(&mut advanced, 17);
        let a1 = parent.derive("coarse", &[8]);
        let _b = parent.derive("reference", &[8]);
        let a2 = advanced.derive("coarse", &[8]);
        assert_eq!(take(&mut a1.clone(), 50), take(&mut a2.clone(), 50));
        assert_eq!(a1.path().len(), 2);
        assert_eq!(a1.path()[1].role, "coarse");
    }

    #[test]
    fn theta_bounds() {
        let mesh = Mesh::new(1.0, 2, 1).unwrap();
        let mut zero = ReplayUniforms::new(vec![0.0]);
        assert_eq!(sample_theta(&mut zero, &mesh, 1, 1), mesh.time(1, 1));
        let mut half = ReplayUniforms::new(vec![0.5]);
        assert_eq!(sample_theta(&mut half, &mesh, 1, 1), 1.75);
        let mut top = ReplayUniforms::new(vec![1.0f64.next_down()]);
        let theta = sample_theta(&mut top, &mesh, 1, 1);
        assert!((1.5..2.0).contains(&theta));
    }

    #[test]
    fn theta_never_reaches_right_node() {
        // Largest representable uniform on an awkward mesh.
        let mesh = Mesh::new(3.0, 7, 4).unwrap();
        let mut top = ReplayUniforms::new(vec![1.0f64.next_down()]);
        for j in 0..5 {
            for k in 0..7 {
                let theta = sample_theta(&mut top, &mesh, j, k);
                assert!(theta >= mesh.time(j, k) && theta < mesh.time(j, k + 1));
            }
        }
    }

    #[test]
    fn uniform_offsets_have_mean_one_half() {
        let mesh = Mesh::new(1.0, 10, 0).unwrap();
        let mut stream = derive_stream(42, "theta-moment", &[]);
        let draws = 100_000;
        let mean = (0..draws)
            .map(|i| {
                let k = i % 10;
                (sample_theta(&mut stream, &mesh, 0, k) - mesh.time(0, k)) / mesh.step_size()
            })
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn normals_have_unit_variance() {
        let mut s = derive_stream(3, "normal", &[]);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.next_normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
