//! Recursive-matrix random graph generation for scaling studies.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Quadrant probabilities of the recursive subdivision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmatParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Default for RmatParams {
    fn default() -> Self {
        RmatParams { a: 0.57, b: 0.19, c: 0.19, d: 0.05 }
    }
}

impl RmatParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("probability {name} = {p} not in [0, 1]")));
            }
        }
        let sum = self.a + self.b + self.c + self.d;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("probabilities sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

/// Generate a skewed random edge list. Deterministic for a fixed seed;
/// endpoints outside `[0, num_vertices)` are resampled.
pub fn rmat_generate(
    num_vertices: u32,
    num_edges: u64,
    seed: u64,
    params: RmatParams,
) -> Result<Vec<(u32, u32)>> {
    params.validate()?;
    if num_vertices == 0 {
        if num_edges > 0 {
            return Err(Error::Config("cannot place edges in an empty vertex set".into()));
        }
        return Ok(Vec::new());
    }
    let scale = 32 - (num_vertices - 1).max(1).leading_zeros();
    let scale = scale.max(1);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(num_edges as usize);
    let ab = params.a + params.b;
    let abc = ab + params.c;
    while (edges.len() as u64) < num_edges {
        let mut src = 0u32;
        let mut dst = 0u32;
        for _ in 0..scale {
            src <<= 1;
            dst <<= 1;
            let r: f64 = rng.gen();
            if r < params.a {
                // top-left quadrant: both bits zero
            } else if r < ab {
                dst |= 1;
            } else if r < abc {
                src |= 1;
            } else {
                src |= 1;
                dst |= 1;
            }
        }
        if src < num_vertices && dst < num_vertices {
            edges.push((src, dst));
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_seed_is_reproducible() {
        let a = rmat_generate(1000, 5000, 42, RmatParams::default()).unwrap();
        let b = rmat_generate(1000, 5000, 42, RmatParams::default()).unwrap();
        assert_eq!(a, b);
        let c = rmat_generate(1000, 5000, 43, RmatParams::default()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_edges_gives_empty_list() {
        assert!(rmat_generate(10, 0, 1, RmatParams::default()).unwrap().is_empty());
        assert!(rmat_generate(0, 0, 1, RmatParams::default()).unwrap().is_empty());
        assert!(rmat_generate(0, 5, 1, RmatParams::default()).is_err());
    }

    #[test]
    fn bad_probabilities_rejected() {
        let p = RmatParams { a: 0.5, b: 0.5, c: 0.5, d: 0.5 };
        assert!(rmat_generate(8, 8, 1, p).is_err());
    }

    #[test]
    fn skew_exceeds_uniform_baseline() {
        // The default parameterization concentrates edges: its maximum
        // out-degree must beat a uniform generator with the same volume.
        let n = 2048u32;
        let e = 20_000u64;
        let skewed = rmat_generate(n, e, 7, RmatParams::default()).unwrap();
        let uniform = rmat_generate(n, e, 7, RmatParams { a: 0.25, b: 0.25, c: 0.25, d: 0.25 })
            .unwrap();
        let max_deg = |edges: &[(u32, u32)]| {
            let mut deg = vec![0u32; n as usize];
            for &(s, _) in edges {
                deg[s as usize] += 1;
            }
            deg.into_iter().max().unwrap()
        };
        assert!(max_deg(&skewed) > max_deg(&uniform));
    }

    #[test]
    fn endpoints_respect_vertex_bound() {
        // 1000 is not a power of two, so rejection sampling must clamp ids.
        let edges = rmat_generate(1000, 4000, 3, RmatParams::default()).unwrap();
        assert!(edges.iter().all(|&(s, d)| s < 1000 && d < 1000));
        assert_eq!(edges.len(), 4000);
    }
}
