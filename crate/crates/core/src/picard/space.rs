use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Comparison slack for norms of floating-point orbit and sample points.
pub const TAU: f64 = 1e-9;

/// Finite-dimensional `ℓ_p^d` with an integer exponent `p ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpSpace {
    pub d: usize,
    pub p: u32,
}

impl LpSpace {
    pub fn new(d: usize, p: u32) -> Result<Self> {
        let s = LpSpace { d, p };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(domain("dimension must be at least 1"));
        }
        if self.p < 2 {
            return Err(domain(format!("exponent p = {} is below 2", self.p)));
        }
        Ok(())
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.d);
        match (self.d, self.p) {
            (1, _) => v[0].abs(),
            (_, 2) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            (_, p) => {
                // scale by the largest coordinate so powi cannot underflow
                let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                let s: f64 = v.iter().map(|x| (x.abs() / m).powi(p as i32)).sum();
                m * s.powf(1.0 / p as f64)
            }
        }
    }

    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&diff)
    }

    /// Uniformly oriented point of the unit sphere (Gaussian direction,
    /// renormalized in this norm).
    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
            let n = self.norm(&v);
            if n > 1e-12 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }

    /// `v / ‖v‖`, or `None` for the zero vector.
    pub fn normalize(&self, v: &[f64]) -> Option<Vec<f64>> {
        let n = self.norm(v);
        (n > 0.0).then(|| v.iter().map(|x| x / n).collect())
    }
}
