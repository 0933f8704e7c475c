//! Sampled checks of the uniform-convexity and two-ball implications.
//!
//! The premise regions of both implications are thin shells, so the samplers
//! concentrate on nearly coincident points close to the unit sphere; pairs
//! that miss the premise are counted and skipped.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ConvexityModulus, TwoBallModulus};
use crate::error::Result;
use crate::num::PosRational;
use crate::picard::LpSpace;

/// Slack for the direct modulus check.
pub const MODULUS_SLACK: f64 = 1e-12;

/// Outcome of a sampled implication check.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub samples: u64,
    pub premise_hits: u64,
    pub violations: u64,
    /// Largest `lhs − bound` of the conclusion over premise hits; negative
    /// when every hit had room to spare. `None` without premise hits.
    pub max_excess: Option<f64>,
}

impl ViolationReport {
    pub(crate) fn record(&mut self, premise: bool, excess: f64, slack: f64) {
        self.samples += 1;
        if !premise {
            return;
        }
        self.premise_hits += 1;
        if excess > slack {
            self.violations += 1;
        }
        self.max_excess = Some(self.max_excess.map_or(excess, |m| m.max(excess)));
    }

    pub fn is_clean(&self) -> bool {
        self.violations == 0
    }
}

/// A source of point pairs.
pub trait PairSampler {
    fn space(&self) -> LpSpace;
    fn sample(&mut self) -> (Vec<f64>, Vec<f64>);
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..hi.log10()))
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

/// Pairs in the closed unit ball, mostly on or just inside the sphere and
/// at distances spread log-uniformly over `[1e-5, 2]`.
pub struct UnitBallPairSampler {
    space: LpSpace,
    rng: ChaCha8Rng,
}

impl UnitBallPairSampler {
    pub fn new(space: LpSpace, seed: u64) -> Self {
        UnitBallPairSampler {
            space,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn radius(&mut self) -> f64 {
        if self.rng.random_bool(0.5) {
            1.0
        } else {
            1.0 - log_uniform(&mut self.rng, 1e-9, 1e-2)
        }
    }
}

impl PairSampler for UnitBallPairSampler {
    fn space(&self) -> LpSpace {
        self.space
    }

    fn sample(&mut self) -> (Vec<f64>, Vec<f64>) {
        let s = self.space;
        let dir = s.random_unit(&mut self.rng);
        let r1 = self.radius();
        let r2 = self.radius();
        let x1 = scaled(&dir, r1);
        let pick: f64 = self.rng.random();
        let dir2 = if pick < 0.05 {
            scaled(&dir, -1.0)
        } else {
            let w = s.random_unit(&mut self.rng);
            let t = log_uniform(&mut self.rng, 1e-5, 2.0);
            let moved: Vec<f64> = dir.iter().zip(&w).map(|(a, b)| a + t * b).collect();
            s.normalize(&moved).unwrap_or(dir)
        };
        (x1, scaled(&dir2, r2))
    }
}

/// Checks `½‖x₁+x₂‖ ≥ 1 − Φ(ε) ⇒ ‖x₁ − x₂‖ ≤ ε` until `count` premise hits
/// are collected (or `1000·count` samples drawn).
pub fn verify_modulus(
    sampler: &mut impl PairSampler,
    phi: &ConvexityModulus,
    eps: &PosRational,
    count: u64,
) -> Result<ViolationReport> {
    let threshold = 1.0 - phi.eval(eps)?.to_f64();
    let eps_f = eps.to_f64();
    let s = sampler.space();
    let mut report = ViolationReport::default();
    let max_samples = count.saturating_mul(1000).max(1000);
    while report.premise_hits < count && report.samples < max_samples {
        let (x1, x2) = sampler.sample();
        let sum: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
        let premise = 0.5 * s.norm(&sum) >= threshold;
        let excess = s.dist(&x1, &x2) - eps_f;
        report.record(premise, excess, MODULUS_SLACK);
    }
    Ok(report)
}

/// Pairs `(y, u)` with `‖y‖ ≤ 1` concentrated around the premise region of the
/// two-ball implication for a given `h` and shell thickness `Ψ(h, ε)`.
pub struct TwoBallSampler {
    space: LpSpace,
    h: f64,
    thickness: f64,
    rng: ChaCha8Rng,
}

impl TwoBallSampler {
    pub fn new(space: LpSpace, h: f64, thickness: f64, seed: u64) -> Self {
        TwoBallSampler {
            space,
            h,
            thickness: thickness.max(1e-12),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl PairSampler for TwoBallSampler {
    fn space(&self) -> LpSpace {
        self.space
    }

    fn sample(&mut self) -> (Vec<f64>, Vec<f64>) {
        let s = self.space;
        let dir = s.random_unit(&mut self.rng);
        // ‖y‖ must be within about Ψ/h of 1 for the premise to be satisfiable
        let ry = if self.rng.random_bool(0.25) {
            1.0
        } else {
            (1.0 - self.rng.random::<f64>() * 2.0 * self.thickness / self.h).max(0.0)
        };
        let y = scaled(&dir, ry);
        let w = s.random_unit(&mut self.rng);
        let t = log_uniform(&mut self.rng, 1e-6, 4.0);
        let moved: Vec<f64> = dir.iter().zip(&w).map(|(a, b)| a + t * b).collect();
        let udir = s.normalize(&moved).unwrap_or_else(|| dir.clone());
        let ru = if self.rng.random_bool(0.1) {
            1.0 - self.rng.random::<f64>() * self.thickness
        } else {
            1.0 + self.rng.random::<f64>() * 2.0 * self.thickness
        };
        (y, scaled(&udir, ru))
    }
}

/// Checks `‖u − hy‖ ≤ 1 − h + Ψ(h, ε) ∧ ‖u‖ ≥ 1 ⇒ ‖u − y‖ ≤ ε` on sampled
/// `(y, u)` until `count` premise hits are collected (or `1000·count` samples).
pub fn verify_two_ball(
    sampler: &mut impl PairSampler,
    psi: &TwoBallModulus,
    h: &PosRational,
    eps: &PosRational,
    count: u64,
    slack: f64,
) -> Result<ViolationReport> {
    let shell = psi.eval(h, eps)?.to_f64();
    let hf = h.to_f64();
    let eps_f = eps.to_f64();
    let s = sampler.space();
    let mut report = ViolationReport::default();
    let max_samples = count.saturating_mul(1000).max(1000);
    while report.premise_hits < count && report.samples < max_samples {
        let (y, u) = sampler.sample();
        let shifted: Vec<f64> = u.iter().zip(&y).map(|(a, b)| a - hf * b).collect();
        let premise = s.norm(&shifted) <= 1.0 - hf + shell && s.norm(&u) >= 1.0;
        let excess = s.dist(&u, &y) - eps_f;
        report.record(premise, excess, slack);
    }
    Ok(report)
}
