use serde::{Deserialize, Serialize};

use crate::convexity::{scaling_parameters, ConvexityModulus, PairSampler, TwoBallSampler, ViolationReport};
use crate::error::{domain, Result};
use crate::num::PosRational;
use crate::picard::{LpSpace, Scenario, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Samples `d ∈ (0, K]` and `u, y` with `‖y‖ = d`, `‖u‖ ≥ d` and
/// `‖u − hy‖ ≤ d(1 − h + δ)`, then checks `‖u − y‖ ≤ ε/2 + τ`. Collects
/// `count` premise hits (or stops after `1000·count` draws).
pub fn verify_scaling_lemma(
    space: LpSpace,
    phi: &ConvexityModulus,
    k: &PosRational,
    r: &PosRational,
    eps: &PosRational,
    count: u64,
    seed: u64,
) -> Result<ViolationReport> {
    let params = scaling_parameters(phi, k, r, eps)?;
    let (h, delta) = (params.h.to_f64(), params.delta.to_f64());
    let (kf, half_eps) = (k.to_f64(), eps.to_f64() / 2.0);
    let mut pairs = TwoBallSampler::new(space, h, delta, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut report = ViolationReport::default();
    let max_samples = count.saturating_mul(1000).max(1000);
    while report.premise_hits < count && report.samples < max_samples {
        let (y1, u1) = pairs.sample();
        let d = kf * (1.0 - rng.random::<f64>());
        let y = match space.normalize(&y1) {
            Some(unit) => unit.iter().map(|c| c * d).collect::<Vec<_>>(),
            None => continue,
        };
        let u: Vec<f64> = u1.iter().map(|c| c * d).collect();
        let shifted: Vec<f64> = u.iter().zip(&y).map(|(a, b)| a - h * b).collect();
        let premise = d > 0.0 && space.norm(&u) >= d && space.norm(&shifted) <= d * (1.0 - h + delta);
        report.record(premise, space.dist(&u, &y) - half_eps, TAU);
    }
    Ok(report)
}

/// Step sizes `‖T^(i+1)x − T^i x‖` over `[start, start + window]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizeReport {
    pub start: u64,
    pub window: u64,
    pub max_step: f64,
    /// Steps above `ε + τ`.
    pub violations: u64,
    /// Indices where a step exceeds its predecessor by more than `τ`.
    pub increases: u64,
}

impl StepSizeReport {
    pub fn is_clean(&self) -> bool {
        self.violations == 0 && self.increases == 0
    }
}

pub fn step_size_report(s: &Scenario, start: u64, window: u64, eps: &PosRational) -> Result<StepSizeReport> {
    let end = start
        .checked_add(window)
        .and_then(|e| e.checked_add(1))
        .ok_or_else(|| domain("window end overflows"))?;
    let orbit = s.orbit(end)?;
    let step = |i: u64| s.space.dist(orbit.point(i + 1), orbit.point(i));
    let bound = eps.to_f64() + TAU;
    let mut report = StepSizeReport {
        start,
        window,
        max_step: 0.0,
        violations: 0,
        increases: 0,
    };
    let mut prev = if start > 0 { Some(step(start - 1)) } else { None };
    for i in start..=start + window {
        let st = step(i);
        report.max_step = report.max_step.max(st);
        if st > bound {
            report.violations += 1;
        }
        if prev.is_some_and(|p| st > p + TAU) {
            report.increases += 1;
        }
        prev = Some(st);
    }
    Ok(report)
}

/// Brute-forced `μ_k := max_n s_(n+k)/s_n` over a finite table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuExtraction {
    /// `μ_k` for `k < len`; `μ_0 = 1`.
    pub mu: Vec<f64>,
    /// `sup_{m ≥ k} μ_m`, a nonincreasing majorant of `μ`.
    pub envelope: Vec<f64>,
    /// Indices `n` with `s_n < τ`, left out as denominators.
    pub excluded: Vec<usize>,
}

pub fn extract_mu(s: &[f64]) -> MuExtraction {
    let excluded: Vec<usize> = (0..s.len()).filter(|&n| s[n] < TAU).collect();
    let mut mu = vec![1.0f64; s.len()];
    for (k, m) in mu.iter_mut().enumerate().skip(1) {
        *m = (0..s.len() - k)
            .filter(|&n| s[n] >= TAU)
            .map(|n| s[n + k] / s[n])
            .fold(0.0, f64::max);
    }
    let mut envelope = mu.clone();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    MuExtraction { mu, envelope, excluded }
}
