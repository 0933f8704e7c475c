use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::source::{SequenceSource, Value};
use crate::error::{domain, Result};
use crate::num::{Nat, PosRational};
use crate::rates::{infimum_witness_bound, Counterfunction, MetaDecRate, MetastabilityRate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessOutcome {
    Found(u64),
    /// Every `n ≤ cap` was scanned without success.
    Inconclusive { cap: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WitnessSearchResult {
    pub outcome: WitnessOutcome,
    /// Number of indices examined.
    pub scanned: u64,
}

/// Result of checking one bound against one sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    /// The bound under test, when it could be evaluated.
    pub bound: Option<Nat>,
    /// Least witness found at or below the bound.
    pub witness: Option<u64>,
    pub scanned: u64,
    pub note: Option<String>,
}

struct Scan {
    found: Option<u64>,
    scanned: u64,
    error: Option<crate::Error>,
}

/// Tries `n = 0, 1, …, limit` in order and stops at the first success.
fn scan(limit: u64, mut ok: impl FnMut(u64) -> Result<bool>) -> Scan {
    let mut scanned = 0;
    for n in 0..=limit {
        match ok(n) {
            Ok(true) => {
                return Scan {
                    found: Some(n),
                    scanned: scanned + 1,
                    error: None,
                }
            }
            Ok(false) => scanned += 1,
            Err(e) => {
                return Scan {
                    found: None,
                    scanned,
                    error: Some(e),
                }
            }
        }
    }
    Scan {
        found: None,
        scanned,
        error: None,
    }
}

fn window_end(n: u64, g: &Counterfunction) -> Nat {
    Nat::from(n) + g.eval_u64(n)
}

fn metastable_at(s: &SequenceSource, n: u64, eps: &PosRational, g: &Counterfunction) -> Result<bool> {
    if s.in_fixed_ball(n)? {
        return Ok(true);
    }
    s.window_within(n, &window_end(n, g), eps)
}

/// Least `n ≤ cap` with `|x_i − x_j| ≤ ε` on `[n, n + g(n)]`.
///
/// Orbit sources count `n` as a witness as soon as `T^n x` lies strictly
/// inside the certified fixed ball, since the orbit is constant from there.
pub fn min_witness(
    s: &SequenceSource,
    eps: &PosRational,
    g: &Counterfunction,
    cap: u64,
) -> Result<WitnessSearchResult> {
    let r = scan(cap, |n| metastable_at(s, n, eps, g));
    if let Some(e) = r.error {
        return Err(e);
    }
    Ok(WitnessSearchResult {
        outcome: match r.found {
            Some(n) => WitnessOutcome::Found(n),
            None => WitnessOutcome::Inconclusive { cap },
        },
        scanned: r.scanned,
    })
}

fn inconclusive(note: impl Into<String>, bound: Option<Nat>, scanned: u64) -> CheckOutcome {
    CheckOutcome {
        verdict: Verdict::Inconclusive,
        bound,
        witness: None,
        scanned,
        note: Some(note.into()),
    }
}

/// Scans `n ≤ min(cap, bound)` and turns the result into a verdict.
fn judge(bound: Nat, cap: u64, ok: impl FnMut(u64) -> Result<bool>) -> CheckOutcome {
    let exhaustive = bound <= Nat::from(cap);
    let limit = if exhaustive { bound.to_u64().expect("bound ≤ cap") } else { cap };
    let r = scan(limit, ok);
    if let Some(e) = r.error {
        return inconclusive(format!("scan stopped at n = {}: {e}", r.scanned), Some(bound), r.scanned);
    }
    match r.found {
        Some(n) => CheckOutcome {
            verdict: Verdict::Pass,
            bound: Some(bound),
            witness: Some(n),
            scanned: r.scanned,
            note: None,
        },
        None if exhaustive => CheckOutcome {
            verdict: Verdict::Fail,
            bound: Some(bound),
            witness: None,
            scanned: r.scanned,
            note: Some("no witness at or below the bound".into()),
        },
        None => inconclusive("bound exceeds the scan cap and no witness below the cap", Some(bound), r.scanned),
    }
}

/// Confirms some `n ≤ Φ(ε, g)` has `|x_i − x_j| ≤ ε` on `[n, n + g(n)]`.
pub fn check_metastability_bound(
    s: &SequenceSource,
    phi: &MetastabilityRate,
    eps: &PosRational,
    g: &Counterfunction,
    cap: u64,
) -> CheckOutcome {
    match phi.eval(eps, g) {
        Ok(bound) => judge(bound, cap, |n| metastable_at(s, n, eps, g)),
        Err(e) => inconclusive(format!("bound not evaluated: {e}"), None, 0),
    }
}

/// Confirms some `n ≤ Γ(K, r, ε, g, N)` has `x_i ≤ x_N + ε` on `[n, n + g(n)]`.
#[allow(clippy::too_many_arguments)]
pub fn check_asym_dec(
    s: &SequenceSource,
    gamma: &MetaDecRate,
    k: &PosRational,
    r: &PosRational,
    eps: &PosRational,
    g: &Counterfunction,
    big_n: &Nat,
    cap: u64,
) -> CheckOutcome {
    let bound = match gamma.eval(k, r, eps, g, big_n) {
        Ok(b) => b,
        Err(e) => return inconclusive(format!("bound not evaluated: {e}"), None, 0),
    };
    let x_n = match big_n.to_u64().ok_or_else(|| domain("N too large")).and_then(|i| s.value(i)) {
        Ok(v) => v,
        Err(e) => return inconclusive(format!("x_N not evaluated: {e}"), Some(bound), 0),
    };
    judge(bound, cap, |n| s.window_below(n, &window_end(n, g), &x_n, eps))
}

/// Confirms some `N ≤ (f*)^(⌈K/ε⌉)(0)` has `x_N − ε ≤ x_i` for all `i ≤ f(N)`.
/// Rejects sources with `x_0 ≥ K`.
pub fn check_infimum_lemma(
    s: &SequenceSource,
    k: &PosRational,
    eps: &PosRational,
    f: &Counterfunction,
    cap: u64,
) -> Result<CheckOutcome> {
    if s.first_exceeds(k)? {
        return Err(domain(format!("x_0 must be below K = {k}")));
    }
    let bound = infimum_witness_bound(k, eps, f)?;
    Ok(judge(bound, cap, |n| {
        let x_n: Value = s.value(n)?;
        s.prefix_above(&f.eval_u64(n), &x_n, eps)
    }))
}
