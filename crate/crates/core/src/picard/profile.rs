use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::num::{nat_serde, Nat, PosRational};
use crate::rates::Counterfunction;

/// Serializable description of a rate for `μ_n → 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MuRateDesc {
    /// `δ ↦ value`
    Const {
        #[serde(with = "nat_serde")]
        value: Nat,
    },
    /// `δ ↦ ⌈scale/δ⌉`
    CeilInverse { scale: PosRational },
    /// Least tabulated `k` whose tail `sup_{m ≥ k} μ_m` is at most `1 + δ`;
    /// the table length when no tabulated index qualifies.
    Tabulated { mu: Vec<f64> },
}

type ConvFn = dyn Fn(&PosRational) -> Result<Nat> + Send + Sync;
type MetaFn = dyn Fn(&PosRational, &Counterfunction) -> Result<Nat> + Send + Sync;

/// Rate of convergence `c(δ)` with `μ_{c(δ)} ≤ 1 + δ`.
#[derive(Clone)]
pub struct ConvergenceRate {
    f: Arc<ConvFn>,
    label: String,
}

impl ConvergenceRate {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&PosRational) -> Result<Nat> + Send + Sync + 'static,
    ) -> Self {
        ConvergenceRate {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    pub fn from_desc(desc: &MuRateDesc) -> Result<Self> {
        Ok(match desc {
            MuRateDesc::Const { value } => {
                let v = value.clone();
                ConvergenceRate::new(format!("const:{v}"), move |_| Ok(v.clone()))
            }
            MuRateDesc::CeilInverse { scale } => {
                let s = scale.clone();
                ConvergenceRate::new(format!("ceil({s}/δ)"), move |d| {
                    s.checked_div(d)
                        .map(|q| q.ceil())
                        .ok_or_else(|| domain("δ must be positive"))
                })
            }
            MuRateDesc::Tabulated { mu } => {
                if mu.iter().any(|m| !m.is_finite()) {
                    return Err(domain("tabulated μ must be finite"));
                }
                // suffix maxima make the lookup valid for non-monotone tables
                let mut tail_sup = mu.clone();
                for i in (0..tail_sup.len().saturating_sub(1)).rev() {
                    tail_sup[i] = tail_sup[i].max(tail_sup[i + 1]);
                }
                ConvergenceRate::new("tabulated", move |d| {
                    let thr = 1.0 + d.to_f64();
                    let k = tail_sup.iter().position(|&m| m <= thr).unwrap_or(tail_sup.len());
                    Ok(Nat::from(k))
                })
            }
        })
    }

    pub fn eval(&self, delta: &PosRational) -> Result<Nat> {
        if delta.is_zero() {
            return Err(domain("δ must be positive"));
        }
        (self.f)(delta)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for ConvergenceRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConvergenceRate({})", self.label)
    }
}

/// Rate of metastability `φ(δ, h)` for `(μ_n)`.
#[derive(Clone)]
pub struct MuMetaRate {
    f: Arc<MetaFn>,
    label: String,
    ignores_counterfunction: bool,
}

impl MuMetaRate {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&PosRational, &Counterfunction) -> Result<Nat> + Send + Sync + 'static,
    ) -> Self {
        MuMetaRate {
            f: Arc::new(f),
            label: label.into(),
            ignores_counterfunction: false,
        }
    }

    /// A rate of convergence of a nonincreasing `(μ_n)` is also a rate of
    /// metastability, independent of `h`.
    pub fn from_convergence(c: &ConvergenceRate) -> Self {
        let c2 = c.clone();
        MuMetaRate {
            f: Arc::new(move |d, _| c2.eval(d)),
            label: c.label.clone(),
            ignores_counterfunction: true,
        }
    }

    pub fn eval(&self, delta: &PosRational, h: &Counterfunction) -> Result<Nat> {
        if delta.is_zero() {
            return Err(domain("δ must be positive"));
        }
        (self.f)(delta, h)
    }

    pub fn ignores_counterfunction(&self) -> bool {
        self.ignores_counterfunction
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for MuMetaRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MuMetaRate({})", self.label)
    }
}

/// Serializable [`MuProfile`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuProfileDesc {
    #[serde(rename = "L")]
    pub bound: PosRational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<MuRateDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<MuRateDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<f64>,
    #[serde(default)]
    pub decreasing: bool,
}

/// Quantitative data on the sequence `(μ_n)` of an asymptotically
/// nonexpansive map.
#[derive(Clone, Debug)]
pub struct MuProfile {
    /// Upper bound `L` on every `μ_n` (and, for the decreasing variant, `L > μ_0`).
    pub bound: PosRational,
    pub rate: Option<ConvergenceRate>,
    pub meta: Option<MuMetaRate>,
    /// Tabulated `μ_n` for simulation and validation.
    pub table: Vec<f64>,
    pub decreasing: bool,
}

impl MuProfile {
    pub fn from_desc(d: &MuProfileDesc) -> Result<Self> {
        let rate = d.rate.as_ref().map(ConvergenceRate::from_desc).transpose()?;
        let meta = match &d.meta {
            Some(m) => Some(MuMetaRate::from_convergence(&ConvergenceRate::from_desc(m)?)),
            None => None,
        };
        let p = MuProfile {
            bound: d.bound.clone(),
            rate,
            meta,
            table: d.table.clone(),
            decreasing: d.decreasing,
        };
        p.validate()?;
        Ok(p)
    }

    /// The rate of metastability `φ`, derived from `c` when only a rate of
    /// convergence of a decreasing `(μ_n)` is present.
    pub fn meta_rate(&self) -> Option<MuMetaRate> {
        match (&self.meta, &self.rate) {
            (Some(m), _) => Some(m.clone()),
            (None, Some(c)) if self.decreasing => Some(MuMetaRate::from_convergence(c)),
            _ => None,
        }
    }

    /// Checks the tabulated data against the declared bound, rate and
    /// monotonicity.
    pub fn validate(&self) -> Result<()> {
        if self.bound.is_zero() {
            return Err(domain("L must be positive"));
        }
        let l = self.bound.to_f64();
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if let Some((i, m)) = self.table.iter().enumerate().find(|(_, m)| **m > l) {
            return bad(format!("μ_{i} = {m} exceeds L = {}", self.bound));
        }
        if self.decreasing {
            if let Some(i) = (1..self.table.len()).find(|&i| self.table[i] > self.table[i - 1]) {
                return bad(format!("μ is declared decreasing but μ_{i} > μ_{}", i - 1));
            }
        }
        if let Some(c) = &self.rate {
            for j in 0..=12u32 {
                let delta = PosRational::ratio(1, 1u64 << j);
                let k = c.eval(&delta)?;
                let idx = usize::try_from(&k).ok().filter(|&i| i < self.table.len());
                if let Some(i) = idx {
                    if self.table[i] > 1.0 + delta.to_f64() {
                        return bad(format!("μ_c(δ) = μ_{i} exceeds 1 + δ for δ = {delta}"));
                    }
                }
            }
        }
        Ok(())
    }
}
