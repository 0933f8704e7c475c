//! Moduli of uniform convexity, the two-ball modulus derived from them, and
//! the precision `η` that drives the Picard-iterate rates.
//!
//! A modulus here is *any* `Φ: (0,2] → (0,1]` with
//! `½‖x₁+x₂‖ ≥ 1 − Φ(ε) ⇒ ‖x₁ − x₂‖ ≤ ε` on the unit ball; it need not be the
//! optimal one, nor monotone. All values are exact rationals.

mod sampling;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use sampling::{
    verify_modulus, verify_two_ball, PairSampler, TwoBallSampler, UnitBallPairSampler,
    ViolationReport, MODULUS_SLACK,
};

use crate::error::{domain, Result};
use crate::num::PosRational;

type ModulusFn = dyn Fn(&PosRational) -> PosRational + Send + Sync;

/// Serializable modulus choice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModulusDesc {
    /// `ε^p / (p·2^p)`
    Lp { p: u32 },
    /// `ε²/8`
    SurrogateHilbert,
}

/// A modulus of uniform convexity `Φ: (0,2] → (0,1]`.
#[derive(Clone)]
pub struct ConvexityModulus {
    f: Arc<ModulusFn>,
    label: String,
    desc: Option<ModulusDesc>,
}

impl ConvexityModulus {
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(&PosRational) -> PosRational + Send + Sync + 'static,
    ) -> Self {
        ConvexityModulus {
            f: Arc::new(f),
            label: label.into(),
            desc: None,
        }
    }

    pub fn from_desc(desc: &ModulusDesc) -> Result<Self> {
        match desc {
            ModulusDesc::Lp { p } => lp_modulus(*p),
            ModulusDesc::SurrogateHilbert => Ok(hilbert_surrogate_modulus()),
        }
    }

    /// `Φ(ε)`; rejects `ε ∉ (0, 2]` and flags values outside `(0, 1]`.
    pub fn eval(&self, eps: &PosRational) -> Result<PosRational> {
        if eps.is_zero() || *eps > PosRational::integer(2) {
            return Err(domain(format!("modulus argument {eps} outside (0, 2]")));
        }
        let v = (self.f)(eps);
        if v.is_zero() || v > PosRational::one() {
            return Err(domain(format!(
                "modulus {} returned {v} at {eps}, outside (0, 1]",
                self.label
            )));
        }
        Ok(v)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn descriptor(&self) -> Option<&ModulusDesc> {
        self.desc.as_ref()
    }
}

impl fmt::Debug for ConvexityModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConvexityModulus({})", self.label)
    }
}

/// `Φ(ε) = ε^p / (p·2^p)`, a modulus for `L_p` and every `ℓ_p^d`, `p ≥ 2`.
pub fn lp_modulus(p: u32) -> Result<ConvexityModulus> {
    if p < 2 {
        return Err(domain(format!("L_p modulus needs p ≥ 2, got {p}")));
    }
    let scale = PosRational::integer(u64::from(p)) * PosRational::integer(2).pow(p);
    Ok(ConvexityModulus {
        f: Arc::new(move |eps| eps.pow(p) / scale.clone()),
        label: format!("lp({p})"),
        desc: Some(ModulusDesc::Lp { p }),
    })
}

/// `Φ(ε) = ε²/8`, a rational lower bound of the inner-product modulus
/// `1 − √(1 − ε²/4)`.
pub fn hilbert_surrogate_modulus() -> ConvexityModulus {
    let eight = PosRational::integer(8);
    ConvexityModulus {
        f: Arc::new(move |eps| eps.pow(2) / eight.clone()),
        label: "surrogate".into(),
        desc: Some(ModulusDesc::SurrogateHilbert),
    }
}

/// `Ψ(h, ε) := min{ε/2, 2h·Φ(ε/2)}` on `(0, ½) × (0, 4]`.
#[derive(Clone, Debug)]
pub struct TwoBallModulus {
    phi: ConvexityModulus,
}

impl TwoBallModulus {
    pub fn eval(&self, h: &PosRational, eps: &PosRational) -> Result<PosRational> {
        if h.is_zero() || *h >= PosRational::ratio(1, 2) {
            return Err(domain(format!("Ψ: h = {h} outside (0, 1/2)")));
        }
        if eps.is_zero() || *eps > PosRational::integer(4) {
            return Err(domain(format!("Ψ: ε = {eps} outside (0, 4]")));
        }
        let half = eps / &PosRational::integer(2);
        let branch = PosRational::integer(2) * h * self.phi.eval(&half)?;
        Ok(half.min(branch))
    }

    pub fn modulus(&self) -> &ConvexityModulus {
        &self.phi
    }
}

pub fn psi_transform(phi: &ConvexityModulus) -> TwoBallModulus {
    TwoBallModulus { phi: phi.clone() }
}

/// The scale `h` and tolerance `δ` used when uniform convexity is applied to
/// orbit points at distance `≤ K` from the ball centre.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingParameters {
    /// `min{1/4, r/K}`
    pub h: PosRational,
    /// `min{1, Ψ(h, ε'/(2K))}` with `ε' = min{ε, 8K}`
    pub delta: PosRational,
    /// `r·δ/4`
    pub eta: PosRational,
}

pub fn scaling_parameters(
    phi: &ConvexityModulus,
    k: &PosRational,
    r: &PosRational,
    eps: &PosRational,
) -> Result<ScalingParameters> {
    if r.is_zero() {
        return Err(domain("r must be positive"));
    }
    if eps.is_zero() {
        return Err(domain("ε must be positive"));
    }
    if k <= r {
        return Err(domain(format!("K = {k} must exceed r = {r}")));
    }
    let two_k = PosRational::integer(2) * k;
    // Ψ is only defined up to ε/(2K) = 4; a bound for a smaller ε also holds
    // for a larger one.
    let eps = eps.clone().min(PosRational::integer(4) * &two_k);
    let h = PosRational::ratio(1, 4).min(r / k);
    let psi = psi_transform(phi).eval(&h, &(eps / two_k))?;
    let delta = PosRational::one().min(psi);
    let eta = r * &delta / PosRational::integer(4);
    Ok(ScalingParameters { h, delta, eta })
}

/// `η := (r/4)·min{1, Ψ(min{1/4, r/K}, ε/(2K))}`.
pub fn eta(
    phi: &ConvexityModulus,
    k: &PosRational,
    r: &PosRational,
    eps: &PosRational,
) -> Result<PosRational> {
    Ok(scaling_parameters(phi, k, r, eps)?.eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: u64, b: u64) -> PosRational {
        PosRational::ratio(a, b)
    }

    #[test]
    fn lp_modulus_values() {
        let l2 = lp_modulus(2).unwrap();
        assert_eq!(l2.eval(&q(2, 1)).unwrap(), q(1, 2));
        assert_eq!(l2.eval(&q(1, 8)).unwrap(), q(1, 512));
        assert_eq!(lp_modulus(3).unwrap().eval(&q(2, 1)).unwrap(), q(1, 3));
        assert!(lp_modulus(1).is_err());
        assert!(l2.eval(&q(3, 1)).is_err());
        assert!(l2.eval(&PosRational::zero()).is_err());
    }

    #[test]
    fn surrogate_values() {
        let s = hilbert_surrogate_modulus();
        assert_eq!(s.eval(&q(2, 1)).unwrap(), q(1, 2));
        assert_eq!(s.eval(&q(1, 1)).unwrap(), q(1, 8));
        assert_eq!(s.label(), "surrogate");
    }

    #[test]
    fn out_of_range_modulus_is_flagged() {
        let bad = ConvexityModulus::from_fn("two", |_| PosRational::integer(2));
        assert!(bad.eval(&q(1, 1)).is_err());
    }

    #[test]
    fn psi_values() {
        let psi2 = psi_transform(&lp_modulus(2).unwrap());
        assert_eq!(psi2.eval(&q(1, 4), &q(1, 4)).unwrap(), q(1, 1024));
        let psi3 = psi_transform(&lp_modulus(3).unwrap());
        assert_eq!(psi3.eval(&q(1, 8), &q(2, 1)).unwrap(), q(1, 96));
        // ε = 4: the second branch always wins since Φ ≤ 1 and h < 1/2
        assert_eq!(psi2.eval(&q(1, 4), &q(4, 1)).unwrap(), q(1, 4));
        assert!(psi2.eval(&q(1, 2), &q(1, 1)).is_err());
        assert!(psi2.eval(&PosRational::zero(), &q(1, 1)).is_err());
        assert!(psi2.eval(&q(1, 4), &q(5, 1)).is_err());
    }

    #[test]
    fn eta_values() {
        let l2 = lp_modulus(2).unwrap();
        assert_eq!(eta(&l2, &q(2, 1), &q(1, 1), &q(1, 1)).unwrap(), q(1, 4096));
        // ε/(2K) = 1/8 here, so Ψ(1/4, 1/8) = 1/4096 and η = 1/32768
        assert_eq!(eta(&l2, &q(1, 1), &q(1, 2), &q(1, 4)).unwrap(), q(1, 32768));
        let p = scaling_parameters(&l2, &q(100, 1), &q(1, 1), &q(1, 1)).unwrap();
        assert_eq!(p.h, q(1, 100));
        assert!(eta(&l2, &q(1, 1), &q(1, 1), &q(1, 1)).is_err());
        assert!(eta(&l2, &q(2, 1), &PosRational::zero(), &q(1, 1)).is_err());
    }

    #[test]
    fn eta_clamps_large_eps() {
        let l2 = lp_modulus(2).unwrap();
        let k = q(1, 1);
        let r = q(1, 2);
        let at_cap = eta(&l2, &k, &r, &q(8, 1)).unwrap();
        assert_eq!(eta(&l2, &k, &r, &q(1000, 1)).unwrap(), at_cap);
    }
}
