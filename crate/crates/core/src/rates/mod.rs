//! Counterfunction algebra and the rate functionals for asymptotically
//! decreasing sequences of nonnegative reals.
//!
//! A *metastable rate of asymptotic decreasingness* `Γ(K, r, ε, g, N)` bounds
//! some `n` with `x_i ≤ x_N + ε` on the window `[n, n + g(n)]`; a *rate of
//! metastability* `Φ(ε, g)` bounds some `n` with `|x_i − x_j| ≤ ε` on the
//! same window. This module turns the former into the latter.

mod counter;

use std::fmt;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};

pub use counter::{CounterDesc, Counterfunction};
pub(crate) use counter::iterate_from;

use crate::error::{domain, Error, Result};
use crate::num::{Nat, PosRational};

/// Largest `N` for which the star closure of a rate that is not known to be
/// monotone in `N` is computed by enumeration.
pub const GAMMA_ENUMERATION_LIMIT: u64 = 1 << 20;

type GammaFn = dyn Fn(&GammaArgs<'_>) -> Result<Nat> + Send + Sync;
type PhiFn = dyn Fn(&PosRational, &Counterfunction) -> Result<Nat> + Send + Sync;

/// Arguments of a metastable rate of asymptotic decreasingness.
#[derive(Clone, Copy, Debug)]
pub struct GammaArgs<'a> {
    pub k: &'a PosRational,
    pub r: &'a PosRational,
    pub eps: &'a PosRational,
    pub g: &'a Counterfunction,
    pub n: &'a Nat,
}

impl<'a> GammaArgs<'a> {
    fn with_n<'b>(&self, n: &'b Nat) -> GammaArgs<'b>
    where
        'a: 'b,
    {
        GammaArgs { n, ..*self }
    }
}

/// `Γ(K, r, ε, g, N) → ℕ`.
#[derive(Clone)]
pub struct MetaDecRate {
    f: Arc<GammaFn>,
    label: String,
    monotone_in_n: bool,
}

impl MetaDecRate {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&GammaArgs<'_>) -> Result<Nat> + Send + Sync + 'static,
    ) -> Self {
        MetaDecRate {
            f: Arc::new(f),
            label: label.into(),
            monotone_in_n: false,
        }
    }

    /// A rate the caller asserts is nondecreasing in `N` for all other
    /// arguments fixed; its star closure is then `max{N, Γ(N)}`.
    pub fn monotone_in_n(
        label: impl Into<String>,
        f: impl Fn(&GammaArgs<'_>) -> Result<Nat> + Send + Sync + 'static,
    ) -> Self {
        MetaDecRate {
            monotone_in_n: true,
            ..Self::new(label, f)
        }
    }

    /// `Γ(K, r, ε, g, N) := N + offset`.
    pub fn offset(offset: Nat) -> Self {
        MetaDecRate::monotone_in_n(format!("N+{offset}"), move |a| Ok(a.n + &offset))
    }

    pub fn eval(
        &self,
        k: &PosRational,
        r: &PosRational,
        eps: &PosRational,
        g: &Counterfunction,
        n: &Nat,
    ) -> Result<Nat> {
        self.eval_args(&GammaArgs { k, r, eps, g, n })
    }

    pub fn eval_args(&self, args: &GammaArgs<'_>) -> Result<Nat> {
        (self.f)(args)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_monotone_in_n(&self) -> bool {
        self.monotone_in_n
    }
}

impl fmt::Debug for MetaDecRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetaDecRate({})", self.label)
    }
}

/// `Φ(ε, g) → ℕ`.
#[derive(Clone)]
pub struct MetastabilityRate {
    f: Arc<PhiFn>,
    label: String,
}

impl MetastabilityRate {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&PosRational, &Counterfunction) -> Result<Nat> + Send + Sync + 'static,
    ) -> Self {
        MetastabilityRate {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    /// `Φ ≡ c`; mostly useful as a deliberately wrong negative control.
    pub fn constant(c: Nat) -> Self {
        MetastabilityRate::new(format!("const:{c}"), move |_, _| Ok(c.clone()))
    }

    pub fn eval(&self, eps: &PosRational, g: &Counterfunction) -> Result<Nat> {
        if eps.is_zero() {
            return Err(domain("ε must be positive"));
        }
        (self.f)(eps, g)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for MetastabilityRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetastabilityRate({})", self.label)
    }
}

/// `f*(n) = max_{i ≤ n} {n, f(i)}`.
pub fn star_closure(f: &Counterfunction) -> Counterfunction {
    f.star()
}

/// `f^(n)`, with `f^(0)` the identity.
pub fn iterate(f: &Counterfunction, n: u64) -> Counterfunction {
    f.iterate(n)
}

/// `Γ*(…, N) = max_{i ≤ N} {N, Γ(…, i)}`.
pub fn gamma_star(gamma: &MetaDecRate) -> MetaDecRate {
    let inner = gamma.clone();
    MetaDecRate::monotone_in_n(format!("({})*", gamma.label()), move |a| {
        gamma_star_eval(&inner, a)
    })
}

fn gamma_star_eval(gamma: &MetaDecRate, a: &GammaArgs<'_>) -> Result<Nat> {
    let mut best = a.n.clone();
    if gamma.monotone_in_n {
        let v = gamma.eval_args(a)?;
        if v > best {
            best = v;
        }
        return Ok(best);
    }
    let top = a
        .n
        .to_u64()
        .filter(|&t| t <= GAMMA_ENUMERATION_LIMIT)
        .ok_or_else(|| Error::EnumerationLimit {
            what: "Γ*",
            requested: a.n.to_string(),
            limit: GAMMA_ENUMERATION_LIMIT,
        })?;
    for i in 0..=top {
        let i = Nat::from(i);
        let v = gamma.eval_args(&a.with_n(&i))?;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

fn require_positive(name: &str, q: &PosRational) -> Result<()> {
    if q.is_zero() {
        Err(domain(format!("{name} must be positive")))
    } else {
        Ok(())
    }
}

/// `(f*)^(⌈K/ε⌉)(0)`: some `N` below this value satisfies
/// `x_N − ε ≤ x_i` for all `i ≤ f(N)`, for any nonnegative `(x_n)` with `x_0 < K`.
pub fn infimum_witness_bound(k: &PosRational, eps: &PosRational, f: &Counterfunction) -> Result<Nat> {
    require_positive("K", k)?;
    require_positive("ε", eps)?;
    let steps = (k / eps).ceil();
    iterate_from(&steps, Nat::zero(), |j| Ok(f.star_eval(j)))
}

/// Shared core of the metastability rates built from a `Γ`:
/// `Γ*(…, f^(steps)(0))` with `f(j) := Γ*(…, j) + g*(Γ*(…, j))`, where `Γ*`
/// is evaluated at precision `eta`.
pub(crate) fn bound_from_gamma(
    gamma_star: &MetaDecRate,
    k: &PosRational,
    r: &PosRational,
    eta: &PosRational,
    g: &Counterfunction,
    steps: &Nat,
) -> Result<Nat> {
    let top = iterate_from(steps, Nat::zero(), |j| {
        let gj = gamma_star.eval_args(&GammaArgs { k, r, eps: eta, g, n: j })?;
        let tail = g.star_eval(&gj);
        Ok(gj + tail)
    })?;
    gamma_star.eval_args(&GammaArgs { k, r, eps: eta, g, n: &top })
}

/// Rate of metastability from a metastable rate of asymptotic decreasingness:
/// `Φ(ε, g) := Γ*(ε/2, g, f^(⌈2K/ε⌉)(0))`, `f(j) := Γ*(ε/2, g, j) + g*(Γ*(ε/2, g, j))`.
///
/// `r` is passed through to `Γ` unchanged.
pub fn metastability_from_gamma(
    gamma: &MetaDecRate,
    k: &PosRational,
    r: &PosRational,
) -> Result<MetastabilityRate> {
    require_positive("K", k)?;
    let gs = gamma_star(gamma);
    let (k, r) = (k.clone(), r.clone());
    let label = format!("Φ[Γ={}, K={k}]", gamma.label());
    Ok(MetastabilityRate::new(label, move |eps, g| {
        let half = eps / &PosRational::integer(2);
        let steps = (&PosRational::integer(2) * &k / eps.clone()).ceil();
        bound_from_gamma(&gs, &k, &r, &half, g, &steps)
    }))
}

/// The monotone-sequence rate `f^(⌈2K/ε⌉)(0)` with `f(j) := j + g*(j)`.
pub fn monotone_metastability_rate(k: &PosRational) -> Result<MetastabilityRate> {
    require_positive("K", k)?;
    let k = k.clone();
    let label = format!("monotone[K={k}]");
    Ok(MetastabilityRate::new(label, move |eps, g| {
        let steps = (&PosRational::integer(2) * &k / eps.clone()).ceil();
        iterate_from(&steps, Nat::zero(), |j| Ok(j + g.star_eval(j)))
    }))
}
