//! Rates of metastability and asymptotic regularity for Picard iterates of
//! maps with a ball of fixed points in a uniformly convex space.

use num_traits::Zero;

use super::profile::MuProfile;
use crate::convexity::{eta, ConvexityModulus};
use crate::error::{domain, Error, Result};
use crate::num::{Nat, PosRational};
use crate::rates::{
    bound_from_gamma, gamma_star, iterate_from, Counterfunction, MetaDecRate, MetastabilityRate,
};

fn check_ball(k: &PosRational, r: &PosRational) -> Result<()> {
    if r.is_zero() {
        return Err(domain("r must be positive"));
    }
    if k <= r {
        return Err(domain(format!("K = {k} must exceed r = {r}")));
    }
    Ok(())
}

fn steps(k: &PosRational, eta: &PosRational) -> Nat {
    (k / eta).ceil()
}

/// `Γ(K, r, ε, g, N) := N`, valid for nonexpansive maps.
pub fn nonexpansive_gamma() -> MetaDecRate {
    MetaDecRate::monotone_in_n("N", |a| Ok(a.n.clone()))
}

/// `Ω(ε, g) := Γ*(K, r, η, g, f^(⌈K/η⌉)(0))` with
/// `f(j) := Γ*(K, r, η, g, j) + g*(Γ*(K, r, η, g, j))`.
pub fn omega_rate(
    phi: &ConvexityModulus,
    gamma: &MetaDecRate,
    k: &PosRational,
    r: &PosRational,
) -> Result<MetastabilityRate> {
    check_ball(k, r)?;
    let gs = gamma_star(gamma);
    let (phi, k, r) = (phi.clone(), k.clone(), r.clone());
    let label = format!("Ω[{}, Γ={}, K={k}, r={r}]", phi.label(), gamma.label());
    Ok(MetastabilityRate::new(label, move |eps, g| {
        let e = eta(&phi, &k, &r, eps)?;
        bound_from_gamma(&gs, &k, &r, &e, g, &steps(&k, &e))
    }))
}

/// `Ω(ε, g) := g̃^(⌈K/η⌉)(0)` with `g̃(j) := j + g*(j)`.
pub fn nonexpansive_omega(
    phi: &ConvexityModulus,
    k: &PosRational,
    r: &PosRational,
) -> Result<MetastabilityRate> {
    check_ball(k, r)?;
    let (phi, k, r) = (phi.clone(), k.clone(), r.clone());
    let label = format!("Ω_nonexp[{}, K={k}, r={r}]", phi.label());
    Ok(MetastabilityRate::new(label, move |eps, g| {
        let e = eta(&phi, &k, &r, eps)?;
        iterate_from(&steps(&k, &e), Nat::zero(), |j| Ok(j + g.star_eval(j)))
    }))
}

/// `⌈K/η⌉`: past this index consecutive Picard steps of a nonexpansive map
/// are at most `ε` apart.
pub fn asymptotic_regularity_rate(
    phi: &ConvexityModulus,
    k: &PosRational,
    r: &PosRational,
    eps: &PosRational,
) -> Result<Nat> {
    check_ball(k, r)?;
    Ok(steps(k, &eta(phi, k, r, eps)?))
}

/// `⌈p·2^(3p+1)·K^(p+2) / (ε^p·r²)⌉`, the closed-form rate of asymptotic
/// regularity in `L_p`.
pub fn lp_asymptotic_regularity_rate(
    p: u32,
    k: &PosRational,
    r: &PosRational,
    eps: &PosRational,
) -> Result<Nat> {
    if p < 2 {
        return Err(domain(format!("p must be at least 2, got {p}")));
    }
    for (name, v) in [("K", k), ("r", r), ("ε", eps)] {
        if v.is_zero() {
            return Err(domain(format!("{name} must be positive")));
        }
    }
    let numer = PosRational::integer(u64::from(p)) * PosRational::integer(2).pow(3 * p + 1) * k.pow(p + 2);
    let denom = eps.pow(p) * r.pow(2);
    Ok((numer / denom).ceil())
}

fn mu_precision(profile: &MuProfile, k: &PosRational, r: &PosRational, eps: &PosRational) -> PosRational {
    eps / &(&profile.bound * &(k + r))
}

/// `Γ_{L,φ}(K, r, ε, g, N) := N + φ(ε/(L(K + r)), g_N)` with `g_N(k) := g(N + k)`.
pub fn gamma_from_metastable_mu(
    profile: &MuProfile,
    k: &PosRational,
    r: &PosRational,
) -> Result<MetaDecRate> {
    let phi = profile
        .meta_rate()
        .ok_or(Error::Missing("rate of metastability for μ"))?;
    if k.is_zero() || r.is_zero() {
        return Err(domain("K and r must be positive"));
    }
    let label = format!("N+φ[{}]", phi.label());
    let prof = profile.clone();
    let f = move |a: &crate::rates::GammaArgs<'_>| {
        let delta = mu_precision(&prof, a.k, a.r, a.eps);
        Ok(a.n + phi.eval(&delta, &a.g.shift(a.n.clone()))?)
    };
    let ignores_g = profile.meta_rate().is_some_and(|m| m.ignores_counterfunction());
    Ok(if ignores_g {
        MetaDecRate::monotone_in_n(label, f)
    } else {
        MetaDecRate::new(label, f)
    })
}

fn require_decreasing_rate(profile: &MuProfile) -> Result<&crate::picard::ConvergenceRate> {
    let c = profile
        .rate
        .as_ref()
        .ok_or(Error::Missing("rate of convergence for μ"))?;
    if !profile.decreasing {
        return Err(domain("μ profile is not declared decreasing"));
    }
    if let Some(&mu0) = profile.table.first() {
        if mu0 >= profile.bound.to_f64() {
            return Err(domain(format!("L = {} must exceed μ_0 = {mu0}", profile.bound)));
        }
    }
    Ok(c)
}

/// `Γ_{L,c}(K, r, ε, g, N) := N + c(ε/(L(K + r)))`; monotone in `N`, so it
/// is its own star closure.
pub fn gamma_from_mu_rate(profile: &MuProfile, k: &PosRational, r: &PosRational) -> Result<MetaDecRate> {
    let c = require_decreasing_rate(profile)?.clone();
    if k.is_zero() || r.is_zero() {
        return Err(domain("K and r must be positive"));
    }
    let prof = profile.clone();
    Ok(MetaDecRate::monotone_in_n(format!("N+c[{}]", c.label()), move |a| {
        Ok(a.n + c.eval(&mu_precision(&prof, a.k, a.r, a.eps))?)
    }))
}

/// `Ω_{L,c}(ε, g) := (g_ω)^(⌈K/η⌉)(0) + ω` with `ω := c(η/(L(K + r)))` and
/// `g_ω(j) := j + ω + g*(j + ω)`.
pub fn omega_decreasing_mu(
    phi: &ConvexityModulus,
    profile: &MuProfile,
    k: &PosRational,
    r: &PosRational,
) -> Result<MetastabilityRate> {
    let c = require_decreasing_rate(profile)?.clone();
    check_ball(k, r)?;
    let (phi, k, r, prof) = (phi.clone(), k.clone(), r.clone(), profile.clone());
    let label = format!("Ω_Lc[{}, c={}, K={k}, r={r}]", phi.label(), c.label());
    Ok(MetastabilityRate::new(label, move |eps, g| {
        let e = eta(&phi, &k, &r, eps)?;
        let omega = c.eval(&mu_precision(&prof, &k, &r, &e))?;
        let top = iterate_from(&steps(&k, &e), Nat::zero(), |j| {
            let shifted = j + &omega;
            let tail = g.star_eval(&shifted);
            Ok(shifted + tail)
        })?;
        Ok(top + omega)
    }))
}

/// `Ω(ε, k ↦ k + 1)`: some `n` below it has `‖T^(n+1)x − T^n x‖ ≤ ε`.
pub fn approx_fixed_point_bound(omega: &MetastabilityRate, eps: &PosRational) -> Result<Nat> {
    omega.eval(eps, &Counterfunction::successor())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexity::lp_modulus;
    use crate::picard::{MuProfileDesc, MuRateDesc};
    use num_traits::One;

    fn q(a: u64, b: u64) -> PosRational {
        PosRational::ratio(a, b)
    }

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    fn profile(rate: MuRateDesc) -> MuProfile {
        MuProfile::from_desc(&MuProfileDesc {
            bound: q(2, 1),
            rate: Some(rate),
            meta: None,
            table: vec![],
            decreasing: true,
        })
        .unwrap()
    }

    #[test]
    fn nonexpansive_gamma_is_n() {
        let g = nonexpansive_gamma();
        let one = q(1, 1);
        let c = Counterfunction::constant(3);
        for v in [0u64, 7, 1000] {
            assert_eq!(g.eval(&one, &one, &one, &c, &n(v)).unwrap(), n(v));
            assert_eq!(gamma_star(&g).eval(&one, &one, &one, &c, &n(v)).unwrap(), n(v));
        }
    }

    #[test]
    fn omega_golden_values() {
        let l2 = lp_modulus(2).unwrap();
        let om = nonexpansive_omega(&l2, &q(2, 1), &q(1, 1)).unwrap();
        let expect = Nat::one() << 8191usize;
        assert_eq!(om.eval(&q(1, 1), &Counterfunction::constant(1)).unwrap(), expect);
        assert_eq!(om.eval(&q(1, 1), &Counterfunction::constant(0)).unwrap(), n(0));
        let gen = omega_rate(&l2, &nonexpansive_gamma(), &q(2, 1), &q(1, 1)).unwrap();
        assert_eq!(gen.eval(&q(1, 1), &Counterfunction::constant(1)).unwrap(), expect);
        // η = 1/32768 here, so the doubling runs 32768 times
        let om2 = nonexpansive_omega(&l2, &q(1, 1), &q(1, 2)).unwrap();
        assert_eq!(
            om2.eval(&q(1, 4), &Counterfunction::constant(1)).unwrap(),
            Nat::one() << 32767usize
        );
    }

    #[test]
    fn regularity_rates() {
        let l2 = lp_modulus(2).unwrap();
        assert_eq!(asymptotic_regularity_rate(&l2, &q(2, 1), &q(1, 1), &q(1, 1)).unwrap(), n(8192));
        assert_eq!(asymptotic_regularity_rate(&l2, &q(1, 1), &q(1, 2), &q(1, 4)).unwrap(), n(32768));
        assert_eq!(lp_asymptotic_regularity_rate(2, &q(1, 1), &q(1, 1), &q(1, 1)).unwrap(), n(256));
        assert_eq!(lp_asymptotic_regularity_rate(2, &q(1, 1), &q(1, 1), &q(1, 2)).unwrap(), n(1024));
        assert_eq!(lp_asymptotic_regularity_rate(2, &q(1, 1), &q(1, 2), &q(1, 4)).unwrap(), n(16384));
        assert!(lp_asymptotic_regularity_rate(1, &q(1, 1), &q(1, 1), &q(1, 1)).is_err());
        assert!(asymptotic_regularity_rate(&l2, &q(1, 1), &q(1, 1), &q(1, 1)).is_err());
    }

    #[test]
    fn closed_form_matches_eta_recipe_for_small_r() {
        let l2 = lp_modulus(2).unwrap();
        let (k, r, e) = (q(2, 1), q(1, 2), q(1, 1));
        assert_eq!(
            lp_asymptotic_regularity_rate(2, &k, &r, &e).unwrap(),
            asymptotic_regularity_rate(&l2, &k, &r, &e).unwrap()
        );
    }

    #[test]
    fn mu_rate_offsets() {
        let p = profile(MuRateDesc::CeilInverse { scale: q(1, 1) });
        let gamma = gamma_from_mu_rate(&p, &q(1, 1), &q(1, 1)).unwrap();
        let gs = gamma_star(&gamma);
        let g = Counterfunction::identity();
        let (k, r, e) = (q(1, 1), q(1, 1), q(1, 2));
        for v in 0..100u64 {
            assert_eq!(gamma.eval(&k, &r, &e, &g, &n(v)).unwrap(), n(v + 8));
            assert_eq!(gs.eval(&k, &r, &e, &g, &n(v)).unwrap(), n(v + 8));
        }
        let meta = gamma_from_metastable_mu(&p, &k, &r).unwrap();
        assert!(meta.is_monotone_in_n());
        assert_eq!(meta.eval(&k, &r, &e, &g, &n(5)).unwrap(), n(13));
    }

    #[test]
    fn mu_rate_requires_data() {
        let mut p = profile(MuRateDesc::Const { value: n(0) });
        p.decreasing = false;
        assert!(gamma_from_mu_rate(&p, &q(1, 1), &q(1, 1)).is_err());
        assert!(gamma_from_metastable_mu(&p, &q(1, 1), &q(1, 1)).is_err());
        let mut p = profile(MuRateDesc::Const { value: n(0) });
        p.table = vec![2.0];
        assert!(gamma_from_mu_rate(&p, &q(1, 1), &q(1, 1)).is_err());
    }

    #[test]
    fn decreasing_mu_omega() {
        let l2 = lp_modulus(2).unwrap();
        let (k, r) = (q(2, 1), q(1, 1));
        let zero = profile(MuRateDesc::Const { value: n(0) });
        let a = omega_decreasing_mu(&l2, &zero, &k, &r).unwrap();
        let b = nonexpansive_omega(&l2, &k, &r).unwrap();
        for g in [Counterfunction::constant(1), Counterfunction::identity()] {
            assert_eq!(a.eval(&q(1, 1), &g).unwrap(), b.eval(&q(1, 1), &g).unwrap());
        }
        let five = profile(MuRateDesc::Const { value: n(5) });
        let om = omega_decreasing_mu(&l2, &five, &k, &r).unwrap();
        let m = 8192usize;
        let expect = n(10) * ((Nat::one() << m) - 1u32) + 5u32;
        assert_eq!(om.eval(&q(1, 1), &Counterfunction::constant(0)).unwrap(), expect);
        let generic = omega_rate(&l2, &gamma_from_mu_rate(&five, &k, &r).unwrap(), &k, &r).unwrap();
        assert_eq!(generic.eval(&q(1, 1), &Counterfunction::constant(0)).unwrap(), expect);
    }

    #[test]
    fn approx_fixed_point_examples() {
        let l2 = lp_modulus(2).unwrap();
        let om = nonexpansive_omega(&l2, &q(2, 1), &q(1, 1)).unwrap();
        // g̃(j) = 2j + 1 from 0, 8192 times
        let expect = (Nat::one() << 8192usize) - 1u32;
        assert_eq!(approx_fixed_point_bound(&om, &q(1, 1)).unwrap(), expect);
    }
}
