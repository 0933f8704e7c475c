use anyhow::Context;
use clap::{Args, ValueEnum};
use metastab::convexity::{eta, ConvexityModulus, ModulusDesc};
use metastab::picard::{
    approx_fixed_point_bound, asymptotic_regularity_rate, lp_asymptotic_regularity_rate,
    nonexpansive_omega, omega_decreasing_mu, omega_rate, MuProfile, MuProfileDesc, MuRateDesc,
};
use metastab::rates::{metastability_from_gamma, monotone_metastability_rate};
use metastab::{CounterDesc, Counterfunction, MetaDecRate, Nat, PosRational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RateKind {
    /// Closed-form rate of asymptotic regularity in L_p.
    LpAr,
    /// ⌈K/η⌉.
    Ar,
    /// The scaling parameter η.
    Eta,
    NonexpOmega,
    /// Ω with Γ = N + offset.
    Omega,
    Monotone,
    /// Φ from Γ = N + offset.
    FromGamma,
    /// Ω for a decreasing μ with rate c ≡ offset.
    OmegaDecreasingMu,
    /// Ω(ε, k ↦ k + 1) for nonexpansive maps.
    ApproxFixedPoint,
}

#[derive(Clone, Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub rate: RateKind,
    /// Exponent of the L_p modulus.
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    #[arg(long = "K", default_value = "1")]
    pub k: PosRational,
    #[arg(long, default_value = "1/2")]
    pub r: PosRational,
    #[arg(long)]
    pub eps: PosRational,
    /// Counterfunction, e.g. `const:1`, `affine:2,3`, `id`.
    #[arg(long, default_value = "const:0")]
    pub g: String,
    /// Offset of Γ, or the constant rate c of μ.
    #[arg(long, default_value = "0")]
    pub offset: Nat,
    /// Bound L on μ for omega-decreasing-mu.
    #[arg(long = "L", default_value = "2")]
    pub l: PosRational,
}

/// Evaluates one rate exactly and renders it as an integer or `num/den`.
pub fn evaluate(a: &EvalArgs) -> anyhow::Result<String> {
    let phi = ConvexityModulus::from_desc(&ModulusDesc::Lp { p: a.p })?;
    let g = Counterfunction::from_desc(
        &CounterDesc::parse_short(&a.g).with_context(|| format!("bad counterfunction {:?}", a.g))?,
    );
    let gamma = || MetaDecRate::offset(a.offset.clone());
    let n = match a.rate {
        RateKind::LpAr => lp_asymptotic_regularity_rate(a.p, &a.k, &a.r, &a.eps)?,
        RateKind::Ar => asymptotic_regularity_rate(&phi, &a.k, &a.r, &a.eps)?,
        RateKind::Eta => return Ok(eta(&phi, &a.k, &a.r, &a.eps)?.to_string()),
        RateKind::NonexpOmega => nonexpansive_omega(&phi, &a.k, &a.r)?.eval(&a.eps, &g)?,
        RateKind::Omega => omega_rate(&phi, &gamma(), &a.k, &a.r)?.eval(&a.eps, &g)?,
        RateKind::Monotone => monotone_metastability_rate(&a.k)?.eval(&a.eps, &g)?,
        RateKind::FromGamma => metastability_from_gamma(&gamma(), &a.k, &a.r)?.eval(&a.eps, &g)?,
        RateKind::OmegaDecreasingMu => {
            let profile = MuProfile::from_desc(&MuProfileDesc {
                bound: a.l.clone(),
                rate: Some(MuRateDesc::Const {
                    value: a.offset.clone(),
                }),
                meta: None,
                table: Vec::new(),
                decreasing: true,
            })?;
            omega_decreasing_mu(&phi, &profile, &a.k, &a.r)?.eval(&a.eps, &g)?
        }
        RateKind::ApproxFixedPoint => {
            approx_fixed_point_bound(&nonexpansive_omega(&phi, &a.k, &a.r)?, &a.eps)?
        }
    };
    Ok(n.to_string())
}

/// Names and short forms of the built-in counterfunction presets.
pub fn presets() -> Vec<(&'static str, &'static str)> {
    vec![
        ("const:c", "k ↦ c"),
        ("affine:a,b", "k ↦ a·k + b"),
        ("id", "k ↦ k"),
        ("succ", "k ↦ k + 1"),
        ("quadratic", "k ↦ k²"),
    ]
}
