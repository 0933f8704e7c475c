use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::source::{SequenceSource, Tail};
use crate::error::{domain, Result};
use crate::num::{rational_vec_serde, PosRational, Rational};
use crate::picard::{Scenario, ScenarioDesc};

/// Denominator of randomly generated exact sequence values.
pub const RANDOM_DENOMINATOR: u64 = 1_000_000;

/// Serializable description of a [`SequenceSource`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceDesc {
    /// Exact values, the last one held.
    Table {
        #[serde(with = "rational_vec_serde")]
        values: Vec<Rational>,
    },
    FloatTable { values: Vec<f64> },
    Constant { value: PosRational },
    /// `base + scale/(n + 1)`
    Harmonic { base: PosRational, scale: PosRational },
    /// Exact head followed by `base + scale/(n + 1)`.
    HeadHarmonic {
        #[serde(with = "rational_vec_serde")]
        head: Vec<Rational>,
        base: PosRational,
        scale: PosRational,
    },
    /// Random nonincreasing table of length `len` with `x_0 < below`.
    RandomNonincreasing { len: usize, below: PosRational, seed: u64 },
    /// Random nonnegative table of length `len` with `x_0 < below` and the
    /// other values below `2·below`.
    RandomNonnegative { len: usize, below: PosRational, seed: u64 },
    /// Random head of length `head_len` in `[below/2, below)` followed by a
    /// harmonic tail that starts at the head minimum.
    RandomHeadHarmonic { head_len: usize, below: PosRational, seed: u64 },
    OrbitDistance { scenario: ScenarioDesc, q: Vec<f64> },
    PicardOrbit { scenario: ScenarioDesc },
}

/// Parameters for building orbit-backed sources.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub orbit_cap: u64,
    pub certificate_samples: u64,
    pub seed: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            orbit_cap: crate::picard::DEFAULT_ORBIT_CAP,
            certificate_samples: 256,
            seed: 0,
        }
    }
}

fn rand_value(rng: &mut ChaCha8Rng, below_units: u64) -> u64 {
    if below_units == 0 {
        0
    } else {
        rng.random_range(0..below_units)
    }
}

fn units(below: &PosRational) -> u64 {
    use num_traits::ToPrimitive;
    let scaled = below.clone() * PosRational::integer(RANDOM_DENOMINATOR);
    // strict upper bound on the numerator of x_0
    scaled.ceil().to_u64().unwrap_or(u64::MAX)
}

fn from_units(n: u64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(RANDOM_DENOMINATOR))
}

/// Random nonincreasing exact values with `x_0 < below`: plateaus, small
/// steps and occasional large drops.
pub fn random_nonincreasing(len: usize, below: &PosRational, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = rand_value(&mut rng, units(below));
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(from_units(cur));
        let pick: f64 = rng.random();
        cur -= if pick < 0.3 {
            0
        } else if pick < 0.9 {
            rand_value(&mut rng, cur / 8 + 1).min(cur)
        } else {
            rand_value(&mut rng, cur + 1)
        };
    }
    out
}

/// Random nonnegative exact values with `x_0 < below` and `x_i < 2·below`.
pub fn random_nonnegative(len: usize, below: &PosRational, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = units(below);
    (0..len)
        .map(|i| from_units(rand_value(&mut rng, if i == 0 { u } else { 2 * u })))
        .collect()
}

/// A random non-monotone head in `[below/2, below)` and the harmonic tail
/// `base + scale/(n + 1)` with `x_{head_len}` equal to the head minimum, so
/// the tail never exceeds any head value.
pub fn random_head_harmonic(head_len: usize, below: &PosRational, seed: u64) -> (Vec<Rational>, Rational, Rational) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = units(below);
    let head: Vec<Rational> = (0..head_len)
        .map(|_| from_units(u / 2 + rand_value(&mut rng, u - u / 2)))
        .collect();
    let min = head.iter().min().cloned().unwrap_or_else(|| from_units(u / 2));
    let base = &min * Rational::new(BigInt::from(rand_value(&mut rng, 50)), BigInt::from(100));
    let scale = (&min - &base) * Rational::from_integer(BigInt::from(head_len + 1));
    (head, base, scale)
}

impl SequenceDesc {
    pub fn build(&self, opts: &BuildOptions) -> Result<SequenceSource> {
        let harmonic = |head: Vec<Rational>, base: &PosRational, scale: &PosRational| {
            SequenceSource::exact(
                head,
                Tail::Harmonic {
                    base: base.to_signed(),
                    scale: scale.to_signed(),
                },
            )
        };
        let scenario = |d: &ScenarioDesc| -> Result<Arc<Scenario>> {
            Ok(Arc::new(Scenario::from_desc(
                d,
                opts.orbit_cap,
                opts.certificate_samples,
                opts.seed,
            )?))
        };
        Ok(match self {
            SequenceDesc::Table { values } => SequenceSource::table(values.clone())?,
            SequenceDesc::FloatTable { values } => SequenceSource::float(values.clone())?,
            SequenceDesc::Constant { value } => {
                SequenceSource::table(vec![value.to_signed()])?.with_label(format!("const:{value}"))
            }
            SequenceDesc::Harmonic { base, scale } => {
                harmonic(vec![], base, scale)?.with_label(format!("{base}+{scale}/(n+1)"))
            }
            SequenceDesc::HeadHarmonic { head, base, scale } => harmonic(head.clone(), base, scale)?,
            SequenceDesc::RandomNonincreasing { len, below, seed } => {
                if *len == 0 {
                    return Err(domain("len must be positive"));
                }
                SequenceSource::table(random_nonincreasing(*len, below, *seed))?
                    .with_label(format!("random_nonincreasing(seed={seed})"))
            }
            SequenceDesc::RandomNonnegative { len, below, seed } => {
                if *len == 0 {
                    return Err(domain("len must be positive"));
                }
                SequenceSource::table(random_nonnegative(*len, below, *seed))?
                    .with_label(format!("random_nonnegative(seed={seed})"))
            }
            SequenceDesc::RandomHeadHarmonic { head_len, below, seed } => {
                let (head, base, scale) = random_head_harmonic(*head_len, below, *seed);
                SequenceSource::exact(head, Tail::Harmonic { base, scale })?
                    .with_label(format!("random_head_harmonic(seed={seed})"))
            }
            SequenceDesc::OrbitDistance { scenario: d, q } => {
                SequenceSource::orbit_distance(scenario(d)?, q.clone())?
            }
            SequenceDesc::PicardOrbit { scenario: d } => SequenceSource::picard_orbit(scenario(d)?),
        })
    }
}
