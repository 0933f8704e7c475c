use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::space::{LpSpace, TAU};
use crate::convexity::ViolationReport;
use crate::error::{domain, Result};

/// Built-in self-maps. All act coordinatewise, so each is nonexpansive in
/// every `ℓ_p^d` as soon as its scalar profile is 1-Lipschitz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapDesc {
    Identity,
    /// Clamp every coordinate to `[-half_width, half_width]`.
    BoxProjection { half_width: f64 },
    /// `t ↦ t` on `[-½, ½]`, `t ↦ t − (t − ½)²` on `(½, 1]`, odd extension on
    /// `[-1, -½)`. Fixed set `[-½, ½]^d`; orbits approach it like `1/n`.
    SlowQuadratic,
}

/// What is known about a map's behaviour, which decides the `Γ` its
/// scenario uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapClass {
    Nonexpansive,
    AsymptoticallyNonexpansive,
    Generic,
}

type PointFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
pub struct SelfMap {
    f: Arc<PointFn>,
    class: MapClass,
    label: String,
    desc: Option<MapDesc>,
}

pub(crate) fn slow_quadratic_scalar(t: f64) -> f64 {
    let a = t.abs();
    if a <= 0.5 {
        t
    } else {
        let e = a - 0.5;
        (a - e * e).copysign(t)
    }
}

impl SelfMap {
    pub fn from_desc(desc: &MapDesc) -> Result<Self> {
        let f: Arc<PointFn> = match desc {
            MapDesc::Identity => Arc::new(|x: &[f64]| x.to_vec()),
            MapDesc::BoxProjection { half_width } => {
                let w = *half_width;
                if !(w.is_finite() && w > 0.0) {
                    return Err(domain(format!("box half-width {w} must be positive")));
                }
                Arc::new(move |x: &[f64]| x.iter().map(|t| t.clamp(-w, w)).collect())
            }
            MapDesc::SlowQuadratic => {
                Arc::new(|x: &[f64]| x.iter().copied().map(slow_quadratic_scalar).collect())
            }
        };
        let label = match desc {
            MapDesc::Identity => "identity".to_string(),
            MapDesc::BoxProjection { half_width } => format!("box({half_width})"),
            MapDesc::SlowQuadratic => "slow_quadratic".to_string(),
        };
        Ok(SelfMap {
            f,
            class: MapClass::Nonexpansive,
            label,
            desc: Some(desc.clone()),
        })
    }

    pub fn from_fn(
        label: impl Into<String>,
        class: MapClass,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        SelfMap {
            f: Arc::new(f),
            class,
            label: label.into(),
            desc: None,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    pub fn class(&self) -> MapClass {
        self.class
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn descriptor(&self) -> Option<&MapDesc> {
        self.desc.as_ref()
    }

    /// Samples pairs in the box `[-extent, extent]^d` and counts pairs with
    /// `‖Tx − Ty‖ > ‖x − y‖ + τ`.
    pub fn spot_check_nonexpansive(
        &self,
        space: &LpSpace,
        extent: f64,
        count: u64,
        seed: u64,
    ) -> ViolationReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..space.d).map(|_| rng.random_range(-extent..=extent)).collect()
        };
        let mut report = ViolationReport::default();
        for _ in 0..count {
            let x = point(&mut rng);
            let y = point(&mut rng);
            let excess =
                space.dist(&self.apply(&x), &self.apply(&y)) - space.dist(&x, &y);
            report.record(true, excess, TAU);
        }
        report
    }
}

impl fmt::Debug for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SelfMap({}, {:?})", self.label, self.class)
    }
}
