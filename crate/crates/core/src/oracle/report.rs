use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::source::SequenceSource;
use super::witness::{check_metastability_bound, Verdict};
use crate::num::{nat_serde, Nat, PosRational};
use crate::rates::{Counterfunction, MetastabilityRate};

/// One `(ε, g)` cell of a tightness table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessRow {
    pub epsilon: PosRational,
    pub g: String,
    /// Least witness, present exactly when the verdict is pass.
    pub n_min: Option<u64>,
    #[serde(with = "opt_nat")]
    pub bound: Option<Nat>,
    pub verdict: Verdict,
    pub scanned: u64,
    /// `(bound + 1)/(n_min + 1)`, or a marker when it cannot be formed.
    pub ratio: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

mod opt_nat {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &Option<Nat>, s: S) -> Result<S::Ok, S::Error> {
        match n {
            Some(n) => nat_serde::serialize(n, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Nat>, D::Error> {
        let v: Option<String> = Option::deserialize(d)?;
        v.map(|t| t.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

impl TightnessRow {
    /// The minimal witness column: the index, or the reason there is none.
    pub fn n_min_field(&self) -> String {
        match (self.n_min, self.verdict) {
            (Some(n), _) => n.to_string(),
            (None, Verdict::Inconclusive) => "inconclusive".into(),
            (None, _) => "none".into(),
        }
    }

    pub fn bound_field(&self) -> String {
        self.bound.as_ref().map_or_else(|| "error".into(), |b| b.to_string())
    }
}

fn ratio(bound: Option<&Nat>, n_min: Option<u64>, cap: u64) -> String {
    match (bound, n_min) {
        (Some(b), _) if *b > Nat::from(cap) => "bound >> cap".into(),
        (Some(b), Some(n)) => {
            let b = b.to_f64().unwrap_or(f64::INFINITY);
            format!("{:.3}", (b + 1.0) / (n as f64 + 1.0))
        }
        _ => "-".into(),
    }
}

/// Checks `rate` against `source` on every `(ε, g)` cell, in parallel, and
/// returns the rows in grid order (ε outer, g inner).
pub fn tightness_report(
    source: &SequenceSource,
    rate: &MetastabilityRate,
    eps_grid: &[PosRational],
    g_grid: &[Counterfunction],
    cap: u64,
) -> Vec<TightnessRow> {
    let cells: Vec<(&PosRational, &Counterfunction)> = eps_grid
        .iter()
        .flat_map(|e| g_grid.iter().map(move |g| (e, g)))
        .collect();
    cells
        .par_iter()
        .map(|(eps, g)| {
            let out = check_metastability_bound(source, rate, eps, g, cap);
            TightnessRow {
                epsilon: (*eps).clone(),
                g: g.label(),
                n_min: out.witness,
                ratio: ratio(out.bound.as_ref(), out.witness, cap),
                bound: out.bound,
                verdict: out.verdict,
                scanned: out.scanned,
                note: out.note,
            }
        })
        .collect()
}
