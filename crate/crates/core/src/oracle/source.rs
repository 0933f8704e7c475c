use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{Signed, ToPrimitive};

use super::tree::MinMaxTree;
use crate::error::{domain, Result};
use crate::num::{Nat, PosRational, Rational};
use crate::picard::{Scenario, TAU};

/// Values past an exact head.
#[derive(Clone, Debug, PartialEq)]
pub enum Tail {
    /// The last head value repeats forever.
    Hold,
    /// `x_m = base + scale/(m + 1)`, with `m` the absolute index.
    Harmonic { base: Rational, scale: Rational },
}

/// A single sequence value.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(Rational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Value::Float(x) => *x,
        }
    }
}

/// Minimum and maximum over an index window.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Extrema {
    Exact(Rational, Rational),
    Float(f64, f64),
}

struct ExactSeq {
    head: Vec<Rational>,
    tree: MinMaxTree<Rational>,
    tail: Tail,
}

impl ExactSeq {
    fn tail_value(&self, m: &Nat) -> Rational {
        match &self.tail {
            Tail::Hold => self.head.last().expect("hold tail needs a head").clone(),
            Tail::Harmonic { base, scale } => {
                let denom = Rational::from_integer((m + 1u32).into());
                base + scale / denom
            }
        }
    }

    fn extrema(&self, a: u64, b: &Nat) -> Extrema {
        let h = self.head.len() as u64;
        let mut acc: Option<(Rational, Rational)> = None;
        if a < h {
            let hi = b.to_u64().map_or(h - 1, |b| b.min(h - 1));
            acc = self.tree.query(a as usize, hi as usize);
        }
        if *b >= Nat::from(h) {
            let lo = Nat::from(a.max(h));
            // both tails are nonincreasing
            let (tmax, tmin) = (self.tail_value(&lo), self.tail_value(b));
            acc = Some(match acc {
                None => (tmin, tmax),
                Some((mn, mx)) => (mn.min(tmin), mx.max(tmax)),
            });
        }
        let (mn, mx) = acc.expect("window is nonempty");
        Extrema::Exact(mn, mx)
    }

    fn value(&self, i: u64) -> Rational {
        match self.head.get(i as usize) {
            Some(v) => v.clone(),
            None => self.tail_value(&Nat::from(i)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Probe {
    /// `‖T^n x − q‖`
    Distance,
    /// `T^n x` itself
    Points,
}

struct OrbitSeq {
    scenario: Arc<Scenario>,
    q: Vec<f64>,
    probe: Probe,
    /// Scalar values along the orbit: distances to `q`, or the single
    /// coordinate when `d = 1`.
    cache: Mutex<MinMaxTree<f64>>,
}

impl OrbitSeq {
    fn scalar(&self, point: &[f64]) -> f64 {
        match self.probe {
            Probe::Distance => self.scenario.space.dist(point, &self.q),
            Probe::Points => point[0],
        }
    }

    /// Largest index of the window `[_, b]` that carries new information,
    /// materializing the orbit up to it.
    fn effective_end(&self, b: &Nat) -> Result<(Arc<crate::picard::Orbit>, u64)> {
        let target = b.to_u64().unwrap_or(u64::MAX);
        let orbit = self.scenario.orbit(target)?;
        let hi = match orbit.settled_from() {
            Some(s) => target.min(s),
            None => target,
        };
        Ok((orbit, hi))
    }

    fn extrema(&self, a: u64, b: &Nat) -> Result<Extrema> {
        let (orbit, hi) = self.effective_end(b)?;
        let lo = a.min(hi);
        let mut cache = self.cache.lock().expect("orbit value cache");
        while (cache.len() as u64) <= hi {
            let i = cache.len() as u64;
            cache.push(self.scalar(orbit.point(i)));
        }
        let (mn, mx) = cache
            .query(lo as usize, hi as usize)
            .expect("window within materialized orbit");
        Ok(Extrema::Float(mn, mx))
    }

    fn point_diameter_within(&self, a: u64, b: &Nat, eps: f64) -> Result<bool> {
        let (orbit, hi) = self.effective_end(b)?;
        let lo = a.min(hi);
        let space = &self.scenario.space;
        if space.dist(orbit.point(lo), orbit.point(hi)) > eps {
            return Ok(false);
        }
        for i in lo..=hi {
            for j in i + 1..=hi {
                if space.dist(orbit.point(i), orbit.point(j)) > eps {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[derive(Clone)]
enum Kind {
    Exact(Arc<ExactSeq>),
    Float(Arc<MinMaxTree<f64>>),
    Orbit(Arc<OrbitSeq>),
}

/// A sequence the oracle can scan: an exact table (with a constant or
/// harmonic tail), a float table held constant past its end, the distances
/// `‖T^n x − q‖` along a Picard orbit, or the orbit points themselves.
#[derive(Clone)]
pub struct SequenceSource {
    kind: Kind,
    label: String,
}

impl fmt::Debug for SequenceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SequenceSource({})", self.label)
    }
}

fn check_nonnegative(values: &[Rational]) -> Result<()> {
    match values.iter().position(|v| v.is_negative()) {
        Some(i) => Err(domain(format!("sequence value {} at index {i} is negative", values[i]))),
        None => Ok(()),
    }
}

impl SequenceSource {
    /// Exact values, the last one repeated forever.
    pub fn table(values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("a table needs at least one value"));
        }
        Self::exact(values, Tail::Hold)
    }

    pub fn exact(head: Vec<Rational>, tail: Tail) -> Result<Self> {
        check_nonnegative(&head)?;
        let label = match &tail {
            Tail::Hold => format!("table[{}]", head.len()),
            Tail::Harmonic { base, scale } => {
                if base.is_negative() || scale.is_negative() {
                    return Err(domain("harmonic tail needs nonnegative base and scale"));
                }
                format!("head[{}]+{base}+{scale}/(n+1)", head.len())
            }
        };
        if head.is_empty() && tail == Tail::Hold {
            return Err(domain("a held tail needs a head"));
        }
        let tree = MinMaxTree::from_values(head.iter().cloned());
        Ok(SequenceSource {
            kind: Kind::Exact(Arc::new(ExactSeq { head, tree, tail })),
            label,
        })
    }

    /// Float values compared with slack `τ`, the last one repeated forever.
    pub fn float(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("a table needs at least one value"));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(domain(format!("value {} at index {i} is not a finite nonnegative", values[i])));
        }
        let label = format!("float_table[{}]", values.len());
        Ok(SequenceSource {
            kind: Kind::Float(Arc::new(MinMaxTree::from_values(values))),
            label,
        })
    }

    /// `n ↦ ‖T^n x − q‖` along the scenario's orbit.
    pub fn orbit_distance(scenario: Arc<Scenario>, q: Vec<f64>) -> Result<Self> {
        crate::picard::check_dims(&scenario, &q)?;
        let label = format!("dist(T^n x, {q:?}) [{}]", scenario.map.label());
        Ok(Self::orbit(scenario, q, Probe::Distance, label))
    }

    /// `n ↦ T^n x`, compared in the scenario's norm.
    pub fn picard_orbit(scenario: Arc<Scenario>) -> Self {
        let label = format!("T^n x [{}]", scenario.map.label());
        Self::orbit(scenario, Vec::new(), Probe::Points, label)
    }

    fn orbit(scenario: Arc<Scenario>, q: Vec<f64>, probe: Probe, label: String) -> Self {
        SequenceSource {
            kind: Kind::Orbit(Arc::new(OrbitSeq {
                scenario,
                q,
                probe,
                cache: Mutex::new(MinMaxTree::new()),
            })),
            label,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Whether comparisons are exact (no slack).
    pub fn is_exact(&self) -> bool {
        matches!(self.kind, Kind::Exact(_))
    }

    /// Whether the sequence consists of points rather than reals.
    pub fn is_point_valued(&self) -> bool {
        matches!(&self.kind, Kind::Orbit(o) if o.probe == Probe::Points)
    }

    pub fn scenario(&self) -> Option<&Arc<Scenario>> {
        match &self.kind {
            Kind::Orbit(o) => Some(&o.scenario),
            _ => None,
        }
    }

    /// `x_i` of a real-valued source.
    pub fn value(&self, i: u64) -> Result<Value> {
        match &self.kind {
            Kind::Exact(e) => Ok(Value::Exact(e.value(i))),
            Kind::Float(t) => {
                let j = (i as usize).min(t.len() - 1);
                Ok(Value::Float(t.query(j, j).expect("index in range").0))
            }
            Kind::Orbit(o) if o.probe == Probe::Distance => {
                match o.extrema(i, &Nat::from(i))? {
                    Extrema::Float(v, _) => Ok(Value::Float(v)),
                    Extrema::Exact(..) => unreachable!("orbit values are floats"),
                }
            }
            Kind::Orbit(_) => Err(domain("orbit points are not real numbers")),
        }
    }

    pub(crate) fn extrema(&self, a: u64, b: &Nat) -> Result<Extrema> {
        debug_assert!(Nat::from(a) <= *b);
        match &self.kind {
            Kind::Exact(e) => Ok(e.extrema(a, b)),
            Kind::Float(t) => {
                let last = (t.len() - 1) as u64;
                let hi = b.to_u64().map_or(last, |b| b.min(last));
                let (mn, mx) = t.query(a.min(hi) as usize, hi as usize).expect("index in range");
                Ok(Extrema::Float(mn, mx))
            }
            Kind::Orbit(o) if o.probe == Probe::Points && o.scenario.space.d > 1 => {
                Err(domain("window extrema of points in more than one dimension"))
            }
            Kind::Orbit(o) => o.extrema(a, b),
        }
    }

    /// `|x_i − x_j| ≤ ε` for all `i, j ∈ [a, b]` (plus `τ` for float sources).
    pub(crate) fn window_within(&self, a: u64, b: &Nat, eps: &PosRational) -> Result<bool> {
        if let Kind::Orbit(o) = &self.kind {
            if o.probe == Probe::Points && o.scenario.space.d > 1 {
                return o.point_diameter_within(a, b, eps.to_f64() + TAU);
            }
        }
        Ok(match self.extrema(a, b)? {
            Extrema::Exact(mn, mx) => mx - mn <= eps.to_signed(),
            Extrema::Float(mn, mx) => mx - mn <= eps.to_f64() + TAU,
        })
    }

    /// `x_i ≤ x_N + ε` for all `i ∈ [a, b]`.
    pub(crate) fn window_below(&self, a: u64, b: &Nat, x_n: &Value, eps: &PosRational) -> Result<bool> {
        Ok(match (self.extrema(a, b)?, x_n) {
            (Extrema::Exact(_, mx), Value::Exact(v)) => mx <= v + eps.to_signed(),
            (Extrema::Float(_, mx), v) => mx <= v.to_f64() + eps.to_f64() + TAU,
            (Extrema::Exact(_, mx), Value::Float(v)) => {
                mx.to_f64().unwrap_or(f64::INFINITY) <= v + eps.to_f64() + TAU
            }
        })
    }

    /// `x_N − ε ≤ x_i` for all `i ∈ [0, b]`.
    pub(crate) fn prefix_above(&self, b: &Nat, x_n: &Value, eps: &PosRational) -> Result<bool> {
        Ok(match (self.extrema(0, b)?, x_n) {
            (Extrema::Exact(mn, _), Value::Exact(v)) => v - eps.to_signed() <= mn,
            (Extrema::Float(mn, _), v) => v.to_f64() - eps.to_f64() - TAU <= mn,
            (Extrema::Exact(mn, _), Value::Float(v)) => {
                v - eps.to_f64() - TAU <= mn.to_f64().unwrap_or(f64::NEG_INFINITY)
            }
        })
    }

    /// For orbit sources: `‖T^n x − p‖ < r`, after which the orbit is fixed.
    pub(crate) fn in_fixed_ball(&self, n: u64) -> Result<bool> {
        match &self.kind {
            Kind::Orbit(o) => {
                let orbit = o.scenario.orbit(n)?;
                Ok(o.scenario.inside_fixed_ball(orbit.point(n)))
            }
            _ => Ok(false),
        }
    }

    /// `x_0` as a float, for sources whose start must lie below some `K`.
    pub(crate) fn first_exceeds(&self, k: &PosRational) -> Result<bool> {
        Ok(match self.value(0)? {
            Value::Exact(v) => v >= k.to_signed(),
            Value::Float(v) => v >= k.to_f64(),
        })
    }
}
