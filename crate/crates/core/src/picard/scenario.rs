use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::map::{MapClass, MapDesc, SelfMap};
use super::profile::{MuProfile, MuProfileDesc};
use super::space::{LpSpace, TAU};
use crate::error::{domain, Error, Result};
use crate::num::{rational_to_f64, rational_vec_serde, PosRational, Rational};
use crate::rates::MetaDecRate;

/// Default number of Picard steps a scenario will materialize.
pub const DEFAULT_ORBIT_CAP: u64 = 1_000_000;

/// A ball `B_r[p]` of fixed points plus a start point `x` with `‖x − p‖ < K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedBallCertificate {
    #[serde(rename = "p", with = "rational_vec_serde")]
    pub center: Vec<Rational>,
    pub r: PosRational,
    #[serde(rename = "K")]
    pub k: PosRational,
    pub x0: Vec<f64>,
}

impl FixedBallCertificate {
    pub fn center_f64(&self) -> Vec<f64> {
        self.center.iter().map(rational_to_f64).collect()
    }

    /// Checks `‖x − p‖ < K` and spot-checks `‖Tq − q‖ ≤ τ` on a grid of
    /// `B_r[p]` (centre, `±r` and `±r/2` along every axis) plus `samples`
    /// random points of the ball.
    pub fn validate(&self, space: &LpSpace, map: &SelfMap, samples: u64, seed: u64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.center.len() != space.d || self.x0.len() != space.d {
            return bad(format!("certificate dimension differs from d = {}", space.d));
        }
        if self.r.is_zero() || self.k.is_zero() {
            return bad("r and K must be positive".into());
        }
        if self.x0.iter().any(|c| !c.is_finite()) {
            return bad("start point is not finite".into());
        }
        let p = self.center_f64();
        let dist = space.dist(&self.x0, &p);
        if dist >= self.k.to_f64() {
            return bad(format!("‖x0 − p‖ = {dist} is not below K = {}", self.k));
        }
        let r = self.r.to_f64();
        let mut probes = vec![p.clone()];
        for axis in 0..space.d {
            for s in [-1.0, -0.5, 0.5, 1.0] {
                let mut q = p.clone();
                q[axis] += s * r;
                probes.push(q);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let dir = space.random_unit(&mut rng);
            let rho = r * rng.random::<f64>().powf(1.0 / space.d as f64);
            probes.push(p.iter().zip(&dir).map(|(c, u)| c + rho * u).collect());
        }
        for q in &probes {
            let moved = space.dist(&map.apply(q), q);
            if moved > TAU {
                return bad(format!("point {q:?} of B_r[p] moves by {moved}"));
            }
        }
        Ok(())
    }
}

/// Serializable [`Scenario`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDesc {
    pub space: LpSpace,
    pub map: MapDesc,
    pub certificate: FixedBallCertificate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<MuProfileDesc>,
}

/// A finite Picard orbit `x, Tx, …` stored flat. Once `T` returns its
/// argument bit-for-bit the orbit is constant and stops growing.
#[derive(Clone, Debug)]
pub struct Orbit {
    d: usize,
    coords: Vec<f64>,
    settled: bool,
}

impl Orbit {
    fn new(x0: &[f64]) -> Self {
        Orbit {
            d: x0.len(),
            coords: x0.to_vec(),
            settled: false,
        }
    }

    /// Number of stored points.
    pub fn stored(&self) -> u64 {
        (self.coords.len() / self.d) as u64
    }

    /// Index from which every point equals the last stored one, if reached.
    pub fn settled_from(&self) -> Option<u64> {
        self.settled.then(|| self.stored() - 1)
    }

    /// `T^i x`; indices past a settled orbit return its final point.
    pub fn point(&self, i: u64) -> &[f64] {
        let last = self.stored() - 1;
        let i = if self.settled { i.min(last) } else { i };
        let i = usize::try_from(i).expect("orbit index fits in memory");
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn covers(&self, i: u64) -> bool {
        self.settled || i < self.stored()
    }
}

/// A space, a self-map, a fixed-ball certificate and optional data about the
/// map's asymptotic behaviour.
pub struct Scenario {
    pub space: LpSpace,
    pub map: SelfMap,
    pub certificate: FixedBallCertificate,
    pub mu: Option<MuProfile>,
    pub gamma: Option<MetaDecRate>,
    orbit_cap: u64,
    orbit: Mutex<Arc<Orbit>>,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("space", &self.space)
            .field("map", &self.map)
            .field("certificate", &self.certificate)
            .field("orbit_cap", &self.orbit_cap)
            .finish()
    }
}

impl Scenario {
    pub fn new(
        space: LpSpace,
        map: SelfMap,
        certificate: FixedBallCertificate,
        mu: Option<MuProfile>,
        gamma: Option<MetaDecRate>,
        orbit_cap: u64,
    ) -> Result<Self> {
        space.validate()?;
        match map.class() {
            MapClass::Nonexpansive => {}
            MapClass::AsymptoticallyNonexpansive if mu.is_some() => {}
            MapClass::AsymptoticallyNonexpansive => {
                return Err(Error::InvalidScenario(
                    "asymptotically nonexpansive map without a μ profile".into(),
                ))
            }
            MapClass::Generic if gamma.is_some() => {}
            MapClass::Generic => {
                return Err(Error::InvalidScenario("generic map without a supplied Γ".into()))
            }
        }
        if certificate.x0.len() != space.d {
            return Err(Error::InvalidScenario("start point dimension mismatch".into()));
        }
        let orbit = Mutex::new(Arc::new(Orbit::new(&certificate.x0)));
        Ok(Scenario {
            space,
            map,
            certificate,
            mu,
            gamma,
            orbit_cap,
            orbit,
        })
    }

    /// Builds the scenario and validates its certificate with `samples`
    /// random ball points drawn from `seed`.
    pub fn from_desc(desc: &ScenarioDesc, orbit_cap: u64, samples: u64, seed: u64) -> Result<Self> {
        let map = SelfMap::from_desc(&desc.map)?;
        let mu = desc.mu.as_ref().map(MuProfile::from_desc).transpose()?;
        let s = Scenario::new(desc.space, map, desc.certificate.clone(), mu, None, orbit_cap)?;
        s.certificate.validate(&s.space, &s.map, samples, seed)?;
        Ok(s)
    }

    pub fn orbit_cap(&self) -> u64 {
        self.orbit_cap
    }

    /// The orbit up to at least index `n` (or up to where it settles).
    pub fn orbit(&self, n: u64) -> Result<Arc<Orbit>> {
        let mut guard = self.orbit.lock().expect("orbit lock");
        if guard.covers(n) {
            return Ok(Arc::clone(&guard));
        }
        if n > self.orbit_cap {
            return Err(Error::OrbitCap {
                cap: self.orbit_cap,
                requested: n,
            });
        }
        let orbit = Arc::make_mut(&mut guard);
        let d = orbit.d;
        while !orbit.covers(n) {
            let len = orbit.coords.len();
            let last = &orbit.coords[len - d..];
            let next = self.map.apply(last);
            if next.len() != d || next.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite {
                    step: orbit.stored(),
                });
            }
            if next == last {
                orbit.settled = true;
            } else {
                orbit.coords.extend_from_slice(&next);
            }
        }
        Ok(Arc::clone(&guard))
    }

    /// `‖T^n x − p‖ < r`: from here on the orbit sits in `Fix(T)`.
    pub fn inside_fixed_ball(&self, point: &[f64]) -> bool {
        let p = self.certificate.center_f64();
        self.space.dist(point, &p) < self.certificate.r.to_f64() - TAU
    }
}

/// `[x, Tx, …, T^n x]`.
pub fn picard_orbit(s: &Scenario, n: u64) -> Result<Vec<Vec<f64>>> {
    if n > s.orbit_cap() {
        return Err(Error::OrbitCap {
            cap: s.orbit_cap(),
            requested: n,
        });
    }
    let orbit = s.orbit(n)?;
    Ok((0..=n).map(|i| orbit.point(i).to_vec()).collect())
}

/// The scenario on the real line used throughout the tests: slow quadratic
/// map, `p = 0`, `r = 1/2`, `K = 1`, `x₀ = 0.99`.
pub fn slow_quadratic_line(orbit_cap: u64) -> Result<Scenario> {
    let desc = ScenarioDesc {
        space: LpSpace::new(1, 2)?,
        map: MapDesc::SlowQuadratic,
        certificate: FixedBallCertificate {
            center: vec![Rational::from_integer(0.into())],
            r: PosRational::ratio(1, 2),
            k: PosRational::integer(1),
            x0: vec![0.99],
        },
        mu: None,
    };
    Scenario::from_desc(&desc, orbit_cap, 64, 0)
}

pub(crate) fn check_dims(s: &Scenario, q: &[f64]) -> Result<()> {
    if q.len() != s.space.d {
        return Err(domain(format!("point of dimension {} in ℓ_p^{}", q.len(), s.space.d)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_orbit_is_constant() {
        let mut desc = ScenarioDesc {
            space: LpSpace::new(2, 2).unwrap(),
            map: MapDesc::Identity,
            certificate: FixedBallCertificate {
                center: vec![Rational::from_integer(0.into()); 2],
                r: PosRational::ratio(1, 2),
                k: PosRational::integer(2),
                x0: vec![0.3, -1.2],
            },
            mu: None,
        };
        let s = Scenario::from_desc(&desc, 10, 16, 1).unwrap();
        let o = picard_orbit(&s, 10).unwrap();
        assert!(o.iter().all(|p| p == &vec![0.3, -1.2]));
        assert!(picard_orbit(&s, 11).is_err());
        desc.certificate.k = PosRational::integer(1);
        assert!(Scenario::from_desc(&desc, 10, 16, 1).is_err());
    }

    #[test]
    fn slow_orbit_decreases_towards_half() {
        let s = slow_quadratic_line(1000).unwrap();
        let o = picard_orbit(&s, 1000).unwrap();
        for w in o.windows(2) {
            assert!(w[1][0] < w[0][0]);
            assert!(w[1][0] > 0.5);
        }
        // e_{n+1} = e_n − e_n² keeps e_n between 1/(n+1/e_0) and ~1/n
        assert!((o[1000][0] - 0.5) < 1.0 / 1000.0);
    }

    #[test]
    fn projection_orbit_settles_after_one_step() {
        let desc = ScenarioDesc {
            space: LpSpace::new(1, 2).unwrap(),
            map: MapDesc::BoxProjection { half_width: 0.5 },
            certificate: FixedBallCertificate {
                center: vec![Rational::from_integer(0.into())],
                r: PosRational::ratio(1, 2),
                k: PosRational::integer(1),
                x0: vec![0.99],
            },
            mu: None,
        };
        let s = Scenario::from_desc(&desc, 5, 8, 2).unwrap();
        let orbit = s.orbit(5).unwrap();
        assert_eq!(orbit.settled_from(), Some(1));
        // settled orbits serve any index without growing
        assert_eq!(s.orbit(1 << 40).unwrap().point(1 << 40), &[0.5]);
        let o = picard_orbit(&s, 5).unwrap();
        assert_eq!(o[0], vec![0.99]);
        assert!(o[1..].iter().all(|p| p == &vec![0.5]));
    }

    #[test]
    fn certificate_rejects_non_fixed_ball() {
        let desc = ScenarioDesc {
            space: LpSpace::new(1, 2).unwrap(),
            map: MapDesc::SlowQuadratic,
            certificate: FixedBallCertificate {
                center: vec![Rational::from_integer(0.into())],
                r: PosRational::ratio(3, 4),
                k: PosRational::integer(1),
                x0: vec![0.99],
            },
            mu: None,
        };
        let err = Scenario::from_desc(&desc, 5, 8, 2).unwrap_err();
        assert!(matches!(err, Error::InvalidScenario(_)));
    }

    #[test]
    fn non_finite_orbit_is_reported() {
        let m = SelfMap::from_fn("blowup", MapClass::Nonexpansive, |x| vec![x[0] * 1e300]);
        let cert = FixedBallCertificate {
            center: vec![Rational::from_integer(0.into())],
            r: PosRational::ratio(1, 2),
            k: PosRational::integer(2),
            x0: vec![1.5],
        };
        let s = Scenario::new(LpSpace::new(1, 2).unwrap(), m, cert, None, None, 10).unwrap();
        assert!(matches!(s.orbit(5), Err(Error::NonFinite { step: 2 })));
    }

    #[test]
    fn class_consistency() {
        let m = SelfMap::from_fn("g", MapClass::Generic, |x| x.to_vec());
        let cert = FixedBallCertificate {
            center: vec![Rational::from_integer(0.into())],
            r: PosRational::ratio(1, 2),
            k: PosRational::integer(2),
            x0: vec![1.0],
        };
        let space = LpSpace::new(1, 2).unwrap();
        assert!(Scenario::new(space, m.clone(), cert.clone(), None, None, 10).is_err());
        let gamma = MetaDecRate::offset(0u32.into());
        assert!(Scenario::new(space, m, cert, None, Some(gamma), 10).is_ok());
    }

    #[test]
    fn scenario_json_shape() {
        let s = r#"{"space":{"d":1,"p":2},"map":{"kind":"slow_quadratic"},
            "certificate":{"p":["0"],"r":"1/2","K":"1","x0":[0.99]}}"#;
        let d: ScenarioDesc = serde_json::from_str(s).unwrap();
        assert_eq!(d.certificate.r, PosRational::ratio(1, 2));
        let back: ScenarioDesc =
            serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
    }
}
