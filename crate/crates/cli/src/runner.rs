use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use metastab::convexity::{ConvexityModulus, ModulusDesc};
use metastab::oracle::{
    step_size_report, tightness_report, BuildOptions, SequenceSource, TightnessRow, Verdict,
};
use metastab::picard::{
    lp_asymptotic_regularity_rate, nonexpansive_omega, omega_decreasing_mu, omega_rate, MuProfile,
    MuProfileDesc, Scenario, ScenarioDesc, TAU,
};
use metastab::rates::{metastability_from_gamma, monotone_metastability_rate};
use metastab::{Counterfunction, MetaDecRate, MetastabilityRate, PosRational};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Caps, ConfigError, ExperimentConfig, RateSpec};

/// Exact CSV header of every report file.
pub const CSV_HEADER: [&str; 7] = [
    "epsilon_num",
    "epsilon_den",
    "g_descriptor",
    "n_min",
    "bound",
    "verdict",
    "scanned",
];

/// Cap overrides from the command line.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub orbit_cap: Option<u64>,
    pub scan_cap: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub name: String,
    pub source: String,
    pub rate: String,
    pub rows: Vec<TightnessRow>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub pass: u64,
    pub fail: u64,
    pub inconclusive: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub caps: Caps,
    pub entries: Vec<EntryReport>,
}

impl RunReport {
    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for row in self.entries.iter().flat_map(|e| &e.rows) {
            match row.verdict {
                Verdict::Pass => c.pass += 1,
                Verdict::Fail => c.fail += 1,
                Verdict::Inconclusive => c.inconclusive += 1,
            }
        }
        c
    }

    /// 0 when no cell failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.counts().fail > 0 {
            1
        } else {
            0
        }
    }
}

enum Bound {
    Meta(MetastabilityRate),
    Regularity { p: u32, k: PosRational, r: PosRational, window: u64 },
}

fn modulus(desc: &Option<ModulusDesc>, scenario: Option<&ScenarioDesc>) -> anyhow::Result<ConvexityModulus> {
    let desc = match (desc, scenario) {
        (Some(d), _) => d.clone(),
        (None, Some(s)) => ModulusDesc::Lp { p: s.space.p },
        (None, None) => bail!("a modulus is required for sequence sources"),
    };
    Ok(ConvexityModulus::from_desc(&desc)?)
}

fn ball(
    k: &Option<PosRational>,
    r: &Option<PosRational>,
    scenario: Option<&ScenarioDesc>,
) -> anyhow::Result<(PosRational, PosRational)> {
    let k = k
        .clone()
        .or_else(|| scenario.map(|s| s.certificate.k.clone()))
        .ok_or_else(|| anyhow!("K is required for sequence sources"))?;
    let r = r
        .clone()
        .or_else(|| scenario.map(|s| s.certificate.r.clone()))
        .ok_or_else(|| anyhow!("r is required for sequence sources"))?;
    Ok((k, r))
}

fn bound_for(spec: &RateSpec, scenario: Option<&ScenarioDesc>) -> anyhow::Result<Bound> {
    Ok(Bound::Meta(match spec {
        RateSpec::Monotone { k } => monotone_metastability_rate(k)?,
        RateSpec::FromGamma { k, gamma_offset } => {
            metastability_from_gamma(&MetaDecRate::offset(gamma_offset.clone()), k, &PosRational::zero())?
        }
        RateSpec::Omega { k, r, modulus: m, gamma_offset } => {
            let (k, r) = ball(k, r, scenario)?;
            omega_rate(&modulus(m, scenario)?, &MetaDecRate::offset(gamma_offset.clone()), &k, &r)?
        }
        RateSpec::NonexpansiveOmega { k, r, modulus: m } => {
            let (k, r) = ball(k, r, scenario)?;
            nonexpansive_omega(&modulus(m, scenario)?, &k, &r)?
        }
        RateSpec::OmegaDecreasingMu { k, r, modulus: m, mu } => {
            let (k, r) = ball(k, r, scenario)?;
            let desc: &MuProfileDesc = mu
                .as_ref()
                .or_else(|| scenario.and_then(|s| s.mu.as_ref()))
                .ok_or_else(|| anyhow!("omega-decreasing-mu needs a μ profile"))?;
            omega_decreasing_mu(&modulus(m, scenario)?, &MuProfile::from_desc(desc)?, &k, &r)?
        }
        RateSpec::LpAsymptoticRegularity { p, k, r, window } => {
            let (k, r) = ball(k, r, scenario)?;
            let p = p
                .or_else(|| scenario.map(|s| s.space.p))
                .ok_or_else(|| anyhow!("p is required"))?;
            return Ok(Bound::Regularity { p, k, r, window: *window });
        }
        RateSpec::Constant { value } => MetastabilityRate::constant(value.clone()),
    }))
}

fn regularity_rows(
    scenario: &Arc<Scenario>,
    (p, k, r, window): (u32, &PosRational, &PosRational, u64),
    eps_grid: &[PosRational],
    caps: &Caps,
) -> Vec<TightnessRow> {
    eps_grid
        .par_iter()
        .map(|eps| {
            let mut row = TightnessRow {
                epsilon: eps.clone(),
                g: "-".into(),
                n_min: None,
                bound: None,
                verdict: Verdict::Inconclusive,
                scanned: 0,
                ratio: "-".into(),
                note: None,
            };
            let f = match lp_asymptotic_regularity_rate(p, k, r, eps) {
                Ok(f) => f,
                Err(e) => {
                    row.note = Some(e.to_string());
                    return row;
                }
            };
            row.bound = Some(f.clone());
            let start = match f.to_u64().filter(|s| s.saturating_add(window).saturating_add(1) <= caps.orbit) {
                Some(s) => s,
                None => {
                    row.note = Some("window beyond the orbit cap".into());
                    return row;
                }
            };
            let report = match step_size_report(scenario, start, window, eps) {
                Ok(rep) => rep,
                Err(e) => {
                    row.note = Some(e.to_string());
                    return row;
                }
            };
            // least index with a step of at most ε, for comparison with f(ε)
            if let Ok(orbit) = scenario.orbit(start.min(caps.scan) + 1) {
                let limit = start.min(caps.scan);
                let first = (0..=limit).find(|&i| {
                    scenario.space.dist(orbit.point(i + 1), orbit.point(i)) <= eps.to_f64() + TAU
                });
                row.scanned = first.map_or(limit + 1, |i| i + 1);
                row.n_min = first;
            }
            row.verdict = if report.is_clean() { Verdict::Pass } else { Verdict::Fail };
            if let Some(n) = row.n_min {
                row.ratio = format!("{:.3}", (start as f64 + 1.0) / (n as f64 + 1.0));
            }
            if !report.is_clean() {
                row.note = Some(format!(
                    "{} steps above ε, {} increases, max step {}",
                    report.violations, report.increases, report.max_step
                ));
            }
            row
        })
        .collect()
}

/// Runs every scenario and sequence of `cfg` against its rate family.
pub fn run(cfg: &ExperimentConfig, ov: Overrides) -> anyhow::Result<RunReport> {
    let caps = Caps {
        orbit: ov.orbit_cap.unwrap_or(cfg.caps.orbit),
        scan: ov.scan_cap.unwrap_or(cfg.caps.scan),
    };
    let opts = BuildOptions {
        orbit_cap: caps.orbit,
        certificate_samples: cfg.certificate_samples,
        seed: cfg.seed,
    };
    let gs: Vec<Counterfunction> = cfg.g_presets().iter().map(Counterfunction::from_desc).collect();
    let mut entries = Vec::new();

    for (i, desc) in cfg.scenarios.iter().enumerate() {
        let scenario = Arc::new(
            Scenario::from_desc(desc, caps.orbit, cfg.certificate_samples, cfg.seed)
                .map_err(|e| ConfigError::Invalid(format!("scenario {i}: {e}")))?,
        );
        let source = SequenceSource::picard_orbit(scenario.clone());
        let bound = bound_for(&cfg.rate, Some(desc)).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let (rate, rows) = match &bound {
            Bound::Meta(phi) => (phi.label().to_string(), tightness_report(&source, phi, &cfg.epsilons, &gs, caps.scan)),
            Bound::Regularity { p, k, r, window } => (
                format!("lp_asymptotic_regularity[p={p}, K={k}, r={r}]"),
                regularity_rows(&scenario, (*p, k, r, *window), &cfg.epsilons, &caps),
            ),
        };
        entries.push(EntryReport {
            name: format!("scenario-{i}"),
            source: source.label().to_string(),
            rate,
            rows,
        });
    }

    for (i, desc) in cfg.sequences.iter().enumerate() {
        let source = desc
            .build(&opts)
            .map_err(|e| ConfigError::Invalid(format!("sequence {i}: {e}")))?;
        let phi = match bound_for(&cfg.rate, None).map_err(|e| ConfigError::Invalid(e.to_string()))? {
            Bound::Meta(phi) => phi,
            Bound::Regularity { .. } => unreachable!("rejected by validation"),
        };
        entries.push(EntryReport {
            name: format!("sequence-{i}"),
            source: source.label().to_string(),
            rate: phi.label().to_string(),
            rows: tightness_report(&source, &phi, &cfg.epsilons, &gs, caps.scan),
        });
    }

    Ok(RunReport {
        name: cfg.name.clone(),
        caps,
        entries,
    })
}

fn write_csv(path: &Path, rows: &[TightnessRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record([
            row.epsilon.numer().to_string(),
            row.epsilon.denom().to_string(),
            row.g.clone(),
            row.n_min_field(),
            row.bound_field(),
            row.verdict.to_string(),
            row.scanned.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<entry>.csv` and `<entry>.json` per entry plus `summary.json`.
pub fn write_reports(report: &RunReport, dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for e in &report.entries {
        write_csv(&dir.join(format!("{}.csv", e.name)), &e.rows)?;
        let json = serde_json::to_string_pretty(e)?;
        std::fs::write(dir.join(format!("{}.json", e.name)), json + "\n")?;
    }
    let summary = serde_json::json!({
        "name": report.name,
        "caps": report.caps,
        "counts": report.counts(),
        "entries": report.entries.iter().map(|e| serde_json::json!({
            "name": e.name,
            "source": e.source,
            "rate": e.rate,
            "rows": e.rows.len(),
        })).collect::<Vec<_>>(),
    });
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use metastab::Nat;

    fn cfg(rate: &str, body: &str) -> ExperimentConfig {
        let text = format!(r#"{{"name":"t","rate":{rate},"epsilons":["1/2","1/4"],"g":["const:1","id"],{body}}}"#);
        let c = ExperimentConfig::from_json(&text).unwrap();
        c.validate().unwrap();
        c
    }

    #[test]
    fn negative_control_fails() {
        let c = cfg(
            r#"{"family":"constant","value":"0"}"#,
            r#""sequences":[{"kind":"table","values":["1","0"]}]"#,
        );
        let rep = run(&c, Overrides::default()).unwrap();
        assert!(rep.counts().fail > 0);
        assert_eq!(rep.exit_code(), 1);
    }

    #[test]
    fn empty_config_is_empty_report() {
        let text = r#"{"name":"e","rate":{"family":"monotone","K":"1"},"epsilons":["1/2"]}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        c.validate().unwrap();
        let rep = run(&c, Overrides::default()).unwrap();
        assert!(rep.entries.is_empty());
        assert_eq!(rep.exit_code(), 0);
    }

    #[test]
    fn regularity_rows_pass_on_slow_map() {
        let c = cfg(
            r#"{"family":"lp-asymptotic-regularity","window":100}"#,
            r#""scenarios":[{"space":{"d":1,"p":2},"map":{"kind":"slow_quadratic"},
                "certificate":{"p":["0"],"r":"1/2","K":"1","x0":[0.99]}}]"#,
        );
        let rep = run(&c, Overrides::default()).unwrap();
        let rows = &rep.entries[0].rows;
        assert_eq!(rows[0].bound, Some(Nat::from(4096u32)));
        assert!(rows.iter().all(|r| r.verdict == Verdict::Pass), "{rows:?}");
    }

    #[test]
    fn sequence_families_need_parameters() {
        let c = cfg(
            r#"{"family":"nonexpansive-omega"}"#,
            r#""sequences":[{"kind":"table","values":["1","0"]}]"#,
        );
        assert!(run(&c, Overrides::default()).is_err());
    }
}
