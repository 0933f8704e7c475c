//! Acceptance criteria. Each prints one `PASS`/`FAIL` line with its wall
//! time and budget; any failure makes the process exit nonzero.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use metastab::convexity::{
    eta, lp_modulus, psi_transform, verify_modulus, verify_two_ball, TwoBallSampler,
    UnitBallPairSampler, MODULUS_SLACK,
};
use metastab::oracle::{
    check_asym_dec, check_infimum_lemma, check_metastability_bound, min_witness,
    random_head_harmonic, random_nonincreasing, random_nonnegative, SequenceSource, Tail, Verdict,
    WitnessOutcome,
};
use metastab::picard::{
    gamma_from_mu_rate, lp_asymptotic_regularity_rate, nonexpansive_omega, omega_decreasing_mu,
    LpSpace, MuProfile, MuProfileDesc, MuRateDesc, TAU,
};
use metastab::rates::{gamma_star, metastability_from_gamma, monotone_metastability_rate};
use metastab::{Counterfunction, MetaDecRate, Nat, PosRational};
use metastab_cli::{run, ExperimentConfig, Overrides, RunReport};
use num_traits::One;
use rayon::prelude::*;

type Check = Result<(), String>;

fn criterion(id: u32, name: &str, budget: Duration, body: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let mut outcome = body();
    let elapsed = start.elapsed();
    if outcome.is_ok() && elapsed > budget {
        outcome = Err(format!("took {elapsed:.2?}, budget {budget:?}"));
    }
    let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} {status} {name} ({elapsed:.2?} / {budget:?})");
    if let Err(e) = &outcome {
        println!("    {}", e.replace('\n', "\n    "));
    }
    outcome.is_ok()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(a: u64, b: u64) -> PosRational {
    PosRational::ratio(a, b)
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn eps_grid() -> [PosRational; 3] {
    [q(1, 1), q(1, 2), q(1, 4)]
}

/// `g ∈ {0, 1, n, 2n + 3}`
fn g_grid() -> [Counterfunction; 4] {
    [
        Counterfunction::constant(0),
        Counterfunction::constant(1),
        Counterfunction::identity(),
        Counterfunction::affine(2, 3),
    ]
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run_bundled(name: &str) -> Result<RunReport, String> {
    let cfg = ExperimentConfig::load(&config_path(name)).map_err(|e| e.to_string())?;
    run(&cfg, Overrides::default()).map_err(|e| e.to_string())
}

fn c01_golden_values() -> bool {
    criterion(1, "exact rate golden values", secs(1), || {
        let l2 = lp_modulus(2).map_err(|e| e.to_string())?;
        let lp = |k, r, e| lp_asymptotic_regularity_rate(2, &k, &r, &e).unwrap();
        ensure(lp(q(1, 1), q(1, 1), q(1, 1)) == Nat::from(256u32), || "lp-ar(2,1,1,1)".into())?;
        ensure(lp(q(1, 1), q(1, 1), q(1, 2)) == Nat::from(1024u32), || "lp-ar(2,1,1,1/2)".into())?;
        ensure(lp(q(1, 1), q(1, 2), q(1, 4)) == Nat::from(16384u32), || "lp-ar(2,1,1/2,1/4)".into())?;
        let e = eta(&l2, &q(2, 1), &q(1, 1), &q(1, 1)).unwrap();
        ensure(e == q(1, 4096), || format!("η = {e}"))?;
        let w = nonexpansive_omega(&l2, &q(2, 1), &q(1, 1))
            .unwrap()
            .eval(&q(1, 1), &Counterfunction::constant(1))
            .unwrap();
        ensure(w == Nat::one() << 8191u32, || "Ω ≠ 2^8191".into())
    })
}

fn c02_monotone_sequences() -> bool {
    criterion(2, "monotone metastability on 200 nonincreasing sequences", secs(5), || {
        let phi = monotone_metastability_rate(&q(1, 1)).unwrap();
        let one = Counterfunction::constant(1);
        let bound = phi.eval(&q(1, 2), &one).unwrap();
        ensure(bound == Nat::from(8u32), || format!("Φ(1/2, 1) = {bound}"))?;
        let gs = g_grid();
        let failures: Vec<String> = (0..200u64)
            .into_par_iter()
            .flat_map_iter(|seed| {
                let values = random_nonincreasing(48, &q(1, 1), seed);
                let s = SequenceSource::table(values).unwrap();
                let mut bad = Vec::new();
                match min_witness(&s, &q(1, 2), &one, 1000).map(|r| r.outcome) {
                    Ok(WitnessOutcome::Found(n)) if n <= 8 => {}
                    other => bad.push(format!("seed {seed}: min witness {other:?}")),
                }
                for e in eps_grid() {
                    for g in &gs {
                        let out = check_metastability_bound(&s, &phi, &e, g, 1_000_000);
                        if out.verdict != Verdict::Pass {
                            bad.push(format!("seed {seed} ε={e} g={}: {out:?}", g.label()));
                        }
                    }
                }
                bad
            })
            .collect();
        ensure(failures.is_empty(), || failures.join("\n"))?;
        let rep = run_bundled("monotone.json")?;
        let c = rep.counts();
        ensure(c.fail == 0 && c.inconclusive == 0 && c.pass > 0, || format!("monotone.json: {c:?}"))
    })
}

fn c03_asymptotically_decreasing() -> bool {
    criterion(3, "offset rates on head + harmonic sequences", secs(10), || {
        let gs = g_grid();
        let (k, r) = (q(1, 1), q(1, 1));
        let failures: Vec<String> = (0..60u64)
            .into_par_iter()
            .flat_map_iter(|seed| {
                let head_len = 1 + (seed % 12) as usize;
                let (head, base, scale) = random_head_harmonic(head_len, &q(1, 1), seed);
                let s = SequenceSource::exact(head, Tail::Harmonic { base, scale }).unwrap();
                let gamma = MetaDecRate::offset(Nat::from(head_len));
                let phi = metastability_from_gamma(&gamma, &k, &r).unwrap();
                let mut bad = Vec::new();
                for e in eps_grid() {
                    for g in &gs {
                        for n in 0u32..24 {
                            let out = check_asym_dec(&s, &gamma, &k, &r, &e, g, &Nat::from(n), 1_000_000);
                            if out.verdict != Verdict::Pass {
                                bad.push(format!("seed {seed} Γ ε={e} g={} N={n}: {out:?}", g.label()));
                            }
                        }
                        let out = check_metastability_bound(&s, &phi, &e, g, 1_000_000);
                        if out.verdict != Verdict::Pass {
                            bad.push(format!("seed {seed} Φ ε={e} g={}: {out:?}", g.label()));
                        }
                    }
                }
                bad
            })
            .collect();
        ensure(failures.is_empty(), || failures.join("\n"))?;
        let rep = run_bundled("from-gamma.json")?;
        let c = rep.counts();
        ensure(c.fail == 0 && c.inconclusive == 0, || format!("from-gamma.json: {c:?}"))
    })
}

fn c04_infimum_lemma() -> bool {
    criterion(4, "infimum lemma on 1000 nonnegative sequences", secs(5), || {
        let fs = [Counterfunction::affine(1, 1), Counterfunction::affine(2, 1)];
        let failures: Vec<String> = (0..1000u64)
            .into_par_iter()
            .flat_map_iter(|seed| {
                let s = SequenceSource::table(random_nonnegative(40, &q(1, 1), seed)).unwrap();
                let mut bad = Vec::new();
                for e in eps_grid() {
                    for f in &fs {
                        match check_infimum_lemma(&s, &q(1, 1), &e, f, 1_000_000) {
                            Ok(out) if out.verdict == Verdict::Pass => {}
                            other => bad.push(format!("seed {seed} ε={e} f={}: {other:?}", f.label())),
                        }
                    }
                }
                bad
            })
            .collect();
        ensure(failures.is_empty(), || failures.join("\n"))
    })
}

fn c05_modulus_verification() -> bool {
    criterion(5, "ℓ_p modulus of uniform convexity", secs(30), || {
        let cells: Vec<(u32, usize, PosRational)> = [2u32, 3, 4]
            .into_iter()
            .flat_map(|p| [1usize, 2, 5].into_iter().flat_map(move |d| [q(1, 4), q(1, 2), q(1, 1)].map(|e| (p, d, e))))
            .collect();
        let failures: Vec<String> = cells
            .par_iter()
            .enumerate()
            .filter_map(|(i, (p, d, e))| {
                let space = LpSpace::new(*d, *p).unwrap();
                let mut sampler = UnitBallPairSampler::new(space, 1000 + i as u64);
                let rep = verify_modulus(&mut sampler, &lp_modulus(*p).unwrap(), e, 10_000).unwrap();
                (rep.premise_hits < 10_000 || !rep.is_clean()).then(|| format!("p={p} d={d} ε={e}: {rep:?}"))
            })
            .collect();
        ensure(MODULUS_SLACK == 1e-12, || "slack".into())?;
        ensure(failures.is_empty(), || failures.join("\n"))
    })
}

fn c06_two_ball_property() -> bool {
    criterion(6, "two-ball property of Ψ", secs(30), || {
        let cells: Vec<(u32, PosRational, PosRational)> = [2u32, 3]
            .into_iter()
            .flat_map(|p| {
                [q(1, 8), q(1, 4), q(3, 8)]
                    .into_iter()
                    .flat_map(move |h| [q(1, 4), q(1, 2), q(1, 1)].map(|e| (p, h.clone(), e)))
            })
            .collect();
        let failures: Vec<String> = cells
            .par_iter()
            .enumerate()
            .filter_map(|(i, (p, h, e))| {
                let space = LpSpace::new(2, *p).unwrap();
                let psi = psi_transform(&lp_modulus(*p).unwrap());
                let shell = psi.eval(h, e).unwrap().to_f64();
                let mut sampler = TwoBallSampler::new(space, h.to_f64(), shell, 2000 + i as u64);
                let rep = verify_two_ball(&mut sampler, &psi, h, e, 10_000, TAU).unwrap();
                (rep.premise_hits < 10_000 || !rep.is_clean()).then(|| format!("p={p} h={h} ε={e}: {rep:?}"))
            })
            .collect();
        ensure(TAU == 1e-9, || "slack".into())?;
        ensure(failures.is_empty(), || failures.join("\n"))
    })
}

fn c07_slow_quadratic_omega() -> bool {
    criterion(7, "end-to-end Ω on the slow quadratic map", secs(30), || {
        let cfg = ExperimentConfig::load(&config_path("slow-quadratic-omega.json")).map_err(|e| e.to_string())?;
        ensure(cfg.caps.scan == 1_000_000, || "scan cap".into())?;
        ensure(cfg.epsilons == [q(1, 2), q(1, 4), q(1, 8)], || "ε grid".into())?;
        let rep = run(&cfg, Overrides::default()).map_err(|e| e.to_string())?;
        let rows = &rep.entries[0].rows;
        let c = rep.counts();
        ensure(rows.len() == 12 && c.pass == 12, || format!("{c:?}\n{rows:#?}"))?;
        let labels: Vec<&str> = rows[..4].iter().map(|r| r.g.as_str()).collect();
        ensure(labels == ["const:0", "const:1", "const:10", "affine:1,0"], || format!("{labels:?}"))?;
        ensure(
            rows.iter().all(|r| Nat::from(r.n_min.unwrap()) <= *r.bound.as_ref().unwrap()),
            || "witness above Ω".into(),
        )
    })
}

fn c08_asymptotic_regularity() -> bool {
    criterion(8, "step sizes past the L_p regularity rate", secs(10), || {
        let cfg = ExperimentConfig::load(&config_path("lp-regularity.json")).map_err(|e| e.to_string())?;
        ensure(cfg.epsilons == [q(1, 4), q(1, 8)], || "ε grid".into())?;
        let rep = run(&cfg, Overrides::default()).map_err(|e| e.to_string())?;
        let rows = &rep.entries[0].rows;
        let bounds: Vec<_> = rows.iter().map(|r| r.bound.clone()).collect();
        ensure(
            bounds == [Some(Nat::from(16384u32)), Some(Nat::from(65536u32))],
            || format!("{bounds:?}"),
        )?;
        ensure(rows.iter().all(|r| r.verdict == Verdict::Pass), || format!("{rows:#?}"))
    })
}

fn c09_mu_algebra() -> bool {
    criterion(9, "decreasing-μ algebra", secs(1), || {
        let profile = |rate| {
            MuProfile::from_desc(&MuProfileDesc {
                bound: PosRational::integer(2),
                rate: Some(rate),
                meta: None,
                table: Vec::new(),
                decreasing: true,
            })
            .unwrap()
        };
        let inverse = profile(MuRateDesc::CeilInverse { scale: PosRational::one() });
        let gamma = gamma_from_mu_rate(&inverse, &q(1, 1), &q(1, 1)).unwrap();
        let star = gamma_star(&gamma);
        for g in g_grid() {
            for n in 0u32..100 {
                let nn = Nat::from(n);
                let v = gamma.eval(&q(1, 1), &q(1, 1), &q(1, 2), &g, &nn).unwrap();
                ensure(v == Nat::from(n + 8), || format!("Γ(N={n}) = {v}"))?;
                let s = star.eval(&q(1, 1), &q(1, 1), &q(1, 2), &g, &nn).unwrap();
                ensure(s == v, || format!("Γ*(N={n}) = {s} ≠ {v}"))?;
            }
        }
        let l2 = lp_modulus(2).unwrap();
        let zero = profile(MuRateDesc::Const { value: Nat::from(0u32) });
        let golden = [(q(2, 1), q(1, 1), vec![q(1, 1), q(1, 2)]), (q(1, 1), q(1, 2), eps_grid().to_vec())];
        for (k, r, eps) in golden {
            let a = omega_decreasing_mu(&l2, &zero, &k, &r).unwrap();
            let b = nonexpansive_omega(&l2, &k, &r).unwrap();
            for e in eps {
                for g in g_grid() {
                    let (x, y) = (a.eval(&e, &g).unwrap(), b.eval(&e, &g).unwrap());
                    ensure(x == y, || format!("K={k} r={r} ε={e} g={}", g.label()))?;
                }
            }
        }
        Ok(())
    })
}

fn c10_negative_control() -> bool {
    criterion(10, "negative control fails with nonzero exit", secs(1), || {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out = Command::new(env!("CARGO_BIN_EXE_metastab"))
            .arg("run")
            .arg(config_path("negative-control.json"))
            .arg("--out")
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.code() == Some(1), || format!("exit status {:?}", out.status))?;
        let csv = std::fs::read_to_string(dir.path().join("sequence-0.csv")).map_err(|e| e.to_string())?;
        ensure(
            csv == "epsilon_num,epsilon_den,g_descriptor,n_min,bound,verdict,scanned\n1,2,const:1,none,0,fail,1\n",
            || csv.clone(),
        )
    })
}

fn main() {
    let criteria: [fn() -> bool; 10] = [
        c01_golden_values,
        c02_monotone_sequences,
        c03_asymptotically_decreasing,
        c04_infimum_lemma,
        c05_modulus_verification,
        c06_two_ball_property,
        c07_slow_quadratic_omega,
        c08_asymptotic_regularity,
        c09_mu_algebra,
        c10_negative_control,
    ];
    let failed = criteria.iter().filter(|c| !c()).count();
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
