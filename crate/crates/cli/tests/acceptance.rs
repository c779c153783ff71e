//! Acceptance checks, one line per criterion.
//!
//! The survey criteria read the converted survey CSV named by `OTCIC_CK_DATA`
//! and are skipped when it is unset.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use otcic::ck;
use otcic::estimators::{
    cic_estimate, did_estimate, ot_cic_estimate, Group, PanelDataset, Period, Unit,
};
use otcic::ot::{
    brute_force_ot, check_monotone, round_to_map, solve_ot, solve_ot_1d, RoundingMode,
};
use otcic::synthetic::{apply_production, run_experiment, Production, SyntheticConfig};
use otcic::PointCloud;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> std::result::Result<(), String> {
    let t = start.elapsed();
    ensure(t <= limit, || format!("took {t:.1?}, limit {limit:?}"))
}

fn cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointCloud {
    PointCloud::uniform(
        (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect(),
    )
    .unwrap()
}

fn weighted_line(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
    let pts = (0..n)
        .map(|_| vec![rng.random_range(-10.0..10.0)])
        .collect();
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    PointCloud::new(pts, w.into_iter().map(|x| x / s).collect()).unwrap()
}

fn solver_correctness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let d = [1, 2, 3, 10][k % 4];
        let n = rng.random_range(1..=8);
        let (a, b) = (cloud(&mut rng, n, d), cloud(&mut rng, n, d));
        let lp = solve_ot(&a, &b).map_err(|e| e.to_string())?.cost();
        let bf = brute_force_ot(&a, &b).map_err(|e| e.to_string())?.cost();
        worst = worst.max((lp - bf).abs());
    }
    ensure(worst <= 1e-8, || format!("max |cost difference| {worst:e}"))?;
    within_time(start, Duration::from_secs(10))?;
    Ok(format!(
        "200 instances, max |cost difference| {worst:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn one_dimensional_consistency() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut maps = 0;
    for k in 0..100 {
        let (n, m) = (rng.random_range(1..=200), rng.random_range(1..=200));
        let (a, b) = if k % 3 == 2 {
            (weighted_line(&mut rng, n), weighted_line(&mut rng, m))
        } else {
            (cloud(&mut rng, n, 1), cloud(&mut rng, m, 1))
        };
        let lp = solve_ot(&a, &b).map_err(|e| e.to_string())?;
        let sorted = solve_ot_1d(&a, &b).map_err(|e| e.to_string())?;
        worst = worst.max((lp.cost() - sorted.cost()).abs());
        if k % 3 == 0 {
            let b = cloud(&mut rng, n, 1);
            let map = round_to_map(&solve_ot(&a, &b).unwrap(), RoundingMode::Mode).unwrap();
            let rep = check_monotone(&map.pairs()).unwrap();
            ensure(rep.is_monotone(), || {
                format!("instance {k}: rounded map not monotone")
            })?;
            maps += 1;
        }
    }
    ensure(worst <= 1e-8, || format!("max |cost difference| {worst:e}"))?;
    within_time(start, Duration::from_secs(10))?;
    Ok(format!(
        "100 instances, max |cost difference| {worst:.1e}, {maps} rounded maps monotone, {:.2?}",
        start.elapsed()
    ))
}

fn synthetic_full() -> Check {
    let start = Instant::now();
    let rep = run_experiment(&SyntheticConfig::default()).map_err(|e| e.to_string())?;
    let line = format!(
        "n=3000, 20 runs: mean MAD ot {:.4} (sd {:.4}), cic {:.4} (sd {:.4}), {:.1?}",
        rep.mad_ot,
        rep.sd_ot,
        rep.mad_cic,
        rep.sd_cic,
        start.elapsed()
    );
    ensure((0.004..=0.016).contains(&rep.mad_ot), || {
        format!("{line}: ot outside [0.004, 0.016]")
    })?;
    ensure((0.06..=0.12).contains(&rep.mad_cic), || {
        format!("{line}: cic outside [0.06, 0.12]")
    })?;
    if let Some(r) = rep.per_run.iter().find(|r| r.mad_ot >= r.mad_cic) {
        return Err(format!("{line}: run {} has ot >= cic", r.run));
    }
    within_time(start, Duration::from_secs(30 * 60))?;
    Ok(line)
}

fn synthetic_fallback() -> Check {
    let start = Instant::now();
    let cfg = SyntheticConfig {
        n: 500,
        runs: 10,
        ..Default::default()
    };
    let rep = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let min_ratio = rep
        .per_run
        .iter()
        .map(|r| r.mad_cic / r.mad_ot)
        .fold(f64::INFINITY, f64::min);
    ensure(min_ratio >= 4.0, || {
        format!("smallest cic/ot ratio {min_ratio:.2}")
    })?;
    within_time(start, Duration::from_secs(120))?;
    Ok(format!(
        "n=500, 10 runs: smallest cic/ot ratio {min_ratio:.2}, {:.1?}",
        start.elapsed()
    ))
}

fn co_monotonicity() -> Check {
    let alpha = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    let h = |u: &[f64], w| apply_production(u, w, alpha).unwrap();
    for _ in 0..1000 {
        let u: Vec<f64> = (0..2).map(|_| rng.random::<f64>()).collect();
        let v: Vec<f64> = (0..2).map(|_| rng.random::<f64>()).collect();
        let d0: Vec<f64> = h(&u, Production::H0)
            .iter()
            .zip(h(&v, Production::H0))
            .map(|(a, b)| a - b)
            .collect();
        let d1: Vec<f64> = h(&u, Production::H1)
            .iter()
            .zip(h(&v, Production::H1))
            .map(|(a, b)| a - b)
            .collect();
        let ip = d0[0] * d1[0] + d0[1] * d1[1];
        let norm2 = (u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2);
        worst = worst.max((ip - 0.75 * norm2).abs());
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    let mut detected = 0;
    for z in [0.25, -0.5, 0.9] {
        let (u, v) = (vec![0.3, 0.2], vec![0.3, 0.2 + z]);
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = [&u, &v]
            .iter()
            .map(|p| (vec![h(p, Production::H0)[0]], vec![h(p, Production::H1)[0]]))
            .collect();
        let rep = check_monotone(&pairs).unwrap();
        let ip = rep.min_inner_product.unwrap();
        ensure(
            !rep.is_monotone() && (ip + alpha * alpha * z * z).abs() < 1e-12,
            || format!("z = {z}: inner product {ip}"),
        )?;
        detected += 1;
    }
    Ok(format!(
        "1000 pairs, max |ip - 0.75|u-v|^2| {worst:.1e}; {detected}/3 marginal violations detected"
    ))
}

fn survey_path() -> Option<PathBuf> {
    std::env::var_os("OTCIC_CK_DATA").map(PathBuf::from)
}

fn near(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn survey_table2(path: &Path) -> Check {
    let start = Instant::now();
    let recs = ck::load_ck(path).map_err(|e| e.to_string())?;
    let rep = ck::run_table2(&recs).map_err(|e| e.to_string())?;
    let row = |n: &str| rep.row(n).unwrap();
    let (did, cic, ot) = (row("did"), row("cic"), row("ot"));
    let line = format!(
        "cells {}/{}; did ({:.2}, {:.2}) cic ({:.2}, {:.2}) ot ({:.2}, {:.2}) [barycentric ({:.2}, {:.2})], {:.1?}",
        rep.n_control,
        rep.n_treated,
        did.ate_ft,
        did.ate_pt,
        cic.ate_ft,
        cic.ate_pt,
        ot.ate_ft,
        ot.ate_pt,
        row("ot_barycentric").ate_ft,
        row("ot_barycentric").ate_pt,
        start.elapsed()
    );
    ensure((rep.n_control, rep.n_treated) == (76, 315), || {
        format!("{line}: cell counts")
    })?;
    ensure(
        near(did.ate_ft, 3.45, 0.02) && near(did.ate_pt, -1.00, 0.02),
        || format!("{line}: did"),
    )?;
    ensure(
        near(cic.ate_ft, 2.61, 0.20) && near(cic.ate_pt, -1.52, 0.20),
        || format!("{line}: cic"),
    )?;
    ensure(
        near(ot.ate_ft, 3.07, 0.50) && near(ot.ate_pt, -1.79, 0.50),
        || format!("{line}: ot"),
    )?;
    within_time(start, Duration::from_secs(60))?;
    Ok(line)
}

fn survey_sweep(path: &Path) -> Check {
    let start = Instant::now();
    let recs = ck::load_ck(path).map_err(|e| e.to_string())?;
    let rep = ck::run_covariate_sweep(&recs, ck::SweepSample::PerSubset, RoundingMode::Mode)
        .map_err(|e| e.to_string())?;
    let s = rep.summary;
    let line = format!(
        "complete cells {}/{}; {} subsets, TE FT mean {:.2} [{:.2}, {:.2}], TE PT mean {:.2} [{:.2}, {:.2}], {:.1?}",
        rep.complete_sample.n_control,
        rep.complete_sample.n_treated,
        rep.subsets.len(),
        s.ft.mean,
        s.ft.min,
        s.ft.max,
        s.pt.mean,
        s.pt.min,
        s.pt.max,
        start.elapsed()
    );
    ensure(
        (rep.complete_sample.n_control, rep.complete_sample.n_treated) == (52, 200),
        || format!("{line}: cell counts"),
    )?;
    ensure(rep.signs_consistent, || {
        format!("{line}: a subset changed sign")
    })?;
    ensure((1.0..=2.1).contains(&s.ft.mean), || {
        format!("{line}: FT mean")
    })?;
    ensure((-2.3..=-1.0).contains(&s.pt.mean), || {
        format!("{line}: PT mean")
    })?;
    within_time(start, Duration::from_secs(600))?;
    Ok(line)
}

fn survey_unit_drop(path: &Path) -> Check {
    let start = Instant::now();
    let recs = ck::load_ck(path).map_err(|e| e.to_string())?;
    let rep =
        ck::run_unit_drop(&recs, 0.2, 500, 0, RoundingMode::Mode).map_err(|e| e.to_string())?;
    let line = format!(
        "500 reps: TE FT mean {:.2}, TE PT mean {:.2}; FT < 0 in {:.1}%, PT > 0 in {:.1}%, {:.1?}",
        rep.summary.ft.mean,
        rep.summary.pt.mean,
        100.0 * rep.ft_negative_share,
        100.0 * rep.pt_positive_share,
        start.elapsed()
    );
    ensure(
        rep.summary.ft.mean > 0.0 && rep.summary.pt.mean < 0.0,
        || format!("{line}: mean signs"),
    )?;
    ensure(rep.ft_negative_share < 0.05, || format!("{line}: FT flips"))?;
    ensure(rep.pt_positive_share < 0.10, || format!("{line}: PT flips"))?;
    within_time(start, Duration::from_secs(600))?;
    Ok(line)
}

fn workspace_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn run_cli(args: &[&str], out: &Path) -> std::result::Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_otcic"))
        .args(["--threads", "1", "--quiet"])
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || {
        format!("`otcic {}` exited with {status}", args.join(" "))
    })
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn write_panel(path: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut text = String::from("id,group,period,y1,y2\n");
    for g in ["control", "treated"] {
        for i in 0..60 {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            text += &format!(
                "{g}{i},{g},pre,{a},{b}\n{g}{i},{g},post,{},{}\n",
                a + 0.7,
                b * 1.5
            );
        }
    }
    std::fs::write(path, text).unwrap();
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let panel = tmp.path().join("panel.csv");
    write_panel(&panel);
    let panel = panel.to_str().unwrap().to_string();
    let survey = workspace_file("crates/core/tests/data/survey_fixture.csv");
    let survey = survey.to_str().unwrap().to_string();
    let invocations: Vec<Vec<&str>> = vec![
        vec![
            "simulate", "--n", "100", "--runs", "2", "--seed", "7", "--mesh", "2000",
        ],
        vec!["estimate", "--data", &panel, "--method", "did"],
        vec!["estimate", "--data", &panel, "--method", "cic", "--couple"],
        vec![
            "estimate",
            "--data",
            &panel,
            "--method",
            "ot",
            "--dump-plan",
            "--couple",
        ],
        vec![
            "estimate",
            "--data",
            &panel,
            "--method",
            "ot",
            "--rounding",
            "barycentric",
        ],
        vec!["ck", "--data", &survey, "--analysis", "table2"],
        vec!["ck", "--data", &survey, "--analysis", "sweep"],
        vec![
            "ck",
            "--data",
            &survey,
            "--analysis",
            "unit-drop",
            "--reps",
            "40",
            "--seed",
            "3",
        ],
    ];
    let mut files = 0;
    for (k, args) in invocations.iter().enumerate() {
        let a = tmp.path().join(format!("{k}a"));
        let b = tmp.path().join(format!("{k}b"));
        run_cli(args, &a)?;
        run_cli(args, &b)?;
        let (ca, cb) = (dir_contents(&a), dir_contents(&b));
        ensure(ca.len() == cb.len(), || {
            format!("`{}`: file sets differ", args.join(" "))
        })?;
        for ((na, da), (_, db)) in ca.iter().zip(&cb) {
            ensure(da == db, || {
                format!("`{}`: {na} differs between runs", args.join(" "))
            })?;
        }
        files += ca.len();
    }
    Ok(format!(
        "{} invocations run twice, {files} output files byte-identical",
        invocations.len()
    ))
}

fn panel_from(cells: [Vec<Vec<f64>>; 4], paired: bool) -> PanelDataset {
    let order = [
        (Group::Control, Period::Pre),
        (Group::Control, Period::Post),
        (Group::Treated, Period::Pre),
        (Group::Treated, Period::Post),
    ];
    let mut units = Vec::new();
    for (c, pts) in cells.into_iter().enumerate() {
        let (g, p) = order[c];
        for (i, y) in pts.into_iter().enumerate() {
            let mut u = Unit::new(format!("{g}{i}"), g, p, y);
            if paired && g == Group::Treated {
                u = u.with_pair(format!("t{i}"));
            }
            units.push(u);
        }
    }
    PanelDataset::new(units).unwrap()
}

fn points(rng: &mut ChaCha8Rng, n: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

fn estimator_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut checks = 0;
    for k in 0..20 {
        let d = 1 + k % 3;
        let n = rng.random_range(10..60);
        let data = panel_from(
            [
                points(&mut rng, 50, d, 0.0, 1.0),
                points(&mut rng, 45, d, 0.5, 2.0),
                points(&mut rng, n, d, 0.0, 1.2),
                points(&mut rng, n, d, 1.0, 3.0),
            ],
            true,
        );
        // DiD shift invariance
        let base = did_estimate(&data).unwrap().ate;
        let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-50.0..50.0)).collect();
        let shifted = data
            .map_outcomes(|y| y.iter().zip(&shift).map(|(a, b)| a + b).collect())
            .unwrap();
        let moved = did_estimate(&shifted).unwrap().ate;
        ensure(
            base.iter().zip(&moved).all(|(a, b)| (a - b).abs() < 1e-9),
            || format!("instance {k}: DiD not shift invariant"),
        )?;

        // support property and unit-effect mean under both roundings and CiC
        let post = data.cloud(Group::Control, Period::Post).unwrap();
        let (cf, ot) = ot_cic_estimate(&data, RoundingMode::Mode).unwrap();
        ensure(
            cf.per_unit
                .iter()
                .all(|u| post.points().any(|p| p == u.counterfactual.as_slice())),
            || format!("instance {k}: counterfactual outside control-post support"),
        )?;
        for rep in [
            ot,
            ot_cic_estimate(&data, RoundingMode::Barycentric).unwrap().1,
            cic_estimate(&data).unwrap().1,
        ] {
            let effects = rep.unit_effects.as_ref().unwrap();
            for c in 0..d {
                let mean = effects.iter().map(|e| e.effect[c]).sum::<f64>() / effects.len() as f64;
                ensure((mean - rep.ate[c]).abs() < 1e-8, || {
                    format!(
                        "instance {k}: {} unit-effect mean {mean} vs ate {}",
                        rep.estimator, rep.ate[c]
                    )
                })?;
            }
        }

        // CiC identity under zero drift when treated outcomes lie on the control support
        let pre: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..d).map(|_| rng.random_range(0..30) as f64).collect())
            .collect();
        let mut post = pre.clone();
        post.shuffle(&mut rng);
        let treated: Vec<Vec<f64>> = (0..15)
            .map(|_| pre[rng.random_range(0..40)].clone())
            .collect();
        let data = panel_from([pre, post, treated.clone(), treated.clone()], false);
        let (cf, _) = cic_estimate(&data).unwrap();
        ensure(
            cf.per_unit
                .iter()
                .zip(&treated)
                .all(|(u, y)| &u.counterfactual == y),
            || format!("instance {k}: CiC moved a unit under zero drift"),
        )?;
        checks += 1;
    }
    Ok(format!(
        "{checks} generated fixtures: DiD shift, CiC zero drift, OT support, unit-effect mean"
    ))
}

fn main() {
    let started = Instant::now();
    let survey = survey_path();
    let gated = |f: fn(&Path) -> Check| -> Outcome {
        match &survey {
            Some(p) if p.exists() => into_outcome(f(p)),
            Some(p) => Outcome::Skip(format!("OTCIC_CK_DATA={} does not exist", p.display())),
            None => Outcome::Skip("set OTCIC_CK_DATA to the converted survey CSV to run".into()),
        }
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("1 solver correctness", into_outcome(solver_correctness())),
        (
            "2 one-dimensional consistency",
            into_outcome(one_dimensional_consistency()),
        ),
        (
            "3 synthetic MAD (full scale)",
            into_outcome(synthetic_full()),
        ),
        (
            "3 synthetic MAD (desk scale)",
            into_outcome(synthetic_fallback()),
        ),
        ("4 co-monotonicity", into_outcome(co_monotonicity())),
        ("5 survey bivariate table", gated(survey_table2)),
        ("6 survey covariate sweep", gated(survey_sweep)),
        ("7 survey unit drop", gated(survey_unit_drop)),
        ("8 determinism", into_outcome(determinism())),
        (
            "9 estimator identities",
            into_outcome(estimator_identities()),
        ),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Outcome::Pass(m) => println!("PASS  {name}: {m}"),
            Outcome::Skip(m) => println!("SKIP  {name}: {m}"),
            Outcome::Fail(m) => {
                failed += 1;
                println!("FAIL  {name}: {m}")
            }
        }
    }
    println!(
        "acceptance: {failed} failed, {:.1?} total",
        started.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn into_outcome(c: Check) -> Outcome {
    match c {
        Ok(m) => Outcome::Pass(m),
        Err(m) => Outcome::Fail(m),
    }
}
