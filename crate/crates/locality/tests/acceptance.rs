//! Acceptance checks: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Failing criteria are reported
//! but only turn into a non-zero exit when `LOCALITY_ACCEPTANCE_STRICT=1`.
//! UCI datasets are read from `LOCALITY_UCI_DIR` (default `tests/data/uci`)
//! as `<name>.csv` with the target in the last column.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use locality::benchmark::{self, reference_row, reference_tolerance, BenchmarkConfig, BenchmarkTable, DatasetSpec};
use locality::parallel::{fidelity_reports, train_forest};
use locality_core::blackbox::Oracle;
use locality_core::data::{distance, generate_half_moons, train_test_split};
use locality_core::fidelity::{auc, FidelityConfig};
use locality_core::rng::stream;
use locality_core::sampling::{find_boundary_point, sample_ball_uniform, GrowingSpheresConfig};
use locality_core::surrogate::{explain_ls, fit_weighted_ridge, ExplainerConfig, Method, Reference};
use locality_core::{RandomForestParams, Scorer};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Result<(), String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const UCI: [&str; 4] = ["cancer", "credit", "news", "tennis"];

fn main() {
    let work = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("black-box parity", Box::new(black_box_parity)),
        ("half-moons table row", Box::new(|| half_moons_row(work.path()))),
        ("uci table rows", Box::new(uci_rows)),
        ("radius sweep", Box::new(radius_sweep)),
        ("oracle suite", Box::new(oracle_suite)),
        ("reproducibility", Box::new(|| reproducibility(work.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let started = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {name}: {detail} [{:.1}s]", started.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 && std::env::var("LOCALITY_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn black_box_parity() -> Outcome {
    let started = Instant::now();
    let data = generate_half_moons(1000, 0.3, 0).map_err(|e| e.to_string())?;
    let (train, test) = train_test_split(&data, 0.2, 0).map_err(|e| e.to_string())?;
    let forest = train_forest(&train, &RandomForestParams { n_trees: 200, seed: 0, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let scores: Vec<f64> = test.rows().map(|r| forest.score(r)).collect();
    let a = auc(&scores, test.labels()).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    check(a >= 0.90 && elapsed < Duration::from_secs(10), format!("test AUC {a:.4}, {:.2}s", elapsed.as_secs_f64()))
}

fn locality_bin(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_locality")).args(args).env_remove("LOCALITY_SEED").output();
    let out = out.map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn moons_dir(work: &Path) -> PathBuf {
    work.join("moons")
}

fn half_moons_row(work: &Path) -> Outcome {
    let dir = moons_dir(work);
    let started = Instant::now();
    locality_bin(&["benchmark", "--dataset", "moons", "--out-dir", dir.to_str().unwrap()])?;
    let elapsed = started.elapsed();
    let table: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("table.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let moons = &table["datasets"][0];
    let reference = reference_row("moons").unwrap();
    let mut lines = Vec::new();
    let mut any_match = false;
    for r_fid in [0.05, 0.2] {
        let mean = |m: Method| {
            moons["results"]
                .as_array()
                .unwrap()
                .iter()
                .find(|r| r["method"] == m.name() && r["r_fid"].as_f64() == Some(r_fid))
                .and_then(|r| r["mean"].as_f64())
        };
        let means: Vec<Option<f64>> = reference.iter().map(|(m, _, _)| mean(*m)).collect();
        let within = reference
            .iter()
            .zip(&means)
            .all(|((_, p, _), got)| got.is_some_and(|g| (g - p).abs() <= reference_tolerance("moons")));
        let ordered = matches!(means[..], [Some(l), Some(k), Some(s)] if s > k && k > l);
        any_match |= within && ordered;
        let shown: Vec<String> = means.iter().map(|m| m.map_or("-".into(), |v| format!("{v:.3}"))).collect();
        lines.push(format!(
            "r_fid={r_fid}: lime {} lime-k {} ls {}{}{}",
            shown[0],
            shown[1],
            shown[2],
            if within { " (within 0.05)" } else { "" },
            if ordered { " (ordered)" } else { "" }
        ));
    }
    let fast = elapsed < Duration::from_secs(300);
    lines.push(format!("{:.1}s", elapsed.as_secs_f64()));
    check(any_match && fast, lines.join("; "))
}

fn uci_dir() -> PathBuf {
    std::env::var_os("LOCALITY_UCI_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/uci"))
}

fn last_column(path: &Path) -> Result<String, String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let headers = reader.headers().map_err(|e| e.to_string())?;
    headers.iter().next_back().map(str::to_string).ok_or_else(|| format!("{} has no columns", path.display()))
}

fn uci_rows() -> Outcome {
    let dir = uci_dir();
    let mut datasets = Vec::new();
    let mut missing = Vec::new();
    for name in UCI {
        let path = dir.join(format!("{name}.csv"));
        if path.exists() {
            datasets.push(DatasetSpec::Csv { name: name.into(), target: last_column(&path)?, path });
        } else {
            missing.push(name);
        }
    }
    let table = if datasets.is_empty() {
        BenchmarkTable { datasets: Vec::new() }
    } else {
        let cfg = BenchmarkConfig { datasets, r_fid: vec![0.05], ..Default::default() };
        benchmark::run(&cfg).map_err(|e| e.to_string())?
    };

    let mut lines = Vec::new();
    let mut gaps_ok = missing.is_empty();
    let mut std_wins = 0;
    let mut values_ok = missing.is_empty();
    for d in &table.datasets {
        if let Some(e) = &d.error {
            lines.push(format!("{}: error {e}", d.name));
            gaps_ok = false;
            values_ok = false;
            continue;
        }
        let get = |m: Method| d.get(m, 0.05).and_then(|r| r.mean.zip(r.std));
        let (Some((lime, lime_sd)), Some((ls, ls_sd))) = (get(Method::Lime), get(Method::Ls)) else {
            lines.push(format!("{}: no scored instances", d.name));
            gaps_ok = false;
            values_ok = false;
            continue;
        };
        gaps_ok &= ls - lime >= 0.05;
        std_wins += usize::from(ls_sd <= lime_sd);
        let tol = reference_tolerance(&d.name);
        let close =
            reference_row(&d.name).unwrap().iter().all(|(m, p, _)| get(*m).is_some_and(|(v, _)| (v - p).abs() <= tol));
        values_ok &= close;
        let k = get(Method::LimeK).map_or("-".into(), |(v, _)| format!("{v:.3}"));
        lines.push(format!(
            "{}: lime {lime:.3} ({lime_sd:.3}) lime-k {k} ls {ls:.3} ({ls_sd:.3}) gap {:+.3}{}",
            d.name,
            ls - lime,
            if close { "" } else { " (off reference values)" }
        ));
    }
    if !missing.is_empty() {
        lines.push(format!("missing datasets in {}: {}", dir.display(), missing.join(", ")));
    }
    lines.push(format!("ls std <= lime std on {std_wins}/4"));
    check(gaps_ok && std_wins >= 3 && values_ok, lines.join("; "))
}

fn radius_sweep() -> Outcome {
    let data = generate_half_moons(1000, 0.3, 0).map_err(|e| e.to_string())?;
    let (train, test) = train_test_split(&data, 0.2, 0).map_err(|e| e.to_string())?;
    let forest =
        train_forest(&train, &RandomForestParams { seed: 0, ..Default::default() }).map_err(|e| e.to_string())?;
    let reference = Reference::new(train);
    let indices: Vec<usize> = (0..test.len()).collect();
    let fid = FidelityConfig::new(0.1, 0);
    let reports = fidelity_reports(&forest, &reference, &ExplainerConfig::lime(0), &test, &indices, &[0.1, 0.9], &fid)
        .map_err(|e| e.to_string())?;
    let (near, far) = (reports[0].mean.unwrap_or(f64::NAN), reports[1].mean.unwrap_or(f64::NAN));
    check(
        far - near >= 0.03,
        format!(
            "lime fraction 0.1 {near:.3} ({} skipped), 0.9 {far:.3} ({} skipped), margin {:.3}",
            reports[0].n_skipped,
            reports[1].n_skipped,
            far - near
        ),
    )
}

fn oracle_suite() -> Outcome {
    let parts: [(&str, Check); 5] = [
        ("ridge", ridge_oracle),
        ("auc", auc_oracle),
        ("ball sampler", ball_oracle),
        ("boundary search", boundary_oracle),
        ("ls normal", ls_normal_oracle),
    ];
    let mut failures = Vec::new();
    for (name, f) in parts {
        if let Err(e) = f() {
            failures.push(format!("{name}: {e}"));
        }
    }
    if failures.is_empty() {
        Ok("ridge, auc, ball sampler, boundary search, ls normal".into())
    } else {
        Err(failures.join("; "))
    }
}

fn ridge_oracle() -> Result<(), String> {
    let mut rng = stream(101, 0);
    for trial in 0..100 {
        let d = rng.random_range(1..=6);
        let n = rng.random_range(d + 2..=60);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ws: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let lambda = rng.random_range(0.0..5.0);
        let fit = fit_weighted_ridge(&xs, &ys, &ws, lambda).map_err(|e| e.to_string())?;

        let design = DMatrix::from_fn(n, d + 1, |i, j| if j == 0 { 1.0 } else { xs[i][j - 1] });
        let w = DMatrix::from_diagonal(&DVector::from_column_slice(&ws));
        let mut lhs = design.transpose() * &w * &design;
        for j in 1..=d {
            lhs[(j, j)] += lambda;
        }
        let rhs = design.transpose() * &w * DVector::from_column_slice(&ys);
        let beta = lhs.lu().solve(&rhs).ok_or("singular reference system")?;
        let got = std::iter::once(fit.intercept).chain(fit.coefficients.iter().copied());
        if got.zip(beta.iter()).any(|(g, b)| (g - b).abs() > 1e-6) {
            return Err(format!("trial {trial} differs from the normal equations"));
        }
    }
    Ok(())
}

fn auc_oracle() -> Result<(), String> {
    let mut rng = stream(102, 0);
    for trial in 0..100 {
        let n = rng.random_range(2..=150);
        let mut labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..12)) * 0.3).collect();
        let (mut wins, mut pairs) = (0.0, 0.0);
        for i in (0..n).filter(|&i| labels[i] == 1) {
            for j in (0..n).filter(|&j| labels[j] == 0) {
                pairs += 1.0;
                wins += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
        let got = auc(&scores, &labels).map_err(|e| e.to_string())?;
        if (got - wins / pairs).abs() > 1e-12 {
            return Err(format!("trial {trial}: {got} vs {}", wins / pairs));
        }
    }
    Ok(())
}

fn ball_oracle() -> Result<(), String> {
    let n = 5000;
    let mut xs: Vec<f64> =
        sample_ball_uniform(&[0.0], 1.0, n, 103).map_err(|e| e.to_string())?.iter().map(|p| p[0]).collect();
    xs.sort_by(f64::total_cmp);
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = (x + 1.0) / 2.0;
            (cdf - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - cdf).abs())
        })
        .fold(0.0, f64::max);
    if ks >= 1.63 / (n as f64).sqrt() {
        return Err(format!("KS statistic {ks:.4}"));
    }
    for d in 1..=10 {
        let center = vec![0.0; d];
        let points = sample_ball_uniform(&center, 1.0, 10_000, 200 + d as u64).map_err(|e| e.to_string())?;
        for t in [0.5, 0.8, 0.9] {
            let p = f64::powi(t, d as i32);
            let frac = points.iter().filter(|q| distance(q, &center) <= t).count() as f64 / 10_000.0;
            // 99% two-sided normal quantile.
            if (frac - p).abs() > 2.576 * (p * (1.0 - p) / 10_000.0).sqrt() + 1e-3 {
                return Err(format!("d={d} shell {t}: {frac:.4} vs {p:.4}"));
            }
        }
    }
    Ok(())
}

fn random_plane(rng: &mut impl Rng, d: usize, delta: f64) -> (Oracle, Vec<f64>, Vec<f64>) {
    let raw: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    let normal: Vec<f64> = raw.iter().map(|v| v / norm).collect();
    let x: Vec<f64> = normal.iter().map(|n| -delta * n).collect();
    (Oracle::halfspace(normal.clone(), 0.0).unwrap(), x, normal)
}

fn boundary_oracle() -> Result<(), String> {
    let mut rng = stream(104, 0);
    let mut hits = 0;
    for trial in 0..100 {
        let delta = rng.random_range(0.1..0.6);
        let (oracle, x, _) = random_plane(&mut rng, 2, delta);
        let cfg = GrowingSpheresConfig::for_scale(1.0, trial);
        let b = find_boundary_point(&oracle, &x, &cfg).map_err(|e| e.to_string())?;
        if oracle.score(b.point()) == oracle.score(&x) {
            return Err(format!("trial {trial}: label did not flip"));
        }
        hits += usize::from((b.distance_to_query() - delta).abs() <= 2.0 * cfg.radius_growth);
    }
    if hits >= 95 {
        Ok(())
    } else {
        Err(format!("{hits}/100 within two growth steps"))
    }
}

fn ls_normal_oracle() -> Result<(), String> {
    let mut rng = stream(105, 0);
    for q in 0..20 {
        let d = 2 + q % 4;
        let delta = rng.random_range(0.05..0.5);
        let (oracle, x, normal) = random_plane(&mut rng, d, delta);
        let e = explain_ls(&oracle, &x, 1.0, &ExplainerConfig::ls(0.3, q as u64)).map_err(|e| e.to_string())?;
        let c = &e.surrogate.coefficients;
        let cos = c.iter().zip(&normal).map(|(a, b)| a * b).sum::<f64>() / c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if cos < 0.95 {
            return Err(format!("query {q}: cosine {cos:.3}"));
        }
    }
    Ok(())
}

fn reproducibility(work: &Path) -> Outcome {
    let dir = moons_dir(work);
    let files = ["table.csv", "table.json", "per_instance.csv"];
    let read = |f: &str| std::fs::read(dir.join(f)).map_err(|e| format!("{f}: {e}"));
    let before = files.iter().map(|f| read(f)).collect::<Result<Vec<_>, _>>()?;
    locality_bin(&["replay", "--manifest", dir.join("manifest.json").to_str().unwrap()])?;
    let after = files.iter().map(|f| read(f)).collect::<Result<Vec<_>, _>>()?;
    let differing: Vec<&str> =
        files.iter().zip(before.iter().zip(&after)).filter(|(_, (a, b))| a != b).map(|(f, _)| *f).collect();
    check(
        differing.is_empty(),
        if differing.is_empty() {
            format!("manifest replay reproduced {} byte-identical files", files.len())
        } else {
            format!("replay changed {}", differing.join(", "))
        },
    )
}
