//! Acceptance criteria for the benchmark engine. Each test prints one
//! `criterion N: PASS|FAIL` line straight to stdout.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use ctf_core::baselines::{baseline_submission, BaselineKind};
use ctf_core::datagen::{build_pack, DatasetPack, PackOverrides, System};
use ctf_core::dynamics::{
    integrate_ks, integrate_lorenz, make_initial_condition, InitialCondition, KsParams, LorenzParams, SimConfig,
};
use ctf_core::metrics::{histogram_counts, histogram_edges, histogram_l1, score_long_time_spectral, MetricWindows};
use ctf_core::referee::{evaluate, task_registry, Submission, WindowConfig};
use ctf_core::TimeMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn verdict(n: u8, what: &str, check: impl FnOnce() -> Check) {
    let started = Instant::now();
    let result = check();
    let line = match &result {
        Ok(detail) => format!("criterion {n}: PASS {what} [{detail}; {:.1?}]\n", started.elapsed()),
        Err(why) => format!("criterion {n}: FAIL {what}: {why}\n"),
    };
    // bypasses the test harness capture so the line always shows
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    if let Err(why) = result {
        panic!("criterion {n} failed: {why}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

static KS: OnceLock<(DatasetPack, Duration)> = OnceLock::new();
static LORENZ: OnceLock<DatasetPack> = OnceLock::new();

fn ks_pack() -> &'static (DatasetPack, Duration) {
    KS.get_or_init(|| {
        let t = Instant::now();
        let pack = build_pack(System::Ks, 7, &PackOverrides::default()).expect("ks pack");
        (pack, t.elapsed())
    })
}

fn lorenz_pack() -> &'static DatasetPack {
    LORENZ.get_or_init(|| build_pack(System::Lorenz, 2024, &PackOverrides::default()).expect("lorenz pack"))
}

fn oracle(pack: &DatasetPack) -> Submission {
    let tasks = task_registry(pack.dataset_id(), &WindowConfig::default()).unwrap();
    let mut sub = Submission::new("oracle", "0");
    for t in tasks {
        sub.predictions.insert(t.prediction_name, pack.get(&t.truth_name).unwrap().clone());
    }
    sub
}

#[test]
fn criterion_1_ks_zero_baseline() {
    verdict(1, "KS zeros baseline scores 0 on all twelve metrics", || {
        let (pack, build) = ks_pack();
        let t = Instant::now();
        let sub = baseline_submission(BaselineKind::Zeros, pack, "zeros", "0").map_err(|e| e.to_string())?;
        let card = evaluate(&sub, pack, &WindowConfig::default()).map_err(|e| e.to_string())?;
        let runtime = *build + t.elapsed();
        let scores = card.runs[0].effective_scores();
        for (i, e) in scores.iter().enumerate() {
            ensure(e.abs() < 1e-9, || format!("E{} = {e}", i + 1))?;
        }
        let c = card.aggregate.composite.mean;
        ensure(c.abs() < 1e-9, || format!("composite {c}"))?;
        ensure(runtime < Duration::from_secs(60), || format!("took {runtime:?}"))?;
        Ok(format!("composite {c:.2}, generate+score {runtime:.1?}"))
    });
}

#[test]
fn criterion_2_lorenz_zero_baseline() {
    verdict(2, "Lorenz zeros baseline: short-time 0, histogram scores in [-100, -50]", || {
        let pack = lorenz_pack();
        let sub = baseline_submission(BaselineKind::Zeros, pack, "zeros", "0").map_err(|e| e.to_string())?;
        let card = evaluate(&sub, pack, &WindowConfig::default()).map_err(|e| e.to_string())?;
        let s = card.runs[0].effective_scores();
        for i in [1, 3, 5, 7, 9, 11, 12] {
            ensure(s[i - 1] == 0.0, || format!("E{i} = {}", s[i - 1]))?;
        }
        let mut hist = Vec::new();
        for i in [2, 4, 6, 8, 10] {
            let e = s[i - 1];
            ensure((-100.0..=-50.0).contains(&e), || format!("E{i} = {e}"))?;
            hist.push(format!("E{i} {e:.2}"));
        }
        Ok(hist.join(", "))
    });
}

#[test]
fn criterion_3_oracle_scores_full_marks() {
    verdict(3, "truth submitted as prediction scores 100 everywhere", || {
        let mut out = Vec::new();
        for pack in [lorenz_pack(), &ks_pack().0] {
            let card = evaluate(&oracle(pack), pack, &WindowConfig::default()).map_err(|e| e.to_string())?;
            let run = &card.runs[0];
            ensure(run.scores == [Some(100.0); 12], || format!("{}: {:?}", pack.dataset_id(), run.scores))?;
            ensure(run.composite == 100.0, || format!("{}: composite {}", pack.dataset_id(), run.composite))?;
            out.push(format!("{} {:.2}", pack.dataset_id(), run.composite));
        }
        Ok(out.join(", "))
    });
}

#[test]
fn criterion_4_composite_minimum_rule() {
    verdict(4, "submission without parametric predictions scores 66.67", || {
        let mut out = Vec::new();
        for pack in [lorenz_pack(), &ks_pack().0] {
            let mut sub = oracle(pack);
            sub.predictions.remove("X8pred");
            sub.predictions.remove("X9pred");
            let card = evaluate(&sub, pack, &WindowConfig::default()).map_err(|e| e.to_string())?;
            let c = card.aggregate.composite.mean;
            ensure((c - 66.67).abs() <= 0.01, || format!("{}: composite {c}", pack.dataset_id()))?;
            out.push(format!("{} {c:.4}", pack.dataset_id()));
        }
        Ok(out.join(", "))
    });
}

/// Bin of `v` by scanning the edges in order; values beyond either end
/// are clamped and the last bin includes its upper edge.
fn oracle_bin(v: f64, edges: &[f64]) -> usize {
    let bins = edges.len() - 1;
    if v < edges[0] {
        return 0;
    }
    for b in 0..bins {
        let upper_ok = if b == bins - 1 { v <= edges[b + 1] } else { v < edges[b + 1] };
        if v >= edges[b] && upper_ok {
            return b;
        }
    }
    bins - 1
}

fn oracle_l1(truth: &[f64], pred: &[f64], bins: usize) -> f64 {
    let lo = truth.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = truth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let len = truth.len() as f64;
    if lo == hi {
        let matched = pred.iter().filter(|&&v| v == lo).count() as f64;
        return 2.0 * (len - matched) / len;
    }
    let edges: Vec<f64> = (0..=bins)
        .map(|b| if b == bins { hi } else { lo + (hi - lo) * (b as f64 / bins as f64) })
        .collect();
    let mut ht = vec![0i64; bins];
    let mut hp = vec![0i64; bins];
    for &v in truth {
        ht[oracle_bin(v, &edges)] += 1;
    }
    for &v in pred {
        hp[oracle_bin(v, &edges)] += 1;
    }
    ht.iter().zip(&hp).map(|(a, b)| (a - b).abs()).sum::<i64>() as f64 / len
}

#[test]
fn criterion_5_metric_oracles() {
    verdict(5, "histogram matches brute-force binning; spectral score shift-invariant", || {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for trial in 0..1000 {
            let len = rng.random_range(1..400);
            let bins = rng.random_range(2..60);
            let degenerate = trial % 50 == 0;
            let (lo, hi) = (rng.random_range(-50.0..0.0), rng.random_range(0.5..50.0));
            let truth: Vec<f64> = (0..len)
                .map(|_| if degenerate { 3.25 } else { rng.random_range(lo..hi) })
                .collect();
            let mut pred: Vec<f64> = (0..len).map(|_| rng.random_range(lo * 1.5..hi * 1.5)).collect();
            // put some predictions exactly on the truth edges
            let edges = histogram_edges(&truth, bins);
            for p in pred.iter_mut().take(len / 4) {
                *p = edges[rng.random_range(0..edges.len())];
            }
            if !degenerate && edges[0] < edges[bins] {
                let mut expect = vec![0usize; bins];
                for &v in &pred {
                    expect[oracle_bin(v, &edges)] += 1;
                }
                let got = histogram_counts(&pred, &edges);
                ensure(got == expect, || format!("trial {trial}: counts {got:?} vs {expect:?}"))?;
            }
            let got = histogram_l1(&truth, &pred, bins).map_err(|e| e.to_string())?;
            let want = oracle_l1(&truth, &pred, bins);
            ensure(got == want, || format!("trial {trial}: l1 {got} vs oracle {want}"))?;
        }

        let x = ks_pack().0.get("X1train").unwrap();
        let windows = MetricWindows { short_k: 1, long_k: 500, kmax: 100, bins: 41 };
        let mut worst = 0.0f64;
        for w in 0..100 {
            let a = rng.random_range(0..x.rows() - 500);
            let b = rng.random_range(0..x.rows() - 500);
            let truth = x.slice_rows(a, a + 500).unwrap();
            let pred = x.slice_rows(b, b + 500).unwrap();
            let shift = rng.random_range(1..x.cols());
            let shifted: Vec<Vec<f64>> = pred
                .iter_rows()
                .map(|r| {
                    let mut r = r.to_vec();
                    r.rotate_right(shift);
                    r
                })
                .collect();
            let shifted = TimeMatrix::from_rows(&shifted).unwrap();
            let s0 = score_long_time_spectral(&pred, &truth, &windows).map_err(|e| e.to_string())?;
            let s1 = score_long_time_spectral(&shifted, &truth, &windows).map_err(|e| e.to_string())?;
            worst = worst.max((s0 - s1).abs());
            ensure((s0 - s1).abs() <= 1e-9, || format!("window {w}: {s0} vs {s1}"))?;
        }
        Ok(format!("1000 histogram instances exact, max spectral shift deviation {worst:.1e}"))
    });
}

fn end_state(m: &TimeMatrix) -> Vec<f64> {
    m.row(m.rows() - 1).to_vec()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn sim(dt: f64, steps: usize, ic: InitialCondition, seed: u64) -> SimConfig {
    SimConfig { dt, total_steps: steps + 1, spinup_steps: 0, initial_condition: ic, seed }
}

fn order(run: impl Fn(f64) -> Vec<f64>, dt: f64) -> f64 {
    let reference = run(dt / 64.0);
    (max_diff(&run(dt), &reference) / max_diff(&run(dt / 2.0), &reference)).log2()
}

#[test]
fn criterion_6_solver_convergence() {
    verdict(6, "fourth-order integrators, conserved mean, fixed constant state", || {
        let lp = LorenzParams::default();
        let lorenz = order(
            |h| {
                let steps = (1.0 / h).round() as usize;
                let ic = InitialCondition::ExplicitVector(vec![1.0, 1.0, 20.0]);
                end_state(&integrate_lorenz(&lp, &sim(h, steps, ic, 0)).unwrap())
            },
            0.02,
        );
        ensure(lorenz >= 3.5, || format!("lorenz order {lorenz}"))?;

        let kp = KsParams::default();
        let ks = order(
            |h| {
                let steps = (2.5 / h).round() as usize;
                end_state(&integrate_ks(&kp, &sim(h, steps, InitialCondition::SeededRandomSmooth, 42)).unwrap())
            },
            0.025,
        );
        ensure(ks >= 3.5, || format!("ks order {ks}"))?;

        let mut u0 = make_initial_condition(&InitialCondition::SeededRandomSmooth, 1024, 9).unwrap();
        for v in &mut u0 {
            *v += 0.3;
        }
        let mean = |r: &[f64]| r.iter().sum::<f64>() / r.len() as f64;
        let m0 = mean(&u0);
        let run = integrate_ks(&kp, &sim(0.025, 1000, InitialCondition::ExplicitVector(u0), 0)).unwrap();
        let drift = run.iter_rows().map(|r| (mean(r) - m0).abs()).fold(0.0, f64::max);
        ensure(drift <= 1e-8, || format!("mean drift {drift}"))?;

        let constant = integrate_ks(&kp, &sim(0.025, 1000, InitialCondition::ExplicitVector(vec![1.7; 1024]), 0)).unwrap();
        let dev = constant.as_slice().iter().map(|v| (v - 1.7).abs()).fold(0.0, f64::max);
        ensure(dev <= 1e-10, || format!("constant deviation {dev}"))?;
        Ok(format!("orders lorenz {lorenz:.3}, ks {ks:.3}; mean drift {drift:.1e}; constant deviation {dev:.1e}"))
    });
}

/// (name, rows, start, end) for every train and test matrix.
const LAYOUT: [(&str, usize, usize, usize); 19] = [
    ("X1train", 10000, 0, 10000),
    ("X2train", 10000, 0, 10000),
    ("X3train", 10000, 0, 10000),
    ("X4train", 100, 0, 100),
    ("X5train", 100, 0, 100),
    ("X6train", 10000, 0, 10000),
    ("X7train", 10000, 0, 10000),
    ("X8train", 10000, 0, 10000),
    ("X9train", 100, 9900, 10000),
    ("X10train", 100, 9900, 10000),
    ("X1test", 1000, 10000, 11000),
    ("X2test", 10000, 0, 10000),
    ("X3test", 1000, 10000, 11000),
    ("X4test", 10000, 0, 10000),
    ("X5test", 1000, 10000, 11000),
    ("X6test", 1000, 100, 1100),
    ("X7test", 1000, 100, 1100),
    ("X8test", 1000, 10000, 11000),
    ("X9test", 1000, 10000, 11000),
];

#[test]
fn criterion_7_shape_fidelity() {
    verdict(7, "pack shapes and indices match the published layout", || {
        for (pack, cols) in [(lorenz_pack(), 3), (&ks_pack().0, 1024)] {
            let total = pack.train.len() + pack.test.len();
            ensure(total == LAYOUT.len(), || format!("{}: {total} matrices", pack.dataset_id()))?;
            for (name, rows, start, end) in LAYOUT {
                let m = pack.get(name).ok_or_else(|| format!("{}: no {name}", pack.dataset_id()))?;
                ensure(m.shape() == (rows, cols), || format!("{name}: shape {:?}", m.shape()))?;
                let e = pack.manifest.entry(name).ok_or_else(|| format!("{name} not in manifest"))?;
                ensure((e.rows, e.cols, e.start, e.end) == (rows, cols, start, end), || {
                    format!("{name}: manifest {:?}", (e.rows, e.cols, e.start, e.end))
                })?;
            }
        }
        Ok(format!("{} matrices per system, 10 train and 9 test", LAYOUT.len()))
    });
}

fn ctf(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ctf"))
        .current_dir(dir)
        .env_remove("CTF_DATA_ROOT")
        .env_remove("CTF_STORE")
        .env_remove("CTF_CONFIG")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("ctf {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn tree_bytes(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(PathBuf, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}

fn pipeline(dir: &Path, systems: &[&str]) -> Result<Vec<Vec<u8>>, String> {
    let mut stdout = Vec::new();
    for system in systems {
        let pack = format!("{system}-pack");
        stdout.push(ctf(dir, &["generate", "--system", system, "--seed", "3", "--out", &pack])?);
        for kind in ["zeros", "average"] {
            let subs = format!("{system}-subs");
            stdout.push(ctf(dir, &["baseline", "--kind", kind, "--pack", &pack, "--out", &subs])?);
            let run = format!("{subs}/baseline_{kind}/run0");
            let card = format!("cards/{system}-{kind}.json");
            stdout.push(ctf(dir, &["score", "--pack", &pack, "--submission", &run, "--out", &card, "--add"])?);
        }
    }
    stdout.push(ctf(dir, &["report", "--kind", "all", "--out", "report"])?);
    Ok(stdout)
}

#[test]
fn criterion_8_determinism() {
    verdict(8, "generate, baseline, score and report are byte-identical across runs", || {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
        let mut files = 0;
        for dir in [&a, &b] {
            std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        }
        let out_a = pipeline(&a, &["lorenz"])?;
        let out_b = pipeline(&b, &["lorenz"])?;
        ensure(out_a == out_b, || "console output differs".into())?;
        let (ta, tb) = (tree_bytes(&a), tree_bytes(&b));
        ensure(ta.len() == tb.len(), || format!("{} vs {} files", ta.len(), tb.len()))?;
        for ((pa, ba), (pb, bb)) in ta.iter().zip(&tb) {
            ensure(pa == pb && ba == bb, || format!("{} differs", pa.display()))?;
        }
        files += ta.len();

        for dir in [&a, &b] {
            ctf(dir, &["generate", "--system", "ks", "--seed", "3", "--out", "ks-pack"])?;
        }
        let (ka, kb) = (tree_bytes(&a.join("ks-pack")), tree_bytes(&b.join("ks-pack")));
        ensure(ka == kb, || "ks pack differs".into())?;
        files += ka.len();
        Ok(format!("{files} files compared"))
    });
}

#[test]
fn criterion_9_end_to_end() {
    verdict(9, "both packs generated, both baselines scored, all reports rendered", || {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let t = Instant::now();
        pipeline(tmp.path(), &["lorenz", "ks"])?;
        let elapsed = t.elapsed();
        let report = std::fs::read_dir(tmp.path().join("report")).map_err(|e| e.to_string())?.count();
        // per dataset: 2 radars, ranked bar, top3, csv and markdown tables
        ensure(report == 12, || format!("{report} report files"))?;
        ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
        Ok(format!("{report} report files in {elapsed:.1?}"))
    });
}
