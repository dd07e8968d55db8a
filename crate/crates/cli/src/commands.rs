use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, Subcommand};
use ctf_core::baselines::{baseline_submission, BaselineKind};
use ctf_core::datagen::{build_pack, export_csv, write_pack, PackDir, PackOverrides, System};
use ctf_core::matrix::write_atomic;
use ctf_core::referee::submission::is_run_dir;
use ctf_core::referee::{
    card_from_runs, evaluate_run, read_submission, task_registry, update_leaderboard, validate_submission,
    write_submission, Leaderboard, ScoreCard, ScoreId,
};
use ctf_core::report::{
    export_markdown, export_table, render_radar, render_ranked_bar, render_top3, ChartKind, MethodScores,
};
use serde_json::json;

use crate::config::Settings;

pub struct Context {
    pub settings: Settings,
    pub json: bool,
}

pub enum Status {
    Clean,
    Violations,
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// lorenz or ks
    #[arg(long)]
    system: String,
    /// Master seed (falls back to the config file, then 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the pack
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    spinup_steps: Option<usize>,
    /// Medium noise as a fraction of each column's standard deviation
    #[arg(long)]
    noise_medium: Option<f64>,
    #[arg(long)]
    noise_high: Option<f64>,
    /// Timestamp recorded in the manifest (omitted by default)
    #[arg(long)]
    created_at: Option<String>,
    /// Also write CSV copies under <out>/csv
    #[arg(long)]
    csv: bool,
}

pub fn generate(ctx: &Context, a: GenerateArgs) -> Result<Status> {
    let system: System = a.system.parse()?;
    let seed = a.seed.or(ctx.settings.seed).unwrap_or(0);
    let overrides = PackOverrides {
        dt: a.dt,
        spinup_steps: a.spinup_steps,
        noise_medium: a.noise_medium,
        noise_high: a.noise_high,
        created_at: a.created_at,
        ..Default::default()
    };
    let out = ctx.settings.path(&a.out);
    let pack = build_pack(system, seed, &overrides)?;
    pack.verify()?;
    write_pack(&pack, &out).with_context(|| format!("writing pack to {}", out.display()))?;
    if a.csv {
        export_csv(&pack, &out.join("csv"))?;
    }
    let m = &pack.manifest;
    if ctx.json {
        let matrices: Vec<_> = m
            .matrices
            .iter()
            .map(|e| json!({"name": e.name, "rows": e.rows, "cols": e.cols}))
            .collect();
        print_json(&json!({
            "dataset_id": m.dataset_id,
            "seed": seed,
            "out": out,
            "matrices": matrices,
        }))?;
    } else {
        println!("{} pack (seed {seed}, dt {}) written to {}", m.dataset_id, m.dt, out.display());
        for e in &m.matrices {
            println!("  {:<9} [{:>5}, {:>4}]  rows {}..{}", e.name, e.rows, e.cols, e.start, e.end);
        }
    }
    Ok(Status::Clean)
}

fn parse_kind(s: &str) -> std::result::Result<BaselineKind, String> {
    s.parse().map_err(|e: ctf_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// zeros or average
    #[arg(long, value_parser = parse_kind)]
    kind: BaselineKind,
    /// Pack directory
    #[arg(long)]
    pack: PathBuf,
    /// Submission root; the run lands in <out>/<method>/<run-id>
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value = "run0")]
    run_id: String,
}

pub fn baseline(ctx: &Context, a: BaselineArgs) -> Result<Status> {
    let pack = PackDir::open(&ctx.settings.path(&a.pack))?;
    let method = a.method.unwrap_or_else(|| a.kind.method_name().to_string());
    let sub = baseline_submission(a.kind, &pack, &method, &a.run_id)?;
    let tasks = task_registry(&pack.manifest().dataset_id, &ctx.settings.windows)?;
    let violations = validate_submission(&sub, &tasks);
    let dir = write_submission(&sub, &ctx.settings.path(&a.out))?;
    if ctx.json {
        print_json(&json!({
            "method_name": method,
            "run_id": a.run_id,
            "dir": dir,
            "files": sub.predictions.keys().collect::<Vec<_>>(),
            "violations": violations,
        }))?;
    } else {
        println!("{} baseline for {} written to {}", a.kind, pack.manifest().dataset_id, dir.display());
        for v in &violations {
            println!("  violation: {v}");
        }
    }
    Ok(if violations.is_empty() { Status::Clean } else { Status::Violations })
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("runs").required(true).args(["submission", "runs_glob"])))]
pub struct ScoreArgs {
    /// Pack directory holding the truth matrices
    #[arg(long)]
    pack: PathBuf,
    /// A single run directory <method>/<run-id>
    #[arg(long)]
    submission: Option<PathBuf>,
    /// Glob selecting several run directories of one method
    #[arg(long)]
    runs_glob: Option<String>,
    /// Method name (defaults to the runs' parent directory)
    #[arg(long)]
    method: Option<String>,
    /// Write the scorecard JSON here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also upsert the card into the leaderboard store
    #[arg(long)]
    add: bool,
}

fn run_dirs(ctx: &Context, a: &ScoreArgs) -> Result<Vec<PathBuf>> {
    if let Some(dir) = &a.submission {
        return Ok(vec![ctx.settings.path(dir)]);
    }
    let pattern = a.runs_glob.as_deref().unwrap_or_default();
    let pattern = ctx.settings.path(Path::new(pattern));
    let pattern = pattern.to_str().context("glob pattern is not valid UTF-8")?;
    let mut dirs = Vec::new();
    for entry in glob::glob(pattern).with_context(|| format!("bad glob {pattern:?}"))? {
        let path = entry?;
        if path.is_dir() && is_run_dir(&path) {
            dirs.push(path);
        }
    }
    dirs.sort();
    if dirs.is_empty() {
        bail!("no run directories match {pattern:?}");
    }
    Ok(dirs)
}

fn render_card(card: &ScoreCard) -> String {
    let mut out = format!(
        "{} on {} ({} run{})\n",
        card.method_name,
        card.dataset_id,
        card.aggregate.runs,
        if card.aggregate.runs == 1 { "" } else { "s" }
    );
    for id in ScoreId::all() {
        let s = card.aggregate.scores[id.index()];
        let _ = writeln!(out, "  {:<4} {:>8.2} (± {:.2})", id.to_string(), s.mean, s.std);
    }
    let c = card.aggregate.composite;
    let _ = writeln!(out, "  {:<4} {:>8.2} (± {:.2})", "avg", c.mean, c.std);
    out
}

pub fn score(ctx: &Context, a: ScoreArgs) -> Result<Status> {
    let pack = PackDir::open(&ctx.settings.path(&a.pack))?;
    let windows = ctx.settings.windows;
    let mut runs = Vec::new();
    let mut method: Option<String> = a.method.clone();
    for dir in run_dirs(ctx, &a)? {
        let (sub, prior) = read_submission(&dir)?;
        match &method {
            None => method = Some(sub.method_name.clone()),
            Some(m) if a.method.is_none() && *m != sub.method_name => {
                bail!("runs belong to different methods ({m} and {}); pass --method", sub.method_name)
            }
            Some(_) => {}
        }
        log::info!("scoring {}", dir.display());
        runs.push(evaluate_run(&sub, prior, &pack, &windows)?);
    }
    let method = method.expect("at least one run");
    let card = card_from_runs(&method, &pack.manifest().dataset_id, &windows, runs)?;
    if let Some(out) = &a.out {
        let out = ctx.settings.path(out);
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        write_atomic(&out, card.to_json()?.as_bytes())?;
    }
    if a.add {
        update_leaderboard(&ctx.settings.store, &card)?;
    }
    for run in &card.runs {
        for w in &run.warnings {
            eprintln!("warning: {}: {w}", run.run_id);
        }
    }
    if ctx.json {
        print!("{}", card.to_json()?);
    } else {
        print!("{}", render_card(&card));
    }
    Ok(if card.has_violations() { Status::Violations } else { Status::Clean })
}

#[derive(Debug, Subcommand)]
pub enum LeaderboardAction {
    /// Upsert scorecard files
    Add {
        #[arg(required = true)]
        cards: Vec<PathBuf>,
    },
    /// Print the ranked boards
    Show {
        #[arg(long)]
        dataset: Option<String>,
    },
}

fn boards<'a>(board: &'a Leaderboard, dataset: Option<&str>) -> Vec<(&'a str, &'a [ctf_core::referee::LeaderboardEntry])> {
    board
        .boards
        .iter()
        .filter(|(id, entries)| !entries.is_empty() && dataset.is_none_or(|d| d == id.as_str()))
        .map(|(id, entries)| (id.as_str(), entries.as_slice()))
        .collect()
}

pub fn leaderboard(ctx: &Context, action: LeaderboardAction) -> Result<Status> {
    let store = &ctx.settings.store;
    match action {
        LeaderboardAction::Add { cards } => {
            let mut board = Leaderboard::default();
            for path in cards {
                let path = ctx.settings.path(&path);
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                let card = ScoreCard::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
                board = update_leaderboard(store, &card)?;
                if !ctx.json {
                    println!("added {} ({}) to {}", card.method_name, card.dataset_id, store.display());
                }
            }
            if ctx.json {
                print!("{}", board.to_json()?);
            }
        }
        LeaderboardAction::Show { dataset } => {
            let board = Leaderboard::load(store)?;
            if ctx.json {
                print!("{}", board.to_json()?);
                return Ok(Status::Clean);
            }
            let shown = boards(&board, dataset.as_deref());
            if shown.is_empty() {
                println!("leaderboard {} is empty", store.display());
            }
            for (id, entries) in shown {
                println!("{id}");
                println!("  {:>4}  {:<24} {:>18} {:>5}", "rank", "method", "composite", "runs");
                for e in entries {
                    println!(
                        "  {:>4}  {:<24} {:>8.2} (± {:>6.2}) {:>5}",
                        e.rank, e.method_name, e.composite.mean, e.composite.std, e.submission_count
                    );
                }
            }
        }
    }
    Ok(Status::Clean)
}

fn parse_report_kind(s: &str) -> std::result::Result<Vec<ChartKind>, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(ChartKind::ALL.to_vec());
    }
    s.parse::<ChartKind>().map(|k| vec![k]).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// radar, ranked-bar, top3, table or all
    #[arg(long, default_value = "all")]
    kind: String,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Restrict to one dataset id
    #[arg(long)]
    dataset: Option<String>,
    /// Method drawn as the reference layer, when present on the board
    #[arg(long, default_value = "baseline_zeros")]
    baseline: String,
    #[arg(long)]
    no_baseline: bool,
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn report(ctx: &Context, a: ReportArgs) -> Result<Status> {
    let kinds = parse_report_kind(&a.kind).map_err(anyhow::Error::msg)?;
    let board = Leaderboard::load(&ctx.settings.store)?;
    let shown = boards(&board, a.dataset.as_deref());
    if shown.is_empty() {
        if ctx.json {
            print_json(&json!({ "files": [] }))?;
        } else {
            println!("leaderboard {} is empty; nothing to report", ctx.settings.store.display());
        }
        return Ok(Status::Clean);
    }
    let out = ctx.settings.path(&a.out);
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    let mut emit = |name: String, text: String| -> Result<()> {
        let path = out.join(name);
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
        Ok(())
    };
    for (id, entries) in shown {
        let methods: Vec<MethodScores> = entries.iter().map(MethodScores::from_entry).collect();
        let baseline = (!a.no_baseline)
            .then(|| methods.iter().find(|m| m.name == a.baseline))
            .flatten();
        let stem = file_safe(id);
        for kind in &kinds {
            match kind {
                ChartKind::Radar => {
                    for m in &methods {
                        let overlay = baseline.filter(|b| b.name != m.name);
                        let svg = render_radar(id, std::slice::from_ref(m), overlay)?;
                        emit(format!("{stem}_radar_{}.svg", file_safe(&m.name)), svg)?;
                    }
                }
                ChartKind::RankedBar => emit(format!("{stem}_ranked_bar.svg"), render_ranked_bar(id, &methods)?)?,
                ChartKind::Top3 => emit(format!("{stem}_top3.svg"), render_top3(id, &methods, baseline)?)?,
                ChartKind::Table => {
                    emit(format!("{stem}_scores.csv"), export_table(&methods)?)?;
                    emit(format!("{stem}_scores.md"), export_markdown(&methods)?)?;
                }
            }
        }
    }
    if ctx.json {
        print_json(&json!({ "files": written }))?;
    } else {
        for p in &written {
            println!("{}", p.display());
        }
    }
    Ok(Status::Clean)
}
