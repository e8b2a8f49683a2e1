//! `attrmeter` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use attrmeter::analyze::{cooccurrence, Calibrator, MeaningfulnessReport, MetricConfig};
use attrmeter::error::Error;
use attrmeter::interpolate::{default_grid, CurveTracer};
use attrmeter::io::{
    format_float, parse_grid, parse_matrix, parse_name_list, round_sig, write_matrix, write_table, Encoding, TableCell,
};
use attrmeter::matrix::AttributeMatrix;
use attrmeter::reconstruct::{delta, DistanceKind};
use attrmeter::select::{leave_one_out_errors, select_with_scores, SelectionConfig, Threshold, DEFAULT_ALPHA};
use attrmeter::synth::{plant_meaningful, PlantSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

#[derive(Parser)]
#[command(
    name = "attrmeter",
    version,
    about = "Meaningfulness of discovered binary attribute sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruction distance of a discovered set from a meaningful set.
    Distance(DistanceArgs),
    /// Split a labelled set into representation and holdout.
    Select(SelectArgs),
    /// Trace the interpolation curve of S2 plus noise against S1.
    Interpolate(InterpolateArgs),
    /// Full meaningfulness evaluation.
    Metric(MetricArgs),
    /// Joint positive rates between two attribute sets.
    Cooccur(CooccurArgs),
    /// Plant meaningful attributes mixed from a base set, plus noise.
    Synth(SynthArgs),
    /// Convert between 0/1 and -1/+1 matrix files.
    Convert(ConvertArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Cvx,
    Jp,
}

impl From<KindArg> for DistanceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Cvx => DistanceKind::ConvexHull,
            KindArg::Jp => DistanceKind::JointL0,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindsArg {
    Cvx,
    Jp,
    Both,
}

impl KindsArg {
    fn kinds(self) -> Vec<DistanceKind> {
        match self {
            KindsArg::Cvx => vec![DistanceKind::ConvexHull],
            KindsArg::Jp => vec![DistanceKind::JointL0],
            KindsArg::Both => DistanceKind::ALL.to_vec(),
        }
    }
}

#[derive(Args)]
struct InputFlags {
    /// Matrix files hold 0/1 instead of -1/+1.
    #[arg(long)]
    zero_one: bool,
    /// Exit with status 0 even if a hull solve misses the KKT tolerance.
    #[arg(long)]
    allow_unconverged: bool,
}

impl InputFlags {
    fn encoding(&self) -> Encoding {
        if self.zero_one {
            Encoding::ZeroOne
        } else {
            Encoding::PlusMinusOne
        }
    }
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long)]
    meaningful: PathBuf,
    #[arg(long)]
    discovered: PathBuf,
    #[arg(long, value_enum, default_value = "cvx")]
    kind: KindArg,
    /// Where to write the reconstruction matrix R.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    input: InputFlags,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Absolute leave-one-out threshold.
    #[arg(long, conflicts_with = "alpha_percentile")]
    alpha: Option<f64>,
    /// Force the given percentage of highest leave-one-out scores into S1.
    #[arg(long)]
    alpha_percentile: Option<f64>,
    /// File with attribute names always placed in S1, one per line.
    #[arg(long)]
    forced: Option<PathBuf>,
    /// Share of the labelled attributes that goes to S1.
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    /// Distance used for the leave-one-out scores.
    #[arg(long, value_enum, default_value = "cvx")]
    score_kind: KindArg,
}

impl ThresholdArgs {
    fn threshold(&self) -> Threshold {
        match (self.alpha, self.alpha_percentile) {
            (_, Some(p)) => Threshold::TopPercent(p),
            (Some(a), None) => Threshold::Absolute(a),
            (None, None) => Threshold::Absolute(DEFAULT_ALPHA),
        }
    }

    fn forced_names(&self) -> Result<Vec<String>, Failure> {
        match &self.forced {
            Some(path) => parse_name_list(&read(path)?).map_err(|e| Failure::input(path, e)),
            None => Ok(Vec::new()),
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    meaningful: PathBuf,
    #[command(flatten)]
    threshold: ThresholdArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the split manifest.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    input: InputFlags,
}

#[derive(Args)]
struct InterpolateArgs {
    #[arg(long)]
    s1: PathBuf,
    #[arg(long)]
    s2: PathBuf,
    /// Comma-separated noise counts starting at 0.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "both")]
    kind: KindsArg,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    input: InputFlags,
}

#[derive(Args)]
struct MetricArgs {
    #[arg(long)]
    meaningful: PathBuf,
    #[arg(long)]
    discovered: PathBuf,
    #[arg(long, default_value_t = 100)]
    splits: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated noise counts starting at 0.
    #[arg(long)]
    grid: Option<String>,
    #[command(flatten)]
    threshold: ThresholdArgs,
    /// Weight of the hull-based metric in the combination.
    #[arg(long, default_value_t = 0.5)]
    weight_cvx: f64,
    /// Grid doublings allowed when the discovered set is beyond the curve.
    #[arg(long, default_value_t = 2)]
    max_extensions: usize,
    /// Directory receiving report.json, splits.csv and curves.csv.
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    input: InputFlags,
}

#[derive(Args)]
struct CooccurArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    input: InputFlags,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    base: PathBuf,
    /// Number of planted attributes.
    #[arg(long)]
    meaningful: usize,
    /// Number of pure-noise attributes.
    #[arg(long)]
    noise: usize,
    #[arg(long, default_value_t = 0.0)]
    flip_rate: f64,
    #[arg(long, default_value_t = 2)]
    combine_width: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Where to write which columns are planted.
    #[arg(long)]
    truth: PathBuf,
    #[command(flatten)]
    input: InputFlags,
}

#[derive(Args)]
struct ConvertArgs {
    /// Input holds 0/1; output is -1/+1.
    #[arg(long, conflicts_with = "to_zero_one", required_unless_present = "to_zero_one")]
    zero_one: bool,
    /// Input holds -1/+1; output is 0/1.
    #[arg(long)]
    to_zero_one: bool,
    input: PathBuf,
    output: PathBuf,
}

/// Error with the exit status it maps to.
struct Failure {
    status: u8,
    error: anyhow::Error,
}

impl Failure {
    fn input(path: &Path, e: Error) -> Self {
        Failure {
            status: 2,
            error: anyhow::Error::new(e).context(format!("{}", path.display())),
        }
    }

    fn usage(e: Error) -> Self {
        Failure {
            status: 2,
            error: e.into(),
        }
    }

    fn runtime(error: anyhow::Error) -> Self {
        Failure { status: 1, error }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure {
        status: 2,
        error: anyhow::Error::new(e).context(format!("cannot read {}", path.display())),
    })
}

fn load(path: &Path, encoding: Encoding) -> Result<AttributeMatrix, Failure> {
    parse_matrix(&read(path)?, encoding).map_err(|e| Failure::input(path, e))
}

fn check_converged(converged: bool, flags: &InputFlags) -> Result<(), Failure> {
    if converged || flags.allow_unconverged {
        Ok(())
    } else {
        Err(Failure::runtime(anyhow::anyhow!(
            "a convex hull solve did not reach the KKT tolerance (pass --allow-unconverged to keep the output)"
        )))
    }
}

/// Writes every file only after all of them are rendered, each through a
/// temporary file in the target directory.
fn write_all(files: &[(&Path, String)]) -> Result<(), Failure> {
    for (path, contents) in files {
        write_atomic(path, contents)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(Failure::runtime)?;
    }
    Ok(())
}

fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path)?;
    Ok(())
}

fn parse_grid_arg(grid: &Option<String>) -> Result<Option<Vec<usize>>, Failure> {
    grid.as_deref().map(parse_grid).transpose().map_err(Failure::usage)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Distance(a) => distance(&a),
        Command::Select(a) => select(&a),
        Command::Interpolate(a) => interpolate(&a),
        Command::Metric(a) => metric(&a),
        Command::Cooccur(a) => cooccur(&a),
        Command::Synth(a) => synth(&a),
        Command::Convert(a) => convert(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.status)
        }
    }
}

fn distance(args: &DistanceArgs) -> Result<(), Failure> {
    let enc = args.input.encoding();
    let a = load(&args.meaningful, enc)?;
    let b = load(&args.discovered, enc)?;
    let r = delta(args.kind.into(), &a, &b).map_err(Failure::usage)?;
    check_converged(r.converged, &args.input)?;
    if let Some(out) = &args.out {
        let mut header = vec!["attribute".to_owned()];
        header.extend((0..b.n_columns()).map(|k| b.label(k)));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<TableCell>> = (0..a.n_columns())
            .map(|j| {
                std::iter::once(TableCell::Text(a.label(j)))
                    .chain((0..b.n_columns()).map(|k| TableCell::Float(r.coefficients.get(j, k))))
                    .collect()
            })
            .collect();
        write_all(&[(out, write_table(&header, &rows))])?;
    }
    println!("{}", format_float(r.distance));
    Ok(())
}

fn select(args: &SelectArgs) -> Result<(), Failure> {
    let s = load(&args.meaningful, args.input.encoding())?;
    let cfg = SelectionConfig {
        threshold: args.threshold.threshold(),
        forced_names: args.threshold.forced_names()?,
        s1_fraction: args.threshold.fraction,
        seed: args.seed,
        kind: args.threshold.score_kind.into(),
    };
    let scores = leave_one_out_errors(&s, cfg.kind).map_err(Failure::usage)?;
    let split = select_with_scores(&s, &scores.scores, &cfg).map_err(Failure::usage)?;
    let rows: Vec<Vec<TableCell>> = (0..s.n_columns())
        .map(|k| {
            let set = if split.s1_indices.contains(&k) { "s1" } else { "s2" };
            vec![
                TableCell::Text(s.label(k)),
                TableCell::Text(set.into()),
                TableCell::Int(i64::from(split.forced_indices.contains(&k))),
                TableCell::Float(scores.scores[k]),
            ]
        })
        .collect();
    write_all(&[(&args.out, write_table(&["attribute", "set", "forced", "score"], &rows))])?;
    println!("s1 {} s2 {}", split.s1_indices.len(), split.s2_indices.len());
    Ok(())
}

fn interpolate(args: &InterpolateArgs) -> Result<(), Failure> {
    let enc = args.input.encoding();
    let s1 = load(&args.s1, enc)?;
    let s2 = load(&args.s2, enc)?;
    let grid = parse_grid_arg(&args.grid)?.unwrap_or_else(|| default_grid(s2.n_columns()));
    let mut rows = Vec::new();
    let mut converged = true;
    for kind in args.kind.kinds() {
        let curve = CurveTracer::new(&s1, &s2, kind)
            .and_then(|t| t.trace(&grid, args.trials, args.seed))
            .map_err(Failure::usage)?;
        converged &= curve.converged;
        for p in 0..curve.len() {
            rows.push(vec![
                TableCell::Text(kind.as_str().into()),
                TableCell::Int(curve.grid[p] as i64),
                TableCell::Float(curve.mean_distance[p]),
                TableCell::Float(curve.std_distance[p]),
            ]);
        }
    }
    check_converged(converged, &args.input)?;
    write_all(&[(&args.out, write_table(&["kind", "noise", "mean", "std"], &rows))])?;
    Ok(())
}

/// Replaces every float by its 12-significant-digit rounding.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn report_json(report: &MeaningfulnessReport) -> anyhow::Result<String> {
    let mut value = serde_json::to_value(report)?;
    round_floats(&mut value);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

fn splits_table(report: &MeaningfulnessReport) -> String {
    let rows: Vec<Vec<TableCell>> = report
        .splits
        .iter()
        .map(|s| {
            vec![
                TableCell::Int(s.index as i64),
                TableCell::Text(s.seed.to_string()),
                TableCell::Float(s.delta_cvx),
                TableCell::Float(s.delta_jp),
                TableCell::Float(s.gamma_cvx),
                TableCell::Float(s.gamma_jp),
                TableCell::Text(format!("{:?}", s.clamp_cvx).to_lowercase()),
                TableCell::Text(format!("{:?}", s.clamp_jp).to_lowercase()),
            ]
        })
        .collect();
    write_table(
        &[
            "split",
            "seed",
            "delta_cvx",
            "delta_jp",
            "gamma_cvx",
            "gamma_jp",
            "clamp_cvx",
            "clamp_jp",
        ],
        &rows,
    )
}

fn curves_table(report: &MeaningfulnessReport) -> String {
    let mut rows = Vec::new();
    for summary in [&report.cvx, &report.jp] {
        let c = &summary.curve;
        for p in 0..c.grid.len() {
            rows.push(vec![
                TableCell::Text(summary.kind.as_str().into()),
                TableCell::Int(c.grid[p] as i64),
                TableCell::Float(c.mean_distance[p]),
                TableCell::Float(c.std_distance[p]),
                TableCell::Float(c.fitted[p]),
            ]);
        }
    }
    write_table(&["kind", "noise", "mean", "std", "fitted"], &rows)
}

fn metric(args: &MetricArgs) -> Result<(), Failure> {
    let enc = args.input.encoding();
    let s = load(&args.meaningful, enc)?;
    let d = load(&args.discovered, enc)?;
    let cfg = MetricConfig {
        splits: args.splits,
        trials: args.trials,
        grid: parse_grid_arg(&args.grid)?,
        seed: args.seed,
        threshold: args.threshold.threshold(),
        forced_names: args.threshold.forced_names()?,
        s1_fraction: args.threshold.fraction,
        score_kind: args.threshold.score_kind.into(),
        weight_cvx: args.weight_cvx,
        max_extensions: args.max_extensions,
    };
    let report = Calibrator::new(&s, cfg)
        .and_then(|mut c| c.evaluate(&d))
        .map_err(Failure::usage)?;
    check_converged(report.converged, &args.input)?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))
        .map_err(Failure::runtime)?;
    let json = report_json(&report).map_err(Failure::runtime)?;
    let (report_path, splits_path, curves_path) = (
        args.out_dir.join("report.json"),
        args.out_dir.join("splits.csv"),
        args.out_dir.join("curves.csv"),
    );
    write_all(&[
        (&report_path, json),
        (&splits_path, splits_table(&report)),
        (&curves_path, curves_table(&report)),
    ])?;
    println!("gamma_tilde {}", format_float(report.gamma_tilde));
    Ok(())
}

fn cooccur(args: &CooccurArgs) -> Result<(), Failure> {
    let enc = args.input.encoding();
    let a = load(&args.a, enc)?;
    let b = load(&args.b, enc)?;
    let c = cooccurrence(&a, &b).map_err(Failure::usage)?;
    let mut header = vec!["attribute".to_owned()];
    header.extend(c.labels.iter().cloned());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<TableCell>> = (0..c.size)
        .map(|i| {
            std::iter::once(TableCell::Text(c.labels[i].clone()))
                .chain((0..c.size).map(|j| TableCell::Float(c.get(i, j))))
                .collect()
        })
        .collect();
    write_all(&[(&args.out, write_table(&header, &rows))])
}

fn synth(args: &SynthArgs) -> Result<(), Failure> {
    let base = load(&args.base, args.input.encoding())?;
    let planted = plant_meaningful(&PlantSpec {
        base,
        n_meaningful: args.meaningful,
        n_noise: args.noise,
        flip_rate: args.flip_rate,
        combine_width: args.combine_width,
        seed: args.seed,
    })
    .map_err(Failure::usage)?;
    let rows: Vec<Vec<TableCell>> = planted
        .truth
        .iter()
        .enumerate()
        .map(|(k, &t)| vec![TableCell::Text(planted.matrix.label(k)), TableCell::Int(i64::from(t))])
        .collect();
    write_all(&[
        (&args.out, write_matrix(&planted.matrix, args.input.encoding())),
        (&args.truth, write_table(&["attribute", "planted"], &rows)),
    ])
}

fn convert(args: &ConvertArgs) -> Result<(), Failure> {
    let (from, to) = if args.to_zero_one {
        (Encoding::PlusMinusOne, Encoding::ZeroOne)
    } else {
        (Encoding::ZeroOne, Encoding::PlusMinusOne)
    };
    let m = load(&args.input, from)?;
    write_all(&[(&args.output, write_matrix(&m, to))])
}
