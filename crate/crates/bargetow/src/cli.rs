//! The `bargetow` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use bargetow_core::evaluation::{cross_validate, rfecv, selection_frequency, stratified_kfold, RfecvResult};
use bargetow_core::features::FeatureVector;
use bargetow_core::fusion::{build_labeled_dataset, match_all, samples_to_matrix, ImputationReport, TripRef};
use bargetow_core::models::{DesignMatrix, TrainedModel};
use bargetow_core::synth::generate_labeled_dataset;
use bargetow_core::trajectory::Trip;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::ais_csv::{read_ais, read_ais_with, write_store, IngestOptions};
use crate::artifact::{create, read_json, write_json, Provenance};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::geojson::read_detections;
use crate::pipeline::{extract_features, label_features, reconstruct_all};
use crate::tables::{
    read_columns, read_labeled, read_labels, read_trips, trip_indices, trip_key, write_features, write_frequency,
    write_labeled, write_labels, write_predictions, write_trip_summary, write_trips, write_unlabeled,
};

/// Summary line on stdout; a closed pipe (`| head`) is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Debug, Parser)]
#[command(name = "bargetow", version, about = "Estimate barge tow sizes from AIS tracks")]
struct Cli {
    /// `key = value` settings file, applied before flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set forest.n_trees=200`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Leave the generation time out of artifact headers.
    #[arg(long, global = true)]
    no_timestamps: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and clean an AIS CSV into a per-vessel store.
    Ingest(IngestArgs),
    /// Detect stops and cut the store into trips.
    Trips(TripsArgs),
    /// Compute the 39 trip features, optionally joined with counts.
    Features(FeaturesArgs),
    /// Match detections to AIS trips and build the labeled dataset.
    Match(MatchArgs),
    /// Cross-validate a model family and fit it on all labeled rows.
    Train(TrainArgs),
    /// Recursive feature elimination with cross-validation.
    Select(SelectArgs),
    /// Cross-validate a saved model's family, settings and features.
    Evaluate(EvaluateArgs),
    /// Predict barge counts for feature rows.
    Predict(PredictArgs),
    /// Generate a synthetic labeled dataset.
    Synth(SynthArgs),
    /// Tabulate how often each feature was selected across RFECV runs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// AIS CSV (MarineCadastre or snake_case column names).
    #[arg(long)]
    input: PathBuf,
    /// Cleaned store CSV.
    #[arg(long)]
    out: PathBuf,
    /// Row-level diagnostics as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Read FIELD from the column named HEADER (fields: vessel_id, timestamp, lat, lon, sog, cog, heading, length, width, draft). Repeatable.
    #[arg(long = "column", value_name = "FIELD=HEADER")]
    columns: Vec<String>,
    /// Keep only vessels listed in this file, one id per line.
    #[arg(long, value_name = "FILE")]
    vessels: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StopFlags {
    /// Stop speed ceiling in knots (stop.max_speed_kn) [default: 1.0]
    #[arg(long)]
    stop_speed_kn: Option<f64>,
    /// Minimum stop duration in minutes (stop.min_duration_min) [default: 60]
    #[arg(long)]
    stop_min_minutes: Option<f64>,
    /// Stop radius around its centroid in metres (stop.radius_m) [default: 300]
    #[arg(long)]
    stop_radius_m: Option<f64>,
    /// Longest report gap inside a stop or trip in minutes (stop.max_gap_min) [default: 30]
    #[arg(long)]
    max_gap_minutes: Option<f64>,
    /// Fewest records a trip may have (stop.min_trip_points) [default: 10]
    #[arg(long)]
    min_trip_points: Option<usize>,
}

impl StopFlags {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut o = Vec::new();
        push(&mut o, "stop.max_speed_kn", self.stop_speed_kn);
        push(&mut o, "stop.min_duration_min", self.stop_min_minutes);
        push(&mut o, "stop.radius_m", self.stop_radius_m);
        push(&mut o, "stop.max_gap_min", self.max_gap_minutes);
        push(&mut o, "stop.min_trip_points", self.min_trip_points);
        o
    }
}

#[derive(Debug, Args)]
struct TripsArgs {
    /// Cleaned store CSV from `ingest`.
    #[arg(long)]
    store: PathBuf,
    /// Trips CSV, one row per record.
    #[arg(long)]
    out: PathBuf,
    /// Detected stops as JSON.
    #[arg(long)]
    stops: Option<PathBuf>,
    /// One row per trip: vessel_id, trip_index, start_time, end_time, n_points, open_ended.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    stop: StopFlags,
}

#[derive(Debug, Args)]
struct FeatureFlags {
    /// Speed entropy bins (features.entropy_bins_speed) [default: 10]
    #[arg(long)]
    speed_bins: Option<usize>,
    /// Course entropy bins (features.entropy_bins_course) [default: 36]
    #[arg(long)]
    course_bins: Option<usize>,
}

impl FeatureFlags {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut o = Vec::new();
        push(&mut o, "features.entropy_bins_speed", self.speed_bins);
        push(&mut o, "features.entropy_bins_course", self.course_bins);
        o
    }
}

#[derive(Debug, Args)]
struct FeaturesArgs {
    /// Trips CSV from `trips` or `synth`.
    #[arg(long)]
    trips: PathBuf,
    /// Feature CSV, or labeled CSV when --labels is given.
    #[arg(long)]
    out: PathBuf,
    /// `vessel_id,trip_index,barge_count` CSV; labeled trips are median-imputed and written as a labeled CSV.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Imputation medians as JSON (with --labels).
    #[arg(long, requires = "labels")]
    imputation: Option<PathBuf>,
    #[command(flatten)]
    features: FeatureFlags,
}

#[derive(Debug, Args)]
struct MatchArgs {
    /// Detections as a GeoJSON FeatureCollection.
    #[arg(long)]
    detections: PathBuf,
    /// Cleaned store CSV from `ingest`.
    #[arg(long)]
    store: PathBuf,
    /// Labeled CSV of matched detections with counts.
    #[arg(long)]
    out: PathBuf,
    /// Every match outcome with all candidate vessels, as JSON.
    #[arg(long)]
    matches: Option<PathBuf>,
    /// Matched detections without counts, features left raw.
    #[arg(long)]
    unlabeled: Option<PathBuf>,
    /// Imputation medians as JSON, for reuse by `predict`.
    #[arg(long)]
    imputation: Option<PathBuf>,
    /// Half-width of the time window in seconds (fusion.window_s) [default: 120]
    #[arg(long)]
    window_seconds: Option<i64>,
    #[command(flatten)]
    stop: StopFlags,
    #[command(flatten)]
    features: FeatureFlags,
}

#[derive(Debug, Args)]
struct EvalFlags {
    /// Number of stratified folds (eval.k) [default: 2]
    #[arg(long)]
    k: Option<usize>,
    /// Seed for folds and randomized models (eval.seed, model.seed) [default: 42]
    #[arg(long)]
    seed: Option<u64>,
}

impl EvalFlags {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut o = Vec::new();
        push(&mut o, "eval.k", self.k);
        push(&mut o, "eval.seed", self.seed);
        push(&mut o, "model.seed", self.seed);
        o
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Labeled CSV.
    #[arg(long)]
    data: PathBuf,
    /// poisson, elasticnet, random_forest or adaboost_r2 (model.family) [default: poisson]
    #[arg(long)]
    model: Option<String>,
    /// Comma-separated feature subset [default: all 39]
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    /// Fitted model JSON.
    #[arg(long)]
    out: PathBuf,
    /// Cross-validation report JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    eval: EvalFlags,
}

#[derive(Debug, Args)]
struct SelectArgs {
    /// Labeled CSV.
    #[arg(long)]
    data: PathBuf,
    /// poisson, elasticnet, random_forest or adaboost_r2 (model.family) [default: poisson]
    #[arg(long)]
    model: Option<String>,
    /// RFECV result JSON.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    eval: EvalFlags,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Labeled CSV.
    #[arg(long)]
    data: PathBuf,
    /// Model JSON from `train`.
    #[arg(long)]
    model: PathBuf,
    /// Cross-validation report JSON.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    eval: EvalFlags,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// CSV holding the model's feature columns; every other column is copied through as a row identifier.
    #[arg(long)]
    input: PathBuf,
    /// Model JSON from `train`.
    #[arg(long)]
    model: PathBuf,
    /// Imputation medians from `match` or `features`; without it empty cells are an error.
    #[arg(long)]
    imputation: Option<PathBuf>,
    /// Predictions CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Directory receiving trips.csv, labels.csv and labeled.csv.
    #[arg(long)]
    out_dir: PathBuf,
    /// Number of trips (synth.n_samples) [default: 200]
    #[arg(long)]
    n: Option<usize>,
    /// Generator seed (synth.seed) [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Draw every count equally often (synth.skew = false).
    #[arg(long)]
    uniform: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// RFECV result JSON files from `select`.
    #[arg(long, num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    /// Selection-frequency CSV.
    #[arg(long)]
    out: PathBuf,
}

fn push<T: ToString>(o: &mut Vec<(&'static str, String)>, key: &'static str, v: Option<T>) {
    if let Some(v) = v {
        o.push((key, v.to_string()));
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest(_) => "ingest",
        Command::Trips(_) => "trips",
        Command::Features(_) => "features",
        Command::Match(_) => "match",
        Command::Train(_) => "train",
        Command::Select(_) => "select",
        Command::Evaluate(_) => "evaluate",
        Command::Predict(_) => "predict",
        Command::Synth(_) => "synth",
        Command::Report(_) => "report",
    }
}

fn overrides(c: &Command) -> Vec<(&'static str, String)> {
    let mut o = Vec::new();
    match c {
        Command::Ingest(_) | Command::Predict(_) | Command::Report(_) => {}
        Command::Trips(a) => o.extend(a.stop.overrides()),
        Command::Features(a) => o.extend(a.features.overrides()),
        Command::Match(a) => {
            o.extend(a.stop.overrides());
            o.extend(a.features.overrides());
            push(&mut o, "fusion.window_s", a.window_seconds);
        }
        Command::Train(a) => {
            push(&mut o, "model.family", a.model.as_ref());
            o.extend(a.eval.overrides());
        }
        Command::Select(a) => {
            push(&mut o, "model.family", a.model.as_ref());
            o.extend(a.eval.overrides());
        }
        Command::Evaluate(a) => o.extend(a.eval.overrides()),
        Command::Synth(a) => {
            push(&mut o, "synth.n_samples", a.n);
            push(&mut o, "synth.seed", a.seed);
            if a.uniform {
                o.push(("synth.skew", "false".into()));
            }
        }
    }
    o
}

/// Defaults, then `--config`, then `--set`, then subcommand flags.
fn resolve(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v)?;
    }
    for (k, v) in overrides(&cli.command) {
        cfg.set(k, &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn all_trips(vessels: &[bargetow_core::trajectory::VesselTrips]) -> Vec<Trip> {
    vessels.iter().flat_map(|v| v.trips.iter().cloned()).collect()
}

fn labeled_matrix(path: &Path, features: Option<&[String]>) -> Result<DesignMatrix> {
    let samples = read_labeled(path)?;
    let dm = samples_to_matrix(&samples)?;
    Ok(match features {
        Some(f) => dm.select_columns(f)?,
        None => dm,
    })
}

fn count_targets(dm: &DesignMatrix) -> Vec<u32> {
    // read_labeled only accepts integer counts
    dm.targets().iter().map(|&y| y as u32).collect()
}

fn run_command(cli: &Cli, cfg: &PipelineConfig) -> Result<()> {
    let prov = Provenance::new(command_name(&cli.command), cfg, !cli.no_timestamps);
    let comment = prov.csv_comment();
    match &cli.command {
        Command::Ingest(a) => {
            let mut opts = IngestOptions::default().with_columns(&a.columns)?;
            if let Some(p) = &a.vessels {
                opts = opts.with_vessel_file(p)?;
            }
            let (tracks, report) = read_ais_with(&a.input, &opts)?;
            write_with(&a.out, |w| write_store(w, &comment, &tracks))?;
            if let Some(p) = &a.report {
                write_json(p, &prov, &report)?;
            }
            let rejected: usize = report.rejected.values().sum();
            say!(
                "{} rows read, {} kept for {} vessels, {} rejected, {} duplicates removed, {} not on the vessel list",
                report.rows_read,
                report.accepted,
                report.vessels,
                rejected,
                report.duplicates_removed,
                report.not_allowed
            );
        }
        Command::Trips(a) => {
            let (tracks, _) = read_ais(&a.store)?;
            let vessels = reconstruct_all(&tracks, &cfg.stop)?;
            let trips = all_trips(&vessels);
            write_with(&a.out, |w| write_trips(w, &comment, &trips))?;
            if let Some(p) = &a.stops {
                let stops: Vec<_> = vessels.iter().flat_map(|v| v.stops.iter()).collect();
                write_json(p, &prov, &stops)?;
            }
            if let Some(p) = &a.summary {
                write_with(p, |w| write_trip_summary(w, &comment, &trips))?;
            }
            let n_stops: usize = vessels.iter().map(|v| v.stops.len()).sum();
            say!("{} vessels, {} stops, {} trips", vessels.len(), n_stops, trips.len());
        }
        Command::Features(a) => {
            let trips = read_trips(&a.trips)?;
            let rows = extract_features(&trips, &cfg.features)?;
            match &a.labels {
                None => {
                    write_with(&a.out, |w| write_features(w, &comment, &rows))?;
                    say!("{} feature rows", rows.len());
                }
                Some(labels) => {
                    let (samples, report) = label_features(&rows, &read_labels(labels)?)?;
                    write_with(&a.out, |w| write_labeled(w, &comment, &samples))?;
                    if let Some(p) = &a.imputation {
                        write_json(p, &prov, &report)?;
                    }
                    say!("{} labeled rows, {} cells imputed", samples.len(), report.imputed.len());
                }
            }
        }
        Command::Match(a) => {
            let detections = read_detections(&a.detections)?;
            let (tracks, _) = read_ais(&a.store)?;
            let vessels = reconstruct_all(&tracks, &cfg.stop)?;
            let outcomes = match_all(&detections, &tracks, &vessels, cfg.window_s)?;
            let trips = all_trips(&vessels);
            let features: BTreeMap<TripRef, FeatureVector> = extract_features(&trips, &cfg.features)?
                .into_iter()
                .zip(&trips)
                .map(|(row, t)| (TripRef::of(t), row.features))
                .collect();
            if let Some(p) = &a.matches {
                write_json(p, &prov, &outcomes)?;
            }
            let ds = build_labeled_dataset(&detections, &outcomes, &features)?;
            write_with(&a.out, |w| write_labeled(w, &comment, &ds.samples))?;
            if let Some(p) = &a.unlabeled {
                write_with(p, |w| write_unlabeled(w, &comment, &ds.unlabeled))?;
            }
            if let Some(p) = &a.imputation {
                write_json(p, &prov, &ds.imputation)?;
            }
            let matched = outcomes.iter().filter(|o| o.matched().is_some()).count();
            say!(
                "{} detections, {} matched, {} labeled samples, {} unlabeled, {} cells imputed",
                detections.len(),
                matched,
                ds.samples.len(),
                ds.unlabeled.len(),
                ds.imputation.imputed.len()
            );
        }
        Command::Train(a) => {
            let dm = labeled_matrix(&a.data, a.features.as_deref())?;
            let spec = cfg.model_spec();
            let folds = stratified_kfold(&count_targets(&dm), cfg.k, cfg.fold_seed)?;
            let report = cross_validate(&dm, &spec, &folds)?;
            let model = spec.fit(&dm)?;
            write_json(&a.out, &prov, &model)?;
            if let Some(p) = &a.report {
                write_json(p, &prov, &report)?;
            }
            print_cv(&report);
        }
        Command::Select(a) => {
            let dm = labeled_matrix(&a.data, None)?;
            let result = rfecv(&dm, &cfg.model_spec(), cfg.k, cfg.fold_seed)?;
            write_json(&a.out, &prov, &result)?;
            say!("{} features chosen: {}", result.chosen_size, result.chosen.join(","));
        }
        Command::Evaluate(a) => {
            let model: TrainedModel = read_json(&a.model)?.payload;
            let dm = labeled_matrix(&a.data, Some(&model.feature_names))?;
            let folds = stratified_kfold(&count_targets(&dm), cfg.k, cfg.fold_seed)?;
            let report = cross_validate(&dm, &model.spec(), &folds)?;
            write_json(&a.out, &prov, &report)?;
            print_cv(&report);
        }
        Command::Predict(a) => {
            let model: TrainedModel = read_json(&a.model)?.payload;
            let imputation: Option<ImputationReport> = match &a.imputation {
                Some(p) => Some(read_json(p)?.payload),
                None => None,
            };
            let input = read_columns(&a.input, &model.feature_names)?;
            let rows = fill(&model.feature_names, input.rows, imputation.as_ref())?;
            let preds = model.predict(&model.feature_names, &rows)?;
            write_with(&a.out, |w| write_predictions(w, &comment, &input.id_headers, &input.ids, &preds))?;
            say!("{} predictions", preds.len());
        }
        Command::Synth(a) => {
            let data = generate_labeled_dataset(&cfg.synth, &cfg.features)?;
            let labels: Vec<(String, usize, u32)> = data
                .trips
                .iter()
                .zip(trip_indices(&data.trips))
                .zip(&data.samples)
                .map(|((t, i), s)| (t.vessel_id.clone(), i, s.barge_count))
                .collect();
            let rows = extract_features(&data.trips, &cfg.features)?;
            let keyed = labels.iter().map(|(v, i, b)| (trip_key(v, *i), *b)).collect();
            let (samples, _) = label_features(&rows, &keyed)?;
            let dir = &a.out_dir;
            write_with(&dir.join("trips.csv"), |w| write_trips(w, &comment, &data.trips))?;
            write_with(&dir.join("labels.csv"), |w| write_labels(w, &comment, &labels))?;
            write_with(&dir.join("labeled.csv"), |w| write_labeled(w, &comment, &samples))?;
            say!("{} synthetic trips written to {}", samples.len(), dir.display());
        }
        Command::Report(a) => {
            let results: Vec<RfecvResult> =
                a.inputs.iter().map(|p| read_json(p).map(|e| e.payload)).collect::<Result<_>>()?;
            let table = selection_frequency(&results);
            write_with(&a.out, |w| write_frequency(w, &comment, &table, results.len()))?;
            for (f, n) in &table {
                say!("{f}\t{n}/{}", results.len());
            }
        }
    }
    Ok(())
}

/// Fills empty cells from the imputation medians, if any were given.
fn fill(
    names: &[String],
    cells: Vec<Vec<Option<f64>>>,
    imputation: Option<&ImputationReport>,
) -> Result<Vec<Vec<f64>>> {
    let medians: Option<BTreeMap<&str, f64>> =
        imputation.map(|r| r.features.iter().map(String::as_str).zip(r.medians.iter().copied()).collect());
    cells
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .zip(names)
                .map(|(v, name)| match (v, &medians) {
                    (Some(v), _) => Ok(v),
                    (None, Some(m)) => m.get(name.as_str()).copied().ok_or_else(|| {
                        Error::Core(bargetow_core::Error::Domain(format!("no imputation value for {name}")))
                    }),
                    (None, None) => Err(Error::Core(bargetow_core::Error::Domain(format!(
                        "row {}: {name} is missing and no imputation report was given",
                        i + 1
                    )))),
                })
                .collect()
        })
        .collect()
}

fn print_cv(r: &bargetow_core::evaluation::CvReport) {
    for f in &r.per_fold {
        match (&f.mae, &f.error) {
            (Some(m), _) => say!("fold {}: n = {}, MAE = {m:.4}", f.fold, f.n),
            (None, Some(e)) => say!("fold {}: n = {}, failed: {e}", f.fold, f.n),
            (None, None) => {}
        }
    }
    say!("{} mean MAE = {:.4} (training-mean baseline {:.4})", r.family, r.mean_mae, r.baseline_mean_mae);
    if r.warning {
        say!("warning: some folds failed to fit");
    }
}

fn defaults_help() -> String {
    let mut s = String::from("Settings (for --config files and --set), with defaults:\n");
    for (k, v) in PipelineConfig::default().entries() {
        s.push_str(&format!("  {k} = {v}\n"));
    }
    s.push_str("\nExit status: 0 on success, 1 on a data or domain error, 2 on a usage error.");
    s
}

fn command() -> clap::Command {
    let extra = defaults_help();
    let mut cmd = Cli::command().after_long_help(extra.clone());
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for n in names {
        let extra = extra.clone();
        cmd = cmd.mut_subcommand(n, move |s| s.after_long_help(extra));
    }
    cmd
}

/// Runs the command line, returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    let result = resolve(&cli).and_then(|cfg| run_command(&cli, &cfg));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
