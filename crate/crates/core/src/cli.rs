//! Command-line front end: `measure`, `sweep`, `compare` and `plot`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::balance::{balance_report, cbet_from_confusion};
use crate::dataset::{
    builtin, load_csv, CsvOptions, DataTable, NaPolicy, Schema, BUILTIN_DATASETS,
};
use crate::discretize::Strategy;
use crate::error::{Error, Result};
use crate::pipeline::{
    discretize_columns, discretize_matrix, log_reference, measure_columns, numeric_feature_names,
    partitioned_joint, plot_rows, read_confusion, read_report, report_rows, run_sweep,
    write_report, Discretization, ReportRow, Support, SweepSettings, Transform, SERIES_COLORS,
};
use crate::plot::{render_svg, Glyph, PlotKind, PlotPoint, PlotSpec};
use crate::transforms::{fastica, log_transform, pca_fit, IcaParams, RankingMethod};

#[derive(Debug, Parser)]
#[command(
    name = "etri",
    version,
    about = "Entropy balance decompositions and entropy triangles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Balance coordinates of one partition of a dataset, or of a confusion matrix.
    Measure(RunArgs),
    /// Coordinates of the original features against the first i PCA or ICA features.
    Sweep(RunArgs),
    /// Sweeps for several methods on one dataset, plus the log-transform reference.
    Compare(CompareArgs),
    /// Renders an existing report as an entropy triangle.
    Plot(PlotArgs),
}

/// Run settings. Every field may come from a `--config` JSON file; flags
/// given on the command line win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "snake_case")]
pub struct RunArgs {
    /// JSON config file with any of these settings.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// CSV file, or the name of a bundled dataset.
    #[arg(long)]
    pub input: Option<String>,
    /// Bundled dataset name.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Schema JSON for the input CSV.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub class_column: Option<String>,
    /// fail | drop_row
    #[arg(long, value_parser = parse_na_policy)]
    pub na_policy: Option<NaPolicy>,
    /// none | log | pca | ica
    #[arg(long)]
    pub transform: Option<Transform>,
    /// Take logarithms of the features before PCA or ICA.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log: Option<bool>,
    /// Shift columns with non-positive values before taking logarithms.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log_shift: Option<bool>,
    /// equal-frequency | equal-width
    #[arg(long)]
    pub disc: Option<Strategy>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// codebook | observed
    #[arg(long)]
    pub support: Option<Support>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub maxit: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated column names of the X block.
    #[arg(long, value_delimiter = ',')]
    pub partition_x: Option<Vec<String>>,
    /// Comma-separated column names of the Y block.
    #[arg(long, value_delimiter = ',')]
    pub partition_y: Option<Vec<String>>,
    /// Square confusion-matrix CSV (rows: true class, columns: predicted).
    #[arg(long)]
    pub confusion: Option<PathBuf>,
    #[arg(long)]
    pub out_report: Option<PathBuf>,
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
}

fn parse_na_policy(s: &str) -> std::result::Result<NaPolicy, String> {
    match s {
        "fail" => Ok(NaPolicy::Fail),
        "drop_row" | "drop-row" => Ok(NaPolicy::DropRow),
        other => Err(format!(
            "unknown NA policy `{other}` (expected fail or drop_row)"
        )),
    }
}

macro_rules! overlay {
    ($top:expr, $base:expr; $($f:ident),*) => {
        RunArgs { config: None, $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunArgs {
    /// Settings from `--config` with the command-line flags laid on top.
    pub fn resolve(self) -> Result<RunArgs> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let file = read_config(path)?;
        Ok(
            overlay!(self, file; input, builtin, schema, class_column, na_policy, transform, log,
            log_shift, disc, bins, support, seed, maxit, tol, alpha, partition_x, partition_y,
            confusion, out_report, out_svg),
        )
    }

    fn discretization(&self) -> Discretization {
        Discretization {
            strategy: self.disc.unwrap_or_default(),
            bins: self.bins,
        }
    }

    fn ica_params(&self) -> IcaParams {
        let d = IcaParams::default();
        IcaParams {
            alpha: self.alpha.unwrap_or(d.alpha),
            maxit: self.maxit.unwrap_or(d.maxit),
            tol: self.tol.unwrap_or(d.tol),
        }
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(17)
    }

    fn load(&self) -> Result<DataTable> {
        let name = match (&self.input, &self.builtin) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either --input or --builtin, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "no dataset: give --input or --builtin".into(),
                ))
            }
            (None, Some(b)) => return builtin(b),
            (Some(i), None) => i,
        };
        let path = Path::new(name);
        if !path.exists() && BUILTIN_DATASETS.contains(&name.as_str()) {
            return builtin(name);
        }
        let schema = self.schema.as_deref().map(Schema::from_path).transpose()?;
        let options = CsvOptions {
            class_column: self.class_column.clone(),
            na_policy: self.na_policy.unwrap_or_default(),
            schema,
            ..CsvOptions::default()
        };
        load_csv(path, &options)
    }

    fn sweep_settings(&self, method: RankingMethod) -> SweepSettings {
        SweepSettings {
            method,
            log: self.log.unwrap_or(false),
            log_shift: self.log_shift.unwrap_or(false),
            disc: self.discretization(),
            support: self.support.unwrap_or_default(),
            ica: self.ica_params(),
            seed: self.seed(),
        }
    }
}

fn read_config(path: &Path) -> Result<RunArgs> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated methods to compare (pca, ica).
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<RankingMethod>>,
    /// One config file per method; repeat the flag. Shared flags take precedence.
    #[arg(long = "method-config")]
    pub method_configs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Report CSV written by measure, sweep or compare.
    #[arg(long)]
    pub report: PathBuf,
    /// aggregate | split | combined
    #[arg(long, default_value = "aggregate")]
    pub kind: String,
    #[arg(long)]
    pub title: Option<String>,
    /// Grid spacing: 0.1, 0.2 or 0.25.
    #[arg(long, default_value_t = 0.2)]
    pub grid: f64,
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Measure(args) => cmd_measure(&args.resolve()?),
        Command::Sweep(args) => cmd_sweep(&args.resolve()?),
        Command::Compare(args) => cmd_compare(args),
        Command::Plot(args) => cmd_plot(&args),
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn emit_report(rows: &[ReportRow], path: Option<&Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_report(rows, &mut buf)?;
    write_output(path, &buf)
}

fn emit_svg(spec: &PlotSpec, path: &Path) -> Result<()> {
    let svg = render_svg(spec)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

fn names(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Balance coordinates for the configured partition.
pub fn cmd_measure(args: &RunArgs) -> Result<()> {
    let rows = measure_rows(args)?;
    emit_report(&rows, args.out_report.as_deref())?;
    if let Some(svg) = &args.out_svg {
        emit_svg(
            &plot_rows(&rows, PlotKind::Combined, &rows[0].dataset)?,
            svg,
        )?;
    }
    Ok(())
}

pub fn measure_rows(args: &RunArgs) -> Result<Vec<ReportRow>> {
    if let Some(path) = &args.confusion {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let report = cbet_from_confusion(&read_confusion(file)?)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "confusion".into());
        return Ok(report_rows(&name, "confusion", 1, &report).to_vec());
    }

    let table = args.load()?;
    let disc = args.discretization();
    let support = args.support.unwrap_or_default();
    let transform = args.transform.unwrap_or_default();
    let explicit = args.partition_x.is_some() || args.partition_y.is_some();

    if transform == Transform::None {
        let (x, y): (Vec<&str>, Vec<&str>) = if explicit {
            match (&args.partition_x, &args.partition_y) {
                (Some(x), Some(y)) => (names(x), names(y)),
                (Some(x), None) => {
                    let y = table
                        .column_names()
                        .into_iter()
                        .filter(|n| !x.iter().any(|s| s == n))
                        .collect();
                    (names(x), y)
                }
                _ => return Err(Error::Config("--partition-y needs --partition-x".into())),
            }
        } else {
            let class = table.class_column().ok_or_else(|| {
                Error::Config(
                    "the dataset has no class column; give --class-column or an explicit partition"
                        .into(),
                )
            })?;
            let feats = table.features().map(|c| c.desc.name.as_str()).collect();
            (feats, vec![class.desc.name.as_str()])
        };
        let report = measure_columns(&table, &x, &y, disc, support)?;
        return Ok(report_rows(&table.name, "none", 1, &report).to_vec());
    }

    // features against their transformed versions
    if args.partition_y.is_some() {
        return Err(Error::Config(
            "--partition-y cannot be combined with a transform".into(),
        ));
    }
    let features = match &args.partition_x {
        Some(x) => names(x),
        None => numeric_feature_names(&table),
    };
    if features.is_empty() {
        return Err(Error::Config("no numeric features to transform".into()));
    }
    let shift = args.log_shift.unwrap_or(false);
    let (label, report) = match transform.ranking() {
        None => (
            "log".to_string(),
            log_reference(&table, &features, disc, support, shift)?,
        ),
        Some(method) => {
            let settings = args.sweep_settings(method);
            let raw = table.numeric_matrix(&features)?;
            let input = if settings.log {
                log_transform(raw.view(), shift)?.data
            } else {
                raw
            };
            let n = features.len();
            let scores = match method {
                RankingMethod::Pca => {
                    let model = pca_fit(input.view())?;
                    model.project(input.view(), n)?
                }
                RankingMethod::Ica => fastica(input.view(), n, settings.ica, settings.seed)?
                    .transform(input.view())?,
            };
            let x = discretize_columns(&table, &features, disc)?;
            let y = discretize_matrix(scores.view(), "Y", disc)?;
            let (joint, part) = partitioned_joint(&x, &y, support)?;
            (settings.transform_label(), balance_report(&joint, &part)?)
        }
    };
    Ok(report_rows(&table.name, &label, features.len(), &report).to_vec())
}

fn sweep_method(args: &RunArgs) -> Result<RankingMethod> {
    args.transform
        .and_then(Transform::ranking)
        .ok_or_else(|| Error::Config("sweep needs --transform pca or --transform ica".into()))
}

fn sweep_features(args: &RunArgs, table: &DataTable) -> Vec<String> {
    match &args.partition_x {
        Some(x) => x.clone(),
        None => numeric_feature_names(table)
            .into_iter()
            .map(String::from)
            .collect(),
    }
}

/// Feature selection sweep for one method.
pub fn cmd_sweep(args: &RunArgs) -> Result<()> {
    let method = sweep_method(args)?;
    let table = args.load()?;
    let features = sweep_features(args, &table);
    let result = run_sweep(&table, &names(&features), &args.sweep_settings(method))?;
    let rows = result.rows();
    emit_report(&rows, args.out_report.as_deref())?;
    if let Some(svg) = &args.out_svg {
        let title = format!("{} {}", result.dataset, result.transform);
        emit_svg(&plot_rows(&rows, PlotKind::Combined, &title)?, svg)?;
    }
    for (i, e) in &result.failures {
        log::error!("step i={i} failed: {e}");
    }
    match result.failures.into_iter().next() {
        Some((_, e)) => Err(e),
        None => Ok(()),
    }
}

/// Runs one sweep per method and the log reference; all methods must share
/// the dataset and discretization.
pub fn cmd_compare(args: CompareArgs) -> Result<()> {
    let base = args.run.resolve()?;
    let configs: Vec<RunArgs> =
        if args.method_configs.is_empty() {
            let methods = match &args.methods {
                Some(m) => m.clone(),
                None => vec![sweep_method(&base)?],
            };
            methods
                .into_iter()
                .map(|m| RunArgs {
                    transform: Some(if m == RankingMethod::Pca {
                        Transform::Pca
                    } else {
                        Transform::Ica
                    }),
                    ..base.clone()
                })
                .collect()
        } else {
            args.method_configs
            .iter()
            .map(|p| {
                let file = read_config(p)?;
                Ok(overlay!(base.clone(), file; input, builtin, schema, class_column, na_policy,
                    transform, log, log_shift, disc, bins, support, seed, maxit, tol, alpha,
                    partition_x, partition_y, confusion, out_report, out_svg))
            })
            .collect::<Result<_>>()?
        };
    let first = &configs[0];
    for c in &configs[1..] {
        let same = c.input == first.input
            && c.builtin == first.builtin
            && c.schema == first.schema
            && c.partition_x == first.partition_x
            && c.disc.unwrap_or_default() == first.disc.unwrap_or_default()
            && c.bins == first.bins
            && c.support.unwrap_or_default() == first.support.unwrap_or_default()
            && c.log.unwrap_or(false) == first.log.unwrap_or(false);
        if !same {
            return Err(Error::Config(
                "compared methods must share the dataset, features, discretization and log setting"
                    .into(),
            ));
        }
    }

    let table = first.load()?;
    let features = sweep_features(first, &table);
    let features = names(&features);
    let mut rows = Vec::new();
    let mut failure = None;
    let mut spec = PlotSpec::new(
        format!("{}: method comparison", table.name),
        PlotKind::Aggregate,
    );
    for (k, cfg) in configs.iter().enumerate() {
        let method = sweep_method(cfg)?;
        let result = run_sweep(&table, &features, &cfg.sweep_settings(method))?;
        let glyph = match method {
            RankingMethod::Pca => Glyph::FilledCircle,
            RankingMethod::Ica => Glyph::FilledTriangle,
        };
        for (i, r) in &result.steps {
            spec.points.push(PlotPoint {
                coord: r.aggregate_coord,
                label: format!("1_{i}"),
                series: result.transform.clone(),
                glyph,
                color: SERIES_COLORS[k % SERIES_COLORS.len()].to_string(),
            });
        }
        rows.extend(result.rows());
        for (i, e) in result.failures {
            log::error!("{} step i={i} failed: {e}", result.transform);
            failure.get_or_insert(e);
        }
    }

    let reference = log_reference(
        &table,
        &features,
        first.discretization(),
        first.support.unwrap_or_default(),
        first.log_shift.unwrap_or(false),
    )?;
    rows.extend(report_rows(&table.name, "log", features.len(), &reference));
    spec.points.push(PlotPoint {
        coord: reference.aggregate_coord,
        label: "log".into(),
        series: "log (reference)".into(),
        glyph: Glyph::Cross,
        color: "#000000".into(),
    });

    emit_report(&rows, base.out_report.as_deref())?;
    if let Some(svg) = &base.out_svg {
        emit_svg(&spec, svg)?;
    }
    failure.map_or(Ok(()), Err)
}

/// Renders a report CSV.
pub fn cmd_plot(args: &PlotArgs) -> Result<()> {
    let kind = match args.kind.as_str() {
        "aggregate" => PlotKind::Aggregate,
        "split" => PlotKind::Split,
        "combined" => PlotKind::Combined,
        other => {
            return Err(Error::Argument(format!(
                "unknown plot kind `{other}` (expected aggregate, split or combined)"
            )))
        }
    };
    let file = fs::File::open(&args.report).map_err(|e| Error::io(&args.report, e))?;
    let rows = read_report(file)?;
    let title = args.title.clone().unwrap_or_else(|| {
        rows.first()
            .map_or_else(|| "entropy triangle".to_string(), |r| r.dataset.clone())
    });
    let mut spec = plot_rows(&rows, kind, &title)?;
    spec.grid_step = args.grid;
    let svg = render_svg(&spec)?;
    write_output(args.out_svg.as_deref(), svg.as_bytes())
}
