//! End-to-end workflows: discretize a table, build partitioned joints, run
//! the balance equations and collect coordinate report rows.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balance::{balance_report, BalanceReport, CoordKind, TriangleCoord};
use crate::dataset::{ColumnValues, DataTable};
use crate::discretize::{
    default_bins, encode_categorical, encode_with_levels, fit_discretize, Codebook, Strategy,
};
use crate::entropy::{JointDistribution, Partition};
use crate::error::{Error, Result};
use crate::plot::{Glyph, PlotKind, PlotPoint, PlotSpec};
use crate::transforms::{log_transform, ranking_sweep, IcaParams, RankingMethod};

/// Which cardinality the uniform reference uses for each variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Support {
    /// Size of the variable's codebook, unobserved codes included.
    #[default]
    Codebook,
    /// Number of distinct codes actually observed.
    Observed,
}

impl FromStr for Support {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "codebook" => Ok(Support::Codebook),
            "observed" => Ok(Support::Observed),
            other => Err(format!(
                "unknown support mode `{other}` (expected codebook or observed)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Discretization {
    pub strategy: Strategy,
    /// Bins per variable; `None` picks [`default_bins`] for the row count.
    pub bins: Option<usize>,
}

impl Discretization {
    pub fn bins_for(&self, m: usize) -> usize {
        self.bins.unwrap_or_else(|| default_bins(m))
    }
}

/// A discretized variable ready to enter a joint distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteVar {
    pub codebook: Codebook,
    pub codes: Vec<u32>,
}

impl DiscreteVar {
    pub fn name(&self) -> &str {
        &self.codebook.variable
    }
}

/// Discretizes the named table columns: numeric columns are binned,
/// categorical ones encoded by sorted label.
pub fn discretize_columns(
    table: &DataTable,
    names: &[&str],
    disc: Discretization,
) -> Result<Vec<DiscreteVar>> {
    let bins = disc.bins_for(table.m());
    names
        .iter()
        .map(|name| {
            let col = table
                .column(name)
                .ok_or_else(|| table.unknown_column(name))?;
            let (codebook, codes) = match &col.values {
                ColumnValues::Numeric(v) => fit_discretize(name, v, disc.strategy, bins)?,
                ColumnValues::Categorical(v) => match &col.desc.levels {
                    Some(levels) => encode_with_levels(name, v, levels)?,
                    None => encode_categorical(name, v)?,
                },
            };
            Ok(DiscreteVar { codebook, codes })
        })
        .collect()
}

/// Discretizes every column of a matrix, naming them `{prefix}1`, `{prefix}2`, ...
pub fn discretize_matrix(
    data: ArrayView2<f64>,
    prefix: &str,
    disc: Discretization,
) -> Result<Vec<DiscreteVar>> {
    let bins = disc.bins_for(data.nrows());
    data.columns()
        .into_iter()
        .enumerate()
        .map(|(j, col)| {
            let name = format!("{prefix}{}", j + 1);
            let values = col.to_vec();
            let (codebook, codes) = fit_discretize(&name, &values, disc.strategy, bins)?;
            Ok(DiscreteVar { codebook, codes })
        })
        .collect()
}

/// Joint distribution of the X variables followed by the Y variables.
pub fn partitioned_joint(
    x: &[DiscreteVar],
    y: &[DiscreteVar],
    support: Support,
) -> Result<(JointDistribution, Partition)> {
    let vars: Vec<&DiscreteVar> = x.iter().chain(y).collect();
    let names = vars.iter().map(|v| v.name().to_string()).collect();
    let columns: Vec<&[u32]> = vars.iter().map(|v| v.codes.as_slice()).collect();
    let cards: Vec<u32> = vars.iter().map(|v| v.codebook.cardinality).collect();
    let joint = JointDistribution::from_columns(names, &columns, &cards)?;
    let joint = match support {
        Support::Codebook => joint,
        Support::Observed => joint.compacted(),
    };
    Ok((joint, Partition::split_at(x.len(), vars.len())?))
}

/// One line of a coordinate report.
///
/// On `XY` rows `Info_prime` holds `2I / H_U` and `Info_bits` holds `I`;
/// on `X`/`Y` rows `Info_prime` is `I / H_U(side)` and `VI_bits` is the
/// conditional entropy of that side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub transform: String,
    pub i: usize,
    pub side: String,
    #[serde(rename = "H_U_bits")]
    pub h_u_bits: f64,
    #[serde(rename = "DeltaH_prime")]
    pub delta_prime: f64,
    #[serde(rename = "Info_prime")]
    pub info_prime: f64,
    #[serde(rename = "VI_prime")]
    pub vi_prime: f64,
    #[serde(rename = "DeltaH_bits")]
    pub delta_bits: f64,
    #[serde(rename = "Info_bits")]
    pub info_bits: f64,
    #[serde(rename = "VI_bits")]
    pub vi_bits: f64,
}

impl ReportRow {
    pub fn kind(&self) -> Result<CoordKind> {
        CoordKind::from_tag(&self.side)
            .ok_or_else(|| Error::Data(format!("unknown side `{}` in report", self.side)))
    }

    pub fn coord(&self) -> Result<TriangleCoord> {
        TriangleCoord::new(
            self.delta_prime,
            self.info_prime,
            self.vi_prime,
            self.kind()?,
        )
    }
}

/// Report rows for one balance report, in the order X, Y, XY.
pub fn report_rows(dataset: &str, transform: &str, i: usize, r: &BalanceReport) -> [ReportRow; 3] {
    let split = |d: &crate::balance::SplitDecomposition, c: &TriangleCoord| ReportRow {
        dataset: dataset.to_string(),
        transform: transform.to_string(),
        i,
        side: c.kind.tag().to_string(),
        h_u_bits: d.h_u,
        delta_prime: c.delta,
        info_prime: c.info,
        vi_prime: c.vi,
        delta_bits: d.delta_h,
        info_bits: d.binding,
        vi_bits: d.h_cond,
    };
    let a = &r.aggregate;
    let c = &r.aggregate_coord;
    [
        split(&r.split_x, &r.split_x_coord),
        split(&r.split_y, &r.split_y_coord),
        ReportRow {
            dataset: dataset.to_string(),
            transform: transform.to_string(),
            i,
            side: CoordKind::Aggregate.tag().to_string(),
            h_u_bits: a.h_u_total,
            delta_prime: c.delta,
            info_prime: c.info,
            vi_prime: c.vi,
            delta_bits: a.delta_h,
            info_bits: a.binding,
            vi_bits: a.vi,
        },
    ]
}

pub fn write_report<W: Write>(rows: &[ReportRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if rows.is_empty() {
        w.write_record([
            "dataset",
            "transform",
            "i",
            "side",
            "H_U_bits",
            "DeltaH_prime",
            "Info_prime",
            "VI_prime",
            "DeltaH_bits",
            "Info_bits",
            "VI_bits",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<report output>", e))?;
    Ok(())
}

pub fn read_report<R: Read>(reader: R) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<ReportRow>, _>>()
        .map_err(|e| Error::Data(format!("malformed report: {e}")))?;
    Ok(rows)
}

/// Balance report for an explicit partition of table columns.
pub fn measure_columns(
    table: &DataTable,
    x_names: &[&str],
    y_names: &[&str],
    disc: Discretization,
    support: Support,
) -> Result<BalanceReport> {
    if x_names.is_empty() || y_names.is_empty() {
        return Err(Error::Config(
            "both partition sides need at least one column".into(),
        ));
    }
    if let Some(dup) = x_names.iter().find(|n| y_names.contains(n)) {
        return Err(Error::Config(format!(
            "column `{dup}` is on both sides of the partition"
        )));
    }
    let x = discretize_columns(table, x_names, disc)?;
    let y = discretize_columns(table, y_names, disc)?;
    let (joint, part) = partitioned_joint(&x, &y, support)?;
    balance_report(&joint, &part)
}

/// Feature transformation applied to build the Y block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    #[default]
    None,
    Log,
    Pca,
    Ica,
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::None => "none",
            Transform::Log => "log",
            Transform::Pca => "pca",
            Transform::Ica => "ica",
        })
    }
}

impl FromStr for Transform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Transform::None),
            "log" => Ok(Transform::Log),
            "pca" => Ok(Transform::Pca),
            "ica" => Ok(Transform::Ica),
            other => Err(format!(
                "unknown transform `{other}` (expected none, log, pca or ica)"
            )),
        }
    }
}

impl Transform {
    pub fn ranking(self) -> Option<RankingMethod> {
        match self {
            Transform::Pca => Some(RankingMethod::Pca),
            Transform::Ica => Some(RankingMethod::Ica),
            _ => None,
        }
    }
}

/// Settings shared by transformation sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub method: RankingMethod,
    /// Take logarithms of the features before the transformation.
    pub log: bool,
    pub log_shift: bool,
    pub disc: Discretization,
    pub support: Support,
    pub ica: IcaParams,
    pub seed: u64,
}

impl SweepSettings {
    pub fn new(method: RankingMethod) -> Self {
        SweepSettings {
            method,
            log: false,
            log_shift: false,
            disc: Discretization::default(),
            support: Support::default(),
            ica: IcaParams::default(),
            seed: 17,
        }
    }

    pub fn transform_label(&self) -> String {
        if self.log {
            format!("log+{}", self.method)
        } else {
            self.method.to_string()
        }
    }
}

/// Per-step results of a sweep.
#[derive(Debug)]
pub struct SweepResult {
    pub dataset: String,
    pub transform: String,
    /// Successful steps in order of `i`.
    pub steps: Vec<(usize, BalanceReport)>,
    /// Steps that failed, with the error tagged by `i`.
    pub failures: Vec<(usize, Error)>,
}

impl SweepResult {
    pub fn rows(&self) -> Vec<ReportRow> {
        self.steps
            .iter()
            .flat_map(|(i, r)| report_rows(&self.dataset, &self.transform, *i, r))
            .collect()
    }
}

/// Numeric feature columns of a table, in order.
pub fn numeric_feature_names(table: &DataTable) -> Vec<&str> {
    table
        .features()
        .filter(|c| matches!(c.values, ColumnValues::Numeric(_)))
        .map(|c| c.desc.name.as_str())
        .collect()
}

fn preprocess(raw: &Array2<f64>, log: bool, shift: bool) -> Result<Array2<f64>> {
    if log {
        Ok(log_transform(raw.view(), shift)?.data)
    } else {
        Ok(raw.clone())
    }
}

/// Feature selection sweep: X is the discretized original features, `Y_i`
/// the first `i` transformed features, discretized the same way.
pub fn run_sweep(
    table: &DataTable,
    features: &[&str],
    settings: &SweepSettings,
) -> Result<SweepResult> {
    if features.is_empty() {
        return Err(Error::Config(
            "the sweep needs at least one numeric feature".into(),
        ));
    }
    let raw = table.numeric_matrix(features)?;
    let x = discretize_columns(table, features, settings.disc)?;
    let input = preprocess(&raw, settings.log, settings.log_shift)?;
    let n = features.len();
    let outcome = ranking_sweep(
        input.view(),
        settings.method,
        n,
        settings.ica,
        settings.seed,
    )?;

    let measured: Vec<(usize, Result<BalanceReport>)> = outcome
        .into_par_iter()
        .enumerate()
        .map(|(idx, step)| {
            let i = idx + 1;
            let report = step.and_then(|s| {
                let y = discretize_matrix(s.scores.view(), "Y", settings.disc)?;
                let (joint, part) = partitioned_joint(&x, &y, settings.support)?;
                balance_report(&joint, &part)
            });
            (
                i,
                report.map_err(|e| e.context(format!("sweep step i={i}"))),
            )
        })
        .collect();

    let mut steps = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in measured {
        match r {
            Ok(r) => steps.push((i, r)),
            Err(e) => failures.push((i, e)),
        }
    }
    Ok(SweepResult {
        dataset: table.name.clone(),
        transform: settings.transform_label(),
        steps,
        failures,
    })
}

/// The lossless reference: original features against their logarithms.
pub fn log_reference(
    table: &DataTable,
    features: &[&str],
    disc: Discretization,
    support: Support,
    shift: bool,
) -> Result<BalanceReport> {
    let raw = table.numeric_matrix(features)?;
    let x = discretize_columns(table, features, disc)?;
    let logged = log_transform(raw.view(), shift)?.data;
    let y = discretize_matrix(logged.view(), "logX", disc)?;
    let (joint, part) = partitioned_joint(&x, &y, support)?;
    balance_report(&joint, &part)
}

/// Reads a square confusion matrix of non-negative integer counts. A first
/// line that does not parse as numbers is taken as a header and skipped.
pub fn read_confusion<R: Read>(reader: R) -> Result<Vec<Vec<u64>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (idx, record) in r.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let parsed: std::result::Result<Vec<u64>, _> =
            record.iter().map(|c| c.trim().parse::<u64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if idx == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    line,
                    message: format!("confusion counts must be non-negative integers: {e}"),
                })
            }
        }
    }
    Ok(rows)
}

/// Palette for plot series, cycled in order of first appearance.
pub const SERIES_COLORS: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Plot of report rows.
///
/// `Aggregate` keeps the `XY` rows as filled circles, `Split` keeps `X` rows
/// as crosses and `Y` rows as circles, `Combined` draws all three. Colors
/// follow the transform column.
pub fn plot_rows(rows: &[ReportRow], kind: PlotKind, title: &str) -> Result<PlotSpec> {
    let mut spec = PlotSpec::new(title, kind);
    let mut series: Vec<&str> = Vec::new();
    for r in rows {
        let coord = r.coord()?;
        let glyph = match (kind, coord.kind) {
            (PlotKind::Aggregate, CoordKind::Aggregate)
            | (PlotKind::Combined, CoordKind::Aggregate) => Glyph::FilledCircle,
            (PlotKind::Split, CoordKind::SplitX) | (PlotKind::Combined, CoordKind::SplitX) => {
                Glyph::Cross
            }
            (PlotKind::Split, CoordKind::SplitY) | (PlotKind::Combined, CoordKind::SplitY) => {
                Glyph::Circle
            }
            _ => continue,
        };
        let idx = series
            .iter()
            .position(|s| *s == r.transform)
            .unwrap_or_else(|| {
                series.push(&r.transform);
                series.len() - 1
            });
        spec.points.push(PlotPoint {
            coord,
            label: format!("1_{}", r.i),
            series: format!("{} ({})", r.transform, r.side),
            glyph,
            color: SERIES_COLORS[idx % SERIES_COLORS.len()].to_string(),
        });
    }
    Ok(spec)
}
