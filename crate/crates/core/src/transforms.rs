//! Feature transformations: element-wise log, PCA and FastICA, plus the
//! ranked selection sweep that feeds growing feature subsets to the balance
//! equations.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{center, covariance, symmetric_decorrelation, symmetric_eigen};

/// Result of [`log_transform`]: the transformed matrix and, per column, the
/// minimum that was subtracted when the column had to be shifted.
#[derive(Debug, Clone)]
pub struct LogTransformed {
    pub data: Array2<f64>,
    pub shifts: Vec<Option<f64>>,
}

/// Element-wise natural logarithm.
///
/// With `shift` enabled, columns holding a non-positive value are mapped by
/// `x -> ln(x - min + 1)` instead, so their minimum becomes 0.
pub fn log_transform(data: ArrayView2<f64>, shift: bool) -> Result<LogTransformed> {
    let mut out = data.to_owned();
    let mut shifts = vec![None; data.ncols()];
    for (c, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
        if let Some(r) = col.iter().position(|x| !x.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value at row {r}, column {c}"
            )));
        }
        let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            col.mapv_inplace(f64::ln);
        } else if shift {
            col.mapv_inplace(|x| (x - min + 1.0).ln());
            shifts[c] = Some(min);
        } else {
            let r = col.iter().position(|&x| x <= 0.0).unwrap_or(0);
            return Err(Error::Data(format!(
                "cannot take the logarithm of {} at row {r}, column {c} (enable shifting for non-positive columns)",
                col[r]
            )));
        }
    }
    Ok(LogTransformed { data: out, shifts })
}

/// Principal components of a data matrix.
#[derive(Debug, Clone)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// One orthonormal direction per row, by nonincreasing eigenvalue.
    pub components: Array2<f64>,
    pub eigenvalues: Array1<f64>,
}

/// Fits PCA by eigen-decomposition of the sample covariance (divisor `m - 1`).
///
/// Components are ordered by nonincreasing eigenvalue, ties broken by
/// original axis index, and each is signed so its largest-magnitude entry is
/// positive.
pub fn pca_fit(data: ArrayView2<f64>) -> Result<PcaModel> {
    let (m, n) = data.dim();
    if m < 2 {
        return Err(Error::Argument(format!(
            "PCA needs at least 2 rows, got {m}"
        )));
    }
    if n == 0 {
        return Err(Error::Argument("PCA needs at least one column".into()));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("PCA input contains non-finite values".into()));
    }
    let (mean, centered) = center(data);
    let cov = covariance(centered.view());
    let (vals, vecs) = symmetric_eigen(cov.view())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));

    let mut components = Array2::zeros((n, n));
    for (row, &k) in order.iter().enumerate() {
        let mut v = vecs.column(k).to_owned();
        let pivot = v
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, &x)| {
                if x.abs() > bv {
                    (i, x.abs())
                } else {
                    (bi, bv)
                }
            })
            .0;
        if v[pivot] < 0.0 {
            v.mapv_inplace(|x| -x);
        }
        components.row_mut(row).assign(&v);
    }
    let eigenvalues = order.iter().map(|&k| vals[k]).collect();
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
    })
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Scores on the first `k` components.
    pub fn project(&self, data: ArrayView2<f64>, k: usize) -> Result<Array2<f64>> {
        if k == 0 || k > self.dim() {
            return Err(Error::Argument(format!(
                "number of components must be in 1..={}, got {k}",
                self.dim()
            )));
        }
        if data.ncols() != self.dim() {
            return Err(Error::Argument(format!(
                "data has {} columns, model expects {}",
                data.ncols(),
                self.dim()
            )));
        }
        let centered = &data - &self.mean.view().insert_axis(Axis(0));
        Ok(centered.dot(&self.components.slice(s![..k, ..]).t()))
    }

    /// Maps scores on the first `scores.ncols()` components back to data space.
    pub fn back_project(&self, scores: ArrayView2<f64>) -> Array2<f64> {
        let k = scores.ncols();
        scores.dot(&self.components.slice(s![..k, ..])) + self.mean.view().insert_axis(Axis(0))
    }
}

/// FastICA parameters. Defaults: log-cosh contrast with `alpha = 1`,
/// `maxit = 200`, `tol = 1e-4`, symmetric (parallel) extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcaParams {
    pub alpha: f64,
    pub maxit: usize,
    pub tol: f64,
}

impl Default for IcaParams {
    fn default() -> Self {
        IcaParams {
            alpha: 1.0,
            maxit: 200,
            tol: 1e-4,
        }
    }
}

/// A fitted FastICA model; sources are `W K (x - mean)`.
#[derive(Debug, Clone)]
pub struct IcaModel {
    pub mean: Array1<f64>,
    /// `k x n` whitening matrix.
    pub whitening: Array2<f64>,
    /// `k x k` unmixing matrix in whitened space, orthonormal rows.
    pub unmixing: Array2<f64>,
    pub components: usize,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

impl IcaModel {
    /// Estimated sources, one column per component.
    pub fn transform(&self, data: ArrayView2<f64>) -> Result<Array2<f64>> {
        if data.ncols() != self.mean.len() {
            return Err(Error::Argument(format!(
                "data has {} columns, model expects {}",
                data.ncols(),
                self.mean.len()
            )));
        }
        let centered = &data - &self.mean.view().insert_axis(Axis(0));
        Ok(centered.dot(&self.whitening.t()).dot(&self.unmixing.t()))
    }
}

/// Symmetric FastICA with the log-cosh contrast.
///
/// Data are centered but not variance-scaled, then whitened through the
/// principal components. The unmixing matrix starts from a seeded Gaussian
/// draw and is re-orthonormalized after every fixed-point step. Iteration
/// stops once `max_i | |<w_i new, w_i old>| - 1 | < tol` or after `maxit`
/// steps; running out of steps yields a model flagged as not converged.
pub fn fastica(data: ArrayView2<f64>, k: usize, params: IcaParams, seed: u64) -> Result<IcaModel> {
    let (m, n) = data.dim();
    if k == 0 || k > n {
        return Err(Error::Argument(format!(
            "number of components must be in 1..={n}, got {k}"
        )));
    }
    if m <= n {
        return Err(Error::Argument(format!(
            "FastICA needs more rows than columns ({m} <= {n})"
        )));
    }
    if !(1.0..=2.0).contains(&params.alpha) {
        return Err(Error::Argument(format!(
            "alpha must lie in [1, 2], got {}",
            params.alpha
        )));
    }
    if params.maxit == 0 || params.tol.is_nan() || params.tol <= 0.0 {
        return Err(Error::Argument("maxit and tol must be positive".into()));
    }

    let pca = pca_fit(data)?;
    let max_eig = pca.eigenvalues[0];
    let usable = pca
        .eigenvalues
        .iter()
        .take_while(|&&l| l > 1e-12 * max_eig && max_eig > 0.0)
        .count();
    if usable < k {
        return Err(Error::Data(format!(
            "whitening is rank deficient: only {usable} usable components, {k} requested"
        )));
    }
    let mut whitening = pca.components.slice(s![..k, ..]).to_owned();
    for (mut row, &l) in whitening.axis_iter_mut(Axis(0)).zip(pca.eigenvalues.iter()) {
        row.mapv_inplace(|x| x / l.sqrt());
    }
    let centered = &data - &pca.mean.view().insert_axis(Axis(0));
    // k x m whitened data
    let z = whitening.dot(&centered.t());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = Array2::from_shape_fn((k, k), |_| StandardNormal.sample(&mut rng));
    let mut w = symmetric_decorrelation(&init)?;

    let alpha = params.alpha;
    let mf = m as f64;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.maxit {
        iterations += 1;
        let g = w.dot(&z).mapv(|u| (alpha * u).tanh());
        let v1 = g.dot(&z.t()) / mf;
        let gp = g
            .mapv(|t| alpha * (1.0 - t * t))
            .mean_axis(Axis(1))
            .expect("m > 0");
        let v2 = &w * &gp.view().insert_axis(Axis(1));
        let w_new = symmetric_decorrelation(&(v1 - v2))?;
        let lim = w_new
            .dot(&w.t())
            .diag()
            .iter()
            .map(|d| (d.abs() - 1.0).abs())
            .fold(0.0, f64::max);
        w = w_new;
        if lim < params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "FastICA with {k} components did not converge within {} iterations",
            params.maxit
        );
    }
    Ok(IcaModel {
        mean: pca.mean,
        whitening,
        unmixing: w,
        components: k,
        iterations,
        converged,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankingMethod {
    Pca,
    Ica,
}

impl fmt::Display for RankingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankingMethod::Pca => "pca",
            RankingMethod::Ica => "ica",
        })
    }
}

impl FromStr for RankingMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pca" => Ok(RankingMethod::Pca),
            "ica" => Ok(RankingMethod::Ica),
            other => Err(format!(
                "unknown ranking method `{other}` (expected pca or ica)"
            )),
        }
    }
}

/// One candidate feature set of a sweep: the first `i` ranked features.
#[derive(Debug, Clone)]
pub struct SweepStep {
    pub i: usize,
    pub scores: Array2<f64>,
}

/// Outcome of every step of a sweep, in order of `i`. A failing step does
/// not prevent later steps from running.
pub type SweepOutcome = Vec<Result<SweepStep>>;

/// Builds the candidate feature sets `Y_1 .. Y_max_i`.
///
/// PCA is fitted once and `Y_i` is the first `i` score columns, so the sets
/// are nested. FastICA has no ranking; each `Y_i` comes from an independent
/// run with `i` components seeded with `seed + i`.
pub fn ranking_sweep(
    data: ArrayView2<f64>,
    method: RankingMethod,
    max_i: usize,
    params: IcaParams,
    seed: u64,
) -> Result<SweepOutcome> {
    let n = data.ncols();
    if max_i == 0 || max_i > n {
        return Err(Error::Argument(format!(
            "max_i must be in 1..={n}, got {max_i}"
        )));
    }
    match method {
        RankingMethod::Pca => {
            let model = pca_fit(data)?;
            let full = model.project(data, max_i)?;
            Ok((1..=max_i)
                .map(|i| {
                    Ok(SweepStep {
                        i,
                        scores: full.slice(s![.., ..i]).to_owned(),
                    })
                })
                .collect())
        }
        RankingMethod::Ica => Ok((1..=max_i)
            .into_par_iter()
            .map(|i| {
                let model = fastica(data, i, params, seed.wrapping_add(i as u64))
                    .map_err(|e| e.context(format!("ica sweep step i={i}")))?;
                let scores = model.transform(data)?;
                Ok(SweepStep { i, scores })
            })
            .collect()),
    }
}
