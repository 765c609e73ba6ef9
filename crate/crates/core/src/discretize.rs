//! Turning feature columns into discrete codes.
//!
//! Continuous columns are binned by equal width or equal frequency;
//! categorical columns map each distinct label to its rank in sorted order.
//! Bins are half-open `[lo, hi)` except the last, which is closed.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper limit on the default per-variable bin count.
pub const MAX_DEFAULT_BINS: usize = 32;

/// Default bin count for `m` rows: `ceil(sqrt(m))`, between 2 and [`MAX_DEFAULT_BINS`].
pub fn default_bins(m: usize) -> usize {
    ((m as f64).sqrt().ceil() as usize).clamp(2, MAX_DEFAULT_BINS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    EqualWidth,
    #[default]
    EqualFrequency,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::EqualWidth => "equal-width",
            Strategy::EqualFrequency => "equal-frequency",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equal-width" | "width" => Ok(Strategy::EqualWidth),
            "equal-frequency" | "frequency" | "quantile" => Ok(Strategy::EqualFrequency),
            other => Err(format!(
                "unknown discretization strategy `{other}` (expected equal-width or equal-frequency)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CodebookKind {
    /// Interior cut points, strictly ascending, plus the fitted range.
    Binned {
        boundaries: Vec<f64>,
        min: f64,
        max: f64,
    },
    Categorical {
        categories: Vec<String>,
    },
}

/// How a single variable's values map onto codes `0..cardinality`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub variable: String,
    pub kind: CodebookKind,
    pub cardinality: u32,
}

impl Codebook {
    /// Code of a numeric value; values outside the fitted range land in the
    /// first or last bin.
    pub fn encode_value(&self, x: f64) -> Option<u32> {
        match &self.kind {
            CodebookKind::Binned { boundaries, .. } => {
                Some(boundaries.partition_point(|&b| b <= x) as u32)
            }
            CodebookKind::Categorical { .. } => None,
        }
    }

    pub fn encode_label(&self, label: &str) -> Option<u32> {
        match &self.kind {
            CodebookKind::Categorical { categories } => categories
                .binary_search_by(|c| c.as_str().cmp(label))
                .ok()
                .map(|i| i as u32),
            CodebookKind::Binned { .. } => None,
        }
    }

    /// `[lo, hi]` bounds of a bin; the upper bound is exclusive except for
    /// the last bin.
    pub fn interval(&self, code: u32) -> Option<(f64, f64)> {
        match &self.kind {
            CodebookKind::Binned {
                boundaries,
                min,
                max,
            } => {
                let c = code as usize;
                if c > boundaries.len() {
                    return None;
                }
                let lo = if c == 0 { *min } else { boundaries[c - 1] };
                let hi = if c == boundaries.len() {
                    *max
                } else {
                    boundaries[c]
                };
                Some((lo, hi))
            }
            CodebookKind::Categorical { .. } => None,
        }
    }
}

fn check_finite(column: &[f64]) -> Result<()> {
    if column.is_empty() {
        return Err(Error::EmptyInput(
            "cannot discretize an empty column".into(),
        ));
    }
    if let Some(row) = column.iter().position(|x| !x.is_finite()) {
        return Err(Error::Data(format!(
            "non-finite value {} at row {row}",
            column[row]
        )));
    }
    Ok(())
}

/// Fits a binning of `column` and returns it with the codes of every value.
pub fn fit_discretize(
    variable: &str,
    column: &[f64],
    strategy: Strategy,
    bins: usize,
) -> Result<(Codebook, Vec<u32>)> {
    if bins < 2 {
        return Err(Error::Argument(format!("need at least 2 bins, got {bins}")));
    }
    check_finite(column)?;
    let (min, max) = column
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });

    let mut boundaries: Vec<f64> = match strategy {
        Strategy::EqualWidth => {
            let width = max - min;
            (1..bins)
                .map(|j| min + width * (j as f64) / (bins as f64))
                .collect()
        }
        Strategy::EqualFrequency => {
            let mut sorted = column.to_vec();
            sorted.sort_by(f64::total_cmp);
            let m = sorted.len();
            (1..bins).map(|j| sorted[j * m / bins]).collect()
        }
    };
    boundaries.retain(|&b| b > min && b <= max);
    boundaries.dedup();

    if boundaries.is_empty() && strategy == Strategy::EqualFrequency {
        log::warn!("column `{variable}` is constant; it is encoded with a single code");
    }

    let codebook = Codebook {
        variable: variable.to_string(),
        cardinality: boundaries.len() as u32 + 1,
        kind: CodebookKind::Binned {
            boundaries,
            min,
            max,
        },
    };
    let codes = column
        .iter()
        .map(|&x| codebook.encode_value(x).unwrap_or(0))
        .collect();
    Ok((codebook, codes))
}

/// Codes labels by their rank among the sorted distinct labels.
pub fn encode_categorical<S: AsRef<str>>(
    variable: &str,
    column: &[S],
) -> Result<(Codebook, Vec<u32>)> {
    if column.is_empty() {
        return Err(Error::EmptyInput(format!(
            "categorical column `{variable}` is empty"
        )));
    }
    let categories: Vec<String> = column
        .iter()
        .map(|s| s.as_ref())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_string)
        .collect();
    let codebook = Codebook {
        variable: variable.to_string(),
        cardinality: categories.len() as u32,
        kind: CodebookKind::Categorical { categories },
    };
    let codes = column
        .iter()
        .map(|s| codebook.encode_label(s.as_ref()).unwrap_or(0))
        .collect();
    Ok((codebook, codes))
}

/// Like [`encode_categorical`] over a declared domain: every level gets a
/// code whether or not it occurs, and unknown labels are an error.
pub fn encode_with_levels<S: AsRef<str>>(
    variable: &str,
    column: &[S],
    levels: &[String],
) -> Result<(Codebook, Vec<u32>)> {
    if column.is_empty() {
        return Err(Error::EmptyInput(format!(
            "categorical column `{variable}` is empty"
        )));
    }
    let categories: Vec<String> = levels
        .iter()
        .map(String::as_str)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_string)
        .collect();
    if categories.is_empty() {
        return Err(Error::Config(format!(
            "column `{variable}` declares no levels"
        )));
    }
    let codebook = Codebook {
        variable: variable.to_string(),
        cardinality: categories.len() as u32,
        kind: CodebookKind::Categorical { categories },
    };
    let codes = column
        .iter()
        .enumerate()
        .map(|(r, s)| {
            codebook.encode_label(s.as_ref()).ok_or_else(|| {
                Error::Data(format!(
                    "label `{}` at row {r} is not a level of `{variable}`",
                    s.as_ref()
                ))
            })
        })
        .collect::<Result<_>>()?;
    Ok((codebook, codes))
}
