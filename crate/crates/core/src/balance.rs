//! Entropy balance equations and their normalized triangle coordinates.
//!
//! For a partition of a joint distribution into blocks X and Y the uniform
//! reference entropy splits exactly as
//!
//! ```text
//! H_U(X) + H_U(Y) = ΔH + 2 I + VI          (aggregate)
//! H_U(X)          = ΔH_X + I + H(X|Y)      (split, X side)
//! H_U(Y)          = ΔH_Y + I + H(Y|X)      (split, Y side)
//! ```
//!
//! Dividing by the left-hand side gives a point on the 2-simplex.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::entropy::{JointDistribution, Partition};
use crate::error::{Error, Result};
use crate::measures::{
    approx_eq_rel, binding_information, delta_uniformity, variation_of_information_channel,
    IDENTITY_TOLERANCE,
};

/// Magnitude below which floating-point dust is treated as zero.
pub const DUST: f64 = 1e-12;

/// Default threshold for [`classify_region`].
pub const DEFAULT_REGION_THRESHOLD: f64 = 0.8;

fn clamp_dust(value: f64, what: &str) -> Result<f64> {
    if value < -DUST {
        return Err(Error::Internal(format!("{what} is negative: {value}")));
    }
    Ok(if value.abs() < DUST { 0.0 } else { value })
}

fn check_upper(value: f64, bound: f64, what: &str) -> Result<()> {
    if value > bound + DUST * bound.max(1.0) {
        return Err(Error::Internal(format!(
            "{what} = {value} exceeds its uniform reference {bound}"
        )));
    }
    Ok(())
}

/// Aggregate channel decomposition of a partitioned joint distribution, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDecomposition {
    pub h_u_total: f64,
    pub delta_h: f64,
    pub binding: f64,
    pub vi: f64,
}

impl ChannelDecomposition {
    /// `ΔH + 2I + VI - H_U`; zero up to rounding.
    pub fn residual(&self) -> f64 {
        self.delta_h + 2.0 * self.binding + self.vi - self.h_u_total
    }
}

/// Which block a split decomposition describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    X,
    Y,
}

/// One side of the split balance equation, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDecomposition {
    pub side: Side,
    pub h_u: f64,
    pub delta_h: f64,
    pub binding: f64,
    /// `H(X|Y)` on the X side, `H(Y|X)` on the Y side.
    pub h_cond: f64,
}

impl SplitDecomposition {
    pub fn residual(&self) -> f64 {
        self.delta_h + self.binding + self.h_cond - self.h_u
    }
}

/// Aggregate channel balance for a partition.
pub fn channel_balance(
    joint: &JointDistribution,
    part: &Partition,
) -> Result<ChannelDecomposition> {
    part.validate(joint)?;
    let h_u_total = joint.uniform_entropy(&part.x)? + joint.uniform_entropy(&part.y)?;
    if h_u_total <= 0.0 {
        return Err(Error::DegenerateDomain(
            "every variable has cardinality 1, the uniform reference entropy is zero".into(),
        ));
    }
    let delta = delta_uniformity(joint, part)?;
    let binding = binding_information(joint, part)?;
    let vi = variation_of_information_channel(joint, part)?;

    let d = ChannelDecomposition {
        h_u_total,
        delta_h: clamp_dust(delta.total(), "divergence from uniformity")?,
        binding: clamp_dust(binding, "binding information")?,
        vi: clamp_dust(vi.total(), "variation of information")?,
    };
    check_upper(d.delta_h, h_u_total, "divergence from uniformity")?;
    check_upper(d.binding, h_u_total, "binding information")?;
    check_upper(d.vi, h_u_total, "variation of information")?;
    if !approx_eq_rel(
        d.delta_h + 2.0 * d.binding + d.vi,
        h_u_total,
        IDENTITY_TOLERANCE,
    ) {
        return Err(Error::Internal(format!(
            "aggregate balance violated: {d:?} (residual {})",
            d.residual()
        )));
    }
    Ok(d)
}

/// Split balance for both sides of a partition, X side first.
pub fn split_balance(
    joint: &JointDistribution,
    part: &Partition,
) -> Result<(SplitDecomposition, SplitDecomposition)> {
    part.validate(joint)?;
    let h_u_x = joint.uniform_entropy(&part.x)?;
    let h_u_y = joint.uniform_entropy(&part.y)?;
    for (side, h) in [("X", h_u_x), ("Y", h_u_y)] {
        if h <= 0.0 {
            return Err(Error::DegenerateDomain(format!(
                "the {side} block has a single possible value, its uniform reference entropy is zero"
            )));
        }
    }
    let delta = delta_uniformity(joint, part)?;
    let binding = clamp_dust(binding_information(joint, part)?, "binding information")?;
    let vi = variation_of_information_channel(joint, part)?;

    let make = |side, h_u: f64, delta_h: f64, h_cond: f64| -> Result<SplitDecomposition> {
        let d = SplitDecomposition {
            side,
            h_u,
            delta_h: clamp_dust(delta_h, "divergence from uniformity")?,
            binding,
            h_cond: clamp_dust(h_cond, "conditional entropy")?,
        };
        check_upper(d.delta_h, h_u, "divergence from uniformity")?;
        check_upper(d.binding, h_u, "binding information")?;
        check_upper(d.h_cond, h_u, "conditional entropy")?;
        if !approx_eq_rel(d.delta_h + d.binding + d.h_cond, h_u, IDENTITY_TOLERANCE) {
            return Err(Error::Internal(format!(
                "split balance violated: {d:?} (residual {})",
                d.residual()
            )));
        }
        Ok(d)
    };
    Ok((
        make(Side::X, h_u_x, delta.x, vi.x_given_y)?,
        make(Side::Y, h_u_y, delta.y, vi.y_given_x)?,
    ))
}

/// Which balance equation a [`TriangleCoord`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoordKind {
    Aggregate,
    SplitX,
    SplitY,
}

impl CoordKind {
    pub fn from_side(side: Side) -> Self {
        match side {
            Side::X => CoordKind::SplitX,
            Side::Y => CoordKind::SplitY,
        }
    }

    /// Short tag used in reports: `XY`, `X` or `Y`.
    pub fn tag(self) -> &'static str {
        match self {
            CoordKind::Aggregate => "XY",
            CoordKind::SplitX => "X",
            CoordKind::SplitY => "Y",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "XY" => Some(CoordKind::Aggregate),
            "X" => Some(CoordKind::SplitX),
            "Y" => Some(CoordKind::SplitY),
            _ => None,
        }
    }
}

impl fmt::Display for CoordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A normalized three-part composition.
///
/// `info` holds `2I'` for aggregate coordinates and `I'` for split ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleCoord {
    pub delta: f64,
    pub info: f64,
    pub vi: f64,
    pub kind: CoordKind,
}

/// Tolerance for a composition to count as summing to one.
pub const COMPOSITION_TOLERANCE: f64 = 1e-9;

impl TriangleCoord {
    /// Validated constructor: each part in `[0, 1]` and the sum within
    /// [`COMPOSITION_TOLERANCE`] of one.
    pub fn new(delta: f64, info: f64, vi: f64, kind: CoordKind) -> Result<Self> {
        let c = TriangleCoord {
            delta,
            info,
            vi,
            kind,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.delta, self.info, self.vi];
        if parts.iter().any(|p| {
            !p.is_finite() || *p < -COMPOSITION_TOLERANCE || *p > 1.0 + COMPOSITION_TOLERANCE
        }) {
            return Err(Error::Argument(format!("not a composition: {parts:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > COMPOSITION_TOLERANCE {
            return Err(Error::Argument(format!(
                "composition {parts:?} sums to {sum}, not 1"
            )));
        }
        Ok(())
    }

    pub fn parts(&self) -> [f64; 3] {
        [self.delta, self.info, self.vi]
    }
}

fn normalize(parts: [f64; 3], denominator: f64, kind: CoordKind) -> Result<TriangleCoord> {
    if denominator.is_nan() || denominator <= 0.0 {
        return Err(Error::DegenerateDomain(format!(
            "cannot normalize by a uniform reference entropy of {denominator}"
        )));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        let v = p / denominator;
        *o = if v.abs() < DUST { 0.0 } else { v };
    }
    TriangleCoord::new(out[0], out[1], out[2], kind)
        .map_err(|e| Error::Internal(format!("normalized coordinates invalid: {e}")))
}

/// `(ΔH, 2I, VI) / H_U`.
pub fn normalize_aggregate(d: &ChannelDecomposition) -> Result<TriangleCoord> {
    normalize(
        [d.delta_h, 2.0 * d.binding, d.vi],
        d.h_u_total,
        CoordKind::Aggregate,
    )
}

/// `(ΔH_side, I, H(side|other)) / H_U(side)`.
pub fn normalize_split(d: &SplitDecomposition) -> Result<TriangleCoord> {
    normalize(
        [d.delta_h, d.binding, d.h_cond],
        d.h_u,
        CoordKind::from_side(d.side),
    )
}

/// Aggregate and split decompositions with their coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceReport {
    pub aggregate: ChannelDecomposition,
    pub split_x: SplitDecomposition,
    pub split_y: SplitDecomposition,
    pub aggregate_coord: TriangleCoord,
    pub split_x_coord: TriangleCoord,
    pub split_y_coord: TriangleCoord,
}

/// Runs both balance equations and normalizes every result.
pub fn balance_report(joint: &JointDistribution, part: &Partition) -> Result<BalanceReport> {
    let aggregate = channel_balance(joint, part)?;
    let (split_x, split_y) = split_balance(joint, part)?;
    Ok(BalanceReport {
        aggregate,
        split_x,
        split_y,
        aggregate_coord: normalize_aggregate(&aggregate)?,
        split_x_coord: normalize_split(&split_x)?,
        split_y_coord: normalize_split(&split_y)?,
    })
}

/// Builds the joint distribution of true and predicted labels from a square
/// confusion matrix (rows = true class) and runs the balance equations with
/// one variable per side.
pub fn cbet_from_confusion(counts: &[Vec<u64>]) -> Result<BalanceReport> {
    let k = counts.len();
    if k == 0 {
        return Err(Error::EmptyInput("confusion matrix has no rows".into()));
    }
    if let Some(r) = counts.iter().position(|row| row.len() != k) {
        return Err(Error::Argument(format!(
            "confusion matrix must be square: row {r} has {} entries, expected {k}",
            counts[r].len()
        )));
    }
    if counts.iter().flatten().all(|&c| c == 0) {
        return Err(Error::EmptyInput("confusion matrix is all zeros".into()));
    }
    let card = u32::try_from(k).map_err(|_| Error::Argument("too many classes".into()))?;
    let entries = counts.iter().enumerate().flat_map(|(i, row)| {
        row.iter()
            .enumerate()
            .map(move |(j, &c)| ([i as u32, j as u32], c as f64))
    });
    let joint =
        JointDistribution::from_weights(vec!["K".into(), "K_hat".into()], &[card, card], entries)?;
    balance_report(&joint, &Partition::split_at(1, 2)?)
}

/// Qualitative region of the triangle a point falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Near the apex: the blocks determine each other.
    Faithful,
    /// Near the VI vertex: uniform marginals sharing little information.
    Randomizing,
    /// Near the ΔH vertex: essentially deterministic marginals.
    Rigid,
    Intermediate,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Faithful => "faithful",
            Region::Randomizing => "randomizing",
            Region::Rigid => "rigid",
            Region::Intermediate => "intermediate",
        })
    }
}

/// Labels a coordinate by the vertex whose part reaches `threshold`.
///
/// The threshold must lie in `(1/3, 1]` so that at most one part can reach it.
pub fn classify_region(c: &TriangleCoord, threshold: f64) -> Result<Region> {
    if !(threshold > 1.0 / 3.0 && threshold <= 1.0) {
        return Err(Error::Argument(format!(
            "region threshold {threshold} must lie in (1/3, 1]"
        )));
    }
    c.validate()?;
    Ok(if c.info >= threshold {
        Region::Faithful
    } else if c.vi >= threshold {
        Region::Randomizing
    } else if c.delta >= threshold {
        Region::Rigid
    } else {
        Region::Intermediate
    })
}
