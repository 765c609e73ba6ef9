//! Sparse discrete joint distributions and plug-in Shannon entropies.
//!
//! A [`JointDistribution`] stores non-negative weights (usually raw counts)
//! keyed by fixed-width code tuples. Only observed tuples are stored, so a
//! joint over thirteen variables with thirteen codes each costs no more than
//! the number of distinct rows it was built from.
//!
//! All entropies are in bits.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::hash::BuildHasherDefault;

use crate::error::{Error, Result};

/// A code tuple, one code per variable of the owning distribution.
pub type Tuple = Box<[u32]>;

/// Deterministic hasher so iteration order only depends on insertion order.
type FixedState = BuildHasherDefault<DefaultHasher>;

pub(crate) type WeightMap = HashMap<Tuple, f64, FixedState>;

/// Sparse probability mass over tuples of discrete codes.
///
/// Weights are kept unnormalized next to their total. When the distribution
/// comes from counts every weight is an integer-valued `f64`, so marginal
/// sums are exact and do not depend on the order rows were seen.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    variables: Vec<String>,
    cardinalities: Vec<u32>,
    weights: WeightMap,
    total: f64,
}

impl PartialEq for JointDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables
            && self.cardinalities == other.cardinalities
            && self.weights.len() == other.weights.len()
            && self
                .weights
                .keys()
                .all(|k| (self.mass(k) - other.mass(k)).abs() <= 1e-12)
    }
}

fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("X{i}")).collect()
}

fn check_cardinalities(cardinalities: &[u32]) -> Result<()> {
    if cardinalities.is_empty() {
        return Err(Error::Argument(
            "a joint distribution needs at least one variable".into(),
        ));
    }
    if let Some(i) = cardinalities.iter().position(|&c| c == 0) {
        return Err(Error::Argument(format!("variable {i} has cardinality 0")));
    }
    Ok(())
}

impl JointDistribution {
    /// Empirical (plug-in) distribution of the rows of a code matrix.
    ///
    /// Variables are named `X0`, `X1`, ... in column order.
    pub fn from_rows<R: AsRef<[u32]>>(rows: &[R], cardinalities: &[u32]) -> Result<Self> {
        Self::from_rows_named(default_names(cardinalities.len()), rows, cardinalities)
    }

    pub fn from_rows_named<R: AsRef<[u32]>>(
        variables: Vec<String>,
        rows: &[R],
        cardinalities: &[u32],
    ) -> Result<Self> {
        check_cardinalities(cardinalities)?;
        if variables.len() != cardinalities.len() {
            return Err(Error::Argument(format!(
                "{} variable names for {} cardinalities",
                variables.len(),
                cardinalities.len()
            )));
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput(
                "no rows to build a joint distribution from".into(),
            ));
        }
        let mut weights = WeightMap::default();
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cardinalities.len() {
                return Err(Error::Argument(format!(
                    "row {r} has {} codes, expected {}",
                    row.len(),
                    cardinalities.len()
                )));
            }
            for (c, (&code, &card)) in row.iter().zip(cardinalities).enumerate() {
                if code >= card {
                    return Err(Error::CodeOutOfRange {
                        row: r,
                        column: c,
                        code,
                        cardinality: card,
                    });
                }
            }
            *weights.entry(row.into()).or_insert(0.0) += 1.0;
        }
        Ok(JointDistribution {
            variables,
            cardinalities: cardinalities.to_vec(),
            weights,
            total: rows.len() as f64,
        })
    }

    /// Empirical distribution from code columns of equal length.
    pub fn from_columns(
        variables: Vec<String>,
        columns: &[&[u32]],
        cardinalities: &[u32],
    ) -> Result<Self> {
        let m = columns.first().map_or(0, |c| c.len());
        if let Some(c) = columns.iter().position(|c| c.len() != m) {
            return Err(Error::Argument(format!(
                "column {c} has {} rows, expected {m}",
                columns[c].len()
            )));
        }
        let rows: Vec<Vec<u32>> = (0..m)
            .map(|r| columns.iter().map(|col| col[r]).collect())
            .collect();
        Self::from_rows_named(variables, &rows, cardinalities)
    }

    /// Distribution from explicit non-negative weights, normalized by their sum.
    ///
    /// Zero weights are dropped; repeated tuples accumulate.
    pub fn from_weights<I, T>(
        variables: Vec<String>,
        cardinalities: &[u32],
        entries: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (T, f64)>,
        T: AsRef<[u32]>,
    {
        check_cardinalities(cardinalities)?;
        if variables.len() != cardinalities.len() {
            return Err(Error::Argument(format!(
                "{} variable names for {} cardinalities",
                variables.len(),
                cardinalities.len()
            )));
        }
        let mut weights = WeightMap::default();
        let mut total = 0.0;
        for (r, (tuple, w)) in entries.into_iter().enumerate() {
            let tuple = tuple.as_ref();
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Data(format!("entry {r} has invalid weight {w}")));
            }
            if tuple.len() != cardinalities.len() {
                return Err(Error::Argument(format!(
                    "entry {r} has {} codes, expected {}",
                    tuple.len(),
                    cardinalities.len()
                )));
            }
            for (c, (&code, &card)) in tuple.iter().zip(cardinalities).enumerate() {
                if code >= card {
                    return Err(Error::CodeOutOfRange {
                        row: r,
                        column: c,
                        code,
                        cardinality: card,
                    });
                }
            }
            if w > 0.0 {
                *weights.entry(tuple.into()).or_insert(0.0) += w;
                total += w;
            }
        }
        if weights.is_empty() {
            return Err(Error::EmptyInput("all weights are zero".into()));
        }
        Ok(JointDistribution {
            variables,
            cardinalities: cardinalities.to_vec(),
            weights,
            total,
        })
    }

    pub fn num_variables(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn cardinalities(&self) -> &[u32] {
        &self.cardinalities
    }

    /// Number of tuples with positive mass.
    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    /// Probability of a tuple; zero when unobserved.
    pub fn mass(&self, tuple: &[u32]) -> f64 {
        self.weights.get(tuple).map_or(0.0, |w| w / self.total)
    }

    /// Iterates over `(tuple, probability)` pairs of the support.
    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.weights
            .iter()
            .map(move |(k, w)| (&**k, w / self.total))
    }

    /// Index of a variable by name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// Shannon entropy in bits.
    ///
    /// Terms are summed in ascending weight order so that two distributions
    /// with the same multiset of masses give bit-identical results.
    pub fn entropy(&self) -> f64 {
        let mut ws: Vec<f64> = self.weights.values().copied().collect();
        ws.sort_by(f64::total_cmp);
        let h: f64 = ws
            .iter()
            .map(|&w| {
                let p = w / self.total;
                -p * p.log2()
            })
            .sum();
        h.max(0.0)
    }

    fn check_indices(&self, idx: &[usize], what: &str) -> Result<()> {
        if idx.is_empty() {
            return Err(Error::Argument(format!("{what} must not be empty")));
        }
        let mut seen = BTreeSet::new();
        for &i in idx {
            if i >= self.num_variables() {
                return Err(Error::Argument(format!(
                    "{what} refers to variable {i}, but the distribution has {}",
                    self.num_variables()
                )));
            }
            if !seen.insert(i) {
                return Err(Error::Argument(format!("{what} repeats variable {i}")));
            }
        }
        Ok(())
    }

    /// Marginal over the variables in `keep`, in the order given.
    pub fn marginalize(&self, keep: &[usize]) -> Result<JointDistribution> {
        self.check_indices(keep, "kept variable set")?;
        let mut weights = WeightMap::default();
        for (tuple, &w) in &self.weights {
            let key: Tuple = keep.iter().map(|&i| tuple[i]).collect();
            *weights.entry(key).or_insert(0.0) += w;
        }
        Ok(JointDistribution {
            variables: keep.iter().map(|&i| self.variables[i].clone()).collect(),
            cardinalities: keep.iter().map(|&i| self.cardinalities[i]).collect(),
            weights,
            total: self.total,
        })
    }

    /// Entropy of the marginal over `keep`; zero for the empty set.
    pub fn marginal_entropy(&self, keep: &[usize]) -> Result<f64> {
        if keep.is_empty() {
            return Ok(0.0);
        }
        Ok(self.marginalize(keep)?.entropy())
    }

    /// Entropy of the uniform distribution over the product domain of `subset`.
    pub fn uniform_entropy(&self, subset: &[usize]) -> Result<f64> {
        self.check_indices(subset, "uniform reference subset")?;
        Ok(subset
            .iter()
            .map(|&i| f64::from(self.cardinalities[i]).log2())
            .sum())
    }

    /// `H(A | B)` for the two sides of a partition.
    pub fn conditional_entropy(&self, part: &Partition, direction: Direction) -> Result<f64> {
        part.validate(self)?;
        let given = match direction {
            Direction::XGivenY => &part.y,
            Direction::YGivenX => &part.x,
        };
        Ok(self.entropy() - self.marginal_entropy(given)?)
    }

    /// Recodes every variable onto the codes it actually takes, so that each
    /// cardinality becomes the observed support size of that variable.
    pub fn compacted(&self) -> JointDistribution {
        let n = self.num_variables();
        let mut maps: Vec<HashMap<u32, u32>> = Vec::with_capacity(n);
        for v in 0..n {
            let observed: BTreeSet<u32> = self.weights.keys().map(|t| t[v]).collect();
            maps.push(
                observed
                    .into_iter()
                    .enumerate()
                    .map(|(new, old)| (old, new as u32))
                    .collect(),
            );
        }
        let weights = self
            .weights
            .iter()
            .map(|(t, &w)| {
                let key: Tuple = t.iter().enumerate().map(|(v, c)| maps[v][c]).collect();
                (key, w)
            })
            .collect();
        JointDistribution {
            variables: self.variables.clone(),
            cardinalities: maps.iter().map(|m| m.len() as u32).collect(),
            weights,
            total: self.total,
        }
    }
}

/// Which conditional entropy of a partition to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    XGivenY,
    YGivenX,
}

/// Split of a joint distribution's variables into an X block and a Y block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl Partition {
    pub fn new(x: Vec<usize>, y: Vec<usize>) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::Argument(
                "both sides of a partition must be non-empty".into(),
            ));
        }
        if let Some(v) = x.iter().find(|v| y.contains(v)) {
            return Err(Error::Argument(format!(
                "variable {v} appears on both sides"
            )));
        }
        Ok(Partition { x, y })
    }

    /// The first `n_x` variables against the rest.
    pub fn split_at(n_x: usize, n: usize) -> Result<Self> {
        Self::new((0..n_x).collect(), (n_x..n).collect())
    }

    /// Checks the partition against a distribution: indices in range, no
    /// repeats, and every variable on exactly one side.
    pub fn validate(&self, joint: &JointDistribution) -> Result<()> {
        let n = joint.num_variables();
        let mut seen = vec![false; n];
        for &v in self.x.iter().chain(&self.y) {
            if v >= n {
                return Err(Error::Argument(format!(
                    "partition refers to variable {v}, but the distribution has {n}"
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::Argument(format!("variable {v} is listed twice")));
            }
        }
        if self.x.is_empty() || self.y.is_empty() {
            return Err(Error::Argument(
                "both sides of a partition must be non-empty".into(),
            ));
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::Argument(format!("variable {v} is on neither side")));
        }
        Ok(())
    }

    pub fn swapped(&self) -> Partition {
        Partition {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn table() -> JointDistribution {
        let mut rows = vec![[0u32, 0]; 4];
        rows.push([0, 1]);
        rows.push([1, 0]);
        rows.extend(vec![[1, 1]; 4]);
        JointDistribution::from_rows(&rows, &[2, 2]).unwrap()
    }

    #[test]
    fn build_uniform_single_column() {
        let j = JointDistribution::from_rows(&[[0u32], [1], [2], [3]], &[4]).unwrap();
        for c in 0..4 {
            assert_eq!(j.mass(&[c]), 0.25);
        }
        assert_eq!(j.support_len(), 4);
    }

    #[test]
    fn build_degenerate_point_mass() {
        let j = JointDistribution::from_rows(&[[0u32, 0], [0, 0]], &[2, 2]).unwrap();
        assert_eq!(j.support_len(), 1);
        assert_eq!(j.mass(&[0, 0]), 1.0);
        assert_eq!(j.entropy(), 0.0);
    }

    #[test]
    fn build_counts_table() {
        let j = table();
        assert_abs_diff_eq!(j.mass(&[0, 0]), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(j.mass(&[0, 1]), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(j.mass(&[1, 0]), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(j.mass(&[1, 1]), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn build_errors() {
        let err = JointDistribution::from_rows(&[[0u32, 0], [0, 2]], &[2, 2]).unwrap_err();
        assert!(matches!(
            err,
            Error::CodeOutOfRange {
                row: 1,
                column: 1,
                code: 2,
                ..
            }
        ));
        let empty: [[u32; 2]; 0] = [];
        assert!(matches!(
            JointDistribution::from_rows(&empty, &[2, 2]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn entropy_examples() {
        let uniform = JointDistribution::from_rows(&[[0u32], [1], [2], [3]], &[4]).unwrap();
        assert_abs_diff_eq!(uniform.entropy(), 2.0, epsilon = 1e-15);
        let skewed = JointDistribution::from_weights(
            default_names(1),
            &[3],
            [([0u32], 0.5), ([1], 0.25), ([2], 0.25)],
        )
        .unwrap();
        assert_abs_diff_eq!(skewed.entropy(), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn marginal_examples() {
        let indep =
            JointDistribution::from_rows(&[[0u32, 0], [0, 1], [1, 0], [1, 1]], &[2, 2]).unwrap();
        let m = indep.marginalize(&[0]).unwrap();
        assert_eq!(m.cardinalities(), &[2]);
        assert_eq!(m.mass(&[0]), 0.5);
        assert_eq!(m.mass(&[1]), 0.5);

        let t = table();
        for v in 0..2 {
            let m = t.marginalize(&[v]).unwrap();
            assert_abs_diff_eq!(m.mass(&[0]), 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(m.mass(&[1]), 0.5, epsilon = 1e-15);
        }
        assert_eq!(t.marginalize(&[0, 1]).unwrap(), t);
        assert!(t.marginalize(&[]).is_err());
        assert!(t.marginalize(&[2]).is_err());
    }

    #[test]
    fn conditional_examples() {
        let copy =
            JointDistribution::from_rows(&[[0u32, 0], [1, 1], [2, 2], [3, 3]], &[4, 4]).unwrap();
        let p = Partition::split_at(1, 2).unwrap();
        assert_abs_diff_eq!(
            copy.conditional_entropy(&p, Direction::XGivenY).unwrap(),
            0.0
        );

        let indep =
            JointDistribution::from_rows(&[[0u32, 0], [0, 1], [1, 0], [1, 1]], &[2, 2]).unwrap();
        assert_abs_diff_eq!(
            indep.conditional_entropy(&p, Direction::XGivenY).unwrap(),
            1.0,
            epsilon = 1e-15
        );

        // H(0.4,0.1,0.1,0.4) - 1 = 0.721928094887...
        let h = table().conditional_entropy(&p, Direction::XGivenY).unwrap();
        assert_abs_diff_eq!(h, 0.721_928_094_887_362, epsilon = 1e-12);

        let bad = Partition {
            x: vec![0],
            y: vec![0],
        };
        assert!(table()
            .conditional_entropy(&bad, Direction::XGivenY)
            .is_err());
    }

    #[test]
    fn uniform_entropy_examples() {
        let j = JointDistribution::from_rows(&[[0u32]], &[4]).unwrap();
        assert_abs_diff_eq!(j.uniform_entropy(&[0]).unwrap(), 2.0);
        let j = JointDistribution::from_rows(&[[0u32, 0]], &[2, 2]).unwrap();
        assert_abs_diff_eq!(j.uniform_entropy(&[0, 1]).unwrap(), 2.0);
        let j = JointDistribution::from_rows(&[[0u32, 0, 0]], &[3, 4, 5]).unwrap();
        assert_abs_diff_eq!(
            j.uniform_entropy(&[0, 1, 2]).unwrap(),
            60f64.log2(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            j.uniform_entropy(&[0, 1, 2]).unwrap(),
            5.906_890_595_608_519,
            epsilon = 1e-12
        );
    }

    #[test]
    fn partition_validation() {
        let j = table();
        assert!(Partition::new(vec![], vec![0]).is_err());
        assert!(Partition::new(vec![0], vec![0]).is_err());
        let p = Partition::new(vec![0], vec![2]).unwrap();
        assert!(p.validate(&j).is_err());
        let three = JointDistribution::from_rows(&[[0u32, 0, 0]], &[2, 2, 2]).unwrap();
        let p = Partition::new(vec![0], vec![1]).unwrap();
        assert!(p.validate(&three).is_err());
    }

    #[test]
    fn compaction_uses_observed_codes() {
        let j = JointDistribution::from_rows(&[[0u32, 3], [5, 3]], &[8, 4]).unwrap();
        let c = j.compacted();
        assert_eq!(c.cardinalities(), &[2, 1]);
        assert_eq!(c.mass(&[1, 0]), 0.5);
        assert_abs_diff_eq!(c.entropy(), j.entropy());
    }

    #[test]
    fn entropy_is_order_independent() {
        let rows_a = vec![[0u32, 1], [1, 0], [2, 2], [0, 1], [2, 1]];
        let mut rows_b = rows_a.clone();
        rows_b.reverse();
        let a = JointDistribution::from_rows(&rows_a, &[3, 3]).unwrap();
        let b = JointDistribution::from_rows(&rows_b, &[3, 3]).unwrap();
        assert_eq!(a.entropy().to_bits(), b.entropy().to_bits());
    }
}
