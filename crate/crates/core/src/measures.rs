//! Bivariate and multivariate information measures over a [`JointDistribution`].
//!
//! Channel measures take a [`Partition`] into an X block and a Y block:
//! binding information (the multivariate mutual information between the
//! blocks), the channel variation of information and the divergence from
//! uniformity. Source measures treat every variable on an equal footing:
//! total correlation `C`, dual total correlation `D`, bound information
//! `M = C + D`, residual (source) variation of information and co-information.

use std::collections::HashMap;

use crate::entropy::{Direction, JointDistribution, Partition, Tuple};
use crate::error::{Error, Result};

/// Relative tolerance used when cross-checking algebraically equal quantities.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Largest variable count accepted by [`co_information`] (2^n subsets).
pub const MAX_CO_INFORMATION_VARIABLES: usize = 20;

/// `|a - b| <= rel * max(1, |a|, |b|)`: relative, with an absolute floor of
/// `rel` bits so that quantities near zero can be compared.
pub fn approx_eq_rel(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * 1f64.max(a.abs()).max(b.abs())
}

/// Bivariate mutual information between the two blocks, `H(X) + H(Y) - H(XY)`.
pub fn mutual_information(joint: &JointDistribution, part: &Partition) -> Result<f64> {
    part.validate(joint)?;
    let hx = joint.marginal_entropy(&part.x)?;
    let hy = joint.marginal_entropy(&part.y)?;
    Ok(hx + hy - joint.entropy())
}

/// The three algebraic routes to the binding information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BindingRoutes {
    /// `H(XY) - VI(XY)`: what is left after conditioning away each block.
    pub internal: f64,
    /// `H(X) + H(Y) - H(XY)`: entropy lost from the product of marginals.
    pub external: f64,
    /// `sum p(x,y) log p(x,y) / (p(x) p(y))`.
    pub divergence: f64,
}

impl BindingRoutes {
    pub fn agree(&self, rel: f64) -> bool {
        approx_eq_rel(self.internal, self.external, rel)
            && approx_eq_rel(self.internal, self.divergence, rel)
            && approx_eq_rel(self.external, self.divergence, rel)
    }
}

/// Binding information computed independently along all three routes.
pub fn binding_routes(joint: &JointDistribution, part: &Partition) -> Result<BindingRoutes> {
    part.validate(joint)?;
    let h = joint.entropy();
    let mx = joint.marginalize(&part.x)?;
    let my = joint.marginalize(&part.y)?;
    let hx = mx.entropy();
    let hy = my.entropy();

    let h_x_given_y = h - hy;
    let h_y_given_x = h - hx;
    let internal = h - (h_x_given_y + h_y_given_x);
    let external = hx + hy - h;

    let px: HashMap<Tuple, f64> = mx.iter().map(|(t, p)| (t.into(), p)).collect();
    let py: HashMap<Tuple, f64> = my.iter().map(|(t, p)| (t.into(), p)).collect();
    let mut terms: Vec<f64> = joint
        .iter()
        .map(|(t, p)| {
            let kx: Tuple = part.x.iter().map(|&i| t[i]).collect();
            let ky: Tuple = part.y.iter().map(|&i| t[i]).collect();
            p * (p / (px[&kx] * py[&ky])).log2()
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    let divergence = terms.iter().sum();

    Ok(BindingRoutes {
        internal,
        external,
        divergence,
    })
}

/// Binding information `I(X;Y)` between the blocks of a partition.
///
/// All three routes are evaluated; if they disagree beyond
/// [`IDENTITY_TOLERANCE`] the inputs are numerically corrupt and an
/// [`Error::RouteDisagreement`] is returned. Otherwise the internal route is
/// returned.
pub fn binding_information(joint: &JointDistribution, part: &Partition) -> Result<f64> {
    let routes = binding_routes(joint, part)?;
    if !routes.agree(IDENTITY_TOLERANCE) {
        return Err(Error::RouteDisagreement {
            internal: routes.internal,
            external: routes.external,
            divergence: routes.divergence,
        });
    }
    Ok(routes.internal)
}

/// Channel variation of information and its two addends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelVi {
    pub x_given_y: f64,
    pub y_given_x: f64,
}

impl ChannelVi {
    pub fn total(&self) -> f64 {
        self.x_given_y + self.y_given_x
    }
}

/// `H(X|Y) + H(Y|X)`.
pub fn variation_of_information_channel(
    joint: &JointDistribution,
    part: &Partition,
) -> Result<ChannelVi> {
    Ok(ChannelVi {
        x_given_y: joint.conditional_entropy(part, Direction::XGivenY)?,
        y_given_x: joint.conditional_entropy(part, Direction::YGivenX)?,
    })
}

/// Divergence of each block's marginal from the uniform distribution on its domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaUniformity {
    pub x: f64,
    pub y: f64,
}

impl DeltaUniformity {
    pub fn total(&self) -> f64 {
        self.x + self.y
    }
}

pub fn delta_uniformity(joint: &JointDistribution, part: &Partition) -> Result<DeltaUniformity> {
    part.validate(joint)?;
    Ok(DeltaUniformity {
        x: joint.uniform_entropy(&part.x)? - joint.marginal_entropy(&part.x)?,
        y: joint.uniform_entropy(&part.y)? - joint.marginal_entropy(&part.y)?,
    })
}

/// Sum of marginal entropies: the entropy of the product of marginals.
pub fn product_entropy(joint: &JointDistribution) -> f64 {
    (0..joint.num_variables())
        .map(|i| joint.marginalize(&[i]).map_or(0.0, |m| m.entropy()))
        .sum()
}

/// Total correlation `C = sum_i H(X_i) - H(X)`.
pub fn total_correlation(joint: &JointDistribution) -> f64 {
    product_entropy(joint) - joint.entropy()
}

/// Residual entropy summed over variables, `sum_i H(X_i | rest)`.
///
/// For a single variable the rest is empty and this is its entropy.
pub fn source_vi(joint: &JointDistribution) -> f64 {
    let h = joint.entropy();
    let n = joint.num_variables();
    (0..n)
        .map(|i| {
            let rest: Vec<usize> = (0..n).filter(|&k| k != i).collect();
            h - joint.marginal_entropy(&rest).unwrap_or(0.0)
        })
        .sum()
}

/// Dual total correlation `D = H(X) - VI(X)`.
pub fn dual_total_correlation(joint: &JointDistribution) -> f64 {
    joint.entropy() - source_vi(joint)
}

/// Bound information `M = C + D`.
pub fn bound_information(joint: &JointDistribution) -> f64 {
    total_correlation(joint) + dual_total_correlation(joint)
}

/// `sum p(x) log p(x) / prod_i p(x_i)`.
///
/// This is the Kullback-Leibler form of the multi-information. It always
/// equals the total correlation and is never negative; see
/// [`co_information`] for the signed inclusion-exclusion quantity.
pub fn kl_multiinformation(joint: &JointDistribution) -> f64 {
    let marginals: Vec<HashMap<u32, f64>> = (0..joint.num_variables())
        .map(|i| {
            joint
                .marginalize(&[i])
                .map(|m| m.iter().map(|(t, p)| (t[0], p)).collect())
                .unwrap_or_default()
        })
        .collect();
    let mut terms: Vec<f64> = joint
        .iter()
        .map(|(t, p)| {
            let q: f64 = t.iter().zip(&marginals).map(|(c, m)| m[c]).product();
            p * (p / q).log2()
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Co-information by inclusion-exclusion over all non-empty variable subsets,
/// `sum_S (-1)^(|S|+1) H(S)`. Equals the mutual information for two
/// variables and may be negative from three on.
pub fn co_information(joint: &JointDistribution) -> Result<f64> {
    let n = joint.num_variables();
    if n < 2 {
        return Err(Error::Argument(
            "co-information needs at least two variables".into(),
        ));
    }
    if n > MAX_CO_INFORMATION_VARIABLES {
        return Err(Error::Argument(format!(
            "co-information enumerates 2^n subsets; {n} variables exceeds the limit of \
             {MAX_CO_INFORMATION_VARIABLES}, select a subset first"
        )));
    }
    let mut acc = 0.0;
    for mask in 1u32..(1u32 << n) {
        let subset: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let h = joint.marginal_entropy(&subset)?;
        if subset.len() % 2 == 1 {
            acc += h;
        } else {
            acc -= h;
        }
    }
    Ok(acc)
}

/// Multivariate source measures of a set of variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceDecomposition {
    pub h_joint: f64,
    pub h_pi: f64,
    pub total_correlation: f64,
    pub dual_total_correlation: f64,
    pub source_vi: f64,
    pub bound_information: f64,
    /// `None` when fewer than two or more than
    /// [`MAX_CO_INFORMATION_VARIABLES`] variables.
    pub co_information: Option<f64>,
}

pub fn source_decomposition(joint: &JointDistribution) -> SourceDecomposition {
    let h_joint = joint.entropy();
    let h_pi = product_entropy(joint);
    let vi = source_vi(joint);
    let c = h_pi - h_joint;
    let d = h_joint - vi;
    SourceDecomposition {
        h_joint,
        h_pi,
        total_correlation: c,
        dual_total_correlation: d,
        source_vi: vi,
        bound_information: c + d,
        co_information: co_information(joint).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn xor() -> JointDistribution {
        let rows: Vec<[u32; 3]> = (0..4u32)
            .map(|k| [k & 1, k >> 1, (k & 1) ^ (k >> 1)])
            .collect();
        JointDistribution::from_rows(&rows, &[2, 2, 2]).unwrap()
    }

    fn indep_bits() -> JointDistribution {
        JointDistribution::from_rows(&[[0u32, 0], [0, 1], [1, 0], [1, 1]], &[2, 2]).unwrap()
    }

    fn copy4() -> JointDistribution {
        JointDistribution::from_rows(&[[0u32, 0], [1, 1], [2, 2], [3, 3]], &[4, 4]).unwrap()
    }

    fn copied_bits() -> JointDistribution {
        JointDistribution::from_rows(&[[0u32, 0], [1, 1]], &[2, 2]).unwrap()
    }

    fn pair() -> Partition {
        Partition::split_at(1, 2).unwrap()
    }

    #[test]
    fn mutual_information_examples() {
        assert_abs_diff_eq!(mutual_information(&indep_bits(), &pair()).unwrap(), 0.0);
        assert_abs_diff_eq!(
            mutual_information(&copy4(), &pair()).unwrap(),
            2.0,
            epsilon = 1e-15
        );
        let mut rows = vec![[0u32, 0]; 4];
        rows.push([0, 1]);
        rows.push([1, 0]);
        rows.extend(vec![[1, 1]; 4]);
        let t = JointDistribution::from_rows(&rows, &[2, 2]).unwrap();
        assert_abs_diff_eq!(
            mutual_information(&t, &pair()).unwrap(),
            0.278_071_905_112_637_9,
            epsilon = 1e-12
        );
    }

    #[test]
    fn binding_information_examples() {
        let p = Partition::split_at(2, 3).unwrap();
        let routes = binding_routes(&xor(), &p).unwrap();
        assert!(routes.agree(1e-12));
        assert_abs_diff_eq!(
            binding_information(&xor(), &p).unwrap(),
            1.0,
            epsilon = 1e-12
        );

        // product of independent blocks
        let prod = JointDistribution::from_weights(
            vec!["a".into(), "b".into(), "c".into()],
            &[2, 3, 2],
            (0..2u32).flat_map(|a| {
                (0..3u32).flat_map(move |b| {
                    (0..2u32).map(move |c| {
                        let w = [1.0, 3.0][a as usize] * f64::from(b + 1) * [1.0, 2.0][c as usize];
                        ([a, b, c], w)
                    })
                })
            }),
        )
        .unwrap();
        let p = Partition::new(vec![0, 1], vec![2]).unwrap();
        assert_abs_diff_eq!(
            binding_information(&prod, &p).unwrap(),
            0.0,
            epsilon = 1e-12
        );

        // Y a bijective recoding of X, uniform over 6 tuples
        let rows: Vec<[u32; 3]> = (0..6u32).map(|k| [k % 2, k / 2, (5 - k)]).collect();
        let bij = JointDistribution::from_rows(&rows, &[2, 3, 6]).unwrap();
        let p = Partition::new(vec![0, 1], vec![2]).unwrap();
        assert_abs_diff_eq!(
            binding_information(&bij, &p).unwrap(),
            6f64.log2(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn channel_vi_examples() {
        let rows: Vec<[u32; 2]> = (0..4u32).map(|k| [k, 3 - k]).collect();
        let bij = JointDistribution::from_rows(&rows, &[4, 4]).unwrap();
        assert_abs_diff_eq!(
            variation_of_information_channel(&bij, &pair())
                .unwrap()
                .total(),
            0.0
        );

        let vi = variation_of_information_channel(&indep_bits(), &pair()).unwrap();
        assert_abs_diff_eq!(vi.x_given_y, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(vi.y_given_x, 1.0, epsilon = 1e-15);

        let vi =
            variation_of_information_channel(&xor(), &Partition::split_at(2, 3).unwrap()).unwrap();
        assert_abs_diff_eq!(vi.x_given_y, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(vi.y_given_x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(vi.total(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn delta_uniformity_examples() {
        let d = delta_uniformity(&indep_bits(), &pair()).unwrap();
        assert_abs_diff_eq!(d.total(), 0.0, epsilon = 1e-15);

        let j = JointDistribution::from_rows(&[[0u32, 1], [1, 1]], &[2, 2]).unwrap();
        let d = delta_uniformity(&j, &pair()).unwrap();
        assert_abs_diff_eq!(d.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.y, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-15);

        let j =
            JointDistribution::from_rows(&[[0u32, 0], [1, 0], [0, 1], [1, 2]], &[2, 4]).unwrap();
        let d = delta_uniformity(&j, &pair()).unwrap();
        assert_abs_diff_eq!(d.y, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn source_measures_xor() {
        let j = xor();
        assert_abs_diff_eq!(total_correlation(&j), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dual_total_correlation(&j), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(source_vi(&j), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bound_information(&j), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(co_information(&j).unwrap(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            kl_multiinformation(&j),
            total_correlation(&j),
            epsilon = 1e-12
        );
    }

    #[test]
    fn source_measures_independent_and_copied() {
        let rows: Vec<[u32; 3]> = (0..8u32).map(|k| [k & 1, (k >> 1) & 1, k >> 2]).collect();
        let ind = JointDistribution::from_rows(&rows, &[2, 2, 2]).unwrap();
        assert_abs_diff_eq!(total_correlation(&ind), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dual_total_correlation(&ind), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(source_vi(&ind), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bound_information(&ind), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(co_information(&ind).unwrap(), 0.0, epsilon = 1e-12);

        let c = copied_bits();
        assert_abs_diff_eq!(total_correlation(&c), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dual_total_correlation(&c), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bound_information(&c), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn source_vi_single_variable_is_entropy() {
        let j = JointDistribution::from_rows(&[[0u32], [1], [1], [2]], &[3]).unwrap();
        assert_abs_diff_eq!(source_vi(&j), j.entropy(), epsilon = 1e-15);
    }

    #[test]
    fn two_variables_collapse_to_mutual_information() {
        let rows = vec![[0u32, 0], [0, 1], [1, 1], [2, 1], [2, 2], [2, 2], [1, 0]];
        let j = JointDistribution::from_rows(&rows, &[3, 3]).unwrap();
        let mi = mutual_information(&j, &pair()).unwrap();
        assert_abs_diff_eq!(
            binding_information(&j, &pair()).unwrap(),
            mi,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(total_correlation(&j), mi, epsilon = 1e-12);
        assert_abs_diff_eq!(dual_total_correlation(&j), mi, epsilon = 1e-12);
        assert_abs_diff_eq!(co_information(&j).unwrap(), mi, epsilon = 1e-12);
    }

    #[test]
    fn co_information_refuses_large_inputs() {
        let row = vec![0u32; 21];
        let j = JointDistribution::from_rows(&[row], &[2; 21]).unwrap();
        assert!(matches!(co_information(&j), Err(Error::Argument(_))));
        let one = JointDistribution::from_rows(&[[0u32]], &[2]).unwrap();
        assert!(co_information(&one).is_err());
    }

    #[test]
    fn source_decomposition_fields_consistent() {
        let s = source_decomposition(&xor());
        assert_abs_diff_eq!(s.h_pi, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.h_joint, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            s.bound_information,
            s.total_correlation + s.dual_total_correlation
        );
        assert_abs_diff_eq!(s.co_information.unwrap(), -1.0, epsilon = 1e-12);
    }
}
