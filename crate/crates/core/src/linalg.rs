//! Small dense symmetric eigensolver (cyclic Jacobi) and helpers built on it.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
///
/// Returns eigenvalues in the order they appear on the diagonal after
/// convergence, with the matching eigenvectors as columns.
pub fn symmetric_eigen(a: ArrayView2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Argument(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut a = a.to_owned();
    // symmetrize away round-off
    for p in 0..n {
        for q in p + 1..n {
            let s = 0.5 * (a[[p, q]] + a[[q, p]]);
            a[[p, q]] = s;
            a[[q, p]] = s;
        }
    }
    let mut v = Array2::<f64>::eye(n);
    let norm2: f64 = a.iter().map(|x| x * x).sum();

    for _ in 0..MAX_SWEEPS {
        let off2: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[[p, q]] * a[[p, q]])
            .sum();
        if off2 == 0.0 || off2 <= 1e-30 * norm2 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    Ok((a.diag().to_owned(), v))
}

/// `(M M^T)^(-1/2) M`: the closest matrix with orthonormal rows.
pub fn symmetric_decorrelation(m: &Array2<f64>) -> Result<Array2<f64>> {
    let gram = m.dot(&m.t());
    let (vals, vecs) = symmetric_eigen(gram.view())?;
    let max = vals.iter().cloned().fold(0.0, f64::max);
    if vals
        .iter()
        .any(|&l| l <= 1e-14 * max.max(f64::MIN_POSITIVE))
    {
        return Err(Error::Internal(
            "matrix is singular, cannot decorrelate its rows".into(),
        ));
    }
    let inv_sqrt = Array1::from_iter(vals.iter().map(|l| 1.0 / l.sqrt()));
    let scaled = &vecs * &inv_sqrt.insert_axis(Axis(0));
    Ok(scaled.dot(&vecs.t()).dot(m))
}

/// Column means and the centered copy of `data`.
pub fn center(data: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let mean = data
        .mean_axis(Axis(0))
        .unwrap_or_else(|| Array1::zeros(data.ncols()));
    let centered = &data - &mean.view().insert_axis(Axis(0));
    (mean, centered)
}

/// Sample covariance with divisor `m - 1`.
pub fn covariance(centered: ArrayView2<f64>) -> Array2<f64> {
    let m = centered.nrows() as f64;
    centered.t().dot(&centered) / (m - 1.0)
}
