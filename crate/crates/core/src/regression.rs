//! Small dense least-squares solves used by the fitting routines.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solves `min ‖X β − y‖₂` by Householder QR, where `columns[j]` is the
/// `j`-th column of `X`. Columns are rescaled to unit norm first so that
/// rank detection is scale-independent.
pub fn least_squares<T: Real>(columns: &[Vec<T>], y: &[T]) -> Result<Vec<T>> {
    let p = columns.len();
    let m = y.len();
    if p == 0 || m < p || columns.iter().any(|c| c.len() != m) {
        return Err(Error::DegenerateFit(format!("{m} observations for {p} unknowns")));
    }
    let mut scales = Vec::with_capacity(p);
    let mut a: Vec<Vec<T>> = Vec::with_capacity(p);
    for col in columns {
        let norm = col.iter().map(|&v| v * v).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::DegenerateFit("zero or non-finite design column".into()));
        }
        scales.push(norm);
        a.push(col.iter().map(|&v| v / norm).collect());
    }
    let mut rhs = y.to_vec();
    let rank_tol = T::epsilon().sqrt() * T::lit(1e-2);

    for k in 0..p {
        let norm = a[k][k..].iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm <= rank_tol {
            return Err(Error::DegenerateFit("design matrix is rank-deficient".into()));
        }
        let alpha = if a[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2 = v.iter().map(|&x| x * x).sum::<T>();
        if vnorm2 > T::zero() {
            for col in a.iter_mut().skip(k) {
                let dot = v.iter().zip(&col[k..]).map(|(&vi, &ci)| vi * ci).sum::<T>();
                let f = T::lit(2.0) * dot / vnorm2;
                for (ci, &vi) in col[k..].iter_mut().zip(&v) {
                    *ci -= f * vi;
                }
            }
            let dot = v.iter().zip(&rhs[k..]).map(|(&vi, &ri)| vi * ri).sum::<T>();
            let f = T::lit(2.0) * dot / vnorm2;
            for (ri, &vi) in rhs[k..].iter_mut().zip(&v) {
                *ri -= f * vi;
            }
        }
    }

    let mut beta = vec![T::zero(); p];
    for k in (0..p).rev() {
        let mut s = rhs[k];
        for j in k + 1..p {
            s -= a[j][k] * beta[j];
        }
        beta[k] = s / a[k][k];
    }
    Ok(beta.into_iter().zip(scales).map(|(b, s)| b / s).collect())
}

/// Ordinary least-squares line `y ≈ intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit<T> {
    pub intercept: T,
    pub slope: T,
    pub r_squared: T,
}

pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Result<LineFit<T>> {
    let ones = vec![T::one(); x.len()];
    let beta = least_squares(&[ones, x.to_vec()], y)?;
    let (intercept, slope) = (beta[0], beta[1]);
    let mean = y.iter().copied().sum::<T>() / T::from_usize_lossy(y.len());
    let ss_tot: T = y.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let ss_res: T = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - intercept - slope * xi;
            r * r
        })
        .sum();
    let r_squared = if ss_tot > T::zero() {
        T::one() - ss_res / ss_tot
    } else {
        T::one()
    };
    Ok(LineFit {
        intercept,
        slope,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_plane() {
        let t: Vec<f64> = (0..12).map(|i| 8.0 + 0.5 * i as f64).collect();
        let ones: Vec<f64> = vec![1.0; t.len()];
        let lnt: Vec<f64> = t.iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = t.iter().map(|&v| 0.7 - 1.3 * v.ln() + 1.5 * v).collect();
        let beta = least_squares(&[ones, lnt, t.clone()], &y).unwrap();
        assert!((beta[0] - 0.7).abs() < 1e-9);
        assert!((beta[1] + 1.3).abs() < 1e-9);
        assert!((beta[2] - 1.5).abs() < 1e-10);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let t: Vec<f64> = vec![3.0; 10];
        let ones = vec![1.0; 10];
        let y = vec![1.0; 10];
        assert!(matches!(least_squares(&[ones, t], &y), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn line_fit_r_squared() {
        let x = [1.0f64, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }
}
