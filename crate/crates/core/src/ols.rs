//! Ordinary least squares with an intercept and classical standard errors.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Singular values of `X'X` below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// Intercept first, then one slope per regressor.
    pub coef: Vec<f64>,
    pub std_err: Vec<f64>,
    pub t_stat: Vec<f64>,
    pub residual_ss: f64,
    pub r_squared: f64,
    /// Residual standard deviation with `n - k` degrees of freedom.
    pub sigma: f64,
    pub n: usize,
}

impl OlsFit {
    pub fn intercept(&self) -> f64 {
        self.coef[0]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.coef[1..]
    }
}

/// Regress `y` on an intercept and the given regressor rows.
///
/// Standard errors need `n > k`; with `n == k` they are reported as NaN.
pub fn fit<R: AsRef<[f64]>>(rows: &[R], y: &[f64]) -> Result<OlsFit> {
    let n = rows.len();
    if n != y.len() {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if n == 0 {
        return Err(Error::InsufficientSamples(
            "regression needs observations".into(),
        ));
    }
    let p = rows[0].as_ref().len();
    let k = p + 1;
    if n < k {
        return Err(Error::InsufficientSamples(format!(
            "{n} observations for {k} coefficients"
        )));
    }
    let mut xtx = DMatrix::<f64>::zeros(k, k);
    let mut xty = DVector::<f64>::zeros(k);
    let mut x = vec![1.0; k];
    for (row, &yt) in rows.iter().zip(y) {
        let row = row.as_ref();
        if row.len() != p {
            return Err(Error::LengthMismatch {
                expected: p,
                actual: row.len(),
            });
        }
        x[1..].copy_from_slice(row);
        for a in 0..k {
            xty[a] += x[a] * yt;
            for b in a..k {
                xtx[(a, b)] += x[a] * x[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            xtx[(a, b)] = xtx[(b, a)];
        }
    }
    let svd = xtx.svd(true, true);
    let s_max = svd.singular_values.max();
    if !(s_max > 0.0) || svd.singular_values.min() <= RANK_TOL * s_max {
        return Err(Error::Singular { rows: n, cols: k });
    }
    let inv = svd
        .pseudo_inverse(0.0)
        .map_err(|e| Error::Numeric(e.to_string()))?;
    let beta = &inv * &xty;

    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mut rss = 0.0;
    let mut tss = 0.0;
    for (row, &yt) in rows.iter().zip(y) {
        let fitted = beta[0]
            + row
                .as_ref()
                .iter()
                .zip(beta.iter().skip(1))
                .map(|(a, b)| a * b)
                .sum::<f64>();
        rss += (yt - fitted).powi(2);
        tss += (yt - mean_y).powi(2);
    }
    let dof = n - k;
    let s2 = if dof > 0 { rss / dof as f64 } else { f64::NAN };
    let std_err: Vec<f64> = (0..k).map(|i| (s2 * inv[(i, i)]).sqrt()).collect();
    let coef: Vec<f64> = beta.iter().copied().collect();
    let t_stat = coef.iter().zip(&std_err).map(|(c, s)| c / s).collect();
    let r_squared = if tss > 0.0 {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(OlsFit {
        coef,
        std_err,
        t_stat,
        residual_ss: rss,
        r_squared,
        sigma: s2.sqrt(),
        n,
    })
}
