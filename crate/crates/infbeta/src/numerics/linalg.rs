//! Dense weighted least-squares kernel and small symmetric-matrix helpers.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Reciprocal-condition threshold below which a normal-equation solve is
/// rejected as collinear.
pub const RCOND_THRESHOLD: f64 = 1e-12;

/// Weight matrix forms accepted by [`solve_weighted_least_squares`].
pub enum Weights<'a> {
    Identity,
    Diagonal(&'a DVector<f64>),
    Dense(&'a DMatrix<f64>),
}

/// Solves min_x || W^{1/2} (design · x − response) ||₂, i.e. the normal
/// equations (DᵀWD) x = DᵀW r, by a column-pivoted QR of W^{1/2}·design.
///
/// `block` names the parameter block for error reporting. Returns an
/// ill-conditioning error when the reciprocal condition estimate of the
/// weighted design falls below [`RCOND_THRESHOLD`].
pub fn solve_weighted_least_squares(
    design: &DMatrix<f64>,
    weights: Weights<'_>,
    response: &DVector<f64>,
    block: &str,
) -> Result<DVector<f64>> {
    let (n, q) = design.shape();
    if response.len() != n {
        return Err(Error::Usage(format!(
            "weighted least squares: design has {n} rows but response has {}",
            response.len()
        )));
    }
    if n < q {
        return Err(Error::Usage(format!(
            "weighted least squares: underdetermined system ({n} rows, {q} columns) in {block} block"
        )));
    }
    let (a, b) = apply_sqrt_weights(design, response, weights, block)?;
    lstsq_qr(&a, &b, block)
}

fn apply_sqrt_weights(
    design: &DMatrix<f64>,
    response: &DVector<f64>,
    weights: Weights<'_>,
    block: &str,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    match weights {
        Weights::Identity => Ok((design.clone(), response.clone())),
        Weights::Diagonal(w) => {
            if w.len() != design.nrows() {
                return Err(Error::Usage(format!(
                    "weight vector length {} does not match {} rows",
                    w.len(),
                    design.nrows()
                )));
            }
            let mut a = design.clone();
            let mut b = response.clone();
            for t in 0..design.nrows() {
                let wt = w[t];
                if !(wt.is_finite() && wt >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "non-finite or negative weight {wt} at row {t} in {block} block"
                    )));
                }
                let s = wt.sqrt();
                for j in 0..design.ncols() {
                    a[(t, j)] *= s;
                }
                b[t] *= s;
            }
            Ok((a, b))
        }
        Weights::Dense(w) => {
            let n = design.nrows();
            if w.shape() != (n, n) {
                return Err(Error::Usage(format!(
                    "dense weight matrix {:?} does not match {n} rows",
                    w.shape()
                )));
            }
            let s = sym_sqrt(w, block)?;
            Ok((&s * design, &s * response))
        }
    }
}

/// Symmetric PSD square root via eigendecomposition; tiny negative
/// eigenvalues from rounding are clamped to zero.
fn sym_sqrt(m: &DMatrix<f64>, block: &str) -> Result<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let tol = -1e-10 * max_ev.max(1.0);
    let mut d = DVector::zeros(m.nrows());
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev < tol {
            return Err(Error::InvalidParameter(format!(
                "weight matrix in {block} block is not positive semidefinite (eigenvalue {ev})"
            )));
        }
        d[i] = ev.max(0.0).sqrt();
    }
    let mut s = eig.eigenvectors.clone();
    for j in 0..s.ncols() {
        for i in 0..s.nrows() {
            s[(i, j)] *= d[j];
        }
    }
    Ok(&s * eig.eigenvectors.transpose())
}

/// Least squares via column-pivoted QR with a reciprocal-condition check on
/// the diagonal of R.
pub(crate) fn lstsq_qr(a: &DMatrix<f64>, b: &DVector<f64>, block: &str) -> Result<DVector<f64>> {
    let q_cols = a.ncols();
    let qr = a.clone().col_piv_qr();
    let r = qr.r();
    let rcond = rcond_from_r_diag(&r);
    if rcond < RCOND_THRESHOLD {
        return Err(Error::IllConditioned {
            block: block.to_string(),
            rcond,
            threshold: RCOND_THRESHOLD,
        });
    }
    let qtb = qr.q().transpose() * b;
    let z = r
        .view((0, 0), (q_cols, q_cols))
        .solve_upper_triangular(&qtb.rows(0, q_cols).into_owned())
        .ok_or_else(|| Error::IllConditioned {
            block: block.to_string(),
            rcond,
            threshold: RCOND_THRESHOLD,
        })?;
    // Undo the column pivoting: A P = Q R solved for w = Pᵀ x.
    let mut x = z;
    qr.p().inv_permute_rows(&mut x);
    Ok(x)
}

fn rcond_from_r_diag(r: &DMatrix<f64>) -> f64 {
    let k = r.nrows().min(r.ncols());
    let mut max_d = 0.0_f64;
    let mut min_d = f64::INFINITY;
    for i in 0..k {
        let d = r[(i, i)].abs();
        max_d = max_d.max(d);
        min_d = min_d.min(d);
    }
    if max_d == 0.0 {
        0.0
    } else {
        min_d / max_d
    }
}

/// Reciprocal-condition estimate of a matrix from a column-pivoted QR.
pub fn rcond_estimate(m: &DMatrix<f64>) -> f64 {
    rcond_from_r_diag(&m.clone().col_piv_qr().r())
}

/// Diagonal of the weighted projection (hat) matrix
/// W^{1/2} D (DᵀWD)⁻¹ Dᵀ W^{1/2}, computed from the thin Q factor.
pub fn weighted_hat_diagonal(
    design: &DMatrix<f64>,
    weights: &DVector<f64>,
    block: &str,
) -> Result<DVector<f64>> {
    let (n, q) = design.shape();
    let mut a = design.clone();
    for t in 0..n {
        let wt = weights[t];
        if !(wt.is_finite() && wt >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "non-finite or negative weight {wt} at row {t} in {block} block"
            )));
        }
        let s = wt.sqrt();
        for j in 0..q {
            a[(t, j)] *= s;
        }
    }
    let qr = a.col_piv_qr();
    let rcond = rcond_from_r_diag(&qr.r());
    if rcond < RCOND_THRESHOLD {
        return Err(Error::IllConditioned {
            block: block.to_string(),
            rcond,
            threshold: RCOND_THRESHOLD,
        });
    }
    let qmat = qr.q();
    let mut h = DVector::zeros(n);
    for t in 0..n {
        let mut s = 0.0;
        for j in 0..q {
            s += qmat[(t, j)] * qmat[(t, j)];
        }
        h[t] = s;
    }
    Ok(h)
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn sym_pd_inverse(m: &DMatrix<f64>, block: &str) -> Result<DMatrix<f64>> {
    let rcond = rcond_estimate(m);
    if rcond < RCOND_THRESHOLD {
        return Err(Error::IllConditioned {
            block: block.to_string(),
            rcond,
            threshold: RCOND_THRESHOLD,
        });
    }
    nalgebra::Cholesky::new(m.clone())
        .map(|c| c.inverse())
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "matrix for {block} block is not positive definite"
            ))
        })
}

/// Symmetric square root of a 2×2 SPD matrix [[a, c], [c, b]].
///
/// Uses sqrt(M) = (M + √det·I) / √(trace + 2√det).
pub(crate) fn sqrt_spd_2x2(a: f64, b: f64, c: f64) -> Option<[f64; 3]> {
    let det = a * b - c * c;
    let tr = a + b;
    if !(det > 0.0 && tr > 0.0) {
        return None;
    }
    let s = det.sqrt();
    let t = (tr + 2.0 * s).sqrt();
    Some([(a + s) / t, (b + s) / t, c / t])
}
