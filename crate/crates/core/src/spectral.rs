//! Second eigenvalues of diffusion matrices.
//!
//! `P = I - L/(2Δ)` where `L` is the combinatorial Laplacian, so closed forms
//! follow from Laplacian spectra: the cycle `C_q` has Laplacian eigenvalues
//! `2 - 2cos(2πr/q)`, and the Laplacian spectrum of a Cartesian product is the
//! set of sums of the factors' eigenvalues. All eigenvalues of `P` lie in
//! `[0, 1]` because every diagonal entry is at least `1/2`.
//!
//! [`numeric_lambda2`] is the independent oracle: a dense symmetric
//! eigensolver for small matrices, power iteration with deflation of the
//! uniform vector above [`DENSE_LIMIT`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{DiffusionMatrix, Graph, GraphKind};

/// Matrices with fewer vertices use the dense eigensolver.
pub const DENSE_LIMIT: usize = 512;
/// Largest matrix [`numeric_lambda2`] accepts.
pub const NUMERIC_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMethod {
    ClosedForm,
    Dense,
    PowerIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Second largest eigenvalue of `P` in absolute value.
    pub lambda2: f64,
    /// `1 - λ₂`.
    pub gap: f64,
    pub method: SpectralMethod,
}

impl SpectralReport {
    fn closed(lambda2: f64) -> Self {
        Self {
            lambda2,
            gap: 1.0 - lambda2,
            method: SpectralMethod::ClosedForm,
        }
    }

    /// `1/(1 - λ₂)`.
    pub fn relaxation_time(&self) -> f64 {
        1.0 / self.gap
    }
}

/// Eigenvalues `1 - cos(2πr/q)`, `r = 0..q`, of the normalized cycle
/// Laplacian `I - A/2`.
pub fn cycle_laplacian_eigenvalues(q: usize) -> Result<Vec<f64>> {
    if q < 3 {
        return Err(Error::Size(format!("cycle needs q >= 3, got {q}")));
    }
    Ok((0..q)
        .map(|r| 1.0 - (2.0 * PI * r as f64 / q as f64).cos())
        .collect())
}

/// λ₂ of the torus `C_{n_1} x ... x C_{n_d}`:
/// `1 - (1/(2d)) · min_k (1 - cos(2π/n_k))`.
pub fn torus_lambda2(dims: &[usize]) -> Result<SpectralReport> {
    if dims.is_empty() || dims.iter().any(|&s| s < 3) {
        return Err(Error::Dimension(format!("invalid torus sides {dims:?}")));
    }
    let d = dims.len() as f64;
    let tau = dims
        .iter()
        .map(|&s| 1.0 - (2.0 * PI / s as f64).cos())
        .fold(f64::INFINITY, f64::min)
        / d;
    Ok(SpectralReport::closed(1.0 - 0.5 * tau))
}

/// λ₂ = 1 - 1/d for the `d`-dimensional hypercube.
pub fn hypercube_lambda2(d: u32) -> Result<SpectralReport> {
    if d == 0 {
        return Err(Error::Dimension("hypercube dimension must be >= 1".into()));
    }
    Ok(SpectralReport::closed(1.0 - 1.0 / d as f64))
}

/// λ₂ for the path on `q` vertices (Δ = 2): `1 - (1 - cos(π/q))/2`.
///
/// The two-vertex path has Δ = 1 and eigenvalues `{1, 0}`, so its λ₂ is 0.
pub fn path_lambda2(q: usize) -> Result<SpectralReport> {
    if q < 2 {
        return Err(Error::Size(format!("path needs q >= 2, got {q}")));
    }
    // path Laplacian eigenvalues are 2 - 2cos(πk/q)
    let lambda2 = if q == 2 {
        0.0
    } else {
        1.0 - (1.0 - (PI / q as f64).cos()) / 2.0
    };
    Ok(SpectralReport::closed(lambda2))
}

/// Closed-form λ₂ for the structured families; `None` for custom graphs.
pub fn closed_form_lambda2(g: &Graph) -> Option<SpectralReport> {
    match g.kind() {
        GraphKind::Torus { dims } => torus_lambda2(dims).ok(),
        GraphKind::Cycle { q } => torus_lambda2(&[*q]).ok(),
        GraphKind::Hypercube { d } => hypercube_lambda2(*d).ok(),
        GraphKind::Path { q } => path_lambda2(*q).ok(),
        GraphKind::Custom { .. } => None,
    }
}

/// `⌈(2/(1-λ₂)) · ln(K n² / ℓ)⌉` steps for the idealized process to bring
/// discrepancy `K` down to `ℓ`.
pub fn convergence_bound(lambda2: f64, k: f64, n: usize, ell: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&lambda2) {
        return Err(Error::Precondition(format!(
            "λ₂ = {lambda2} must lie in [0, 1)"
        )));
    }
    if !(ell > 0.0 && k >= ell) {
        return Err(Error::Precondition(format!(
            "need K >= ℓ > 0, got K = {k}, ℓ = {ell}"
        )));
    }
    let log = (k * (n as f64).powi(2) / ell).ln().max(0.0);
    Ok((2.0 / (1.0 - lambda2) * log).ceil() as u64)
}

/// All eigenvalues of `P` in ascending order (dense).
pub fn dense_eigenvalues(matrix: &DiffusionMatrix) -> Result<Vec<f64>> {
    if matrix.n() > NUMERIC_LIMIT {
        return Err(Error::Budget(format!(
            "dense eigensolve of n = {}",
            matrix.n()
        )));
    }
    let mut values: Vec<f64> = SymmetricEigen::new(matrix.to_dense())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Ascending eigenvalues of a dense symmetric matrix.
pub fn symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Numeric λ₂ (second largest |eigenvalue|) of `P`.
pub fn numeric_lambda2(matrix: &DiffusionMatrix) -> Result<SpectralReport> {
    let n = matrix.n();
    if n < 2 {
        return Err(Error::Size("λ₂ needs at least two vertices".into()));
    }
    if n > NUMERIC_LIMIT {
        return Err(Error::Budget(format!(
            "numeric λ₂ limited to n <= {NUMERIC_LIMIT}, got {n}"
        )));
    }
    if n < DENSE_LIMIT {
        let values = dense_eigenvalues(matrix)?;
        let mut by_abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        by_abs.sort_by(|a, b| b.total_cmp(a));
        let lambda2 = by_abs[1];
        Ok(SpectralReport {
            lambda2,
            gap: 1.0 - lambda2,
            method: SpectralMethod::Dense,
        })
    } else {
        let lambda2 = power_iteration_lambda2(matrix, 1e-10, 2_000_000)?;
        Ok(SpectralReport {
            lambda2,
            gap: 1.0 - lambda2,
            method: SpectralMethod::PowerIteration,
        })
    }
}

/// Power iteration on the complement of the uniform vector.
///
/// `P` is symmetric and doubly stochastic, so the uniform vector is the
/// eigenvector of eigenvalue 1; projecting it out leaves λ₂ as the dominant
/// eigenvalue (all eigenvalues are nonnegative). Stops when the residual
/// `‖Pv - ρv‖`, which bounds the eigenvalue error, falls below `tol`.
pub fn power_iteration_lambda2(matrix: &DiffusionMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    let n = matrix.n();
    // deterministic, non-symmetric start vector
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let h = (i as u64)
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .rotate_left(17);
            (h >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let deflate = |v: &mut Vec<f64>| {
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    };
    deflate(&mut v);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let w = matrix.apply_unchecked(&v);
        let rho: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - rho * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol {
            return Ok(rho);
        }
        v = w;
        deflate(&mut v);
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual,
    })
}
