use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dataset::EmbeddingSet;
use crate::error::{Error, Result};

/// Mean and (n - 1)-normalized covariance of an embedding set.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

const CHUNK_ROWS: usize = 4096;

impl GaussianSummary {
    pub fn fit(set: &EmbeddingSet) -> Result<Self> {
        let (n, d) = (set.count(), set.dim());
        if n < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 embeddings for a covariance, got {n}"
            )));
        }
        let mut mean = DVector::<f64>::zeros(d);
        for row in set.rows() {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v as f64;
            }
        }
        mean /= n as f64;
        // Centered rows in blocks keep memory flat for large sets.
        let mut cov = DMatrix::<f64>::zeros(d, d);
        let data = set.as_slice();
        for start in (0..n).step_by(CHUNK_ROWS) {
            let rows = CHUNK_ROWS.min(n - start);
            let block =
                DMatrix::from_fn(rows, d, |i, j| data[(start + i) * d + j] as f64 - mean[j]);
            cov.gemm_tr(1.0, &block, &block, 1.0);
        }
        cov /= (n - 1) as f64;
        let cov = (&cov + cov.transpose()) * 0.5;
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("covariance is not finite".into()));
        }
        Ok(GaussianSummary { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Eigenvalues of a symmetric PSD matrix with round-off negatives clamped;
/// fails on a clearly negative eigenvalue.
fn psd_eigen(m: DMatrix<f64>, what: &str) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let trace = m.trace().abs();
    let mut eig = SymmetricEigen::new(m);
    for v in eig.eigenvalues.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-6 * trace.max(f64::MIN_POSITIVE) {
                return Err(Error::Numerical(format!(
                    "{what} has eigenvalue {v}, not positive semi-definite"
                )));
            }
            *v = 0.0;
        }
    }
    Ok(eig)
}

/// `|mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2))`.
///
/// The square-root trace is taken as `Tr((A^(1/2) S_b A^(1/2))^(1/2))` with
/// `A = S_a`, which has the same eigenvalues as `S_a S_b` but is symmetric.
pub fn fid_from_summaries(a: &GaussianSummary, b: &GaussianSummary) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "embedding dims differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let diff = (&a.mean - &b.mean).norm_squared();
    let ea = psd_eigen(a.cov.clone(), "covariance")?;
    let sqrt_a = &ea.eigenvectors
        * DMatrix::from_diagonal(&ea.eigenvalues.map(f64::sqrt))
        * ea.eigenvectors.transpose();
    let m = &sqrt_a * &b.cov * &sqrt_a;
    let m = (&m + m.transpose()) * 0.5;
    let em = psd_eigen(m, "covariance product")?;
    let tr_sqrt: f64 = em.eigenvalues.iter().map(|v| v.sqrt()).sum();
    let value = diff + a.cov.trace() + b.cov.trace() - 2.0 * tr_sqrt;
    if !value.is_finite() {
        return Err(Error::Numerical(format!("FID evaluated to {value}")));
    }
    Ok(value.max(0.0))
}

pub fn fid(a: &EmbeddingSet, b: &EmbeddingSet) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "embedding dims differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    fid_from_summaries(&GaussianSummary::fit(a)?, &GaussianSummary::fit(b)?)
}
