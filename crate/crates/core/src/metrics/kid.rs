use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddingSet;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KidParams {
    pub subset_size: usize,
    pub n_subsets: usize,
}

impl Default for KidParams {
    fn default() -> Self {
        KidParams {
            subset_size: 100,
            n_subsets: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KidEstimate {
    pub mean: f64,
    /// Population standard deviation over subsets.
    pub std: f64,
}

fn to_matrix(rows: &[&[f32]], d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j] as f64)
}

/// `k(x, y) = (x.y / d + 1)^3` for every row pair.
fn kernel(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let d = x.ncols() as f64;
    (x * y.transpose()).map(|g| {
        let t = g / d + 1.0;
        t * t * t
    })
}

/// Unbiased MMD^2 between two point sets under the cubic polynomial kernel.
pub fn mmd2_unbiased(x: &[&[f32]], y: &[&[f32]]) -> Result<f64> {
    let (m, n) = (x.len(), y.len());
    if m < 2 || n < 2 {
        return Err(Error::invalid("MMD needs at least 2 points per set"));
    }
    let d = x[0].len();
    if x.iter().chain(y).any(|r| r.len() != d) {
        return Err(Error::invalid("MMD points must share one dimension"));
    }
    let (xm, ym) = (to_matrix(x, d), to_matrix(y, d));
    let kxx = kernel(&xm, &xm);
    let kyy = kernel(&ym, &ym);
    let kxy = kernel(&xm, &ym);
    let off = |k: &DMatrix<f64>| k.sum() - k.trace();
    let (m, n) = (m as f64, n as f64);
    Ok(off(&kxx) / (m * (m - 1.0)) + off(&kyy) / (n * (n - 1.0)) - 2.0 * kxy.sum() / (m * n))
}

/// Mean and spread of the unbiased MMD^2 over `n_subsets` random subsets of
/// each set, drawn without replacement. Subset `s` of each set is keyed by
/// `(seed, s)` and the set's role, so results do not depend on scheduling.
pub fn kid(
    a: &EmbeddingSet,
    b: &EmbeddingSet,
    params: &KidParams,
    seed: u64,
) -> Result<KidEstimate> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "embedding dims differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let m = params.subset_size;
    if m < 2 || params.n_subsets == 0 {
        return Err(Error::invalid(
            "KID needs subset_size >= 2 and at least one subset",
        ));
    }
    for (name, set) in [("first", a), ("second", b)] {
        if set.count() < m {
            return Err(Error::invalid(format!(
                "subset size {m} exceeds the {} embeddings of the {name} set",
                set.count()
            )));
        }
    }
    let draw = |set: &'_ EmbeddingSet, key: &str, s: usize| -> Vec<usize> {
        let mut rng = seed::rng(seed::derive_index(seed, key, s as u64));
        rand::seq::index::sample(&mut rng, set.count(), m).into_vec()
    };
    let values: Vec<f64> = (0..params.n_subsets)
        .into_par_iter()
        .map(|s| {
            let x: Vec<&[f32]> = draw(a, "kid/a", s).into_iter().map(|i| a.row(i)).collect();
            let y: Vec<&[f32]> = draw(b, "kid/b", s).into_iter().map(|i| b.row(i)).collect();
            mmd2_unbiased(&x, &y)
        })
        .collect::<Result<_>>()?;
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
    if !mean.is_finite() {
        return Err(Error::Numerical(format!("KID evaluated to {mean}")));
    }
    Ok(KidEstimate {
        mean,
        std: var.sqrt(),
    })
}
