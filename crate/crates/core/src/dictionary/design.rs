use ndarray::{Array1, Array2, ArrayView1, Axis};

use super::{Atom, DesignGrid};
use crate::error::{Error, Result};

/// Column-sparse layout is used for products when at most this fraction of
/// entries is nonzero (wavelet dictionaries are far below it).
const SPARSE_DENSITY: f64 = 0.3;

/// The `n x p` matrix `A_ij = phi_j(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    dense: Array2<f64>,
    labels: Vec<String>,
    sparse: Option<Vec<Vec<(usize, f64)>>>,
}

impl DesignMatrix {
    pub fn from_atoms(atoms: &[Atom], grid: &DesignGrid) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Config(
                "a design matrix needs at least one atom".into(),
            ));
        }
        let mut dense = Array2::zeros((grid.len(), atoms.len()));
        for (j, atom) in atoms.iter().enumerate() {
            for (i, &x) in grid.points().iter().enumerate() {
                dense[[i, j]] = atom.eval(x);
            }
        }
        Self::from_array(dense, atoms.iter().map(ToString::to_string).collect())
    }

    /// Wraps an explicit matrix. Columns that vanish identically are rejected.
    pub fn from_array(dense: Array2<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != dense.ncols() {
            return Err(Error::Dimension {
                expected: dense.ncols(),
                got: labels.len(),
            });
        }
        if dense.nrows() == 0 || dense.ncols() == 0 {
            return Err(Error::Shape("design matrix must be non-empty".into()));
        }
        for (j, col) in dense.axis_iter(Axis(1)).enumerate() {
            if col.iter().all(|v| *v == 0.0) {
                return Err(Error::DegenerateAtom {
                    atom: labels[j].clone(),
                });
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!(
                    "column `{}` has non-finite entries",
                    labels[j]
                )));
            }
        }
        let nnz = dense.iter().filter(|v| **v != 0.0).count();
        let sparse = ((nnz as f64) <= SPARSE_DENSITY * dense.len() as f64).then(|| {
            dense
                .axis_iter(Axis(1))
                .map(|col| {
                    col.iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(i, v)| (i, *v))
                        .collect()
                })
                .collect()
        });
        Ok(Self {
            dense,
            labels,
            sparse,
        })
    }

    /// Unlabelled convenience constructor; columns are named `c0, c1, ...`.
    pub fn from_dense(dense: Array2<f64>) -> Result<Self> {
        let labels = (0..dense.ncols()).map(|j| format!("c{j}")).collect();
        Self::from_array(dense, labels)
    }

    pub fn nrows(&self) -> usize {
        self.dense.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.dense.ncols()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.dense
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.dense.column(j)
    }

    /// `A beta`.
    pub fn mul(&self, beta: &Array1<f64>) -> Array1<f64> {
        match &self.sparse {
            Some(cols) => {
                let mut out = Array1::zeros(self.nrows());
                for (col, &b) in cols.iter().zip(beta.iter()) {
                    if b != 0.0 {
                        for &(i, v) in col {
                            out[i] += v * b;
                        }
                    }
                }
                out
            }
            None => self.dense.dot(beta),
        }
    }

    /// `A^T r`.
    pub fn tmul(&self, r: &Array1<f64>) -> Array1<f64> {
        match &self.sparse {
            Some(cols) => cols
                .iter()
                .map(|col| col.iter().map(|&(i, v)| v * r[i]).sum())
                .collect(),
            None => self.dense.t().dot(r),
        }
    }

    /// `max_i phi_j(x_i)^2` per column.
    pub fn max_sq(&self) -> Array1<f64> {
        self.dense
            .map_axis(Axis(0), |col| col.iter().fold(0.0_f64, |m, v| m.max(v * v)))
    }

    /// Columns `cols` as an `n x |cols|` matrix.
    pub fn submatrix(&self, cols: &[usize]) -> Array2<f64> {
        self.dense.select(Axis(1), cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_zero_columns() {
        let err = DesignMatrix::from_dense(array![[1.0, 0.0], [2.0, 0.0]]).unwrap_err();
        assert_eq!(err, Error::DegenerateAtom { atom: "c1".into() });
    }

    #[test]
    fn sparse_and_dense_products_agree() {
        let mut m = Array2::zeros((10, 6));
        for j in 0..6 {
            m[[j, j]] = (j + 1) as f64;
            m[[9 - j, j]] = -0.5;
        }
        let sparse = DesignMatrix::from_dense(m.clone()).unwrap();
        assert!(sparse.sparse.is_some());
        let beta = Array1::from_iter((0..6).map(|j| j as f64 - 2.5));
        let r = Array1::from_iter((0..10).map(|i| (i as f64).sin()));
        let dense_mul = m.dot(&beta);
        let dense_tmul = m.t().dot(&r);
        for (a, b) in sparse.mul(&beta).iter().zip(dense_mul.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in sparse.tmul(&r).iter().zip(dense_tmul.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
