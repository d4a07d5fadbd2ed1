//! Dense complex matrix helpers shared by the assembly and solver modules.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |m - m*|` entrywise.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..m.ncols() {
        for i in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Checks `‖m − m*‖_max ≤ rel·‖m‖_max` (absolute floor for the zero matrix).
pub fn ensure_hermitian(m: &CMatrix, rel: f64) -> Result<()> {
    if !m.is_square() {
        return Err(LabError::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let scale = max_abs(m);
    let asymmetry = hermitian_defect(m);
    if asymmetry > rel * scale.max(f64::MIN_POSITIVE) && asymmetry > 0.0 {
        return Err(LabError::NotHermitian { asymmetry, scale });
    }
    Ok(())
}

/// Block matrix `[[a, b], [c, d]]` from four equally sized square blocks.
pub fn block2(a: &CMatrix, b: &CMatrix, cc: &CMatrix, d: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(cc);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}

/// Component-major Kronecker product: block `(p, q)` of the result is `g[(p, q)] · a`.
pub fn kron(g: &CMatrix, a: &CMatrix) -> CMatrix {
    let (gr, gc) = g.shape();
    let (ar, ac) = a.shape();
    let mut out = CMatrix::zeros(gr * ar, gc * ac);
    for p in 0..gr {
        for q in 0..gc {
            let z = g[(p, q)];
            if z != ZERO {
                out.view_mut((p * ar, q * ac), (ar, ac)).copy_from(&(a * z));
            }
        }
    }
    out
}

/// Diagonal matrix with entries `i·ν`.
pub fn i_diag(nu: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        nu.len(),
        nu.iter().map(|&v| c(0.0, v)),
    ))
}

/// Spectral norm of a small Hermitian matrix, via its eigenvalues.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 2 {
        // closed form for the 2×2 case, which is by far the most common here
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)].norm();
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        return (mean.abs() + rad).max((mean - rad).abs());
    }
    crate::eigensolve::eigenvalues(m)
        .map(|s| s.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())))
        .unwrap_or(f64::NAN)
}

/// Dense row-major export with `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixExport {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl From<&CMatrix> for MatrixExport {
    fn from(m: &CMatrix) -> Self {
        let data = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        MatrixExport {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl MatrixExport {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.data.len() != self.rows || self.data.iter().any(|r| r.len() != self.cols) {
            return Err(LabError::InvalidArgument(format!(
                "matrix payload does not match its declared {}x{} shape",
                self.rows, self.cols
            )));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i][j];
            c(re, im)
        }))
    }
}
