//! Explicit complex Clifford representations in dimensions 1 to 3.
//!
//! Generators satisfy `γ_i γ_j + γ_j γ_i = −2 δ_ij`, are skew-Hermitian, and
//! the complex volume element is `ω = i^⌊(n+1)/2⌋ γ_1 ⋯ γ_n`. For `n = 3` the
//! sign of the last generator is fixed so that `ω = +Id`; this pins the
//! orientation convention every three-dimensional spectrum depends on.
//!
//! [`SpinFrame`] attaches a representation to the adapted frame
//! `(e₀, e₁, …, e_n)` of a circle bundle over an `n`-dimensional base, with
//! `e₀` the unit vertical vector. The orientation used for volume elements is
//! always `e₀ ∧ e₁ ∧ ⋯ ∧ e_n`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::matrix::{c, max_abs, CMatrix, I, ONE, ZERO};
use crate::{LabError, Result};

/// Tolerance used for all representation identities.
pub const REP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordRep {
    n: usize,
    gammas: Vec<CMatrix>,
    omega: CMatrix,
}

fn pauli() -> [CMatrix; 3] {
    [
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

fn i_pow(p: usize) -> Complex64 {
    match p % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

fn volume_element(n: usize, gammas: &[CMatrix]) -> CMatrix {
    let dim = gammas[0].nrows();
    let product = gammas
        .iter()
        .fold(CMatrix::identity(dim, dim), |acc, g| acc * g);
    product * i_pow((n + 1) / 2)
}

/// Builds the standard representation of `Cl(n)` on `ℂ^{2^⌊n/2⌋}`.
pub fn build_rep(n: usize) -> Result<CliffordRep> {
    let gammas = match n {
        1 => vec![CMatrix::from_element(1, 1, I)],
        2 | 3 => {
            let s = pauli();
            s.iter().take(n).map(|p| p * I).collect::<Vec<_>>()
        }
        _ => return Err(LabError::DimensionOutOfRange(n)),
    };
    let mut gammas = gammas;
    let mut omega = volume_element(n, &gammas);
    if n == 3 && (omega[(0, 0)] - ONE).norm() > REP_TOL {
        gammas[2] = -gammas[2].clone();
        omega = volume_element(n, &gammas);
    }
    Ok(CliffordRep { n, gammas, omega })
}

impl CliffordRep {
    /// Assembles a representation from raw parts without checking any
    /// identity; used for fault injection in the validation suite.
    pub fn from_parts_unchecked(n: usize, gammas: Vec<CMatrix>) -> Self {
        let omega = volume_element(n, &gammas);
        CliffordRep { n, gammas, omega }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Size of the spinor module.
    pub fn spinor_dim(&self) -> usize {
        self.gammas[0].nrows()
    }

    pub fn gamma(&self, i: usize) -> &CMatrix {
        &self.gammas[i]
    }

    pub fn gammas(&self) -> &[CMatrix] {
        &self.gammas
    }

    pub fn omega(&self) -> &CMatrix {
        &self.omega
    }

    /// `max_ij ‖γ_iγ_j + γ_jγ_i + 2δ_ij‖_max`.
    pub fn anticommutation_residual(&self) -> f64 {
        let d = self.spinor_dim();
        let id = CMatrix::identity(d, d);
        let mut worst = 0.0_f64;
        for (i, gi) in self.gammas.iter().enumerate() {
            for (j, gj) in self.gammas.iter().enumerate() {
                let mut m = gi * gj + gj * gi;
                if i == j {
                    m += &id * c(2.0, 0.0);
                }
                worst = worst.max(max_abs(&m));
            }
        }
        worst
    }
}

/// A violated representation identity, named for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: &'static str,
    pub residual: f64,
}

/// Checks every representation identity and returns the violated ones.
pub fn check_rep(rep: &CliffordRep) -> Vec<Violation> {
    let mut out = Vec::new();
    let d = rep.spinor_dim();
    let id = CMatrix::identity(d, d);
    let r = rep.anticommutation_residual();
    if r > REP_TOL {
        out.push(Violation {
            invariant: "anticommutation",
            residual: r,
        });
    }
    let skew = rep
        .gammas
        .iter()
        .map(|g| max_abs(&(g.adjoint() + g)))
        .fold(0.0_f64, f64::max);
    if skew > REP_TOL {
        out.push(Violation {
            invariant: "skew-hermitian",
            residual: skew,
        });
    }
    let sq = max_abs(&(&rep.omega * &rep.omega - &id));
    if sq > REP_TOL {
        out.push(Violation {
            invariant: "volume-square",
            residual: sq,
        });
    }
    if rep.n == 3 {
        let conv = max_abs(&(&rep.omega - &id));
        if conv > REP_TOL {
            out.push(Violation {
                invariant: "volume-orientation",
                residual: conv,
            });
        }
    }
    out
}

fn check_antisymmetric(coeffs: &[Vec<f64>], n: usize) -> Result<()> {
    if coeffs.len() > n || coeffs.iter().any(|row| row.len() != coeffs.len()) {
        return Err(LabError::DimensionMismatch {
            expected: n,
            got: coeffs.len(),
        });
    }
    let scale = coeffs
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for i in 0..coeffs.len() {
        for j in 0..coeffs.len() {
            let (fij, fji) = (coeffs[i][j], coeffs[j][i]);
            if (fij + fji).abs() > REP_TOL * scale {
                return Err(LabError::NotAntisymmetric { i, j, fij, fji });
            }
        }
    }
    Ok(())
}

/// Clifford action of a two-form, `γ(F) = Σ_{i<j} F(e_i, e_j) γ_i γ_j`.
///
/// `coeffs` is a square antisymmetric table indexed by generator; it may be
/// smaller than the representation dimension, in which case the remaining
/// generators do not appear.
pub fn gamma_two_form(rep: &CliffordRep, coeffs: &[Vec<f64>]) -> Result<CMatrix> {
    check_antisymmetric(coeffs, rep.n)?;
    let d = rep.spinor_dim();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..coeffs.len() {
        for j in (i + 1)..coeffs.len() {
            if coeffs[i][j] != 0.0 {
                out += (&rep.gammas[i] * &rep.gammas[j]) * c(coeffs[i][j], 0.0);
            }
        }
    }
    Ok(out)
}

/// Representation of the total space Clifford algebra in an adapted frame.
#[derive(Debug, Clone)]
pub struct SpinFrame {
    rep: CliffordRep,
    vertical: usize,
    horizontal: Vec<usize>,
}

impl SpinFrame {
    /// Frame for a circle bundle over a base of dimension `base_dim`.
    ///
    /// * `base_dim = 1`: `Cl(2)`, `e₀ ↦ γ_1`, `e₁ ↦ γ_2`.
    /// * `base_dim = 2`: `Cl(3)`, `e₁ ↦ γ_1`, `e₂ ↦ γ_2`, `e₀ ↦ γ_3`; the
    ///   horizontal generators coincide with those of `build_rep(2)` and
    ///   `iγ(e₀) = ω₂`, so the identification of invariant spinors with base
    ///   spinors is the identity on `ℂ²`.
    pub fn for_base_dim(base_dim: usize) -> Result<Self> {
        match base_dim {
            1 => Ok(SpinFrame {
                rep: build_rep(2)?,
                vertical: 0,
                horizontal: vec![1],
            }),
            2 => Ok(SpinFrame {
                rep: build_rep(3)?,
                vertical: 2,
                horizontal: vec![0, 1],
            }),
            _ => Err(LabError::UnsupportedDimension(format!(
                "base dimension {base_dim} (supported: 1, 2)"
            ))),
        }
    }

    pub fn base_dim(&self) -> usize {
        self.horizontal.len()
    }

    pub fn rep(&self) -> &CliffordRep {
        &self.rep
    }

    pub fn spinor_dim(&self) -> usize {
        self.rep.spinor_dim()
    }

    /// `γ(e₀)`.
    pub fn vertical(&self) -> &CMatrix {
        self.rep.gamma(self.vertical)
    }

    /// `γ(e_i)` for the horizontal lift of the `i`-th base direction (0-based).
    pub fn horizontal(&self, i: usize) -> &CMatrix {
        self.rep.gamma(self.horizontal[i])
    }

    /// Clifford action of a horizontal two-form given on base indices.
    pub fn horizontal_two_form(&self, coeffs: &[Vec<f64>]) -> Result<CMatrix> {
        let n = self.rep.dim();
        check_antisymmetric(coeffs, self.base_dim())?;
        let mut table = vec![vec![0.0; n]; n];
        for (a, &ga) in self.horizontal.iter().enumerate() {
            for (b, &gb) in self.horizontal.iter().enumerate() {
                table[ga][gb] = coeffs[a][b];
            }
        }
        gamma_two_form(&self.rep, &table)
    }
}

/// Splitting `Σ_2 = Σ⁺ ⊕ Σ⁻` into the eigenspaces of `ν₁ = iγ(e₁)`.
#[derive(Debug, Clone)]
pub struct EvenOddSplit {
    pub nu: CMatrix,
    pub p_plus: CMatrix,
    pub p_minus: CMatrix,
    /// Unit vector spanning `Σ⁺`, phase fixed by making its largest entry real positive.
    pub u_plus: DVector<Complex64>,
    /// `iγ(e₀) u₊`, spanning `Σ⁻`.
    pub u_minus: DVector<Complex64>,
    /// `γ(e₁)` acts on `Σ±` as `signs.± · γ_base(e₁)` where `γ_base` is `build_rep(1)`.
    pub sign_plus: f64,
    pub sign_minus: f64,
}

impl EvenOddSplit {
    /// Unitary change of basis with columns `(u₊, u₋)`.
    pub fn basis(&self) -> CMatrix {
        let mut u = CMatrix::zeros(2, 2);
        u.set_column(0, &self.u_plus);
        u.set_column(1, &self.u_minus);
        u
    }
}

/// Splits the spinor module of a bundle over a one-dimensional base.
pub fn split_even_odd(frame: &SpinFrame) -> Result<EvenOddSplit> {
    if frame.base_dim() != 1 {
        return Err(LabError::UnsupportedDimension(format!(
            "even/odd splitting needs a 1-dimensional base, got {}",
            frame.base_dim()
        )));
    }
    let n = frame.base_dim();
    let nu = frame.horizontal(0) * i_pow((n + 1) / 2);
    let eig = crate::eigensolve::eigh(&nu)?;
    let pick = |target: f64| -> Result<DVector<Complex64>> {
        let idx = eig
            .values
            .iter()
            .position(|v| (v - target).abs() < 1e-12)
            .ok_or_else(|| {
                LabError::UnsupportedDimension(format!("ν has no eigenvalue {target}"))
            })?;
        let mut v = eig.vectors.column(idx).into_owned();
        let (k, _) = v
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| {
                if z.norm() > best.1 + 1e-12 {
                    (i, z.norm())
                } else {
                    best
                }
            });
        let phase = v[k].conj() / v[k].norm();
        v *= phase;
        Ok(v)
    };
    let u_plus = pick(1.0)?;
    let u_minus = (frame.vertical() * I) * &u_plus;
    let p_plus = &u_plus * u_plus.adjoint();
    let p_minus = &u_minus * u_minus.adjoint();
    let base = build_rep(1)?;
    let g1 = base.gamma(0)[(0, 0)];
    let act = |u: &DVector<Complex64>| (u.adjoint() * frame.horizontal(0) * u)[(0, 0)] / g1;
    let sign = |u: &DVector<Complex64>| -> Result<f64> {
        let z = act(u);
        let s = z.re.round();
        if (z - c(s, 0.0)).norm() > 1e-12 || s.abs() != 1.0 {
            return Err(LabError::UnsupportedDimension(format!(
                "γ(e₁) does not act on the split spinors by a sign (got {z})"
            )));
        }
        Ok(s)
    };
    let sign_plus = sign(&u_plus)?;
    let sign_minus = sign(&u_minus)?;
    Ok(EvenOddSplit {
        nu,
        p_plus,
        p_minus,
        u_plus,
        u_minus,
        sign_plus,
        sign_minus,
    })
}
