//! Galerkin matrices of the per-mode, limit, invariant-mode and form-Dirac
//! operators.
//!
//! Spinor bases are component-major: index `a·N + i` is spinor component `a`
//! times the `i`-th base Fourier mode (torus bases enumerate `(m₁, m₂)`
//! row-major).
//!
//! ## Warped torus mode operator
//!
//! On `V_k` the splitting `(1/l)γ(e₀)ℒ_K + D^H` with `l = εc` reads
//! `D_k = γ(e_s)(∂_s + c'/2c) + (ik/εc)γ(e₀)`. In the basis `c^{-1/2}e^{iνs}`,
//! orthonormal for the measure `c ds`, the mean-curvature term cancels and
//!
//! ```text
//! D_k = γ(e_s) ⊗ diag(iν) + γ(e₀) ⊗ (ik/ε)·T(1/c),
//! ```
//!
//! `T(·)` the Toeplitz matrix. With `c ≡ 1` the two terms anticommute and the
//! spectrum is `±√(ν² + (k/ε)²)`.

use serde::{Deserialize, Serialize};

use crate::clifford::{build_rep, split_even_odd, SpinFrame};
use crate::eigensolve::{eigenvalues, Spectrum};
use crate::fourier::{toeplitz_matrix, FourierSeries, ModeIndex, ModeLattice};
use crate::matrix::{block2, c, ensure_hermitian, i_diag, kron, CMatrix, MatrixExport, I};
use crate::models::{BundleModel, ModelKind};
use crate::{LabError, Result};

/// Hermiticity tolerance of assembled matrices, relative to the largest entry.
pub const ASSEMBLY_TOL: f64 = 1e-12;

/// Which operator a matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum OperatorKind {
    Mode { k: ModeIndex },
    Limit,
    InvariantModes,
    Form { epsilon: Option<f64> },
}

/// Base lattices and spinor component count.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisInfo {
    pub components: usize,
    pub lattices: Vec<ModeLattice>,
    /// Components are `(u₊, u₋)` of the even/odd splitting.
    pub split: bool,
}

impl BasisInfo {
    pub fn base_len(&self) -> usize {
        self.lattices.iter().map(|l| l.len()).product()
    }

    pub fn dim(&self) -> usize {
        self.components * self.base_len()
    }

    pub fn describe(&self) -> String {
        let lats: Vec<String> = self.lattices.iter().map(|l| l.to_string()).collect();
        format!(
            "{} components{} over {}",
            self.components,
            if self.split { " (even/odd split)" } else { "" },
            lats.join(" x ")
        )
    }
}

#[derive(Debug, Clone)]
pub struct ModeOperator {
    pub matrix: CMatrix,
    pub kind: OperatorKind,
    pub basis: BasisInfo,
    pub model: String,
    /// Eigenvalues in `[−R, R]` are declared converged at this truncation.
    pub reliable_window: f64,
}

impl ModeOperator {
    fn checked(self) -> Result<Self> {
        ensure_hermitian(&self.matrix, ASSEMBLY_TOL)?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// All eigenvalues, tagged with the reliable window.
    pub fn spectrum(&self) -> Result<Spectrum> {
        Ok(eigenvalues(&self.matrix)?
            .with_window(Some(self.reliable_window))
            .with_provenance(self.provenance()))
    }

    pub fn provenance(&self) -> String {
        let what = match self.kind {
            OperatorKind::Mode { k } => format!("D_k, k = {k}"),
            OperatorKind::Limit => "limit operator".to_string(),
            OperatorKind::InvariantModes => "D restricted to V0".to_string(),
            OperatorKind::Form { epsilon: Some(e) } => format!("form Dirac, eps = {e}"),
            OperatorKind::Form { epsilon: None } => "form Dirac limit".to_string(),
        };
        format!("{what}; {}; {}", self.model, self.basis.describe())
    }

    pub fn export(&self) -> OperatorExport {
        OperatorExport {
            kind: self.kind,
            model: self.model.clone(),
            basis: self.basis.describe(),
            reliable_window: self.reliable_window,
            matrix: MatrixExport::from(&self.matrix),
        }
    }
}

/// JSON export of an assembled operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorExport {
    pub kind: OperatorKind,
    pub model: String,
    pub basis: String,
    pub reliable_window: f64,
    pub matrix: MatrixExport,
}

fn describe_model(model: &BundleModel) -> String {
    match model.kind() {
        ModelKind::HeisenbergBundle => format!(
            "{}(eps = {}, b = {}, q = {})",
            model.kind().name(),
            model.epsilon(),
            model.curvature_mean(),
            model.quotient_order()
        ),
        _ => format!("{}(eps = {})", model.kind().name(), model.epsilon()),
    }
}

fn window_radius(cutoff: usize, gap: f64, k: f64, l_max: f64) -> f64 {
    let base = cutoff as f64 / 4.0 * gap;
    (base * base + (k / l_max).powi(2)).sqrt()
}

/// `Σ_i γ_i ⊗ diag(iν_i)` on the base lattices.
fn base_dirac(gammas: &[&CMatrix], lattices: &[ModeLattice]) -> CMatrix {
    match lattices {
        [l] => kron(gammas[0], &i_diag(&l.frequencies())),
        [l1, l2] => {
            let id1 = CMatrix::identity(l1.len(), l1.len());
            let id2 = CMatrix::identity(l2.len(), l2.len());
            let d1 = kron(&i_diag(&l1.frequencies()), &id2);
            let d2 = kron(&id1, &i_diag(&l2.frequencies()));
            kron(gammas[0], &d1) + kron(gammas[1], &d2)
        }
        _ => unreachable!("base lattices are one- or two-dimensional"),
    }
}

/// Per-mode operator `D_k` of the warped torus (the Heisenberg bundle
/// supports only `k = 0`, where it is the invariant-mode operator).
pub fn mode_operator(model: &BundleModel, k: ModeIndex, cutoff: usize) -> Result<ModeOperator> {
    model.ensure_mode(k)?;
    match model.kind() {
        ModelKind::WarpedTorus => {}
        ModelKind::HeisenbergBundle if k.is_zero() => return heisenberg_v0_operator(model, cutoff),
        ModelKind::HeisenbergBundle => {
            return Err(LabError::InvalidArgument(
                "fiber modes k != 0 of the Heisenberg bundle are twisted Dirac operators and are not assembled".into(),
            ))
        }
        ModelKind::FormTorus => {
            return Err(LabError::InvalidModel(
                "the form torus is assembled by form_mode_operator".into(),
            ))
        }
    }
    let lattice = model.base_lattices(cutoff)?[0];
    let frame = SpinFrame::for_base_dim(1)?;
    let mut matrix = base_dirac(&[frame.horizontal(0)], &[lattice]);
    if !k.is_zero() {
        let inv_c = model.inverse_warping()?;
        let t = toeplitz_matrix(&inv_c, &lattice) * c(0.0, k.value() / model.epsilon());
        matrix += kron(frame.vertical(), &t);
    }
    ModeOperator {
        matrix,
        kind: OperatorKind::Mode { k },
        basis: BasisInfo {
            components: 2,
            lattices: vec![lattice],
            split: false,
        },
        model: describe_model(model),
        reliable_window: window_radius(cutoff, lattice.gap(), k.value(), model.max_fiber_length()),
    }
    .checked()
}

/// Limit operator on the base.
///
/// * One-dimensional base: in the split basis `(u₊, u₋)`,
///   `diag(σ₊ D^{S¹}, σ₋ D^{S¹}) + 𝒵` with `D^{S¹} = i∂_s` and the signs from
///   the splitting; `𝓕 = 0` so the off-diagonal curvature term vanishes.
/// * Torus base: `D^{T²} + (i/4)ω₂γ(𝓕) + 𝒵`.
///
/// `zblock` is the restricted potential from [`crate::potentials::restrict_v0`].
pub fn limit_operator(model: &BundleModel, zblock: Option<&CMatrix>, cutoff: usize) -> Result<ModeOperator> {
    let lattices = model.base_lattices(cutoff)?;
    let (mut matrix, split) = match model.base_dim() {
        1 => {
            let split = split_even_odd(&SpinFrame::for_base_dim(1)?)?;
            let base = build_rep(1)?;
            let d = kron(base.gamma(0), &i_diag(&lattices[0].frequencies()));
            let zero = CMatrix::zeros(d.nrows(), d.ncols());
            let m = block2(
                &(&d * c(split.sign_plus, 0.0)),
                &zero,
                &zero,
                &(&d * c(split.sign_minus, 0.0)),
            );
            (m, true)
        }
        _ => {
            let rep = build_rep(2)?;
            let g: Vec<&CMatrix> = rep.gammas().iter().collect();
            let mut m = base_dirac(&g, &lattices);
            let b = model.curvature_mean();
            if b != 0.0 {
                let gf = crate::clifford::gamma_two_form(&rep, &[vec![0.0, b], vec![-b, 0.0]])?;
                let scalar = rep.omega() * gf * (I * 0.25);
                let n: usize = lattices.iter().map(|l| l.len()).product();
                m += kron(&scalar, &CMatrix::identity(n, n));
            }
            (m, false)
        }
    };
    if let Some(z) = zblock {
        if z.shape() != matrix.shape() {
            return Err(LabError::DimensionMismatch {
                expected: matrix.nrows(),
                got: z.nrows(),
            });
        }
        ensure_hermitian(z, ASSEMBLY_TOL)?;
        matrix += z;
    }
    let gap = lattices[0].gap();
    ModeOperator {
        matrix,
        kind: OperatorKind::Limit,
        basis: BasisInfo {
            components: 2,
            lattices,
            split,
        },
        model: describe_model(model),
        reliable_window: window_radius(cutoff, gap, 0.0, 1.0),
    }
    .checked()
}

/// Total-space Dirac operator of the Heisenberg bundle on invariant spinors,
/// `D^H − ¼γ(e₀)γ(lF)` in the `Cl(3)` frame, with `l` and `F` taken from the
/// quotient separately.
pub fn heisenberg_v0_operator(model: &BundleModel, cutoff: usize) -> Result<ModeOperator> {
    if model.kind() != ModelKind::HeisenbergBundle {
        return Err(LabError::InvalidModel(format!(
            "V0 operator needs a Heisenberg bundle, got {}",
            model.kind().name()
        )));
    }
    let lattices = model.base_lattices(cutoff)?;
    let frame = SpinFrame::for_base_dim(2)?;
    let mut matrix = base_dirac(&[frame.horizontal(0), frame.horizontal(1)], &lattices);
    let lf = model.fiber_length_at(0.0) * model.connection_curvature();
    if lf != 0.0 {
        let gf = frame.horizontal_two_form(&[vec![0.0, lf], vec![-lf, 0.0]])?;
        let term = frame.vertical() * gf * c(-0.25, 0.0);
        let n: usize = lattices.iter().map(|l| l.len()).product();
        matrix += kron(&term, &CMatrix::identity(n, n));
    }
    let gap = lattices[0].gap();
    ModeOperator {
        matrix,
        kind: OperatorKind::InvariantModes,
        basis: BasisInfo {
            components: 2,
            lattices,
            split: false,
        },
        model: describe_model(model),
        reliable_window: window_radius(cutoff, gap, 0.0, 1.0),
    }
    .checked()
}

/// Level of the form-Dirac operator on the invariant forms `f + α ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FormLevel {
    Epsilon(f64),
    Limit,
}

/// `𝔇(f + α ds) = f' ds − c^{-1}(cα)'` on `(f, α)`.
///
/// The operator is symmetric for `∫(|f|² + |α|²) c ds`; in the coordinates
/// `(c^{1/2}f, c^{1/2}α)` it becomes `[[0, −(∂ + h)], [∂ − h, 0]]` with
/// `h = c'/2c`. The formula has no ε-dependence on this subspace, so both
/// levels assemble the same matrix.
pub fn form_mode_operator(model: &BundleModel, level: FormLevel, cutoff: usize) -> Result<ModeOperator> {
    if model.kind() != ModelKind::FormTorus {
        return Err(LabError::InvalidModel(format!(
            "form Dirac operator needs a form torus, got {}",
            model.kind().name()
        )));
    }
    let epsilon = match level {
        FormLevel::Epsilon(e) if !(e > 0.0) => {
            return Err(LabError::InvalidArgument(format!("epsilon {e} must be positive")))
        }
        FormLevel::Epsilon(e) => Some(e),
        FormLevel::Limit => None,
    };
    let lattice = model.base_lattices(cutoff)?[0];
    let d = i_diag(&lattice.frequencies());
    let h = toeplitz_matrix(&model.log_derivative()?.scale(0.5), &lattice);
    let n = lattice.len();
    let zero = CMatrix::zeros(n, n);
    let matrix = block2(&zero, &(-(&d + &h)), &(&d - &h), &zero);
    ModeOperator {
        matrix,
        kind: OperatorKind::Form { epsilon },
        basis: BasisInfo {
            components: 2,
            lattices: vec![lattice],
            split: false,
        },
        model: describe_model(model),
        reliable_window: window_radius(cutoff, lattice.gap(), 0.0, 1.0),
    }
    .checked()
}

/// The values `±k√(1 + a_k/2)`, `k = 1..=count`, for the exponent
/// `g = Σ a_k cos(ks)`; `NaN` where `a_k < −2`.
pub fn form_prediction(g: &FourierSeries, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * count);
    for k in 1..=count {
        let a_k = 2.0 * g.coeff(k as i64).re;
        let v = k as f64 * (1.0 + a_k / 2.0).sqrt();
        out.push(-v);
        out.push(v);
    }
    out.sort_by(f64::total_cmp);
    out
}

/// `op + zblock`.
pub fn add_potential(op: &ModeOperator, zblock: &CMatrix) -> Result<ModeOperator> {
    if zblock.shape() != op.matrix.shape() {
        return Err(LabError::DimensionMismatch {
            expected: op.dim(),
            got: zblock.nrows(),
        });
    }
    ensure_hermitian(zblock, ASSEMBLY_TOL)?;
    ModeOperator {
        matrix: &op.matrix + zblock,
        ..op.clone()
    }
    .checked()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{hausdorff_distance, matched_distance};
    use crate::fourier::Offset;
    use crate::models::{FiberSpin, Warping};
    use std::f64::consts::PI;

    fn warped(eps: f64, g: FourierSeries, base: Offset) -> BundleModel {
        BundleModel::warped_torus(eps, Warping::Exponent(g), FiberSpin::Projectable, base).unwrap()
    }

    #[test]
    fn flat_k0_is_half_integers() {
        let op = mode_operator(&warped(1.0, FourierSeries::zero(), Offset::Half), ModeIndex::integer(0), 16).unwrap();
        let s = op.spectrum().unwrap().window(op.reliable_window).unwrap();
        let pos: Vec<f64> = s.values.iter().copied().filter(|&v| v > 0.0).collect();
        let expect = [0.5, 0.5, 1.5, 1.5, 2.5, 2.5, 3.5, 3.5];
        assert_eq!(pos.len(), expect.len());
        assert!(pos.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-13));
        assert_eq!(s.len(), 16);
    }

    #[test]
    fn flat_mode_closed_form() {
        let op = mode_operator(&warped(0.1, FourierSeries::zero(), Offset::Half), ModeIndex::integer(1), 16).unwrap();
        let min = op.spectrum().unwrap().min_abs().unwrap();
        assert!((min - (0.25_f64 + 100.0).sqrt()).abs() < 1e-12);
        assert!((min - 10.01249).abs() < 1e-5);
    }

    #[test]
    fn k0_isospectral_under_warping() {
        let flat = mode_operator(&warped(1.0, FourierSeries::zero(), Offset::Half), ModeIndex::integer(0), 24).unwrap();
        for eps in [0.3, 0.05] {
            let w = mode_operator(&warped(eps, FourierSeries::cos(1, 0.3), Offset::Half), ModeIndex::integer(0), 24).unwrap();
            let d = hausdorff_distance(&w.spectrum().unwrap(), &flat.spectrum().unwrap(), w.reliable_window).unwrap();
            assert!(d < 1e-8);
        }
    }

    #[test]
    fn mode_outside_lattice() {
        let m = BundleModel::flat_torus(0.1, FiberSpin::Nonprojectable, Offset::Half).unwrap();
        assert!(matches!(
            mode_operator(&m, ModeIndex::integer(1), 8),
            Err(LabError::ModeNotInLattice { .. })
        ));
        assert!(mode_operator(&m, ModeIndex::from_twice(1), 8).is_ok());
    }

    #[test]
    fn warped_limit_without_potential() {
        let m = warped(0.1, FourierSeries::cos(1, 0.2), Offset::Integer);
        let s = limit_operator(&m, None, 8).unwrap().spectrum().unwrap();
        let d = s.distinct(1e-12);
        assert_eq!(d.len(), 17);
        assert!(d[8].0.abs() < 1e-13 && d[8].1 == 2);
        assert!(d.iter().all(|&(v, mult)| (v - v.round()).abs() < 1e-13 && mult == 2));
    }

    #[test]
    fn limit_matches_k0_mode() {
        let m = warped(0.05, FourierSeries::zero(), Offset::Half);
        let a = limit_operator(&m, None, 12).unwrap().spectrum().unwrap();
        let b = mode_operator(&m, ModeIndex::integer(0), 12).unwrap().spectrum().unwrap();
        assert!(matched_distance(&a, &b, 20).unwrap() < 1e-14);
    }

    #[test]
    fn heisenberg_shift_and_paths() {
        let b = 1.0 / (2.0 * PI);
        let m = BundleModel::heisenberg(1.0, b, FiberSpin::Projectable, [Offset::Integer; 2]).unwrap();
        let flat = BundleModel::heisenberg(1.0, 0.0, FiberSpin::Projectable, [Offset::Integer; 2]).unwrap();
        let v0 = heisenberg_v0_operator(&m, 4).unwrap();
        let lim = limit_operator(&m, None, 4).unwrap();
        let sv = v0.spectrum().unwrap();
        let sl = lim.spectrum().unwrap();
        assert!(matched_distance(&sv, &sl, 30).unwrap() < 1e-12);
        let zero_modes: Vec<f64> = sv.values.iter().copied().filter(|v| v.abs() < 0.1).collect();
        assert_eq!(zero_modes.len(), 2);
        assert!(zero_modes.iter().all(|v| (v - 1.0 / (8.0 * PI)).abs() < 1e-12));
        let d = heisenberg_v0_operator(&flat, 4).unwrap();
        let l = limit_operator(&flat, None, 4).unwrap();
        assert_eq!(d.matrix, l.matrix);
        for q in [2, 4, 8] {
            assert_eq!(heisenberg_v0_operator(&m.quotient(q).unwrap(), 4).unwrap().matrix, v0.matrix);
        }
    }

    #[test]
    fn form_flat_spectrum() {
        let m = BundleModel::form_torus(1.0, Warping::flat()).unwrap();
        let s = form_mode_operator(&m, FormLevel::Limit, 6).unwrap().spectrum().unwrap();
        let d = s.distinct(1e-12);
        assert!(d.iter().all(|&(v, _)| (v - v.round()).abs() < 1e-13));
        assert_eq!(d.len(), 13);
    }

    #[test]
    fn form_prediction_values() {
        let p = form_prediction(&FourierSeries::cos(1, 0.1), 2);
        assert_eq!(p.len(), 4);
        assert!((p[2] - 1.05_f64.sqrt()).abs() < 1e-15);
        assert_eq!(p[3], 2.0);
    }

    #[test]
    fn potential_shifts() {
        let m = warped(0.1, FourierSeries::cos(1, 0.1), Offset::Half);
        let op = mode_operator(&m, ModeIndex::integer(1), 8).unwrap();
        let same = add_potential(&op, &CMatrix::zeros(op.dim(), op.dim())).unwrap();
        assert_eq!(same.matrix, op.matrix);
        let shifted = add_potential(&op, &(CMatrix::identity(op.dim(), op.dim()) * c(0.3, 0.0))).unwrap();
        let (a, b) = (op.spectrum().unwrap(), shifted.spectrum().unwrap());
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((y - x - 0.3).abs() < 1e-11);
        }
        assert!(matches!(
            add_potential(&op, &CMatrix::zeros(3, 3)),
            Err(LabError::DimensionMismatch { .. })
        ));
        let mut skew = CMatrix::zeros(op.dim(), op.dim());
        skew[(0, 1)] = c(1.0, 0.0);
        assert!(add_potential(&op, &skew).is_err());
    }

    #[test]
    fn export_is_dense_row_major() {
        let m = warped(0.1, FourierSeries::zero(), Offset::Half);
        let op = mode_operator(&m, ModeIndex::integer(1), 2).unwrap();
        let e = op.export();
        assert_eq!(e.matrix.to_matrix().unwrap(), op.matrix);
        let json = serde_json::to_string(&e).unwrap();
        assert!(json.contains("\"type\":\"mode\""));
    }
}
