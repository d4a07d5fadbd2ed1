//! Symmetric potentials built from fiber harmonics.
//!
//! `Z(x, θ) = Σ e^{ijθ} f(x) M` with trigonometric coefficients `f` and
//! constant matrices `M` on the spinor module. Averaging over the circle
//! action keeps the `j = 0` terms, and Galerkin blocks map `V_k` to `V_{k+j}`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{split_even_odd, SpinFrame};
use crate::fourier::{grid, toeplitz_matrix, FourierSeries, ModeIndex, SeriesSpec, SUP_GRID};
use crate::matrix::{c, ensure_hermitian, hermitian_defect, hermitian_norm, kron, max_abs, CMatrix, ZERO};
use crate::models::{BundleModel, ModelKind};
use crate::{LabError, Result};

/// Fiber samples for grid suprema.
pub const FIBER_GRID: usize = 64;
/// Base samples per direction on two-dimensional bases.
pub const TORUS_GRID: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTerm {
    /// Fiber harmonic `e^{ijθ}`.
    pub fiber_mode: i64,
    /// Coefficient in the first base coordinate.
    pub series: FourierSeries,
    /// Coefficient in the second base coordinate (torus bases only).
    pub series2: Option<FourierSeries>,
    pub matrix: CMatrix,
}

impl PotentialTerm {
    pub fn new(fiber_mode: i64, series: FourierSeries, matrix: CMatrix) -> Self {
        PotentialTerm {
            fiber_mode,
            series,
            series2: None,
            matrix,
        }
    }

    fn base_value(&self, x: &[f64]) -> num_complex::Complex64 {
        let mut v = self.series.eval(x[0]);
        if let Some(s2) = &self.series2 {
            v *= s2.eval(x.get(1).copied().unwrap_or(0.0));
        }
        v
    }

    fn base_gradient(&self, x: &[f64]) -> [num_complex::Complex64; 2] {
        let y = x.get(1).copied().unwrap_or(0.0);
        match &self.series2 {
            None => [self.series.derivative().eval(x[0]), ZERO],
            Some(s2) => [
                self.series.derivative().eval(x[0]) * s2.eval(y),
                self.series.eval(x[0]) * s2.derivative().eval(y),
            ],
        }
    }

    /// Galerkin matrix of `f(x)·M` on the base lattices (component-major).
    fn galerkin(&self, model: &BundleModel, cutoff: usize) -> Result<CMatrix> {
        let lattices = model.base_lattices(cutoff)?;
        let mut t = toeplitz_matrix(&self.series, &lattices[0]);
        if lattices.len() == 2 {
            let s2 = self.series2.clone().unwrap_or_else(|| FourierSeries::constant(1.0));
            t = kron(&t, &toeplitz_matrix(&s2, &lattices[1]));
        }
        Ok(kron(&self.matrix, &t))
    }
}

/// Finite sum of potential terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PotentialSpec {
    terms: Vec<PotentialTerm>,
}

impl PotentialSpec {
    pub fn zero() -> Self {
        PotentialSpec::default()
    }

    /// Builds a potential and checks pointwise Hermiticity on a sample grid.
    pub fn new(terms: Vec<PotentialTerm>) -> Result<Self> {
        for t in &terms {
            if t.matrix.shape() != (2, 2) {
                return Err(LabError::InvalidPotential(format!(
                    "term matrices act on 2-component spinors, got {}x{}",
                    t.matrix.nrows(),
                    t.matrix.ncols()
                )));
            }
        }
        let z = PotentialSpec { terms };
        z.check_hermitian()?;
        Ok(z)
    }

    /// `z(x)·Id` from a single real invariant coefficient.
    pub fn scalar(series: FourierSeries) -> Result<Self> {
        Self::new(vec![PotentialTerm::new(0, series, CMatrix::identity(2, 2))])
    }

    /// `a·cos(jθ)·Id`.
    pub fn fiber_cosine(j: i64, a: f64) -> Result<Self> {
        let half = FourierSeries::constant(a / 2.0);
        Self::new(vec![
            PotentialTerm::new(j, half.clone(), CMatrix::identity(2, 2)),
            PotentialTerm::new(-j, half, CMatrix::identity(2, 2)),
        ])
    }

    pub fn terms(&self) -> &[PotentialTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.series.is_zero() || max_abs(&t.matrix) == 0.0)
    }

    fn check_hermitian(&self) -> Result<()> {
        let scale: f64 = self
            .terms
            .iter()
            .map(|t| t.series.l1_norm() * t.series2.as_ref().map_or(1.0, |s| s.l1_norm()) * max_abs(&t.matrix))
            .sum();
        let samples = 24;
        for s in grid(samples) {
            for y in grid(if self.has_second_coordinate() { samples } else { 1 }) {
                for th in grid(samples) {
                    let z = self.evaluate(&[s, y], th);
                    let defect = hermitian_defect(&z);
                    if defect > 1e-12 * scale.max(1e-300) {
                        return Err(LabError::InvalidPotential(format!(
                            "Z is not Hermitian at s = {s:.4}, θ = {th:.4} (defect {defect:.3e}); \
                             every fiber mode j needs its conjugate partner −j"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn has_second_coordinate(&self) -> bool {
        self.terms.iter().any(|t| t.series2.is_some())
    }

    /// Pointwise value `Z(x, θ)`.
    pub fn evaluate(&self, x: &[f64], theta: f64) -> CMatrix {
        let mut z = CMatrix::zeros(2, 2);
        for t in &self.terms {
            let phase = num_complex::Complex64::from_polar(1.0, t.fiber_mode as f64 * theta);
            z += &t.matrix * (t.base_value(x) * phase);
        }
        z
    }

    /// Circle average: the `j = 0` part, exact for single harmonics.
    pub fn average(&self) -> PotentialSpec {
        PotentialSpec {
            terms: self.terms.iter().filter(|t| t.fiber_mode == 0).cloned().collect(),
        }
    }

    pub fn is_invariant(&self) -> bool {
        self.terms.iter().all(|t| t.fiber_mode == 0)
    }

    fn check_model(&self, model: &BundleModel) -> Result<()> {
        if model.kind() == ModelKind::HeisenbergBundle {
            if let Some(t) = self.terms.iter().find(|t| t.fiber_mode != 0) {
                return Err(LabError::InvalidPotential(format!(
                    "fiber mode {} is a section of a nontrivial line bundle over the \
                     Heisenberg base, not a function; only invariant potentials are supported",
                    t.fiber_mode
                )));
            }
        } else if self.has_second_coordinate() {
            return Err(LabError::InvalidPotential(
                "second base coordinate given on a one-dimensional base".into(),
            ));
        }
        Ok(())
    }

    fn base_points(&self, model: &BundleModel) -> Vec<[f64; 2]> {
        if model.base_dim() == 2 {
            grid(TORUS_GRID)
                .flat_map(|x| grid(TORUS_GRID).map(move |y| [x, y]))
                .collect()
        } else {
            grid(SUP_GRID).map(|s| [s, 0.0]).collect()
        }
    }

    /// `(‖Z‖_∞, ‖Z‖_{W^{1,∞}})` on the sample grid.
    ///
    /// `|∇Z|² = Σ_a ‖e_a Z‖²` over the orthonormal frame `(e_i, e₀ = K/l)`,
    /// differentiating the coefficients in the invariant frame; the fiber
    /// derivative of a mode-`j` term is `ij/l`.
    pub fn norms(&self, model: &BundleModel) -> Result<(f64, f64)> {
        self.check_model(model)?;
        let fiber: Vec<f64> = if self.is_invariant() {
            vec![0.0]
        } else {
            grid(FIBER_GRID).collect()
        };
        let mut sup = 0.0_f64;
        let mut sup_grad = 0.0_f64;
        for x in self.base_points(model) {
            let l = model.fiber_length_at(x[0]);
            for &th in &fiber {
                let mut value = CMatrix::zeros(2, 2);
                let mut grads = [CMatrix::zeros(2, 2), CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)];
                for t in &self.terms {
                    let phase = num_complex::Complex64::from_polar(1.0, t.fiber_mode as f64 * th);
                    let f = t.base_value(&x);
                    let df = t.base_gradient(&x);
                    value += &t.matrix * (f * phase);
                    grads[0] += &t.matrix * (df[0] * phase);
                    grads[1] += &t.matrix * (df[1] * phase);
                    grads[2] += &t.matrix * (f * phase * c(0.0, t.fiber_mode as f64 / l));
                }
                sup = sup.max(hermitian_norm(&value));
                let g2: f64 = grads.iter().map(|g| hermitian_norm(g).powi(2)).sum();
                sup_grad = sup_grad.max(g2.sqrt());
            }
        }
        Ok((sup, sup + sup_grad))
    }

    pub fn sup_norm(&self, model: &BundleModel) -> Result<f64> {
        Ok(self.norms(model)?.0)
    }

    /// Galerkin block of the `j`-th fiber harmonic, mapping `V_k` to `V_{k+j}`
    /// in the spinor basis of the mode operators.
    pub fn harmonic_block(&self, model: &BundleModel, j: i64, cutoff: usize) -> Result<CMatrix> {
        self.check_model(model)?;
        let lattices = model.base_lattices(cutoff)?;
        let n: usize = 2 * lattices.iter().map(|l| l.len()).product::<usize>();
        let mut out = CMatrix::zeros(n, n);
        for t in self.terms.iter().filter(|t| t.fiber_mode == j) {
            out += t.galerkin(model, cutoff)?;
        }
        Ok(out)
    }

    /// Invariant block added to every mode operator `D_k`.
    pub fn mode_block(&self, model: &BundleModel, cutoff: usize) -> Result<CMatrix> {
        let block = self.average().harmonic_block(model, 0, cutoff)?;
        ensure_hermitian(&block, 1e-12)?;
        Ok(block)
    }

    /// Total-space Galerkin matrix over the listed fiber modes, block `(a, b)`
    /// mapping `V_{modes[b]}` into `V_{modes[a]}`.
    pub fn total_space_matrix(&self, model: &BundleModel, modes: &[ModeIndex], cutoff: usize) -> Result<CMatrix> {
        self.check_model(model)?;
        let mut blocks: BTreeMap<i64, CMatrix> = BTreeMap::new();
        for t in &self.terms {
            if !blocks.contains_key(&t.fiber_mode) {
                blocks.insert(t.fiber_mode, self.harmonic_block(model, t.fiber_mode, cutoff)?);
            }
        }
        let lattices = model.base_lattices(cutoff)?;
        let n: usize = 2 * lattices.iter().map(|l| l.len()).product::<usize>();
        let mut out = CMatrix::zeros(n * modes.len(), n * modes.len());
        for (a, ka) in modes.iter().enumerate() {
            for (b, kb) in modes.iter().enumerate() {
                let diff = ka.twice() - kb.twice();
                if diff % 2 != 0 {
                    continue;
                }
                if let Some(block) = blocks.get(&(diff / 2)) {
                    out.view_mut((a * n, b * n), (n, n)).copy_from(block);
                }
            }
        }
        Ok(out)
    }

    /// `‖(Z − Z̃)|V₀‖`: operator norm of the non-invariant harmonics from `V₀`
    /// into the full truncated space, `√λ_max(Σ_j B_j* B_j)`.
    pub fn v0_defect_norm(&self, model: &BundleModel, cutoff: usize) -> Result<f64> {
        self.check_model(model)?;
        let lattices = model.base_lattices(cutoff)?;
        let n: usize = 2 * lattices.iter().map(|l| l.len()).product::<usize>();
        let mut gram = CMatrix::zeros(n, n);
        let mut seen = std::collections::BTreeSet::new();
        for t in self.terms.iter().filter(|t| t.fiber_mode != 0) {
            if seen.insert(t.fiber_mode) {
                let b = self.harmonic_block(model, t.fiber_mode, cutoff)?;
                gram += b.adjoint() * &b;
            }
        }
        if seen.is_empty() {
            return Ok(0.0);
        }
        let top = crate::eigensolve::eigenvalues(&gram)?
            .values
            .last()
            .copied()
            .unwrap_or(0.0);
        Ok(top.max(0.0).sqrt())
    }
}

/// Restriction `𝒵` of an invariant potential to `V₀`, written on base spinors.
///
/// On a one-dimensional base the result is expressed in the split basis
/// `(u₊, u₋)`, giving the blocks `𝒵^{±±}`; on the torus base invariant
/// spinors are base spinors and the block is the Galerkin matrix itself.
pub fn restrict_v0(z: &PotentialSpec, model: &BundleModel, cutoff: usize) -> Result<CMatrix> {
    if let Some(t) = z.terms.iter().find(|t| t.fiber_mode != 0) {
        return Err(LabError::NotInvariant(t.fiber_mode));
    }
    let block = z.harmonic_block(model, 0, cutoff)?;
    if model.base_dim() == 1 {
        let frame = SpinFrame::for_base_dim(1)?;
        let u = split_even_odd(&frame)?.basis();
        let n = block.nrows() / 2;
        let change = kron(&u, &CMatrix::identity(n, n));
        Ok(change.adjoint() * block * change)
    } else {
        Ok(block)
    }
}

/// Random invariant potential with certified `‖Z‖_∞ ≤ bound`.
///
/// The certificate is `Σ ‖f‖_{ℓ¹}‖M‖₂`, which dominates the pointwise norm;
/// the terms are rescaled so that it equals `bound`.
pub fn random_invariant_potential<R: Rng>(
    rng: &mut R,
    model: &BundleModel,
    terms: usize,
    degree: u32,
    bound: f64,
) -> Result<PotentialSpec> {
    if !(bound >= 0.0) || terms == 0 {
        return Err(LabError::InvalidArgument(
            "random potentials need a nonnegative bound and at least one term".into(),
        ));
    }
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let a0 = rng.gen_range(-1.0..1.0);
        let cos: Vec<(u32, f64)> = (1..=degree).map(|k| (k, rng.gen_range(-1.0..1.0))).collect();
        let sin: Vec<(u32, f64)> = (1..=degree).map(|k| (k, rng.gen_range(-1.0..1.0))).collect();
        let series = FourierSeries::from_trig(a0, &cos, &sin);
        let series2 = (model.base_dim() == 2).then(|| {
            let cos: Vec<(u32, f64)> = (1..=degree).map(|k| (k, rng.gen_range(-1.0..1.0))).collect();
            FourierSeries::from_trig(rng.gen_range(-1.0..1.0), &cos, &[])
        });
        let d0 = rng.gen_range(-1.0..1.0);
        let d1 = rng.gen_range(-1.0..1.0);
        let off = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let matrix = CMatrix::from_row_slice(2, 2, &[c(d0, 0.0), off, off.conj(), c(d1, 0.0)]);
        out.push(PotentialTerm {
            fiber_mode: 0,
            series,
            series2,
            matrix,
        });
    }
    let certificate: f64 = out
        .iter()
        .map(|t| t.series.l1_norm() * t.series2.as_ref().map_or(1.0, |s| s.l1_norm()) * hermitian_norm(&t.matrix))
        .sum();
    let scale = if certificate > 0.0 { bound / certificate } else { 0.0 };
    for t in &mut out {
        t.series = t.series.scale(scale);
    }
    PotentialSpec::new(out)
}

/// JSON form of one term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(default)]
    pub j: i64,
    pub series: SeriesSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series2: Option<SeriesSpec>,
    /// Row-major `[re, im]` pairs.
    pub matrix: [[[f64; 2]; 2]; 2],
}

/// Random invariant potential request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub terms: usize,
    pub degree: u32,
    pub bound: f64,
}

/// JSON form of a potential: explicit terms, a seeded random draw, or both.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialJson {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomSpec>,
}

impl PotentialJson {
    pub fn build<R: Rng>(&self, model: &BundleModel, rng: &mut R) -> Result<PotentialSpec> {
        let mut terms = Vec::new();
        for t in &self.terms {
            let m = &t.matrix;
            let matrix = CMatrix::from_row_slice(
                2,
                2,
                &[c(m[0][0][0], m[0][0][1]), c(m[0][1][0], m[0][1][1]), c(m[1][0][0], m[1][0][1]), c(m[1][1][0], m[1][1][1])],
            );
            terms.push(PotentialTerm {
                fiber_mode: t.j,
                series: t.series.to_series()?,
                series2: t.series2.as_ref().map(|s| s.to_series()).transpose()?,
                matrix,
            });
        }
        if let Some(r) = &self.random {
            let drawn = random_invariant_potential(rng, model, r.terms, r.degree, r.bound)?;
            terms.extend(drawn.terms);
        }
        let z = PotentialSpec::new(terms)?;
        z.check_model(model)?;
        Ok(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::Offset;
    use crate::models::{FiberSpin, Warping};
    use rand::SeedableRng;

    fn flat(eps: f64) -> BundleModel {
        BundleModel::flat_torus(eps, FiberSpin::Projectable, Offset::Half).unwrap()
    }

    /// Independent average by 64-point quadrature in the fiber.
    fn quadrature_average(z: &PotentialSpec, x: &[f64], theta: f64) -> CMatrix {
        let n = 64;
        let mut acc = CMatrix::zeros(2, 2);
        for t in grid(n) {
            acc += z.evaluate(x, theta + t);
        }
        acc / c(n as f64, 0.0)
    }

    #[test]
    fn average_keeps_invariant_terms() {
        let z = PotentialSpec::scalar(FourierSeries::cos(2, 0.3)).unwrap();
        assert_eq!(z.average(), z);
        let w = PotentialSpec::fiber_cosine(1, 1.0).unwrap();
        assert!(w.average().is_zero());
        let q = quadrature_average(&w, &[0.3], 0.7);
        assert!(max_abs(&q) < 1e-15);
    }

    #[test]
    fn average_matches_quadrature() {
        let sigma_x = CMatrix::from_row_slice(2, 2, &[ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO]);
        let mut terms = PotentialSpec::fiber_cosine(2, 0.4).unwrap().terms;
        terms.push(PotentialTerm::new(0, FourierSeries::sin(1, 0.2), sigma_x));
        let z = PotentialSpec::new(terms).unwrap();
        let avg = z.average();
        assert_eq!(avg.average(), avg);
        for s in grid(7) {
            let diff = avg.evaluate(&[s], 0.0) - quadrature_average(&z, &[s], 0.4);
            assert!(max_abs(&diff) < 1e-14);
        }
    }

    #[test]
    fn rejects_unpaired_harmonic() {
        let half = FourierSeries::constant(0.5);
        assert!(PotentialSpec::new(vec![PotentialTerm::new(1, half, CMatrix::identity(2, 2))]).is_err());
    }

    #[test]
    fn norm_examples() {
        let m = flat(0.1);
        let z = PotentialSpec::scalar(FourierSeries::constant(0.5)).unwrap();
        let (sup, w1) = z.norms(&m).unwrap();
        assert!((sup - 0.5).abs() < 1e-15 && (w1 - 0.5).abs() < 1e-15);
        let w = PotentialSpec::fiber_cosine(1, 1.0).unwrap();
        let (sup, w1) = w.norms(&m).unwrap();
        assert!((sup - 1.0).abs() < 1e-12);
        assert!((w1 - (1.0 + 1.0 / 0.1)).abs() < 1e-9);
    }

    #[test]
    fn averaging_contracts() {
        let sigma_z = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c(-1.0, 0.0)]);
        let mut terms = PotentialSpec::fiber_cosine(1, 0.7).unwrap().terms;
        terms.push(PotentialTerm::new(0, FourierSeries::cos(1, 0.5), sigma_z));
        let z = PotentialSpec::new(terms).unwrap();
        let m = flat(0.2);
        assert!(z.average().sup_norm(&m).unwrap() <= z.sup_norm(&m).unwrap() + 1e-15);
    }

    #[test]
    fn invariant_potential_is_block_diagonal() {
        let m = flat(0.2);
        let z = PotentialSpec::scalar(FourierSeries::cos(1, 0.3)).unwrap();
        let modes: Vec<ModeIndex> = (-1..=1).map(ModeIndex::integer).collect();
        let big = z.total_space_matrix(&m, &modes, 4).unwrap();
        let n = big.nrows() / 3;
        for a in 0..3 {
            for b in 0..3 {
                let blk = big.view((a * n, b * n), (n, n)).into_owned();
                assert_eq!(max_abs(&blk) == 0.0, a != b);
            }
        }
        let w = PotentialSpec::fiber_cosine(1, 1.0).unwrap();
        let big = w.total_space_matrix(&m, &modes, 4).unwrap();
        assert!(max_abs(&big.view((0, n), (n, n)).into_owned()) > 0.0);
    }

    #[test]
    fn restriction_of_scalar_is_block_pair() {
        let m = BundleModel::warped_torus(0.1, Warping::Exponent(FourierSeries::cos(1, 0.2)), FiberSpin::Projectable, Offset::Half).unwrap();
        let lat = &m.base_lattices(5).unwrap()[0];
        let series = FourierSeries::from_trig(0.1, &[(1, 0.3)], &[(2, 0.1)]);
        let z = PotentialSpec::scalar(series.clone()).unwrap();
        let r = restrict_v0(&z, &m, 5).unwrap();
        let t = toeplitz_matrix(&series, lat);
        let n = lat.len();
        let expect = crate::matrix::block2(&t, &CMatrix::zeros(n, n), &CMatrix::zeros(n, n), &t);
        assert!(max_abs(&(r - expect)) < 1e-15);
        assert!(matches!(
            restrict_v0(&PotentialSpec::fiber_cosine(1, 1.0).unwrap(), &m, 5),
            Err(LabError::NotInvariant(_))
        ));
    }

    #[test]
    fn defect_norm_of_fiber_cosine() {
        for eps in [0.2_f64, 0.05] {
            let z = PotentialSpec::fiber_cosine(1, eps.sqrt()).unwrap();
            let d = z.v0_defect_norm(&flat(eps), 6).unwrap();
            assert!((d - (eps / 2.0).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn random_potentials_are_certified() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let m = flat(0.1);
        let z = random_invariant_potential(&mut rng, &m, 3, 3, 0.5).unwrap();
        assert!(z.is_invariant());
        assert!(z.sup_norm(&m).unwrap() <= 0.5 + 1e-12);
    }

    #[test]
    fn json_terms() {
        let text = r#"{"terms": [{"j": 0, "series": {"const": 0.25}, "matrix": [[[1,0],[0,0]],[[0,0],[1,0]]]}]}"#;
        let spec: PotentialJson = serde_json::from_str(text).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let z = spec.build(&flat(0.1), &mut rng).unwrap();
        assert!((z.sup_norm(&flat(0.1)).unwrap() - 0.25).abs() < 1e-15);
    }
}
