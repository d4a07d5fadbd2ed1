//! Collapsing circle-bundle families and their O'Neill tensors.
//!
//! * Warped torus: `T² = (ℝ/2πℤ)²` with `ds² + ε²c(s)²dθ²`, base `S¹`,
//!   `K = ∂_θ`, `l = |K| = εc(s)`.
//! * Heisenberg-type bundle over the flat `T²`: metric
//!   `dx² + dy² + l²(dθ + F·x dy)²` with constant `lF = b`; the `ℤ_q` quotient
//!   shortens the fiber to `l = ε/q` and multiplies `F` by `q`.
//! * Form torus: the warped torus seen through the form-valued Dirac
//!   operator `d + δ`.
//!
//! Fiber modes are `e^{ikθ}`, `k ∈ ℤ` (projectable) or `k ∈ ℤ + ½`
//! (nonprojectable), so `ℒ_K` acts on `V_k` by `ik`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::fourier::{
    exp_series, grid, FourierSeries, ModeIndex, ModeLattice, Offset, SeriesSpec, MAX_MODES,
    SUP_GRID,
};
use crate::{LabError, Result};

/// Smallest admissible value of the warping function.
pub const MIN_WARPING: f64 = 1e-6;
/// Samples used for the positivity check of `c`.
pub const POSITIVITY_GRID: usize = 4096;
/// Accuracy of derived coefficient series (`1/c`, `c'/c`).
pub const SERIES_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    WarpedTorus,
    #[serde(alias = "heisenberg")]
    HeisenbergBundle,
    FormTorus,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::WarpedTorus => "warped_torus",
            ModelKind::HeisenbergBundle => "heisenberg_bundle",
            ModelKind::FormTorus => "form_torus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberSpin {
    Projectable,
    Nonprojectable,
}

/// The warping function, given either as `c = e^g` or directly.
#[derive(Debug, Clone, PartialEq)]
pub enum Warping {
    Exponent(FourierSeries),
    Direct(FourierSeries),
}

impl Warping {
    pub fn flat() -> Self {
        Warping::Exponent(FourierSeries::zero())
    }

    pub fn value(&self, s: f64) -> f64 {
        match self {
            Warping::Exponent(g) => g.eval_re(s).exp(),
            Warping::Direct(c) => c.eval_re(s),
        }
    }

    fn series(&self) -> &FourierSeries {
        match self {
            Warping::Exponent(g) | Warping::Direct(g) => g,
        }
    }

    pub fn is_flat(&self) -> bool {
        match self {
            Warping::Exponent(g) => g.is_zero(),
            Warping::Direct(c) => *c == FourierSeries::constant(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleModel {
    kind: ModelKind,
    epsilon: f64,
    warping: Warping,
    b: f64,
    fiber_spin: FiberSpin,
    base_spin: Vec<Offset>,
    quotient_order: u32,
}

impl BundleModel {
    pub fn warped_torus(
        epsilon: f64,
        warping: Warping,
        fiber_spin: FiberSpin,
        base_spin: Offset,
    ) -> Result<Self> {
        Self::validated(BundleModel {
            kind: ModelKind::WarpedTorus,
            epsilon,
            warping,
            b: 0.0,
            fiber_spin,
            base_spin: vec![base_spin],
            quotient_order: 1,
        })
    }

    /// Flat product torus with circle lengths `2π` and `2πε`.
    pub fn flat_torus(epsilon: f64, fiber_spin: FiberSpin, base_spin: Offset) -> Result<Self> {
        Self::warped_torus(epsilon, Warping::flat(), fiber_spin, base_spin)
    }

    /// Heisenberg-type bundle with invariant curvature coefficient `b = lF`
    /// and fiber length `ε` before any quotient.
    pub fn heisenberg(epsilon: f64, b: f64, fiber_spin: FiberSpin, base_spin: [Offset; 2]) -> Result<Self> {
        Self::validated(BundleModel {
            kind: ModelKind::HeisenbergBundle,
            epsilon,
            warping: Warping::flat(),
            b,
            fiber_spin,
            base_spin: base_spin.to_vec(),
            quotient_order: 1,
        })
    }

    /// Form torus; forms are periodic, so the base lattice has offset 0.
    pub fn form_torus(epsilon: f64, warping: Warping) -> Result<Self> {
        Self::validated(BundleModel {
            kind: ModelKind::FormTorus,
            epsilon,
            warping,
            b: 0.0,
            fiber_spin: FiberSpin::Projectable,
            base_spin: vec![Offset::Integer],
            quotient_order: 1,
        })
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(LabError::InvalidModel(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if self.quotient_order < 1 {
            return Err(LabError::InvalidModel("quotient order must be at least 1".into()));
        }
        if !self.b.is_finite() {
            return Err(LabError::InvalidModel("curvature coefficient must be finite".into()));
        }
        let expected_dim = match self.kind {
            ModelKind::HeisenbergBundle => 2,
            _ => 1,
        };
        if self.base_spin.len() != expected_dim {
            return Err(LabError::InvalidModel(format!(
                "{} needs {} base spin offsets, got {}",
                self.kind.name(),
                expected_dim,
                self.base_spin.len()
            )));
        }
        if self.kind != ModelKind::HeisenbergBundle {
            if self.b != 0.0 {
                return Err(LabError::InvalidModel(
                    "a one-dimensional base carries no curvature form".into(),
                ));
            }
            if self.quotient_order != 1 {
                return Err(LabError::InvalidModel(
                    "quotients are only defined for the Heisenberg bundle".into(),
                ));
            }
        } else if !self.warping.is_flat() {
            return Err(LabError::InvalidModel("the Heisenberg bundle has no warping".into()));
        }
        let series = self.warping.series();
        if !series.is_real() {
            return Err(LabError::InvalidModel("warping coefficients must be real".into()));
        }
        if series.degree() > MAX_MODES {
            return Err(LabError::CutoffExceeded {
                cutoff: series.degree(),
                limit: MAX_MODES,
            });
        }
        let min_c = grid(POSITIVITY_GRID)
            .map(|s| self.warping.value(s))
            .fold(f64::INFINITY, f64::min);
        if !(min_c >= MIN_WARPING) {
            return Err(LabError::InvalidModel(format!(
                "warping function must stay positive (minimum {min_c:.3e} on the sample grid)"
            )));
        }
        Ok(())
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn warping(&self) -> &Warping {
        &self.warping
    }

    pub fn fiber_spin(&self) -> FiberSpin {
        self.fiber_spin
    }

    pub fn base_spin(&self) -> &[Offset] {
        &self.base_spin
    }

    pub fn quotient_order(&self) -> u32 {
        self.quotient_order
    }

    pub fn base_dim(&self) -> usize {
        self.base_spin.len()
    }

    /// Same model at a different collapse parameter.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let mut m = self.clone();
        m.epsilon = epsilon;
        m.validated()
    }

    /// `c(s)`; identically 1 for the Heisenberg bundle.
    pub fn warping_at(&self, s: f64) -> f64 {
        self.warping.value(s)
    }

    /// Fourier series of `1/c`.
    pub fn inverse_warping(&self) -> Result<FourierSeries> {
        match &self.warping {
            Warping::Exponent(g) => exp_series(&g.scale(-1.0), SERIES_TOL),
            Warping::Direct(c) => sampled_series(|s| 1.0 / c.eval_re(s), c.degree()),
        }
    }

    /// Fourier series of `c'/c`.
    pub fn log_derivative(&self) -> Result<FourierSeries> {
        match &self.warping {
            Warping::Exponent(g) => Ok(g.derivative()),
            Warping::Direct(c) => {
                let dc = c.derivative();
                sampled_series(|s| dc.eval_re(s) / c.eval_re(s), c.degree())
            }
        }
    }

    /// Fiber length `l = |K|` at a base point (the first coordinate is used
    /// on one-dimensional bases).
    pub fn fiber_length_at(&self, s: f64) -> f64 {
        match self.kind {
            ModelKind::HeisenbergBundle => self.epsilon / self.quotient_order as f64,
            _ => self.epsilon * self.warping.value(s),
        }
    }

    /// `sup l` over the base.
    pub fn max_fiber_length(&self) -> f64 {
        match self.kind {
            ModelKind::HeisenbergBundle => self.fiber_length_at(0.0),
            _ => {
                let c_max = grid(POSITIVITY_GRID)
                    .map(|s| self.warping.value(s))
                    .fold(0.0_f64, f64::max);
                self.epsilon * c_max
            }
        }
    }

    /// Coefficient of the curvature `F` of the connection on the unit base frame.
    pub fn connection_curvature(&self) -> f64 {
        match self.kind {
            ModelKind::HeisenbergBundle => self.quotient_order as f64 * self.b / self.epsilon,
            _ => 0.0,
        }
    }

    /// Base two-form coefficient `𝓕` with `f*𝓕 = lF`.
    pub fn curvature_mean(&self) -> f64 {
        match self.kind {
            ModelKind::HeisenbergBundle => self.b,
            _ => 0.0,
        }
    }

    /// Integrality of the Chern number `b·Area/(2π·l)` for the flat base
    /// `(ℝ/2πℤ)²`. `None` when the bundle can be realized, otherwise a warning.
    pub fn integrality_warning(&self) -> Option<String> {
        if self.kind != ModelKind::HeisenbergBundle {
            return None;
        }
        let area = 4.0 * PI * PI;
        let chern = self.b * area / (2.0 * PI * self.fiber_length_at(0.0));
        let nearest = chern.round();
        if (chern - nearest).abs() <= 1e-9 * chern.abs().max(1.0) {
            None
        } else {
            Some(format!(
                "b·Area/(2π·l) = {chern:.6} is not an integer; the V₀ operator is still well defined"
            ))
        }
    }

    /// `ℤ_q` quotient of the Heisenberg bundle along the fiber.
    pub fn quotient(&self, q: u32) -> Result<Self> {
        if self.kind != ModelKind::HeisenbergBundle {
            return Err(LabError::InvalidModel(format!(
                "quotient needs a Heisenberg bundle, got {}",
                self.kind.name()
            )));
        }
        if q < 1 {
            return Err(LabError::InvalidArgument("quotient order must be at least 1".into()));
        }
        let order = self.quotient_order.checked_mul(q).ok_or_else(|| {
            LabError::InvalidArgument("quotient order overflows".into())
        })?;
        let mut m = self.clone();
        m.quotient_order = order;
        Ok(m)
    }

    pub fn fiber_offset(&self) -> Offset {
        match self.fiber_spin {
            FiberSpin::Projectable => Offset::Integer,
            FiberSpin::Nonprojectable => Offset::Half,
        }
    }

    /// Fiber mode lattice truncated at `cutoff`.
    pub fn mode_lattice(&self, cutoff: usize) -> Result<ModeLattice> {
        ModeLattice::new(self.fiber_offset(), cutoff)
    }

    /// Base lattices, one per base direction.
    pub fn base_lattices(&self, cutoff: usize) -> Result<Vec<ModeLattice>> {
        self.base_spin.iter().map(|&o| ModeLattice::new(o, cutoff)).collect()
    }

    pub fn ensure_mode(&self, k: ModeIndex) -> Result<()> {
        if self.fiber_offset().contains(k) {
            Ok(())
        } else {
            let lattice = match self.fiber_offset() {
                Offset::Integer => "Z (projectable fiber spin structure)",
                Offset::Half => "Z+1/2 (nonprojectable fiber spin structure)",
            };
            Err(LabError::ModeNotInLattice {
                k: k.to_string(),
                lattice: lattice.into(),
            })
        }
    }

    /// O'Neill tensors from their closed forms, with grid suprema.
    pub fn submersion_tensors(&self) -> Result<TensorReport> {
        self.validate()?;
        let log_derivative = match self.kind {
            ModelKind::HeisenbergBundle => FourierSeries::zero(),
            _ => self.log_derivative()?,
        };
        let lf = self.fiber_length_at(0.0) * self.connection_curvature();
        let report = TensorReport {
            base_dim: self.base_dim(),
            log_derivative,
            lf: if self.kind == ModelKind::HeisenbergBundle { lf } else { 0.0 },
            sup_a: 0.0,
            sup_t: 0.0,
            samples: SUP_GRID,
        };
        let sup_t = grid(SUP_GRID)
            .map(|s| report.t_norm(&[s, 0.0]))
            .fold(0.0_f64, f64::max);
        let sup_a = grid(SUP_GRID)
            .map(|s| report.a_norm(&[s, 0.0]))
            .fold(0.0_f64, f64::max);
        Ok(TensorReport {
            sup_a,
            sup_t,
            ..report
        })
    }
}

fn sampled_series<F: Fn(f64) -> f64>(f: F, degree: usize) -> Result<FourierSeries> {
    let mut samples = (16 * degree).max(256);
    loop {
        let max_freq = (samples / 2 - 1).min(MAX_MODES);
        let values: Vec<f64> = grid(samples).map(&f).collect();
        let series = FourierSeries::from_samples(&values, max_freq).truncated(SERIES_TOL * 1e-3, max_freq);
        let achieved = series.sampled_error(&f);
        if achieved <= SERIES_TOL * 10.0 {
            return Ok(series);
        }
        if max_freq == MAX_MODES {
            return Err(LabError::ToleranceUnreachable {
                tol: SERIES_TOL * 10.0,
                achieved,
                max_modes: MAX_MODES,
            });
        }
        samples *= 2;
    }
}

/// Pointwise O'Neill tensors in the adapted frame `(e₀ = K/l, e_i)`.
///
/// Vectors are returned in components: horizontal ones on `(e_1, …, e_n)`,
/// vertical ones as the coefficient of `e₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorReport {
    pub base_dim: usize,
    /// `c'/c` (warped families).
    pub log_derivative: FourierSeries,
    /// `lF(e₁, e₂)` (Heisenberg).
    pub lf: f64,
    pub sup_a: f64,
    pub sup_t: f64,
    pub samples: usize,
}

impl TensorReport {
    fn grad_log_l(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.base_dim];
        if self.base_dim == 1 {
            g[0] = self.log_derivative.eval_re(x[0]);
        }
        g
    }

    /// `T(e₀, e₀) = −grad l / l` (horizontal components).
    pub fn t_vv(&self, x: &[f64]) -> Vec<f64> {
        self.grad_log_l(x).into_iter().map(|v| -v).collect()
    }

    /// `T(e₀, e_i)`, vertical coefficient per horizontal index.
    pub fn t_vh(&self, x: &[f64]) -> Vec<f64> {
        self.grad_log_l(x)
    }

    /// `A(e_i, e₀) = (l/2) Σ_j F(e_i, e_j) e_j`, row `i` holding the components.
    pub fn a_hv(&self, _x: &[f64]) -> Vec<Vec<f64>> {
        let f = self.two_form();
        f.iter().map(|row| row.iter().map(|v| 0.5 * v).collect()).collect()
    }

    /// `A(e_i, e_j) = −(l/2) F(e_i, e_j) e₀`, vertical coefficients.
    pub fn a_hh(&self, _x: &[f64]) -> Vec<Vec<f64>> {
        let f = self.two_form();
        f.iter().map(|row| row.iter().map(|v| -0.5 * v).collect()).collect()
    }

    fn two_form(&self) -> Vec<Vec<f64>> {
        let n = self.base_dim;
        let mut f = vec![vec![0.0; n]; n];
        if n == 2 {
            f[0][1] = self.lf;
            f[1][0] = -self.lf;
        }
        f
    }

    /// `|T|` at a point: the length of `T(e₀, e₀)`.
    pub fn t_norm(&self, x: &[f64]) -> f64 {
        self.t_vv(x).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `|A|` at a point: `max_{i,j} |A(e_i, e_j)| = (l/2)‖F‖`.
    pub fn a_norm(&self, x: &[f64]) -> f64 {
        self.a_hh(x)
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// JSON form of the warping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WarpingSpec {
    /// `c = exp(series)`.
    Log(SeriesSpec),
    /// `c = series`.
    Direct(SeriesSpec),
}

impl Default for WarpingSpec {
    fn default() -> Self {
        WarpingSpec::Log(SeriesSpec::default())
    }
}

/// JSON form of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default)]
    pub warping: WarpingSpec,
    #[serde(default)]
    pub b: f64,
    #[serde(default = "projectable")]
    pub fiber_spin: FiberSpin,
    /// Offsets (0 or 0.5) per base direction; defaults to the bounding
    /// structure `0.5` for spinors and `0` for forms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_spin: Option<Vec<Offset>>,
    #[serde(default = "one_u32")]
    pub quotient_order: u32,
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

fn projectable() -> FiberSpin {
    FiberSpin::Projectable
}

impl ModelSpec {
    pub fn build(&self) -> Result<BundleModel> {
        let warping = match &self.warping {
            WarpingSpec::Log(s) => Warping::Exponent(s.to_series()?),
            WarpingSpec::Direct(s) => Warping::Direct(s.to_series()?),
        };
        let base_dim = match self.kind {
            ModelKind::HeisenbergBundle => 2,
            _ => 1,
        };
        let default_offset = match self.kind {
            ModelKind::FormTorus => Offset::Integer,
            _ => Offset::Half,
        };
        let base_spin = self
            .base_spin
            .clone()
            .unwrap_or_else(|| vec![default_offset; base_dim]);
        if self.quotient_order < 1 {
            return Err(LabError::InvalidModel("quotient order must be at least 1".into()));
        }
        let model = BundleModel {
            kind: self.kind,
            epsilon: self.epsilon,
            warping,
            b: self.b,
            fiber_spin: self.fiber_spin,
            base_spin,
            quotient_order: self.quotient_order,
        };
        if model.kind == ModelKind::FormTorus && model.base_spin != [Offset::Integer] {
            return Err(LabError::InvalidModel("forms have periodic base modes (offset 0)".into()));
        }
        model.validated()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn warped(g: FourierSeries) -> BundleModel {
        BundleModel::warped_torus(0.1, Warping::Exponent(g), FiberSpin::Projectable, Offset::Half).unwrap()
    }

    #[test]
    fn flat_tensors_vanish() {
        let t = warped(FourierSeries::zero()).submersion_tensors().unwrap();
        assert_eq!((t.sup_a, t.sup_t), (0.0, 0.0));
    }

    #[test]
    fn warped_sup_t() {
        let t = warped(FourierSeries::cos(1, 0.1)).submersion_tensors().unwrap();
        assert!((t.sup_t - 0.1).abs() < 1e-6);
        assert_eq!(t.sup_a, 0.0);
        let s = 0.7;
        assert!((t.t_norm(&[s]) - (0.1 * s.sin()).abs()).abs() < 1e-15);
    }

    #[test]
    fn heisenberg_tensors() {
        let b = 1.0 / (2.0 * PI);
        let m = BundleModel::heisenberg(1.0, b, FiberSpin::Projectable, [Offset::Integer; 2]).unwrap();
        let t = m.submersion_tensors().unwrap();
        assert_eq!(t.sup_t, 0.0);
        assert!((t.a_hh(&[0.0, 0.0])[0][1].abs() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((t.sup_a - b / 2.0).abs() < 1e-15);
    }

    #[test]
    fn curvature_mean_and_quotients() {
        let b = 1.0 / (2.0 * PI);
        let m = BundleModel::heisenberg(1.0, b, FiberSpin::Projectable, [Offset::Integer; 2]).unwrap();
        assert_eq!(m.curvature_mean(), b);
        assert_eq!(m.quotient(1).unwrap(), m);
        let q8 = m.quotient(8).unwrap();
        assert_eq!(m.quotient(4).unwrap().quotient(2).unwrap(), q8);
        assert_eq!(q8.curvature_mean(), b);
        assert_eq!(q8.fiber_length_at(0.0), 1.0 / 8.0);
        assert!(m.quotient(0).is_err());
        assert_eq!(warped(FourierSeries::zero()).curvature_mean(), 0.0);
        assert!(warped(FourierSeries::zero()).quotient(2).is_err());
    }

    #[test]
    fn integrality() {
        let ok = BundleModel::heisenberg(1.0, 1.0 / (2.0 * PI), FiberSpin::Projectable, [Offset::Integer; 2]).unwrap();
        assert!(ok.integrality_warning().is_none());
        assert!(ok.quotient(4).unwrap().integrality_warning().is_none());
        let bad = BundleModel::heisenberg(1.0, 0.1, FiberSpin::Projectable, [Offset::Integer; 2]).unwrap();
        assert!(bad.integrality_warning().is_some());
    }

    #[test]
    fn lattices_follow_fiber_spin() {
        let p = warped(FourierSeries::zero());
        assert_eq!(p.mode_lattice(2).unwrap().frequencies(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        let n = BundleModel::flat_torus(0.1, FiberSpin::Nonprojectable, Offset::Half).unwrap();
        let f = n.mode_lattice(2).unwrap().frequencies();
        assert_eq!(f, vec![-1.5, -0.5, 0.5, 1.5]);
        assert!(n.ensure_mode(ModeIndex::integer(0)).is_err());
        assert!(n.ensure_mode(ModeIndex::from_f64(0.5).unwrap()).is_ok());
        assert!(p.ensure_mode(ModeIndex::from_f64(0.5).unwrap()).is_err());
    }

    #[test]
    fn rejects_bad_models() {
        assert!(BundleModel::flat_torus(0.0, FiberSpin::Projectable, Offset::Half).is_err());
        let nonpositive = Warping::Direct(FourierSeries::from_trig(0.5, &[(1, 1.0)], &[]));
        assert!(BundleModel::warped_torus(0.1, nonpositive, FiberSpin::Projectable, Offset::Half).is_err());
    }

    #[test]
    fn direct_and_exponent_agree() {
        let g = FourierSeries::cos(1, 0.3);
        let c = exp_series(&g, 1e-15).unwrap();
        let a = warped(g);
        let b = BundleModel::warped_torus(0.1, Warping::Direct(c), FiberSpin::Projectable, Offset::Half).unwrap();
        let (ia, ib) = (a.inverse_warping().unwrap(), b.inverse_warping().unwrap());
        let (ha, hb) = (a.log_derivative().unwrap(), b.log_derivative().unwrap());
        for s in grid(37) {
            assert!((ia.eval(s) - ib.eval(s)).norm() < 1e-12);
            assert!((ha.eval(s) - hb.eval(s)).norm() < 1e-12);
        }
    }

    #[test]
    fn spec_json() {
        let spec: ModelSpec = serde_json::from_str(
            r#"{"kind": "warped_torus", "epsilon": 0.1, "warping": {"log": {"cos": {"1": 0.1}}}}"#,
        )
        .unwrap();
        let m = spec.build().unwrap();
        assert_eq!(m.base_spin(), &[Offset::Half]);
        assert!((m.warping_at(0.0) - 0.1_f64.exp()).abs() < 1e-15);
        let again: ModelSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);
        let bad = r#"{"kind": "warped_torus", "quotient_order": 2}"#;
        assert!(serde_json::from_str::<ModelSpec>(bad).unwrap().build().is_err());
    }
}
