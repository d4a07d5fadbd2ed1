//! Trigonometric polynomials on the circle `ℝ/2πℤ` and their Galerkin matrices.
//!
//! Spinor modes live on a [`ModeLattice`]: `e^{i(m+σ)s}` with `σ ∈ {0, ½}`,
//! the half-integer offset encoding the antiperiodic (bounding) spin
//! structure. Multiplication by an integer-frequency series preserves either
//! lattice, so its matrix is the Toeplitz matrix of the coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::matrix::{CMatrix, ZERO};
use crate::{LabError, Result};

/// Hard limit on the retained frequency in every direction.
pub const MAX_MODES: usize = 512;
/// Default sample count for grid suprema.
pub const SUP_GRID: usize = 1024;

/// Half-integer valued mode index, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex(i64);

impl ModeIndex {
    pub fn from_twice(twice: i64) -> Self {
        ModeIndex(twice)
    }

    pub fn integer(k: i64) -> Self {
        ModeIndex(2 * k)
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        let t = 2.0 * x;
        if !t.is_finite() || t.fract() != 0.0 || t.abs() > 1e12 {
            return Err(LabError::InvalidArgument(format!(
                "mode index {x} is not an integer or half-integer"
            )));
        }
        Ok(ModeIndex(t as i64))
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn abs(self) -> Self {
        ModeIndex(self.0.abs())
    }
}

impl std::ops::Neg for ModeIndex {
    type Output = ModeIndex;
    fn neg(self) -> ModeIndex {
        ModeIndex(-self.0)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for ModeIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for ModeIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        ModeIndex::from_f64(x).map_err(serde::de::Error::custom)
    }
}

/// Lattice offset: `0` (periodic) or `½` (antiperiodic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Offset {
    Integer,
    Half,
}

impl Offset {
    pub fn value(self) -> f64 {
        match self {
            Offset::Integer => 0.0,
            Offset::Half => 0.5,
        }
    }

    pub fn contains(self, k: ModeIndex) -> bool {
        match self {
            Offset::Integer => k.is_integer(),
            Offset::Half => !k.is_integer(),
        }
    }
}

impl TryFrom<f64> for Offset {
    type Error = LabError;
    fn try_from(x: f64) -> Result<Self> {
        if x == 0.0 {
            Ok(Offset::Integer)
        } else if x == 0.5 {
            Ok(Offset::Half)
        } else {
            Err(LabError::InvalidArgument(format!("lattice offset must be 0 or 0.5, got {x}")))
        }
    }
}

impl Serialize for Offset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Offset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        Offset::try_from(x).map_err(serde::de::Error::custom)
    }
}

/// Frequencies `m + offset` with `|m + offset| ≤ cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeLattice {
    offset: Offset,
    cutoff: usize,
}

impl ModeLattice {
    pub fn new(offset: Offset, cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(LabError::InvalidArgument("lattice cutoff must be at least 1".into()));
        }
        if cutoff > MAX_MODES {
            return Err(LabError::CutoffExceeded {
                cutoff,
                limit: MAX_MODES,
            });
        }
        Ok(ModeLattice { offset, cutoff })
    }

    pub fn offset(&self) -> Offset {
        self.offset
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Integer parts `m`, ascending.
    pub fn indices(&self) -> Vec<i64> {
        let n = self.cutoff as i64;
        match self.offset {
            Offset::Integer => (-n..=n).collect(),
            Offset::Half => (-n..n).collect(),
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let o = self.offset.value();
        self.indices().into_iter().map(|m| m as f64 + o).collect()
    }

    pub fn len(&self) -> usize {
        match self.offset {
            Offset::Integer => 2 * self.cutoff + 1,
            Offset::Half => 2 * self.cutoff,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing between neighbouring frequencies.
    pub fn gap(&self) -> f64 {
        1.0
    }
}

impl fmt::Display for ModeLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.offset {
            Offset::Integer => write!(f, "Z (|k| <= {})", self.cutoff),
            Offset::Half => write!(f, "Z+1/2 (|k| <= {})", self.cutoff),
        }
    }
}

/// Finite Fourier series `Σ_m c_m e^{ims}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    modes: BTreeMap<i64, Complex64>,
    real: bool,
}

impl Default for FourierSeries {
    fn default() -> Self {
        Self::zero()
    }
}

impl FourierSeries {
    pub fn zero() -> Self {
        FourierSeries {
            modes: BTreeMap::new(),
            real: true,
        }
    }

    pub fn constant(a: f64) -> Self {
        let mut f = Self::zero();
        if a != 0.0 {
            f.modes.insert(0, Complex64::new(a, 0.0));
        }
        f
    }

    /// `amp · cos(k s)`.
    pub fn cos(k: u32, amp: f64) -> Self {
        Self::from_trig(0.0, &[(k, amp)], &[])
    }

    /// `amp · sin(k s)`.
    pub fn sin(k: u32, amp: f64) -> Self {
        Self::from_trig(0.0, &[], &[(k, amp)])
    }

    /// `a₀ + Σ a_k cos(ks) + Σ b_k sin(ks)`.
    pub fn from_trig(a0: f64, cos: &[(u32, f64)], sin: &[(u32, f64)]) -> Self {
        let mut f = Self::constant(a0);
        for &(k, a) in cos {
            if k == 0 {
                f = f.add(&Self::constant(a));
                continue;
            }
            let k = k as i64;
            *f.modes.entry(k).or_insert(ZERO) += Complex64::new(a / 2.0, 0.0);
            *f.modes.entry(-k).or_insert(ZERO) += Complex64::new(a / 2.0, 0.0);
        }
        for &(k, b) in sin {
            if k == 0 {
                continue;
            }
            let k = k as i64;
            *f.modes.entry(k).or_insert(ZERO) += Complex64::new(0.0, -b / 2.0);
            *f.modes.entry(-k).or_insert(ZERO) += Complex64::new(0.0, b / 2.0);
        }
        f.clean();
        f
    }

    /// Builds a series from explicit complex coefficients; `real` is derived
    /// from conjugate symmetry.
    pub fn from_modes<I: IntoIterator<Item = (i64, Complex64)>>(modes: I) -> Self {
        let mut f = FourierSeries {
            modes: BTreeMap::new(),
            real: false,
        };
        for (m, z) in modes {
            *f.modes.entry(m).or_insert(ZERO) += z;
        }
        f.clean();
        f.real = f.conjugate_symmetric(0.0);
        f
    }

    fn clean(&mut self) {
        self.modes.retain(|_, z| z.re != 0.0 || z.im != 0.0);
    }

    fn conjugate_symmetric(&self, tol: f64) -> bool {
        self.modes
            .iter()
            .all(|(&m, &z)| (self.coeff(-m).conj() - z).norm() <= tol)
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeff(&self, m: i64) -> Complex64 {
        self.modes.get(&m).copied().unwrap_or(ZERO)
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.modes.iter().map(|(&m, &z)| (m, z))
    }

    /// Largest `|m|` with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.modes.keys().map(|m| m.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eval(&self, s: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|(&m, &z)| z * Complex64::from_polar(1.0, m as f64 * s))
            .sum()
    }

    /// Real part of the value; exact for real series.
    pub fn eval_re(&self, s: f64) -> f64 {
        self.eval(s).re
    }

    /// `Σ |c_m|`, an upper bound on the sup-norm.
    pub fn l1_norm(&self) -> f64 {
        self.modes.values().map(|z| z.norm()).sum()
    }

    /// Supremum of `|f|` over `samples` uniform points.
    pub fn grid_sup(&self, samples: usize) -> f64 {
        grid(samples)
            .map(|s| self.eval(s).norm())
            .fold(0.0_f64, f64::max)
    }

    pub fn grid_min_re(&self, samples: usize) -> f64 {
        grid(samples).map(|s| self.eval_re(s)).fold(f64::INFINITY, f64::min)
    }

    pub fn grid_max_re(&self, samples: usize) -> f64 {
        grid(samples).map(|s| self.eval_re(s)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `f'`, coefficientwise `i m c_m`.
    pub fn derivative(&self) -> Self {
        let mut out = FourierSeries {
            modes: self
                .modes
                .iter()
                .map(|(&m, &z)| (m, z * Complex64::new(0.0, m as f64)))
                .collect(),
            real: self.real,
        };
        out.clean();
        out
    }

    /// Pointwise product (coefficient convolution).
    pub fn product(&self, other: &Self) -> Self {
        let mut modes: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (&m, &a) in &self.modes {
            for (&n, &b) in &other.modes {
                *modes.entry(m + n).or_insert(ZERO) += a * b;
            }
        }
        let mut out = FourierSeries {
            modes,
            real: self.real && other.real,
        };
        out.clean();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut modes = self.modes.clone();
        for (&m, &z) in &other.modes {
            *modes.entry(m).or_insert(ZERO) += z;
        }
        let mut out = FourierSeries {
            modes,
            real: self.real && other.real,
        };
        out.clean();
        out
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = FourierSeries {
            modes: self.modes.iter().map(|(&m, &z)| (m, z * a)).collect(),
            real: self.real,
        };
        out.clean();
        out
    }

    /// Complex conjugate function.
    pub fn conj(&self) -> Self {
        FourierSeries {
            modes: self.modes.iter().map(|(&m, &z)| (-m, z.conj())).collect(),
            real: self.real,
        }
    }

    /// Drops coefficients with `|c_m| ≤ tol` and frequencies beyond `max_freq`.
    pub fn truncated(&self, tol: f64, max_freq: usize) -> Self {
        FourierSeries {
            modes: self
                .modes
                .iter()
                .filter(|(&m, z)| z.norm() > tol && m.unsigned_abs() as usize <= max_freq)
                .map(|(&m, &z)| (m, z))
                .collect(),
            real: self.real,
        }
    }

    /// Largest sampled deviation from `reference` on a grid oversampling the
    /// series degree four times.
    pub fn sampled_error<F: Fn(f64) -> f64>(&self, reference: F) -> f64 {
        let samples = (4 * (2 * self.degree() + 1)).max(64);
        grid(samples)
            .map(|s| (self.eval(s) - Complex64::new(reference(s), 0.0)).norm())
            .fold(0.0_f64, f64::max)
    }

    /// Real series from uniform samples on `[0, 2π)`, keeping `|m| ≤ max_freq`.
    pub fn from_samples(values: &[f64], max_freq: usize) -> Self {
        let n = values.len();
        let modes = (-(max_freq as i64)..=max_freq as i64).map(|m| {
            let z: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    Complex64::from_polar(v, -(m as f64) * 2.0 * PI * j as f64 / n as f64)
                })
                .sum();
            (m, z / n as f64)
        });
        let mut f = FourierSeries {
            modes: modes.collect(),
            real: true,
        };
        // symmetrize: exact conjugate symmetry for the real flag
        let keys: Vec<i64> = f.modes.keys().copied().filter(|&m| m > 0).collect();
        for m in keys {
            let avg = (f.coeff(m) + f.coeff(-m).conj()) * 0.5;
            f.modes.insert(m, avg);
            f.modes.insert(-m, avg.conj());
        }
        if let Some(z) = f.modes.get_mut(&0) {
            z.im = 0.0;
        }
        f.clean();
        f
    }
}

/// Uniform grid `2πj/n`, `j = 0..n`.
pub fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| 2.0 * PI * j as f64 / n as f64)
}

/// `e^g` by Taylor expansion with coefficient convolution.
///
/// The result is certified against direct pointwise evaluation on a grid
/// oversampling its degree four times.
pub fn exp_series(g: &FourierSeries, tol: f64) -> Result<FourierSeries> {
    if !g.is_real() {
        return Err(LabError::InvalidArgument("exp_series needs a real exponent".into()));
    }
    if !(tol > 0.0) {
        return Err(LabError::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let big = g.l1_norm();
    let prune = tol * 1e-4;
    let mut sum = FourierSeries::constant(1.0);
    let mut term = FourierSeries::constant(1.0);
    let mut n = 0usize;
    loop {
        n += 1;
        term = term.product(g).scale(1.0 / n as f64).truncated(prune, MAX_MODES);
        sum = sum.add(&term);
        let remainder = term.l1_norm() * big / (n as f64 + 1.0);
        if (n as f64) > big && remainder < prune {
            break;
        }
        if n > 10_000 || term.is_zero() {
            break;
        }
    }
    let sum = sum.truncated(prune * 1e-3, MAX_MODES);
    let achieved = sum.sampled_error(|s| g.eval_re(s).exp());
    if achieved > tol {
        return Err(LabError::ToleranceUnreachable {
            tol,
            achieved,
            max_modes: MAX_MODES,
        });
    }
    Ok(sum)
}

/// Galerkin matrix of multiplication by `f` on the lattice
/// (entry `(m, m')` = `c_{m − m'}`).
pub fn toeplitz_matrix(f: &FourierSeries, lattice: &ModeLattice) -> CMatrix {
    let idx = lattice.indices();
    let n = idx.len();
    CMatrix::from_fn(n, n, |i, j| f.coeff(idx[i] - idx[j]))
}

/// JSON form of a real series: `{"const": a0, "cos": {k: a_k}, "sin": {k: b_k}}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    #[serde(rename = "const", default, skip_serializing_if = "is_zero_f64")]
    pub constant: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cos: BTreeMap<u32, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sin: BTreeMap<u32, f64>,
}

fn is_zero_f64(x: &f64) -> bool {
    *x == 0.0
}

impl SeriesSpec {
    pub fn constant(a: f64) -> Self {
        SeriesSpec {
            constant: a,
            ..Default::default()
        }
    }

    pub fn cos(k: u32, a: f64) -> Self {
        let mut s = SeriesSpec::default();
        s.cos.insert(k, a);
        s
    }

    pub fn to_series(&self) -> Result<FourierSeries> {
        let all = std::iter::once(&self.constant)
            .chain(self.cos.values())
            .chain(self.sin.values());
        if all.clone().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidArgument("series coefficients must be finite".into()));
        }
        if self.cos.keys().chain(self.sin.keys()).any(|&k| k as usize > MAX_MODES) {
            return Err(LabError::CutoffExceeded {
                cutoff: *self.cos.keys().chain(self.sin.keys()).max().unwrap() as usize,
                limit: MAX_MODES,
            });
        }
        let cos: Vec<(u32, f64)> = self.cos.iter().map(|(&k, &a)| (k, a)).collect();
        let sin: Vec<(u32, f64)> = self.sin.iter().map(|(&k, &b)| (k, b)).collect();
        Ok(FourierSeries::from_trig(self.constant, &cos, &sin))
    }
}
