//! Lower bounds for diverging modes and audits of computed spectra.
//!
//! For `k ≠ 0` every eigenvalue on `V_k` satisfies
//!
//! ```text
//! |λ| ≥ sinh(arsinh(|k|/l − ½⌊n/2⌋^{1/2} C_A − ε) − ε) − Λ,
//! ```
//!
//! `n` the base dimension, `l = sup|K|`, `C_A` the A-tensor bound and `Λ` the
//! potential bound. The auditor uses `ε = 0` together with an explicit
//! tolerance; for invariant metrics the arsinh-control constant of the
//! metric-smoothing step vanishes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{one_sided_distance, Spectrum};
use crate::fourier::ModeIndex;
use crate::models::BundleModel;
use crate::operators::{add_potential, mode_operator};
use crate::potentials::PotentialSpec;
use crate::{LabError, Result};

/// Slack for pass flags.
pub const AUDIT_TOL: f64 = 1e-9;

/// `sinh(arsinh(|k|/l − ½⌊n/2⌋^{1/2}C_A − ε) − ε) − Λ`.
pub fn divergence_bound(k: f64, l: f64, c_a: f64, lambda: f64, n: usize, eps: f64) -> Result<f64> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(LabError::InvalidArgument(format!("fiber length {l} must be positive")));
    }
    if ![k, c_a, lambda, eps].iter().all(|v| v.is_finite()) {
        return Err(LabError::InvalidArgument("bound inputs must be finite".into()));
    }
    let inner = k.abs() / l - mh_norm_bound(n, c_a) - eps;
    Ok((inner.asinh() - eps).sinh() - lambda)
}

/// `½⌊n/2⌋^{1/2}C_A`, the norm bound for `¼γ(e₀)γ(lF)`.
pub fn mh_norm_bound(n: usize, c_a: f64) -> f64 {
    0.5 * ((n / 2) as f64).sqrt() * c_a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KatoOutcome {
    pub pass: bool,
    pub margin: f64,
    pub max_distance: f64,
}

/// Checks that every eigenvalue of `perturbed` in `[−r, r]` lies within
/// `Λ` of `base`.
pub fn kato_check(base: &Spectrum, perturbed: &Spectrum, lambda: f64, r: f64) -> Result<KatoOutcome> {
    if let Some(w) = base.window {
        if w + AUDIT_TOL < r + lambda {
            return Err(LabError::WindowTooSmall {
                have: w,
                need: r + lambda,
            });
        }
    }
    let d = one_sided_distance(perturbed, base, r)?;
    Ok(KatoOutcome {
        pass: d <= lambda + AUDIT_TOL,
        margin: lambda - d,
        max_distance: d,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeBound {
    pub k: ModeIndex,
    pub lower_bound: f64,
    pub observed_min_abs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub model: String,
    pub c_a: f64,
    pub c_t: f64,
    pub lambda: f64,
    /// Fiber length used in the bound.
    pub l: f64,
    pub base_dim: usize,
    /// Constant of the arsinh control under metric change; zero for invariant metrics.
    pub arsinh_constant: f64,
    pub per_mode: Vec<ModeBound>,
    /// `Λ` minus the largest windowed eigenvalue displacement caused by the potential.
    pub kato_margin: f64,
}

impl BoundsReport {
    pub fn all_pass(&self) -> bool {
        self.per_mode.iter().all(|m| m.pass)
    }

    pub fn to_csv_rows(&self) -> Vec<[String; 4]> {
        self.per_mode
            .iter()
            .map(|m| {
                [
                    m.k.value().to_string(),
                    format!("{:.12e}", m.lower_bound),
                    format!("{:.12e}", m.observed_min_abs),
                    m.pass.to_string(),
                ]
            })
            .collect()
    }
}

/// Audits the modes `ks` against the divergence bound.
///
/// Each mode operator carries the invariant part of the potential, while
/// `Λ` is the sup-norm of the full potential. `lambda_override` replaces `Λ`
/// (it must not be negative).
pub fn audit(
    model: &BundleModel,
    ks: &[ModeIndex],
    cutoff: usize,
    potential: Option<&PotentialSpec>,
    lambda_override: Option<f64>,
) -> Result<BoundsReport> {
    let tensors = model.submersion_tensors()?;
    let measured = potential.map(|z| z.sup_norm(model)).transpose()?.unwrap_or(0.0);
    let lambda = match lambda_override {
        Some(v) if !(v >= 0.0) => {
            return Err(LabError::InvalidArgument(format!("potential bound {v} must be nonnegative")))
        }
        Some(v) => v,
        None => measured,
    };
    let zblock = potential
        .map(|z| z.mode_block(model, cutoff))
        .transpose()?;
    let l = model.max_fiber_length();
    let n = model.base_dim();
    let rows: Vec<(ModeBound, f64)> = ks
        .par_iter()
        .map(|&k| {
            let op = mode_operator(model, k, cutoff)?;
            let base = op.spectrum()?;
            let (spec, margin) = match &zblock {
                Some(z) => {
                    let perturbed = add_potential(&op, z)?.spectrum()?;
                    let r = (op.reliable_window - measured).max(AUDIT_TOL);
                    let d = one_sided_distance(&perturbed, &base, r).unwrap_or(0.0);
                    (perturbed, measured - d)
                }
                None => (base, lambda),
            };
            let observed = spec.min_abs().unwrap_or(f64::INFINITY);
            let bound = divergence_bound(k.value(), l, tensors.sup_a, lambda, n, 0.0)?;
            Ok((
                ModeBound {
                    k,
                    lower_bound: bound,
                    observed_min_abs: observed,
                    pass: observed >= bound - AUDIT_TOL,
                },
                margin,
            ))
        })
        .collect::<Result<_>>()?;
    let kato_margin = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok(BoundsReport {
        model: format!("{}(eps = {})", model.kind().name(), model.epsilon()),
        c_a: tensors.sup_a,
        c_t: tensors.sup_t,
        lambda,
        l,
        base_dim: n,
        arsinh_constant: 0.0,
        per_mode: rows.into_iter().map(|r| r.0).collect(),
        kato_margin: if kato_margin.is_finite() { kato_margin } else { lambda },
    })
}
