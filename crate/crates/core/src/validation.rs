//! Oracle suite: closed forms and identities the assembled objects must obey.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{audit, divergence_bound};
use crate::clifford::{build_rep, check_rep, split_even_odd, CliffordRep, SpinFrame};
use crate::eigensolve::{eigenvalues, hausdorff_distance, matched_distance};
use crate::fourier::{exp_series, grid, toeplitz_matrix, FourierSeries, ModeIndex, ModeLattice, Offset};
use crate::matrix::{c, max_abs, CMatrix};
use crate::models::{BundleModel, FiberSpin, Warping};
use crate::operators::{heisenberg_v0_operator, limit_operator, mode_operator};
use crate::potentials::{restrict_v0, PotentialSpec};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `(passed, total)` per module.
    pub fn counts(&self) -> BTreeMap<&'static str, (usize, usize)> {
        let mut out = BTreeMap::new();
        for c in &self.checks {
            let e = out.entry(c.module).or_insert((0, 0));
            e.1 += 1;
            if c.pass {
                e.0 += 1;
            }
        }
        out
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn run<F>(module: &'static str, name: &str, f: F) -> Check
where
    F: FnOnce() -> Result<(bool, String)>,
{
    let (pass, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    Check {
        module,
        name: name.to_string(),
        pass,
        detail,
    }
}

fn within(value: f64, tol: f64) -> (bool, String) {
    (value <= tol, format!("{value:.3e} (tolerance {tol:.0e})"))
}

/// One check per representation and identity; a violated identity is named
/// in the check.
pub fn clifford_checks(reps: &[CliffordRep]) -> Vec<Check> {
    let mut out = Vec::new();
    for rep in reps {
        let violations = check_rep(rep);
        let name = format!("Cl({}) representation identities", rep.dim());
        out.push(if violations.is_empty() {
            Check {
                module: "clifford",
                name,
                pass: true,
                detail: "all identities hold".into(),
            }
        } else {
            let names: Vec<String> = violations
                .iter()
                .map(|v| format!("{} (residual {:.3e})", v.invariant, v.residual))
                .collect();
            Check {
                module: "clifford",
                name,
                pass: false,
                detail: format!("violated: {}", names.join(", ")),
            }
        });
    }
    out
}

pub fn run_suite() -> ValidationReport {
    let mut checks = Vec::new();
    let reps: Vec<CliffordRep> = (1..=3).filter_map(|n| build_rep(n).ok()).collect();
    checks.extend(clifford_checks(&reps));
    checks.push(run("clifford", "curvature term of the torus frame is +b/4", || {
        let frame = SpinFrame::for_base_dim(2)?;
        let b = 0.37;
        let term = frame.vertical() * frame.horizontal_two_form(&[vec![0.0, b], vec![-b, 0.0]])? * c(-0.25, 0.0);
        Ok(within(max_abs(&(term - CMatrix::identity(2, 2) * c(b / 4.0, 0.0))), 1e-15))
    }));
    checks.push(run("clifford", "even/odd splitting has opposite signs", || {
        let s = split_even_odd(&SpinFrame::for_base_dim(1)?)?;
        Ok((s.sign_plus == -s.sign_minus && s.sign_plus.abs() == 1.0, format!("signs ({}, {})", s.sign_plus, s.sign_minus)))
    }));

    checks.push(run("fourier", "exp(g)·exp(−g) = 1", || {
        let g = FourierSeries::from_trig(0.0, &[(1, 0.3)], &[(2, 0.2)]);
        let p = exp_series(&g, 1e-13)?.product(&exp_series(&g.scale(-1.0), 1e-13)?);
        let err = grid(128).map(|s| (p.eval(s) - c(1.0, 0.0)).norm()).fold(0.0, f64::max);
        Ok(within(err, 1e-12))
    }));
    checks.push(run("fourier", "Toeplitz matrix of 1 is the identity", || {
        let lat = ModeLattice::new(Offset::Half, 6)?;
        let t = toeplitz_matrix(&FourierSeries::constant(1.0), &lat);
        Ok(within(max_abs(&(t - CMatrix::identity(12, 12))), 0.0))
    }));

    checks.push(run("eigensolve", "tridiag(1,2,1) closed form", || {
        let m = CMatrix::from_fn(3, 3, |i, j| match i.abs_diff(j) {
            0 => c(2.0, 0.0),
            1 => c(1.0, 0.0),
            _ => c(0.0, 0.0),
        });
        let s = eigenvalues(&m)?;
        let r = 2.0_f64.sqrt();
        let expect = [2.0 - r, 2.0, 2.0 + r];
        Ok(within(s.values.iter().zip(expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max), 1e-13))
    }));
    checks.push(run("eigensolve", "trace and Frobenius identities (n = 64)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 64;
        let mut h = CMatrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = c(rng.gen_range(-1.0..1.0), 0.0);
            for j in 0..i {
                let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        let s = eigenvalues(&h)?;
        let scale = crate::matrix::hermitian_norm(&h);
        let tr: f64 = (0..n).map(|i| h[(i, i)].re).sum();
        let fro: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        let e1 = (s.values.iter().sum::<f64>() - tr).abs();
        let e2 = (s.values.iter().map(|v| v * v).sum::<f64>() - fro).abs();
        Ok(within(e1.max(e2) / (n as f64 * scale * scale.max(1.0)), 1e-10))
    }));

    checks.push(run("operators", "flat torus mode closed form", || {
        let m = BundleModel::flat_torus(0.1, FiberSpin::Projectable, Offset::Half)?;
        let op = mode_operator(&m, ModeIndex::integer(1), 16)?;
        let s = op.spectrum()?.window(op.reliable_window)?;
        let worst = s
            .values
            .iter()
            .map(|&v| {
                (-16..16)
                    .map(|j| (((j as f64 + 0.5).powi(2) + 100.0).sqrt() - v.abs()).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        Ok(within(worst, 1e-10))
    }));
    checks.push(run("operators", "k = 0 isospectral under warping", || {
        let flat = BundleModel::flat_torus(1.0, FiberSpin::Projectable, Offset::Half)?;
        let warped = BundleModel::warped_torus(0.1, Warping::Exponent(FourierSeries::cos(1, 0.3)), FiberSpin::Projectable, Offset::Half)?;
        let a = mode_operator(&flat, ModeIndex::integer(0), 24)?;
        let b = mode_operator(&warped, ModeIndex::integer(0), 24)?;
        Ok(within(hausdorff_distance(&a.spectrum()?, &b.spectrum()?, b.reliable_window)?, 1e-8))
    }));
    checks.push(run("operators", "Heisenberg V0 operator equals the limit operator", || {
        let m = BundleModel::heisenberg(1.0, 1.0 / (2.0 * PI), FiberSpin::Projectable, [Offset::Integer; 2])?;
        let mut worst = 0.0_f64;
        for q in [1, 2, 4, 8] {
            let mq = m.quotient(q)?;
            let a = heisenberg_v0_operator(&mq, 6)?.spectrum()?;
            let b = limit_operator(&mq, None, 6)?.spectrum()?;
            worst = worst.max(matched_distance(&a, &b, 30)?);
        }
        Ok(within(worst, 1e-10))
    }));

    checks.push(run("potentials", "average of cos(θ)·Id vanishes", || {
        let z = PotentialSpec::fiber_cosine(1, 1.0)?;
        let quad = grid(64)
            .map(|t| z.evaluate(&[0.4], t))
            .fold(CMatrix::zeros(2, 2), |acc, m| acc + m);
        let ok = z.average().is_zero() && max_abs(&quad) < 1e-13;
        Ok((ok, format!("quadrature residual {:.3e}", max_abs(&quad) / 64.0)))
    }));
    checks.push(run("potentials", "restriction of z·Id is a Toeplitz pair", || {
        let m = BundleModel::flat_torus(0.1, FiberSpin::Projectable, Offset::Half)?;
        let f = FourierSeries::cos(1, 0.2);
        let r = restrict_v0(&PotentialSpec::scalar(f.clone())?, &m, 5)?;
        let t = toeplitz_matrix(&f, &m.base_lattices(5)?[0]);
        let n = t.nrows();
        let zero = CMatrix::zeros(n, n);
        Ok(within(max_abs(&(r - crate::matrix::block2(&t, &zero, &zero, &t))), 1e-15))
    }));

    checks.push(run("bounds", "divergence bound reference values", || {
        let a = divergence_bound(1.0, 0.1, 0.0, 0.0, 1, 0.0)?;
        let b = divergence_bound(0.5, 0.01, 0.0, 1.0, 1, 0.0)?;
        let d = divergence_bound(1.0, 0.1, 0.2, 0.5, 2, 0.01)?;
        Ok(within((a - 10.0).abs().max((b - 49.0).abs()).max((d - 9.291088571812668).abs()), 1e-10))
    }));
    checks.push(run("bounds", "flat warped torus audit", || {
        let m = BundleModel::flat_torus(0.05, FiberSpin::Projectable, Offset::Half)?;
        let ks: Vec<ModeIndex> = [-2, -1, 0, 1, 2].into_iter().map(ModeIndex::integer).collect();
        let r = audit(&m, &ks, 16, None, None)?;
        Ok((r.all_pass(), format!("{} modes audited", r.per_mode.len())))
    }));

    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let r = run_suite();
        let failed: Vec<_> = r.failures().collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!(r.counts().len() >= 6);
    }

    #[test]
    fn corrupted_gamma_is_named() {
        let good = build_rep(3).unwrap();
        let mut gammas = good.gammas().to_vec();
        gammas[2] = -gammas[2].clone();
        let bad = CliffordRep::from_parts_unchecked(3, gammas);
        let checks = clifford_checks(&[bad]);
        assert!(!checks[0].pass);
        assert!(checks[0].detail.contains("volume-orientation"));
    }
}
