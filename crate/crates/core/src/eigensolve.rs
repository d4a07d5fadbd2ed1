//! Dense Hermitian eigensolver and spectrum comparison metrics.
//!
//! The solver reduces a complex Hermitian matrix to real symmetric
//! tridiagonal form with Householder reflections and a diagonal phase
//! rescaling, then runs implicit QL with Wilkinson-type shifts. Matrices that
//! decompose into independent blocks (common for constant-coefficient
//! operators) are split first and each block is solved on its own. Nothing is
//! randomized: identical input bits give identical output bits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matrix::{ensure_hermitian, CMatrix, ZERO};
use crate::{LabError, Result};

/// Largest dense problem accepted by the solver.
pub const MAX_SIZE: usize = 8192;
/// Hermiticity tolerance relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// QL sweeps allowed per eigenvalue.
pub const MAX_SWEEPS: usize = 50;

/// Sorted eigenvalues with multiplicity, plus the interval `[-R, R]` in which
/// they are considered converged (`None` means every value is reliable).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub window: Option<f64>,
    pub provenance: String,
}

/// Eigenvalues and orthonormal eigenvectors (as matrix columns).
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

fn check_input(h: &CMatrix) -> Result<()> {
    if h.nrows() > MAX_SIZE {
        return Err(LabError::SizeExceeded {
            size: h.nrows(),
            limit: MAX_SIZE,
        });
    }
    ensure_hermitian(h, HERMITIAN_TOL)
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn eigenvalues(h: &CMatrix) -> Result<Spectrum> {
    check_input(h)?;
    let mut values = Vec::with_capacity(h.nrows());
    for comp in components(h) {
        let sub = submatrix(h, &comp);
        values.extend(dense_eigen(&sub, false)?.0);
    }
    values.sort_by(f64::total_cmp);
    Ok(Spectrum {
        values,
        window: None,
        provenance: String::new(),
    })
}

/// Eigenvalues and eigenvectors, ascending.
pub fn eigh(h: &CMatrix) -> Result<Eigh> {
    check_input(h)?;
    let n = h.nrows();
    let mut pairs: Vec<(f64, Vec<(usize, Complex64)>)> = Vec::with_capacity(n);
    for comp in components(h) {
        let sub = submatrix(h, &comp);
        let (vals, vecs) = dense_eigen(&sub, true)?;
        let vecs = vecs.expect("vectors requested");
        for (j, v) in vals.into_iter().enumerate() {
            let col = comp
                .iter()
                .enumerate()
                .map(|(i, &row)| (row, vecs[(i, j)]))
                .collect();
            pairs.push((v, col));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (j, (v, col)) in pairs.into_iter().enumerate() {
        values.push(v);
        for (row, z) in col {
            vectors[(row, j)] = z;
        }
    }
    Ok(Eigh { values, vectors })
}

/// Largest `‖Hv − λv‖ / ‖H‖` over `samples` evenly spread eigenpairs.
pub fn residual_spot_check(h: &CMatrix, samples: usize) -> Result<f64> {
    let e = eigh(h)?;
    let n = e.values.len();
    if n == 0 {
        return Ok(0.0);
    }
    let norm = e.values.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let count = samples.clamp(1, n);
    let mut worst = 0.0_f64;
    for s in 0..count {
        let j = if count == 1 { 0 } else { s * (n - 1) / (count - 1) };
        let v = e.vectors.column(j);
        let r = h * v - v * Complex64::new(e.values[j], 0.0);
        worst = worst.max(r.norm() / norm);
    }
    Ok(worst)
}

/// Connected components of the sparsity graph, each sorted ascending.
fn components(h: &CMatrix) -> Vec<Vec<usize>> {
    let n = h.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for j in 0..n {
        for i in (j + 1)..n {
            let z = h[(i, j)];
            if z.re != 0.0 || z.im != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn submatrix(h: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])])
}

/// Householder tridiagonalization + QL on a single dense block.
fn dense_eigen(h: &CMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    let n = h.nrows();
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| CMatrix::zeros(0, 0))));
    }
    // column-major working copy, lower triangle is authoritative
    let mut a: Vec<Complex64> = h.as_slice().to_vec();
    let at = |i: usize, j: usize| i + j * n;
    let mut diag = vec![0.0; n];
    let mut sub = vec![ZERO; n];
    let mut reflectors: Vec<Option<Vec<Complex64>>> = Vec::new();

    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let x0 = a[at(k + 1, k)];
        let tail: f64 = (k + 2..n).map(|i| a[at(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            sub[k] = x0;
            reflectors.push(None);
            continue;
        }
        let xnorm = (x0.norm_sqr() + tail).sqrt();
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[at(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // p = B v over the trailing block, using the full (Hermitian) block
        let off = k + 1;
        for pi in p.iter_mut().take(m) {
            *pi = ZERO;
        }
        for (jj, vj) in v.iter().enumerate() {
            let col = &a[at(off, off + jj)..at(off, off + jj) + m];
            for (pi, bij) in p.iter_mut().zip(col) {
                *pi += bij * vj;
            }
        }
        let kappa: Complex64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let kappa = kappa.re;
        let w: Vec<Complex64> = p[..m]
            .iter()
            .zip(&v)
            .map(|(pi, vi)| pi - vi * kappa)
            .collect();
        for jj in 0..m {
            let (vj, wj) = (v[jj].conj() * 2.0, w[jj].conj() * 2.0);
            let start = at(off, off + jj);
            let col = &mut a[start..start + m];
            for ii in 0..m {
                col[ii] -= v[ii] * wj + w[ii] * vj;
            }
        }
        a[at(k + 1, k)] = alpha;
        a[at(k, k + 1)] = alpha.conj();
        for i in (k + 2)..n {
            a[at(i, k)] = ZERO;
            a[at(k, i)] = ZERO;
        }
        sub[k] = alpha;
        reflectors.push(Some(v));
    }
    for (i, d) in diag.iter_mut().enumerate() {
        *d = a[at(i, i)].re;
    }

    // phase rescaling to a real tridiagonal matrix
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    let mut e = vec![0.0; n];
    for k in 0..n - 1 {
        let r = sub[k].norm();
        e[k] = r;
        phases[k + 1] = if r == 0.0 { phases[k] } else { phases[k] * sub[k] / r };
    }

    let mut vecs = if want_vectors {
        // Q = H_0 H_1 ⋯ H_{n-2}, then V = Q·diag(phases)
        let mut q = CMatrix::identity(n, n);
        for (k, refl) in reflectors.iter().enumerate().rev() {
            if let Some(v) = refl {
                let off = k + 1;
                for j in 0..n {
                    let s: Complex64 = (0..v.len()).map(|i| v[i].conj() * q[(off + i, j)]).sum();
                    if s != ZERO {
                        for i in 0..v.len() {
                            q[(off + i, j)] -= v[i] * s * 2.0;
                        }
                    }
                }
            }
        }
        for (j, ph) in phases.iter().enumerate() {
            let mut col = q.column_mut(j);
            col *= *ph;
        }
        Some(q)
    } else {
        None
    };

    tridiagonal_ql(&mut diag, &mut e, vecs.as_mut())?;

    if let Some(v) = vecs.as_mut() {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
        let sorted = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
        *v = sorted;
        let vals = order.iter().map(|&i| diag[i]).collect();
        return Ok((vals, vecs));
    }
    diag.sort_by(f64::total_cmp);
    Ok((diag, None))
}

/// Implicit QL on a real symmetric tridiagonal matrix (`e[i]` couples `i`
/// and `i + 1`). Rotations are applied to the columns of `vectors` if given.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut vectors: Option<&mut CMatrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(LabError::NoConvergence {
                    index: l,
                    sweeps: MAX_SWEEPS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0_f64, 1.0_f64, 0.0_f64);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(v) = vectors.as_deref_mut() {
                    for k in 0..v.nrows() {
                        let f = v[(k, i + 1)];
                        v[(k, i + 1)] = v[(k, i)] * s + f * c;
                        v[(k, i)] = v[(k, i)] * c - f * s;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn nearest_distance(sorted: &[f64], x: f64) -> f64 {
    let idx = sorted.partition_point(|&v| v < x);
    let mut best = f64::INFINITY;
    if idx < sorted.len() {
        best = best.min((sorted[idx] - x).abs());
    }
    if idx > 0 {
        best = best.min((sorted[idx - 1] - x).abs());
    }
    best
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>, window: Option<f64>, provenance: impl Into<String>) -> Self {
        values.sort_by(f64::total_cmp);
        Spectrum {
            values,
            window,
            provenance: provenance.into(),
        }
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn with_window(mut self, window: Option<f64>) -> Self {
        self.window = window;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Eigenvalues outside the reliable window.
    pub fn flagged(&self) -> Vec<usize> {
        match self.window {
            None => Vec::new(),
            Some(r) => (0..self.values.len())
                .filter(|&i| self.values[i].abs() > r)
                .collect(),
        }
    }

    /// Smallest `|λ|`.
    pub fn min_abs(&self) -> Option<f64> {
        self.values.iter().map(|v| v.abs()).min_by(f64::total_cmp)
    }

    /// Restriction to `[-r, r]`.
    pub fn window(&self, r: f64) -> Result<Spectrum> {
        if !(r > 0.0) {
            return Err(LabError::InvalidArgument(format!("window radius {r} must be positive")));
        }
        Ok(Spectrum {
            values: self.values.iter().copied().filter(|v| v.abs() <= r).collect(),
            window: Some(self.window.map_or(r, |w| w.min(r))),
            provenance: self.provenance.clone(),
        })
    }

    /// Distinct values with multiplicities, merging values closer than `tol`.
    pub fn distinct(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &v in &self.values {
            match out.last_mut() {
                Some((first, count)) if (v - *first).abs() <= tol => *count += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }

    /// The `m` eigenvalues nearest zero, ascending. Values whose moduli agree
    /// to 1e-9 (relative) are treated as tied and taken negative-first, so
    /// symmetric clusters are cut identically in nearby spectra.
    pub fn nearest_zero(&self, m: usize) -> Result<Vec<f64>> {
        if self.values.len() < m {
            return Err(LabError::InsufficientEigenvalues {
                needed: m,
                available: self.values.len(),
            });
        }
        let mut by_abs = self.values.clone();
        by_abs.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        let mut ordered: Vec<f64> = Vec::with_capacity(by_abs.len());
        let mut start = 0;
        while start < by_abs.len() {
            let base = by_abs[start].abs();
            let tol = 1e-9 * base.max(1.0);
            let mut end = start + 1;
            while end < by_abs.len() && by_abs[end].abs() - base <= tol {
                end += 1;
            }
            let mut group = by_abs[start..end].to_vec();
            group.sort_by(f64::total_cmp);
            ordered.extend(group);
            start = end;
        }
        let mut chosen = ordered[..m].to_vec();
        chosen.sort_by(f64::total_cmp);
        Ok(chosen)
    }
}

/// Symmetric Hausdorff distance of the two spectra restricted to `[-r, r]`
/// (multiplicities ignored).
pub fn hausdorff_distance(s1: &Spectrum, s2: &Spectrum, r: f64) -> Result<f64> {
    let a = s1.window(r)?;
    let b = s2.window(r)?;
    if a.is_empty() || b.is_empty() {
        return Err(LabError::EmptyWindow(r));
    }
    let one_sided = |x: &[f64], y: &[f64]| {
        x.iter()
            .map(|&v| nearest_distance(y, v))
            .fold(0.0_f64, f64::max)
    };
    Ok(one_sided(&a.values, &b.values).max(one_sided(&b.values, &a.values)))
}

/// Largest pairwise gap between the `m` eigenvalues nearest zero of each
/// spectrum, paired in sorted order.
pub fn matched_distance(s1: &Spectrum, s2: &Spectrum, m: usize) -> Result<f64> {
    let a = s1.nearest_zero(m)?;
    let b = s2.nearest_zero(m)?;
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0_f64, f64::max))
}

/// Largest distance from an eigenvalue of `from` (within `[-r, r]`) to the
/// full spectrum `to`.
pub fn one_sided_distance(from: &Spectrum, to: &Spectrum, r: f64) -> Result<f64> {
    let a = from.window(r)?;
    if a.is_empty() || to.is_empty() {
        return Err(LabError::EmptyWindow(r));
    }
    Ok(a.values
        .iter()
        .map(|&v| nearest_distance(&to.values, v))
        .fold(0.0_f64, f64::max))
}
