use std::collections::BTreeMap;

use collapse_lab::bounds::{audit, BoundsReport};
use collapse_lab::eigensolve::{matched_distance, Spectrum};
use collapse_lab::fourier::ModeIndex;
use collapse_lab::models::{BundleModel, ModelKind, Warping};
use collapse_lab::operators::{
    add_potential, form_mode_operator, form_prediction, limit_operator, mode_operator, FormLevel, ModeOperator,
};
use collapse_lab::potentials::restrict_v0;
use collapse_lab::validation::run_suite;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{model_id, ExperimentConfig, Sweep, SweepPoint};
use crate::error::CliError;
use crate::output::{num, Table, Writer};

/// Eigenvalues compared between an operator and its limit.
const MATCHED: usize = 20;

/// Quantities that get a log-log slope against the sweep parameter.
const FITTED: &[&str] = &["min_abs", "rel_discrepancy", "lambda1_sq_minus_1"];

pub struct Context {
    pub config: ExperimentConfig,
    pub hash: String,
    pub writer: Writer,
}

impl Context {
    fn comments(&self, command: &str) -> Result<Vec<String>, CliError> {
        Ok(vec![
            format!("collapse-lab {command}"),
            format!("config_hash {}", self.hash),
            format!("model {}", model_id(&self.config.base_model()?)),
            format!("seed {}", self.config.seed),
        ])
    }
}

/// `D_k(ε)` with the invariant part of the potential, or the form operator.
fn operator(ctx: &Context, model: &BundleModel, k: ModeIndex, cutoff: usize) -> Result<ModeOperator, CliError> {
    if model.kind() == ModelKind::FormTorus {
        return Ok(form_mode_operator(model, FormLevel::Epsilon(model.epsilon()), cutoff)?);
    }
    let op = mode_operator(model, k, cutoff)?;
    match ctx.config.potential_for(model)? {
        Some(z) => Ok(add_potential(&op, &z.mode_block(model, cutoff)?)?),
        None => Ok(op),
    }
}

fn limit(ctx: &Context, model: &BundleModel, cutoff: usize) -> Result<ModeOperator, CliError> {
    if model.kind() == ModelKind::FormTorus {
        return Ok(form_mode_operator(model, FormLevel::Limit, cutoff)?);
    }
    let z = ctx
        .config
        .potential_for(model)?
        .map(|z| restrict_v0(&z, model, cutoff))
        .transpose()?;
    Ok(limit_operator(model, z.as_ref(), cutoff)?)
}

fn tasks(ctx: &Context) -> Result<Vec<(SweepPoint, usize, ModeIndex)>, CliError> {
    let mut out = Vec::new();
    for p in ctx.config.points()? {
        for &cutoff in &ctx.config.cutoffs {
            for k in ctx.config.modes_for(&p.model)? {
                out.push((p.clone(), cutoff, k));
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct SpectrumRecord {
    model_id: String,
    k: ModeIndex,
    cutoff: usize,
    window: f64,
    outside_window: usize,
    provenance: String,
    eigenvalues: Vec<f64>,
}

pub fn spectrum(ctx: &Context) -> Result<(), CliError> {
    let records: Vec<SpectrumRecord> = tasks(ctx)?
        .par_iter()
        .map(|(p, cutoff, k)| {
            let op = operator(ctx, &p.model, *k, *cutoff)?;
            let s = op.spectrum()?;
            log::debug!("{} k = {k} cutoff {cutoff}: {} eigenvalues", p.id, s.len());
            Ok(SpectrumRecord {
                model_id: p.id.clone(),
                k: *k,
                cutoff: *cutoff,
                window: op.reliable_window,
                outside_window: s.flagged().len(),
                provenance: s.provenance.clone(),
                eigenvalues: s.values,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(
        "spectrum",
        ctx.comments("spectrum")?,
        &["config_hash", "model_id", "k", "j", "eigenvalue", "cutoff", "window"],
    );
    for r in &records {
        for (j, v) in r.eigenvalues.iter().enumerate() {
            table.push(vec![
                ctx.hash.clone(),
                r.model_id.clone(),
                r.k.to_string(),
                j.to_string(),
                num(*v),
                r.cutoff.to_string(),
                num(r.window),
            ]);
        }
    }
    ctx.writer.table(&table)?;
    ctx.writer.json("spectrum", &records)?;
    log::info!("{} spectra, {} eigenvalues", records.len(), table.rows.len());
    Ok(())
}

/// Least-squares slope of `log y` against `log x`; `None` unless every value is positive.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if den == 0.0 {
        return None;
    }
    Some(lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / den)
}

struct SweepRow {
    point: usize,
    cutoff: usize,
    k: ModeIndex,
    quantity: &'static str,
    value: f64,
}

struct LimitRow {
    point: usize,
    cutoff: usize,
    pairs: Vec<(f64, f64)>,
}

fn positive_smallest(s: &Spectrum) -> f64 {
    s.values.iter().copied().filter(|&v| v > 1e-9).fold(f64::INFINITY, f64::min)
}

fn sweep_task(
    ctx: &Context,
    index: usize,
    p: &SweepPoint,
    cutoff: usize,
    k: ModeIndex,
    first: Option<&Spectrum>,
) -> Result<(Vec<SweepRow>, Option<LimitRow>), CliError> {
    let row = |quantity, value| SweepRow {
        point: index,
        cutoff,
        k,
        quantity,
        value,
    };
    let s = operator(ctx, &p.model, k, cutoff)?.spectrum()?;
    let mut rows = Vec::new();
    if !k.is_zero() {
        rows.push(row("min_abs", s.min_abs().unwrap_or(f64::NAN)));
        return Ok((rows, None));
    }
    let lim = limit(ctx, &p.model, cutoff)?.spectrum()?;
    let m = MATCHED.min(s.len()).min(lim.len());
    rows.push(row("matched_distance", matched_distance(&s, &lim, m)?));
    if let Some(f) = first {
        rows.push(row("distance_to_first", matched_distance(&s, f, m.min(f.len()))?));
    }
    if p.model.kind() == ModelKind::FormTorus {
        let l1 = positive_smallest(&lim);
        rows.push(row("lambda1", l1));
        if let Warping::Exponent(g) = p.model.warping() {
            let predicted = form_prediction(g, 1)[1];
            rows.push(row("predicted", predicted));
            rows.push(row("rel_discrepancy", (l1 - predicted).abs() / predicted));
            rows.push(row("lambda1_sq_minus_1", l1 * l1 - 1.0));
        }
    }
    let a = s.nearest_zero(m)?;
    let b = lim.nearest_zero(m)?;
    let limit_row = LimitRow {
        point: index,
        cutoff,
        pairs: a.into_iter().zip(b).collect(),
    };
    Ok((rows, Some(limit_row)))
}

#[derive(Serialize)]
struct SweepSummary {
    sweep: &'static str,
    values: Vec<f64>,
    slopes: BTreeMap<String, f64>,
}

pub fn collapse_sweep(ctx: &Context, with_limit: bool) -> Result<(), CliError> {
    let sweep = ctx
        .config
        .sweep()?
        .ok_or_else(|| CliError::Config("collapse-sweep needs epsilons, quotient_orders or amplitudes".into()))?;
    if sweep.len() < 3 {
        return Err(CliError::Config(format!("{} sweep needs at least 3 points, got {}", sweep.name(), sweep.len())));
    }
    let points = ctx.config.points()?;
    let quotient = matches!(sweep, Sweep::Quotient(_));
    let mut jobs = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for &cutoff in &ctx.config.cutoffs {
            for k in ctx.config.modes_for(&p.model)? {
                jobs.push((i, cutoff, k));
            }
        }
    }
    // quotient sweeps also compare each V0 spectrum with the first one
    let firsts: BTreeMap<usize, Spectrum> = if quotient {
        ctx.config
            .cutoffs
            .par_iter()
            .map(|&c| Ok((c, operator(ctx, &points[0].model, ModeIndex::integer(0), c)?.spectrum()?)))
            .collect::<Result<_, CliError>>()?
    } else {
        BTreeMap::new()
    };
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(i, cutoff, k)| sweep_task(ctx, i, &points[i], cutoff, k, firsts.get(&cutoff)))
        .collect::<Result<_, CliError>>()?;

    let columns = ["config_hash", "model_id", "sweep", "sweep_value", "cutoff", "k", "quantity", "value"];
    let mut table = Table::new("sweep", ctx.comments("collapse-sweep")?, &columns);
    let mut series: BTreeMap<(usize, String, &'static str), Vec<(f64, f64)>> = BTreeMap::new();
    for (rows, _) in &results {
        for r in rows {
            let p = &points[r.point];
            table.push(vec![
                ctx.hash.clone(),
                p.id.clone(),
                sweep.name().into(),
                p.value.to_string(),
                r.cutoff.to_string(),
                r.k.to_string(),
                r.quantity.into(),
                num(r.value),
            ]);
            series
                .entry((r.cutoff, r.k.to_string(), r.quantity))
                .or_default()
                .push((p.value, r.value));
        }
    }
    let base_id = model_id(&ctx.config.base_model()?);
    let mut slopes = BTreeMap::new();
    for ((cutoff, k, quantity), pts) in series.iter().filter(|(key, _)| FITTED.contains(&key.2)) {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
        if let Some(slope) = loglog_slope(&xs, &ys) {
            table.push(vec![
                ctx.hash.clone(),
                base_id.clone(),
                sweep.name().into(),
                "fit".into(),
                cutoff.to_string(),
                k.clone(),
                format!("{quantity}_loglog_slope"),
                num(slope),
            ]);
            slopes.insert(format!("cutoff={cutoff}:k={k}:{quantity}"), slope);
        }
    }
    ctx.writer.table(&table)?;
    ctx.writer.json(
        "sweep",
        &SweepSummary {
            sweep: sweep.name(),
            values: sweep.values(),
            slopes: slopes.clone(),
        },
    )?;
    for (name, s) in &slopes {
        log::info!("log-log slope {name}: {s:.4}");
    }

    if with_limit {
        let mut lt = Table::new(
            "limit",
            ctx.comments("limit-compare")?,
            &["config_hash", "model_id", "sweep_value", "cutoff", "j", "eigenvalue", "limit_eigenvalue", "difference"],
        );
        for lr in results.iter().filter_map(|r| r.1.as_ref()) {
            let p = &points[lr.point];
            for (j, (a, b)) in lr.pairs.iter().enumerate() {
                lt.push(vec![
                    ctx.hash.clone(),
                    p.id.clone(),
                    p.value.to_string(),
                    lr.cutoff.to_string(),
                    j.to_string(),
                    num(*a),
                    num(*b),
                    num(a - b),
                ]);
            }
        }
        ctx.writer.table(&lt)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct AuditRecord {
    model_id: String,
    cutoff: usize,
    report: BoundsReport,
}

pub fn bounds_audit(ctx: &Context) -> Result<(), CliError> {
    let mut jobs = Vec::new();
    for p in ctx.config.points()? {
        if p.model.kind() != ModelKind::WarpedTorus {
            return Err(CliError::Config(format!(
                "bounds-audit needs a warped_torus model, got {}",
                p.model.kind().name()
            )));
        }
        let ks: Vec<ModeIndex> = ctx.config.modes_for(&p.model)?.into_iter().filter(|k| !k.is_zero()).collect();
        if ks.is_empty() {
            return Err(CliError::Config("bounds-audit needs at least one mode k != 0".into()));
        }
        for &cutoff in &ctx.config.cutoffs {
            jobs.push((p.clone(), cutoff, ks.clone()));
        }
    }
    let records: Vec<AuditRecord> = jobs
        .par_iter()
        .map(|(p, cutoff, ks)| {
            let z = ctx.config.potential_for(&p.model)?;
            let report = audit(&p.model, ks, *cutoff, z.as_ref(), ctx.config.lambda)?;
            Ok(AuditRecord {
                model_id: p.id.clone(),
                cutoff: *cutoff,
                report,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(
        "bounds",
        ctx.comments("bounds-audit")?,
        &["config_hash", "model_id", "cutoff", "k", "bound", "observed", "pass"],
    );
    let mut failures = Vec::new();
    for r in &records {
        for (m, cells) in r.report.per_mode.iter().zip(r.report.to_csv_rows()) {
            let mut row = vec![ctx.hash.clone(), r.model_id.clone(), r.cutoff.to_string()];
            row.extend(cells);
            table.push(row);
            if !m.pass {
                failures.push(format!(
                    "{} cutoff {} k = {}: min|λ| = {:.6} < bound {:.6}",
                    r.model_id, r.cutoff, m.k, m.observed_min_abs, m.lower_bound
                ));
            }
        }
    }
    ctx.writer.table(&table)?;
    ctx.writer.json("bounds", &records)?;
    if failures.is_empty() {
        log::info!("{} rows, all bounds hold", table.rows.len());
        Ok(())
    } else {
        Err(CliError::Bound(failures.join("; ")))
    }
}

/// Runs the oracle suite, printing one line per check and counts per module.
pub fn validate(writer: Option<&Writer>) -> Result<(), CliError> {
    let report = run_suite();
    for c in &report.checks {
        println!("[{}] {}: {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.module, c.name, c.detail);
    }
    for (module, (passed, total)) in report.counts() {
        println!("{module}: {passed}/{total} passed");
    }
    if let Some(w) = writer {
        w.json("validation", &report)?;
    }
    if report.all_pass() {
        Ok(())
    } else {
        let names: Vec<String> = report.failures().map(|c| format!("{}: {}", c.module, c.name)).collect();
        Err(CliError::Validation(names.join("; ")))
    }
}
