use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{Expectation, ExperimentConfig, ExperimentKind, Sampling, SeedSpec};
use super::report::{Check, Comparison, DiagnosticsReport, FitSummary, Row, Summary};
use crate::error::{Error, Result};
use crate::fd::{fd_j_operator, fd_metric, FdConfig};
use crate::fefferman::{
    bergman_defining_field, fit_order, DefiningField, FeffermanChain, OrderSample, OrderStatus,
};
use crate::geometry::{
    asymptotic_fit, einstein_constant, kernel_ma_identity, metric, monge_ampere, EinsteinDiagnostics,
};
use crate::kernels::{Domain, Field, FnField, KernelSpec, ScalarField};

/// Relative agreement required between jet and finite-difference columns.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

/// Slack allowed when comparing fitted orders of consecutive Fefferman steps.
pub const MONOTONE_SLACK: f64 = 0.1;

/// Absolute slack on the fitted blow-up exponent of `det g`.
pub const EXPONENT_TOL: f64 = 0.1;

/// Worker pool honouring `BERGMAN_THREADS` (unset or 0: one per core).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var("BERGMAN_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::config("BERGMAN_THREADS", format!("not a thread count: `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("BERGMAN_THREADS", e.to_string()))
}

pub fn run(config: &ExperimentConfig) -> Result<DiagnosticsReport> {
    config.validate()?;
    let start = Instant::now();
    let pool = thread_pool()?;
    let (rows, summary) = pool.install(|| match config.experiment {
        ExperimentKind::EinsteinCheck => einstein_check(config),
        ExperimentKind::MaCheck => ma_check(config),
        ExperimentKind::BLimit => b_limit(config),
        ExperimentKind::Fefferman => fefferman(config),
        ExperimentKind::KernelIdentity => kernel_identity(config),
        ExperimentKind::GroupValidate => group_validate(config),
    })?;
    Ok(DiagnosticsReport {
        config: config.clone(),
        rows,
        summary,
        wall_time: start.elapsed(),
    })
}

type Columns = Vec<(&'static str, f64)>;

/// Evaluates every sample point concurrently; rows come back in sample
/// order. Failures are recorded on the row.
fn evaluate<F>(points: &[Vec<Complex64>], f: F) -> Vec<Row>
where
    F: Fn(&[Complex64]) -> Result<(Columns, Columns)> + Sync,
{
    points
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let mut row = Row::new(i, z);
            match f(z) {
                Ok((quantities, residuals)) => {
                    for (k, v) in quantities {
                        row.quantity(k, v);
                    }
                    for (k, v) in residuals {
                        row.residual(k, v);
                    }
                }
                Err(e) => {
                    row.numeric_error = e.is_numeric();
                    row.error = Some(e.to_string());
                }
            }
            row
        })
        .collect()
}

fn kernel_spec(config: &ExperimentConfig) -> Result<KernelSpec> {
    KernelSpec::from_group_spec(config.dimension, &config.group, config.kernel)
        .map_err(|e| Error::config("kernel", e.to_string()))
}

fn column_max(rows: &[Row], name: &str) -> Option<f64> {
    let vals: Vec<f64> = rows.iter().filter_map(|r| r.residuals.get(name).copied()).collect();
    if vals.is_empty() {
        return None;
    }
    Some(vals.into_iter().fold(f64::NEG_INFINITY, |a, b| if b.is_nan() { b } else { a.max(b) }))
}

fn column_min(rows: &[Row], name: &str) -> Option<f64> {
    let vals: Vec<f64> = rows.iter().filter_map(|r| r.residuals.get(name).copied()).collect();
    if vals.is_empty() {
        return None;
    }
    Some(vals.into_iter().fold(f64::INFINITY, |a, b| if b.is_nan() { b } else { a.min(b) }))
}

/// Identity: every residual at most `tol`. Violation: every residual at
/// least `tol`.
fn residual_check(rows: &[Row], name: &str, expect: Expectation, tol: f64) -> Check {
    match expect {
        Expectation::Identity => Check::new(format!("max_{name}"), column_max(rows, name), Comparison::AtMost, tol),
        Expectation::Violation => Check::new(format!("min_{name}"), column_min(rows, name), Comparison::AtLeast, tol),
    }
}

fn row_error_check(rows: &[Row]) -> Check {
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    Check::new("failed_rows", Some(failed as f64), Comparison::AtMost, 0.0)
}

/// Extra consistency column when the configured jet order exceeds the
/// experiment's minimum: evaluate high, truncate, compare with a direct
/// low-order evaluation.
fn truncation_defect(field: &dyn ScalarField, z: &[Complex64], high: usize, low: usize) -> Result<Option<f64>> {
    if high <= low {
        return Ok(None);
    }
    let a = field.jet(z, high)?.truncate(low)?;
    let b = field.jet(z, low)?;
    Ok(Some(a.max_abs_diff(&b) / b.max_abs().max(f64::MIN_POSITIVE)))
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn einstein_check(config: &ExperimentConfig) -> Result<(Vec<Row>, Summary)> {
    let n = config.dimension;
    let spec = kernel_spec(config)?;
    let u = spec.potential();
    let order = spec.group().order() as f64;
    let tol = config.tolerance();
    let fd = FdConfig::default();
    let points = config.sampling.points(n);
    let rows = evaluate(&points, |z| {
        let d = EinsteinDiagnostics::evaluate(u.as_ref(), z)?;
        let b = d.b_invariant / order;
        let mut q = vec![
            ("metric_det", d.metric_det),
            ("b_invariant", b),
            ("b_normalized", b / einstein_constant(n)),
        ];
        let mut r = vec![("einstein", d.residual_norm)];
        if let Some(t) = truncation_defect(u.as_ref(), z, config.jet_order(), 4)? {
            r.push(("truncation", t));
        }
        if config.cross_check {
            let oracle = fd_metric(u.as_ref(), z, &fd)?;
            let diff = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| (oracle[i][j] - d.g.get(i, j)).norm())
                .fold(0.0, f64::max);
            q.push(("fd_metric_det_rel", relative(fd_det(&oracle)?, d.metric_det)));
            r.push(("fd_metric", diff / d.g.max_abs()));
        }
        Ok((q, r))
    });
    let mut checks = vec![row_error_check(&rows), residual_check(&rows, "einstein", config.expect, tol)];
    push_common_checks(&rows, config, &mut checks);
    let summary = Summary::assemble(&rows, tol, config.expect, BTreeMap::new(), checks);
    Ok((rows, summary))
}

fn fd_det(m: &[Vec<Complex64>]) -> Result<f64> {
    let n = m.len();
    let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
    Ok(mat.determinant().re)
}

fn push_common_checks(rows: &[Row], config: &ExperimentConfig, checks: &mut Vec<Check>) {
    if config.jet_order() > config.experiment.min_jet_order() {
        checks.push(Check::new(
            "max_truncation",
            column_max(rows, "truncation"),
            Comparison::AtMost,
            1e-12,
        ));
    }
    if config.cross_check {
        for name in ["fd_metric", "fd_j"] {
            if rows.iter().any(|r| r.residuals.contains_key(name)) {
                checks.push(Check::new(
                    format!("max_{name}"),
                    column_max(rows, name),
                    Comparison::AtMost,
                    CROSS_CHECK_TOL,
                ));
            }
        }
    }
}

fn ma_check(config: &ExperimentConfig) -> Result<(Vec<Row>, Summary)> {
    let n = config.dimension;
    let spec = kernel_spec(config)?;
    let u = spec.potential();
    let c = config
        .ma_constant
        .unwrap_or_else(|| einstein_constant(n) * spec.group().order() as f64);
    let tol = config.tolerance();
    let fd = FdConfig::default();
    let points = config.sampling.points(n);
    let rows = evaluate(&points, |z| {
        let ma = monge_ampere(u.as_ref(), z, c)?;
        let mut q = vec![("det", ma.det), ("rhs", ma.rhs), ("ma_absolute", ma.residual)];
        let mut r = vec![("ma", ma.relative())];
        if let Some(t) = truncation_defect(u.as_ref(), z, config.jet_order(), 2)? {
            r.push(("truncation", t));
        }
        if config.cross_check {
            let oracle = fd_det(&fd_metric(u.as_ref(), z, &fd)?)?;
            q.push(("fd_det", oracle));
            r.push(("fd_metric", relative(oracle, ma.det)));
        }
        Ok((q, r))
    });
    let mut checks = vec![row_error_check(&rows), residual_check(&rows, "ma", config.expect, tol)];
    push_common_checks(&rows, config, &mut checks);
    let summary = Summary::assemble(&rows, tol, config.expect, BTreeMap::new(), checks);
    Ok((rows, summary))
}

fn require_ray(config: &ExperimentConfig) -> Result<()> {
    match config.sampling {
        Sampling::Ray { .. } => Ok(()),
        _ => Err(Error::config(
            "sampling",
            format!("{} needs ray sampling", config.experiment),
        )),
    }
}

fn ray_parameter(z: &[Complex64]) -> f64 {
    z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt()
}

fn b_limit(config: &ExperimentConfig) -> Result<(Vec<Row>, Summary)> {
    require_ray(config)?;
    let n = config.dimension;
    let spec = kernel_spec(config)?;
    let u = spec.potential();
    let density = spec.bergman_density();
    let tol = config.tolerance();
    let cn = einstein_constant(n);
    let points = config.sampling.points(n);
    let rows = evaluate(&points, |z| {
        let b = crate::geometry::b_invariant(density.as_ref(), z)?;
        let g = metric(u.as_ref(), z)?;
        let det = crate::geometry::real_part(g.determinant(), "metric determinant")?;
        let mut r = vec![("b_deviation", (b / cn - 1.0).abs())];
        if let Some(t) = truncation_defect(u.as_ref(), z, config.jet_order(), 2)? {
            r.push(("truncation", t));
        }
        Ok((
            vec![
                ("t", ray_parameter(z)),
                ("b_invariant", b),
                ("b_normalized", b / cn),
                ("metric_det", det),
            ],
            r,
        ))
    });

    let mut checks = vec![row_error_check(&rows)];
    let outer = rows.last().and_then(|r| r.residuals.get("b_deviation").copied());
    checks.push(match config.expect {
        Expectation::Identity => Check::new("outermost_b_deviation", outer, Comparison::AtMost, tol),
        Expectation::Violation => Check::new("outermost_b_deviation", outer, Comparison::AtLeast, tol),
    });

    let mut fits = BTreeMap::new();
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| Some((*r.quantities.get("t")?, *r.quantities.get("metric_det")?)))
        .collect();
    let target = (n + 1) as f64;
    match asymptotic_fit(&samples) {
        Ok(fit) => {
            checks.push(Check::new(
                "metric_det_exponent_error",
                Some((fit.exponent - target).abs()),
                Comparison::AtMost,
                EXPONENT_TOL,
            ));
            fits.insert(
                "metric_det".to_string(),
                FitSummary {
                    status: "fitted".into(),
                    exponent: Some(fit.exponent),
                    exponent_stderr: Some(fit.exponent_stderr),
                    amplitude: Some(fit.amplitude),
                    amplitude_stderr: Some(fit.amplitude_stderr),
                    correction_order: fit.correction_order,
                    correction_order_stderr: fit.correction_order_stderr,
                },
            );
        }
        Err(e) => {
            fits.insert(
                "metric_det".to_string(),
                FitSummary {
                    status: format!("unavailable: {e}"),
                    ..FitSummary::default()
                },
            );
        }
    }
    push_common_checks(&rows, config, &mut checks);
    let summary = Summary::assemble(&rows, tol, config.expect, fits, checks);
    Ok((rows, summary))
}

fn seed_field(config: &ExperimentConfig) -> Result<Field> {
    let n = config.dimension;
    let a = config.fefferman.amplitude;
    Ok(match config.fefferman.seed {
        SeedSpec::Ball => FnField::new(n, Domain::Ball, "1 − |z|²", |p| {
            Ok((-&p.norm_sqr()).add_constant(1.0.into()))
        }),
        SeedSpec::ExpRe { amplitude } => FnField::new(n, Domain::Ball, "(1 − |z|²)·exp(a Re z₁)", move |p| {
            let base = (-&p.norm_sqr()).add_constant(1.0.into());
            let e = (&p.z[0] + &p.zbar[0]).scale_real(0.5 * amplitude).exp();
            Ok(&base * &e)
        }),
        SeedSpec::Radial => FnField::new(n, Domain::Ball, "(1 − |z|²)(1 + a|z₁|²)", move |p| {
            let base = (-&p.norm_sqr()).add_constant(1.0.into());
            let bump = (&p.z[0] * &p.zbar[0]).scale_real(a).add_constant(1.0.into());
            Ok(&base * &bump)
        }),
        SeedSpec::Bergman => bergman_defining_field(kernel_spec(config)?.bergman_density()),
    })
}

// The jet order cap leaves room for at most five steps.
const J_COLUMNS: [&str; 5] = ["j_u1", "j_u2", "j_u3", "j_u4", "j_u5"];
const DEFECT_COLUMNS: [&str; 5] = ["defect_u1", "defect_u2", "defect_u3", "defect_u4", "defect_u5"];

fn fefferman(config: &ExperimentConfig) -> Result<(Vec<Row>, Summary)> {
    require_ray(config)?;
    let n = config.dimension;
    let steps = config.fefferman.steps.unwrap_or(n + 1);
    let seed = seed_field(config)?;
    let reference = seed.clone();
    let defining = DefiningField::new(seed, vec![Complex64::new(0.0, 0.0); n])
        .map_err(|e| Error::config("fefferman.seed", e.to_string()))?;
    let chain = FeffermanChain::new(defining)?;
    let d = config.jet_order();
    chain
        .check_budget(steps, d)
        .map_err(|e| Error::config("fefferman.steps", e.to_string()))?;
    if steps > J_COLUMNS.len() {
        return Err(Error::config("fefferman.steps", format!("at most {}", J_COLUMNS.len())));
    }
    let names: Vec<(&'static str, &'static str)> = (0..steps).map(|s| (J_COLUMNS[s], DEFECT_COLUMNS[s])).collect();
    let tol = config.tolerance();
    let points = config.sampling.points(n);
    let rows = evaluate(&points, |z| {
        let r = crate::geometry::real_part(reference.value(z)?, "seed")?;
        let mut q = vec![("t", ray_parameter(z)), ("r", r)];
        let mut res = Vec::new();
        for s in 1..=steps {
            let j = if d == 0 {
                chain.j(s, z)?
            } else {
                let jet = crate::geometry::j_operator_jet(chain.u(s)?.as_ref(), z, d)?;
                crate::geometry::real_part(jet.constant_term(), "J")?
            };
            q.push((names[s - 1].0, j));
            res.push((names[s - 1].1, (j - 1.0).abs()));
        }
        Ok((q, res))
    });

    let mut checks = vec![row_error_check(&rows)];
    let mut fits = BTreeMap::new();
    let mut previous: Option<f64> = None;
    for s in 1..=steps {
        let samples: Vec<OrderSample> = rows
            .iter()
            .filter_map(|row| {
                Some(OrderSample::new(
                    *row.quantities.get("t")?,
                    *row.quantities.get("r")?,
                    *row.residuals.get(names[s - 1].1)?,
                ))
            })
            .collect();
        let name = format!("order_u{s}");
        let threshold = s as f64 - tol;
        let (summary, order) = match fit_order(samples) {
            Ok(fit) => match fit.status {
                OrderStatus::Fitted => {
                    checks.push(Check::new(name.clone(), fit.order, Comparison::AtLeast, threshold));
                    (
                        FitSummary {
                            status: "fitted".into(),
                            exponent: fit.order,
                            exponent_stderr: fit.stderr,
                            ..FitSummary::default()
                        },
                        fit.order,
                    )
                }
                OrderStatus::Exact => {
                    checks.push(Check::satisfied(name.clone(), Comparison::AtLeast, threshold));
                    (
                        FitSummary {
                            status: "exact".into(),
                            ..FitSummary::default()
                        },
                        Some(f64::INFINITY),
                    )
                }
                OrderStatus::Indeterminate => {
                    checks.push(Check::new(name.clone(), None, Comparison::AtLeast, threshold));
                    (
                        FitSummary {
                            status: "indeterminate".into(),
                            ..FitSummary::default()
                        },
                        None,
                    )
                }
            },
            Err(e) => {
                checks.push(Check::new(name.clone(), None, Comparison::AtLeast, threshold));
                (
                    FitSummary {
                        status: format!("unavailable: {e}"),
                        ..FitSummary::default()
                    },
                    None,
                )
            }
        };
        if let (Some(prev), Some(cur)) = (previous, order) {
            if prev.is_finite() {
                let gain = if cur.is_finite() { cur - prev } else { f64::INFINITY };
                checks.push(Check::new(
                    format!("order_gain_u{s}"),
                    Some(gain),
                    Comparison::AtLeast,
                    -MONOTONE_SLACK,
                ));
            }
        }
        previous = order;
        fits.insert(name, summary);
    }
    let summary = Summary::assemble(&rows, tol, config.expect, fits, checks);
    Ok((rows, summary))
}

fn kernel_identity(config: &ExperimentConfig) -> Result<(Vec<Row>, Summary)> {
    let n = config.dimension;
    let spec = kernel_spec(config)?;
    let k = spec.bergman_density();
    let tol = config.tolerance();
    let fd = FdConfig::default();
    let points = config.sampling.points(n);
    let rows = evaluate(&points, |z| {
        let id = kernel_ma_identity(k.as_ref(), z)?;
        let mut q = vec![("j", id.j), ("rhs", id.rhs)];
        let mut r = vec![("kernel_ma", id.relative)];
        if let Some(t) = truncation_defect(k.as_ref(), z, config.jet_order(), 2)? {
            r.push(("truncation", t));
        }
        if config.cross_check {
            let oracle = fd_j_operator(k.as_ref(), z, &fd)?;
            q.push(("fd_j_value", oracle));
            r.push(("fd_j", relative(oracle, id.j)));
        }
        Ok((q, r))
    });
    let mut checks = vec![row_error_check(&rows), residual_check(&rows, "kernel_ma", config.expect, tol)];
    push_common_checks(&rows, config, &mut checks);
    let summary = Summary::assemble(&rows, tol, config.expect, BTreeMap::new(), checks);
    Ok((rows, summary))
}

fn group_validate(config: &ExperimentConfig) -> Result<(Vec<Row>, Summary)> {
    if config.expect == Expectation::Violation {
        return Err(Error::config(
            "expect",
            "group-validate reports failed group axioms directly; use the default expectation",
        ));
    }
    let group = Arc::new(
        config
            .group
            .build(config.dimension)
            .map_err(|e| Error::config("group", e.to_string()))?,
    );
    let report = group.validate();
    let tol = config.tolerance();
    let rows: Vec<Row> = report
        .elements
        .iter()
        .map(|e| {
            let mut row = Row {
                index: e.index,
                ..Row::default()
            };
            row.quantity("det_re", e.det.re)
                .quantity("det_im", e.det.im)
                .quantity("inverse_present", if e.inverse_present { 1.0 } else { 0.0 })
                .residual("unitarity", e.unitarity_defect);
            if let Some(m) = e.fixed_point_margin {
                row.quantity("fixed_point_margin", m);
            }
            row
        })
        .collect();
    let flag = |b: bool| Some(if b { 1.0 } else { 0.0 });
    let checks = vec![
        Check::new("contains_identity", flag(report.contains_identity), Comparison::AtLeast, 1.0),
        Check::new("max_unitarity_defect", Some(report.max_unitarity_defect), Comparison::AtMost, tol),
        Check::new("max_closure_defect", Some(report.max_closure_defect), Comparison::AtMost, tol),
        Check::new(
            "inverses_present",
            flag(report.elements.iter().all(|e| e.inverse_present)),
            Comparison::AtLeast,
            1.0,
        ),
        Check::new(
            "min_fixed_point_margin",
            Some(report.min_fixed_point_margin),
            Comparison::AtLeast,
            tol,
        ),
    ];
    let summary = Summary::assemble(&rows, tol, config.expect, BTreeMap::new(), checks);
    Ok((rows, summary))
}
