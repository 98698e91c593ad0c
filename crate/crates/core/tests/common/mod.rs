//! Shared fixtures: seeded sample points and a battery of smooth fields, each
//! given twice: as a jet-valued field and as an independent plain scalar
//! function for the finite-difference oracle.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use bergman::kernels::{
    antipodal_b3_closed_form, ball_kernel, disc_quotient_closed_form, log_field, quotient_kernel, Domain, Field,
    FnField,
};
use bergman::{FiniteUnitaryGroup, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn real_point(v: &[f64]) -> Vec<C> {
    v.iter().map(|&x| c(x, 0.0)).collect()
}

pub fn norm(z: &[C]) -> f64 {
    z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt()
}

/// Uniform samples in the ball of radius `max_radius` in `Cⁿ`.
pub fn random_points(n: usize, count: usize, max_radius: f64, seed: u64) -> Vec<Vec<C>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z: Vec<C> = (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if norm(&z) < 1.0 {
            out.push(z.iter().map(|w| w * max_radius).collect());
        }
    }
    out
}

pub type Scalar = Arc<dyn Fn(&[C]) -> Result<C> + Send + Sync>;

pub struct TestField {
    pub name: String,
    pub dim: usize,
    pub jet: Field,
    pub scalar: Scalar,
}

fn ns(z: &[C]) -> f64 {
    z.iter().map(|w| w.norm_sqr()).sum()
}

fn entry(name: impl Into<String>, dim: usize, jet: Field, scalar: impl Fn(&[C]) -> C + Send + Sync + 'static) -> TestField {
    TestField {
        name: name.into(),
        dim,
        jet,
        scalar: Arc::new(move |z| Ok(scalar(z))),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// The standard battery: kernels, their logarithms, defining functions and
/// assorted smooth real-analytic expressions in dimensions 1 to 4.
pub fn battery() -> Vec<TestField> {
    let mut v = Vec::new();

    for n in 1..=4 {
        let norm_c = factorial(n) / PI.powi(n as i32);
        v.push(entry(format!("ball kernel n={n}"), n, ball_kernel(n), move |z| {
            c(norm_c / (1.0 - ns(z)).powi(n as i32 + 1), 0.0)
        }));
        v.push(entry(
            format!("log ball kernel n={n}"),
            n,
            log_field(ball_kernel(n)),
            move |z| c(norm_c.ln() - (n as f64 + 1.0) * (1.0 - ns(z)).ln(), 0.0),
        ));
    }

    for n in 1..=3 {
        v.push(entry(
            format!("|z|² n={n}"),
            n,
            FnField::new(n, Domain::Everywhere, "|z|²", |p| Ok(p.norm_sqr())),
            |z| c(ns(z), 0.0),
        ));
    }

    v.push(entry(
        "|z|⁴",
        1,
        FnField::new(1, Domain::Everywhere, "|z|⁴", |p| p.norm_sqr().powi(2)),
        |z| c(ns(z).powi(2), 0.0),
    ));

    for r in [2u32, 3, 5] {
        v.push(entry(
            format!("disc quotient r={r}"),
            1,
            disc_quotient_closed_form(r),
            move |z| {
                let s = ns(z);
                c(r as f64 / PI * s.powi(r as i32 - 1) / (1.0 - s.powi(r as i32)).powi(2), 0.0)
            },
        ));
    }

    v.push(entry("B³/{±I} closed form", 3, antipodal_b3_closed_form(), |z| {
        let s = ns(z);
        c(24.0 / PI.powi(3) * s * (1.0 + s * s) / (1.0 - s * s).powi(4), 0.0)
    }));

    let group = Arc::new(FiniteUnitaryGroup::cyclic_diagonal(2, &[1, 2], 5).unwrap());
    v.push(entry(
        "averaged kernel, weights (1,2) mod 5",
        2,
        quotient_kernel(group.clone()),
        move |z| {
            let mut acc = c(0.0, 0.0);
            for (g, det) in group.elements().iter().zip(group.dets()) {
                let gz: Vec<C> = (0..2).map(|i| g[(i, 0)] * z[0] + g[(i, 1)] * z[1]).collect();
                let pairing: C = gz.iter().zip(z).map(|(a, b)| a * b.conj()).sum();
                acc += det * (2.0 / (PI * PI)) / (c(1.0, 0.0) - pairing).powi(3);
            }
            acc / group.order() as f64
        },
    ));

    v.push(entry(
        "(1−|z|²)·exp(0.1 Re z₁)",
        2,
        FnField::new(2, Domain::Ball, "perturbed defining function", |p| {
            let e = (&p.z[0] + &p.zbar[0]).scale_real(0.05).exp();
            Ok(&(-&p.norm_sqr()).add_constant(1.0.into()) * &e)
        }),
        |z| c((1.0 - ns(z)) * (0.1 * z[0].re).exp(), 0.0),
    ));

    v.push(entry(
        "1/(1 + |z₁|² + 2|z₂|²)",
        2,
        FnField::new(2, Domain::Everywhere, "rational", |p| {
            let d = &(&p.z[0] * &p.zbar[0]) + &(&p.z[1] * &p.zbar[1]).scale_real(2.0);
            d.add_constant(1.0.into()).reciprocal()
        }),
        |z| c(1.0 / (1.0 + z[0].norm_sqr() + 2.0 * z[1].norm_sqr()), 0.0),
    ));

    v.push(entry(
        "(1 + |z|²)^{3/2}",
        3,
        FnField::new(3, Domain::Everywhere, "power", |p| p.norm_sqr().add_constant(1.0.into()).powf(1.5)),
        |z| c((1.0 + ns(z)).powf(1.5), 0.0),
    ));

    v.push(entry(
        "exp(Re z₁ + |z₂|²)",
        2,
        FnField::new(2, Domain::Everywhere, "exponential", |p| {
            let re = (&p.z[0] + &p.zbar[0]).scale_real(0.5);
            Ok((&re + &(&p.z[1] * &p.zbar[1])).exp())
        }),
        |z| c((z[0].re + z[1].norm_sqr()).exp(), 0.0),
    ));

    v.push(entry(
        "z₁² z̄₂ (complex valued)",
        2,
        FnField::new(2, Domain::Everywhere, "monomial", |p| Ok(&(&p.z[0] * &p.z[0]) * &p.zbar[1])),
        |z| z[0] * z[0] * z[1].conj(),
    ));

    v.push(entry(
        "log(2 + Re(z₁ z̄₂))",
        2,
        FnField::new(2, Domain::Everywhere, "log", |p| {
            let w = &(&p.z[0] * &p.zbar[1]) + &(&p.zbar[0] * &p.z[1]);
            w.scale_real(0.5).add_constant(2.0.into()).ln()
        }),
        |z| c((2.0 + (z[0] * z[1].conj()).re).ln(), 0.0),
    ));

    v.push(entry(
        "|z|²·|1 + z₁|²",
        1,
        FnField::new(1, Domain::Everywhere, "product", |p| {
            let a = p.z[0].add_constant(1.0.into());
            let b = p.zbar[0].add_constant(1.0.into());
            Ok(&p.norm_sqr() * &(&a * &b))
        }),
        |z| c(ns(z) * (c(1.0, 0.0) + z[0]).norm_sqr(), 0.0),
    ));

    v
}

/// Worst relative disagreement between jet and oracle derivatives.
#[derive(Debug, Clone, Default)]
pub struct OracleOutcome {
    pub fields: usize,
    pub points: usize,
    pub comparisons: usize,
    pub worst: f64,
    pub worst_case: String,
}

/// Compares `∂f/∂z_i`, `∂f/∂z̄_i` and `∂²f/∂z_i∂z̄_j` from order-2 jets with
/// the oracle on `points_per_field` seeded points with `|z| ≤ max_radius`.
/// Each error is measured relative to the largest derivative of the same
/// order at that point.
pub fn oracle_battery(points_per_field: usize, max_radius: f64, cfg: &bergman::FdConfig) -> OracleOutcome {
    use bergman::fd::{fd_gradient, fd_gradient_bar, fd_wirtinger};
    let fields = battery();
    let mut out = OracleOutcome {
        fields: fields.len(),
        points: points_per_field,
        ..OracleOutcome::default()
    };
    for (fi, tf) in fields.iter().enumerate() {
        let n = tf.dim;
        let f = |z: &[C]| (tf.scalar)(z);
        for (pi, z) in random_points(n, points_per_field, max_radius, 100 + fi as u64)
            .into_iter()
            .enumerate()
        {
            let jet = tf.jet.jet(&z, 2).expect("battery field evaluates");
            let mut first = Vec::new();
            for i in 0..n {
                first.push((format!("∂z{i}"), jet.first_derivative(i), fd_gradient(&f, &z, i, cfg).unwrap()));
                first.push((format!("∂z̄{i}"), jet.first_derivative(n + i), fd_gradient_bar(&f, &z, i, cfg).unwrap()));
            }
            let mut second = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    second.push((format!("∂z{i}∂z̄{j}"), jet.mixed_second(i, j), fd_wirtinger(&f, &z, i, j, cfg).unwrap()));
                }
            }
            for group in [first, second] {
                let scale = group.iter().map(|(_, a, _)| a.norm()).fold(0.0, f64::max).max(1e-300);
                for (what, a, b) in group {
                    let rel = (a - b).norm() / scale;
                    out.comparisons += 1;
                    if rel > out.worst || rel.is_nan() {
                        out.worst = rel;
                        out.worst_case = format!("{} at point {pi}, {what}", tf.name);
                    }
                }
            }
        }
    }
    out
}
