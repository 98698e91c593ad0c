//! Bergman-metric diagnostics computed from jets of a potential `u = log k`.
//!
//! * `g_{ij̄} = ∂²u/∂z_i∂z̄_j` and `G = det g`
//! * `R_{ij̄} = −∂² log G/∂z_i∂z̄_j`, Einstein with constant `−1` iff `R = −g`
//! * `B = G/k`, constant `(n+1)ⁿπⁿ/n!` exactly in the Einstein case
//! * Fefferman's `J(u) = (−1)ⁿ det [[u, u_β̄], [u_α, u_{αβ̄}]]`
//! * Monge–Ampère residual `det(u_{ij̄}) − c·eᵘ`

mod fit;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

pub use fit::{asymptotic_fit, linear_fit, AsymptoticFit, LinearFit, MIN_FIT_SAMPLES};

use crate::error::{Error, Result};
use crate::jets::{det_jet, factorial, Jet};
use crate::kernels::ScalarField;

/// Pivot tolerance (relative to the largest diagonal entry) of the
/// positive-definiteness test.
pub const PIVOT_TOL: f64 = 1e-12;

/// `C_n = (n+1)ⁿπⁿ/n!`.
pub fn einstein_constant(n: usize) -> f64 {
    ((n + 1) as f64 * PI).powi(n as i32) / factorial(n)
}

/// Accepts a value proved real when `|Im| < 1e-8·(1 + |Re|)`.
pub fn real_part(value: Complex64, what: &str) -> Result<f64> {
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::NumericConsistency(format!("{what} is not finite: {value}")));
    }
    if value.im.abs() >= 1e-8 * (1.0 + value.re.abs()) {
        return Err(Error::NumericConsistency(format!(
            "{what} should be real but has imaginary part {:e} (real part {:e})",
            value.im, value.re
        )));
    }
    Ok(value.re)
}

/// An `n×n` complex matrix such as `g_{ij̄}` or `R_{ij̄}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm(pub DMatrix<Complex64>);

impl HermitianForm {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// `‖H − H*‖_max`.
    pub fn hermitian_defect(&self) -> f64 {
        let h = &self.0;
        (h - h.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> Complex64 {
        self.0.determinant()
    }

    /// Determinant of the leading `k×k` block.
    pub fn leading_block_det(&self, k: usize) -> Complex64 {
        self.0.view((0, 0), (k, k)).into_owned().determinant()
    }

    /// Lower-triangular Cholesky factor; fails when a pivot drops below
    /// [`PIVOT_TOL`] times the largest diagonal entry.
    pub fn cholesky(&self) -> Result<DMatrix<Complex64>> {
        let n = self.dim();
        let h = &self.0;
        let scale = (0..n).map(|i| h[(i, i)].re.abs()).fold(0.0, f64::max);
        let mut l = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..n {
            let mut d = h[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > PIVOT_TOL * scale) {
                return Err(Error::NotPositiveDefinite { pivot: d });
            }
            let root = d.sqrt();
            l[(j, j)] = Complex64::new(root, 0.0);
            for i in j + 1..n {
                let mut s = h[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / root;
            }
        }
        Ok(l)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }
}

/// `g_{ij̄}` read off a jet of order at least 2.
pub fn metric_from_jet(u: &Jet) -> HermitianForm {
    let n = u.dim();
    HermitianForm(DMatrix::from_fn(n, n, |i, j| u.mixed_second(i, j)))
}

/// `g_{ij̄} = ∂²u/∂z_i∂z̄_j` at `z0`.
pub fn metric(u: &dyn ScalarField, z0: &[Complex64]) -> Result<HermitianForm> {
    Ok(metric_from_jet(&u.jet(z0, 2)?))
}

fn metric_jet_matrix(u: &Jet) -> Result<Vec<Vec<Jet>>> {
    let n = u.dim();
    (0..n)
        .map(|i| (0..n).map(|j| u.partial_shift(i, j)).collect())
        .collect()
}

/// Jet of `G = det g` at order `u.order() − 2`.
pub fn metric_det_from_jet(u: &Jet) -> Result<Jet> {
    det_jet(&metric_jet_matrix(u)?)
}

/// The `extra_order`-jet of `G = det g` at `z0`.
pub fn metric_det(u: &dyn ScalarField, z0: &[Complex64], extra_order: usize) -> Result<Jet> {
    metric_det_from_jet(&u.jet(z0, extra_order + 2)?)
}

/// `B = G/k` at `z0`, for a kernel density `k`.
pub fn b_invariant(k: &dyn ScalarField, z0: &[Complex64]) -> Result<f64> {
    let kj = k.jet(z0, 2)?;
    let k0 = real_part(kj.constant_term(), "kernel value")?;
    if k0 <= 0.0 {
        return Err(Error::NonpositiveKernel { value: k0 });
    }
    let u = kj.ln()?;
    let g = real_part(metric_det_from_jet(&u)?.constant_term(), "metric determinant")?;
    Ok(g / k0)
}

/// `R_{ij̄}` from a jet of `u` of order at least 4.
pub fn ricci_from_jet(u: &Jet) -> Result<HermitianForm> {
    let g = metric_det_from_jet(&u.truncate(4)?)?;
    let g0 = real_part(g.constant_term(), "metric determinant")?;
    if g0 <= 0.0 {
        return Err(Error::NonpositiveMetricDet { value: g0 });
    }
    let log_g = g.ln()?;
    let n = u.dim();
    Ok(HermitianForm(DMatrix::from_fn(n, n, |i, j| {
        -log_g.mixed_second(i, j)
    })))
}

/// `R_{ij̄} = −∂² log G/∂z_i∂z̄_j` at `z0`.
pub fn ricci(u: &dyn ScalarField, z0: &[Complex64]) -> Result<HermitianForm> {
    ricci_from_jet(&u.jet(z0, 4)?)
}

/// `max |λ|` over the eigenvalues of `g⁻¹(R + g)`.
pub fn einstein_residual_from(g: &HermitianForm, ricci: &HermitianForm) -> Result<f64> {
    let l = g.cholesky()?;
    let s = ricci.matrix() + g.matrix();
    let n = g.dim();
    // W = L⁻¹ S L⁻ᴴ is Hermitian and similar to g⁻¹S.
    let x = l
        .clone()
        .solve_lower_triangular(&s)
        .ok_or(Error::NotPositiveDefinite { pivot: 0.0 })?;
    let w = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or(Error::NotPositiveDefinite { pivot: 0.0 })?
        .adjoint();
    let w = DMatrix::from_fn(n, n, |i, j| (w[(i, j)] + w[(j, i)].conj()) * 0.5);
    Ok(w
        .symmetric_eigenvalues()
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max))
}

/// Everything derived from the single 4-jet of `u` at one point.
#[derive(Debug, Clone)]
pub struct EinsteinDiagnostics {
    pub point: Vec<Complex64>,
    pub g: HermitianForm,
    /// `det g`.
    pub metric_det: f64,
    pub ricci: HermitianForm,
    pub residual_norm: f64,
    /// `G/eᵘ`; the B-invariant when `u` is the log of the Bergman density.
    pub b_invariant: f64,
}

impl EinsteinDiagnostics {
    pub fn evaluate(u: &dyn ScalarField, z0: &[Complex64]) -> Result<Self> {
        let jet = u.jet(z0, 4)?;
        let g = metric_from_jet(&jet);
        let ricci = ricci_from_jet(&jet)?;
        let metric_det = real_part(g.determinant(), "metric determinant")?;
        let residual_norm = einstein_residual_from(&g, &ricci)?;
        let u0 = real_part(jet.constant_term(), "potential")?;
        Ok(EinsteinDiagnostics {
            point: z0.to_vec(),
            g,
            metric_det,
            ricci,
            residual_norm,
            b_invariant: metric_det * (-u0).exp(),
        })
    }
}

pub fn einstein_residual(u: &dyn ScalarField, z0: &[Complex64]) -> Result<f64> {
    Ok(EinsteinDiagnostics::evaluate(u, z0)?.residual_norm)
}

/// Fefferman's `J` from a jet of order at least 2.
pub fn j_from_jet(u: &Jet) -> Result<f64> {
    let n = u.dim();
    let m = DMatrix::from_fn(n + 1, n + 1, |a, b| match (a, b) {
        (0, 0) => u.constant_term(),
        (0, b) => u.first_derivative(n + b - 1),
        (a, 0) => u.first_derivative(a - 1),
        (a, b) => u.mixed_second(a - 1, b - 1),
    });
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    real_part(m.determinant() * sign, "J operator")
}

/// `J(u)(z0) = (−1)ⁿ det [[u, u_β̄], [u_α, u_{αβ̄}]]`.
pub fn j_operator(u: &dyn ScalarField, z0: &[Complex64]) -> Result<f64> {
    j_from_jet(&u.jet(z0, 2)?)
}

/// Jet of `J(u)` at order `u.order() − 2`.
pub fn j_jet_from(u: &Jet) -> Result<Jet> {
    let n = u.dim();
    if u.order() < 2 {
        return Err(Error::OrderExceeded {
            requested: 2,
            order: u.order(),
        });
    }
    let d = u.order() - 2;
    let mut m = Vec::with_capacity(n + 1);
    let mut top = vec![u.truncate(d)?];
    for b in 0..n {
        top.push(u.differentiate(n + b)?.truncate(d)?);
    }
    m.push(top);
    for a in 0..n {
        let ua = u.differentiate(a)?;
        let mut row = vec![ua.truncate(d)?];
        for b in 0..n {
            row.push(ua.differentiate(n + b)?);
        }
        m.push(row);
    }
    let det = det_jet(&m)?;
    Ok(if n.is_multiple_of(2) { det } else { -&det })
}

/// The `extra_order`-jet of the field `z ↦ J(u)(z)` at `z0`.
pub fn j_operator_jet(u: &dyn ScalarField, z0: &[Complex64], extra_order: usize) -> Result<Jet> {
    j_jet_from(&u.jet(z0, extra_order + 2)?)
}

/// Monge–Ampère data at one point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MongeAmpere {
    /// `det(u_{ij̄})`.
    pub det: f64,
    /// `c·eᵘ`.
    pub rhs: f64,
    /// `det − c·eᵘ`.
    pub residual: f64,
}

impl MongeAmpere {
    pub fn relative(&self) -> f64 {
        self.residual.abs() / self.det.abs().max(self.rhs.abs()).max(f64::MIN_POSITIVE)
    }
}

pub fn monge_ampere(u: &dyn ScalarField, z0: &[Complex64], c: f64) -> Result<MongeAmpere> {
    let jet = u.jet(z0, 2)?;
    let det = real_part(metric_from_jet(&jet).determinant(), "det(u_ij̄)")?;
    let u0 = real_part(jet.constant_term(), "potential")?;
    let rhs = c * u0.exp();
    Ok(MongeAmpere {
        det,
        rhs,
        residual: det - rhs,
    })
}

/// `det(u_{ij̄}) − c·e^{u(z0)}`.
pub fn ma_residual(u: &dyn ScalarField, z0: &[Complex64], c: f64) -> Result<f64> {
    Ok(monge_ampere(u, z0, c)?.residual)
}

/// Determinant of the leading `k×k` block of `u_{ij̄}` at `z0`.
pub fn leading_block_det(u: &dyn ScalarField, z0: &[Complex64], k: usize) -> Result<f64> {
    if k == 0 || k > u.dim() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: u.dim(),
        });
    }
    real_part(metric(u, z0)?.leading_block_det(k), "block determinant")
}

/// Both sides of `J(k) = (−1)ⁿ C_n k^{n+2}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelIdentity {
    pub j: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative: f64,
}

pub fn kernel_ma_identity(k: &dyn ScalarField, z0: &[Complex64]) -> Result<KernelIdentity> {
    let n = k.dim();
    let jet = k.jet(z0, 2)?;
    let k0 = real_part(jet.constant_term(), "kernel value")?;
    if k0 <= 0.0 {
        return Err(Error::NonpositiveKernel { value: k0 });
    }
    let j = j_from_jet(&jet)?;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let rhs = sign * einstein_constant(n) * k0.powi(n as i32 + 2);
    let residual = j - rhs;
    Ok(KernelIdentity {
        j,
        rhs,
        residual,
        relative: residual.abs() / j.abs().max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{ball_kernel, log_field, Domain, FnField};

    fn pt(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    fn defining_ball(n: usize) -> crate::kernels::Field {
        FnField::new(n, Domain::Ball, "1-|z|^2", |p| {
            Ok((-&p.norm_sqr()).add_constant(1.0.into()))
        })
    }

    #[test]
    fn ball_metric_at_origin() {
        let g = metric(log_field(ball_kernel(2)).as_ref(), &pt(&[0.0, 0.0])).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 3.0 } else { 0.0 };
                assert!((g.get(i, j) - Complex64::new(e, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn ball_metric_off_center() {
        let u = log_field(ball_kernel(2));
        let z = pt(&[0.5, 0.0]);
        let g = metric(u.as_ref(), &z).unwrap();
        assert!((g.get(0, 0).re - 16.0 / 3.0).abs() < 1e-12);
        assert!((g.get(1, 1).re - 4.0).abs() < 1e-12);
        assert!(g.get(0, 1).norm() < 1e-13);
        let det = metric_det(u.as_ref(), &z, 0).unwrap();
        assert!((det.constant_term().re - 64.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn b_invariant_of_ball() {
        let b = b_invariant(ball_kernel(2).as_ref(), &pt(&[0.5, 0.0])).unwrap();
        assert!((b - 9.0 * PI * PI / 2.0).abs() < 1e-10);
        assert!((b - 44.4132).abs() < 1e-4);
        let b3 = b_invariant(ball_kernel(3).as_ref(), &pt(&[0.0, 0.0, 0.0])).unwrap();
        assert!((b3 - 64.0 * PI.powi(3) / 6.0).abs() < 1e-9);
        assert!((einstein_constant(3) - 330.73).abs() < 0.01);
    }

    #[test]
    fn ball_ricci_is_minus_metric() {
        let u = log_field(ball_kernel(2));
        let z = pt(&[0.0, 0.0]);
        let r = ricci(u.as_ref(), &z).unwrap();
        let g = metric(u.as_ref(), &z).unwrap();
        assert!((r.matrix() + g.matrix()).iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn j_of_defining_function_is_one() {
        for n in 1..=4 {
            let r = defining_ball(n);
            let z: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(0.1 * (i + 1) as f64, -0.05 * i as f64))
                .collect();
            assert!((j_operator(r.as_ref(), &z).unwrap() - 1.0).abs() < 1e-12);
            let jj = j_operator_jet(r.as_ref(), &z, 2).unwrap();
            assert!(jj.max_abs_diff(&jj.constant_like(1.0.into())) < 1e-12);
        }
    }

    #[test]
    fn j_of_constant_vanishes() {
        let c = FnField::new(2, Domain::Everywhere, "const", |p| Ok(p.constant(2.5)));
        assert_eq!(j_operator(c.as_ref(), &pt(&[0.1, 0.2])).unwrap(), 0.0);
    }

    #[test]
    fn real_part_policy() {
        assert_eq!(real_part(Complex64::new(2.0, 1e-12), "x").unwrap(), 2.0);
        assert!(matches!(
            real_part(Complex64::new(2.0, 1e-3), "x"),
            Err(Error::NumericConsistency(_))
        ));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let h = HermitianForm(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        ));
        assert!(matches!(h.cholesky(), Err(Error::NotPositiveDefinite { .. })));
    }
}
