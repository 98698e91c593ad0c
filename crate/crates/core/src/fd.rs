//! Finite-difference Wirtinger derivatives in the underlying real coordinates
//! `z_k = x_k + i y_k`. Independent of the jet machinery; used only to
//! cross-check it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    /// Base step, scaled by `1 − |z₀|` inside the unit ball. Two levels of
    /// extrapolation remove the error through `h⁴`, so the default sits at
    /// the coarse end of the range where rounding stays negligible.
    pub step: f64,
    /// Number of Richardson extrapolation levels on top of the plain central
    /// difference.
    pub richardson_levels: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            step: 1e-2,
            richardson_levels: 2,
        }
    }
}

impl FdConfig {
    pub fn new(step: f64, richardson_levels: usize) -> Result<Self> {
        if !(1e-8..=1e-2).contains(&step) {
            return Err(Error::InvalidFdStep(step));
        }
        Ok(FdConfig {
            step,
            richardson_levels,
        })
    }

    fn effective_step(&self, z0: &[Complex64]) -> f64 {
        let radius = z0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if radius < 1.0 {
            self.step * (1.0 - radius)
        } else {
            self.step
        }
    }
}

/// A real coordinate direction: `(k, false)` is `x_k`, `(k, true)` is `y_k`.
type Axis = (usize, bool);

fn shifted(z0: &[Complex64], moves: &[(Axis, f64)]) -> Vec<Complex64> {
    let mut z = z0.to_vec();
    for &((k, imag), delta) in moves {
        if imag {
            z[k].im += delta;
        } else {
            z[k].re += delta;
        }
    }
    z
}

fn eval<F>(f: &F, z: &[Complex64]) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64>,
{
    f(z).map_err(|e| Error::EvaluationFailed(Box::new(e)))
}

fn first_partial<F>(f: &F, z0: &[Complex64], a: Axis, h: f64) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64>,
{
    let p = eval(f, &shifted(z0, &[(a, h)]))?;
    let m = eval(f, &shifted(z0, &[(a, -h)]))?;
    Ok((p - m) / (2.0 * h))
}

fn second_partial<F>(f: &F, z0: &[Complex64], a: Axis, b: Axis, h: f64) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64>,
{
    if a == b {
        let p = eval(f, &shifted(z0, &[(a, h)]))?;
        let c = eval(f, z0)?;
        let m = eval(f, &shifted(z0, &[(a, -h)]))?;
        return Ok((p - c * 2.0 + m) / (h * h));
    }
    let pp = eval(f, &shifted(z0, &[(a, h), (b, h)]))?;
    let pm = eval(f, &shifted(z0, &[(a, h), (b, -h)]))?;
    let mp = eval(f, &shifted(z0, &[(a, -h), (b, h)]))?;
    let mm = eval(f, &shifted(z0, &[(a, -h), (b, -h)]))?;
    Ok((pp - pm - mp + mm) / (4.0 * h * h))
}

/// Richardson tableau for a difference quotient with error series in `h²`.
fn richardson(mut estimate: impl FnMut(f64) -> Result<Complex64>, h: f64, levels: usize) -> Result<Complex64> {
    let mut row: Vec<Complex64> = Vec::with_capacity(levels + 1);
    for k in 0..=levels {
        let mut cur = vec![estimate(h / f64::powi(2.0, k as i32))?];
        let mut factor = 4.0;
        for j in 0..k {
            let better = cur[j] + (cur[j] - row[j]) / (factor - 1.0);
            cur.push(better);
            factor *= 4.0;
        }
        row = cur;
    }
    Ok(*row.last().expect("at least one level"))
}

/// `∂f/∂z_i = ½(∂/∂x_i − i ∂/∂y_i) f` at `z0`.
pub fn fd_gradient<F>(f: &F, z0: &[Complex64], i: usize, cfg: &FdConfig) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64>,
{
    if i >= z0.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: z0.len(),
        });
    }
    let h = cfg.effective_step(z0);
    richardson(
        |h| {
            let dx = first_partial(f, z0, (i, false), h)?;
            let dy = first_partial(f, z0, (i, true), h)?;
            Ok((dx - Complex64::i() * dy) * 0.5)
        },
        h,
        cfg.richardson_levels,
    )
}

/// `∂f/∂z̄_i = ½(∂/∂x_i + i ∂/∂y_i) f` at `z0`.
pub fn fd_gradient_bar<F>(f: &F, z0: &[Complex64], i: usize, cfg: &FdConfig) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64>,
{
    if i >= z0.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: z0.len(),
        });
    }
    let h = cfg.effective_step(z0);
    richardson(
        |h| {
            let dx = first_partial(f, z0, (i, false), h)?;
            let dy = first_partial(f, z0, (i, true), h)?;
            Ok((dx + Complex64::i() * dy) * 0.5)
        },
        h,
        cfg.richardson_levels,
    )
}

/// `∂²f/∂z_i∂z̄_j = ¼(∂x_i − i∂y_i)(∂x_j + i∂y_j) f` at `z0`.
pub fn fd_wirtinger<F>(f: &F, z0: &[Complex64], i: usize, j: usize, cfg: &FdConfig) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64>,
{
    let n = z0.len();
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange {
            index: i.max(j),
            len: n,
        });
    }
    let h = cfg.effective_step(z0);
    let iu = Complex64::i();
    richardson(
        |h| {
            let xx = second_partial(f, z0, (i, false), (j, false), h)?;
            let yy = second_partial(f, z0, (i, true), (j, true), h)?;
            let xy = second_partial(f, z0, (i, false), (j, true), h)?;
            let yx = second_partial(f, z0, (i, true), (j, false), h)?;
            Ok((xx + yy + iu * (xy - yx)) * 0.25)
        },
        h,
        cfg.richardson_levels,
    )
}

/// Pointwise evaluator of a field, for feeding the oracle.
pub fn pointwise(field: &dyn ScalarField) -> impl Fn(&[Complex64]) -> Result<Complex64> + '_ {
    move |z| field.value(z)
}

/// Oracle metric `∂²f/∂z_i∂z̄_j` for every `(i, j)`.
pub fn fd_metric(field: &dyn ScalarField, z0: &[Complex64], cfg: &FdConfig) -> Result<Vec<Vec<Complex64>>> {
    let f = pointwise(field);
    let n = z0.len();
    (0..n)
        .map(|i| (0..n).map(|j| fd_wirtinger(&f, z0, i, j, cfg)).collect())
        .collect()
}

/// `J(u)` assembled from oracle derivatives.
pub fn fd_j_operator(field: &dyn ScalarField, z0: &[Complex64], cfg: &FdConfig) -> Result<f64> {
    let f = pointwise(field);
    let n = z0.len();
    let u0 = eval(&f, z0)?;
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(n + 1, n + 1);
    m[(0, 0)] = u0;
    for a in 0..n {
        m[(0, a + 1)] = fd_gradient_bar(&f, z0, a, cfg)?;
        m[(a + 1, 0)] = fd_gradient(&f, z0, a, cfg)?;
        for b in 0..n {
            m[(a + 1, b + 1)] = fd_wirtinger(&f, z0, a, b, cfg)?;
        }
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok((m.determinant() * sign).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quartic_mixed_derivative() {
        // ∂∂̄ (z z̄)² = 4 z z̄
        let f = |z: &[Complex64]| Ok(Complex64::new(z[0].norm_sqr().powi(2), 0.0));
        let d = fd_wirtinger(&f, &[c(0.5, 0.0)], 0, 0, &FdConfig::default()).unwrap();
        assert!((d - c(1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn linear_field_has_no_curvature() {
        let f = |z: &[Complex64]| Ok(Complex64::new(z[0].re, 0.0));
        let z0 = [c(0.2, 0.1), c(-0.3, 0.0)];
        let d = fd_wirtinger(&f, &z0, 0, 1, &FdConfig::default()).unwrap();
        assert!(d.norm() < 1e-8);
    }

    #[test]
    fn log_kernel_of_disc() {
        let f = |z: &[Complex64]| Ok(Complex64::new(-(1.0 - z[0].norm_sqr()).ln(), 0.0));
        let d = fd_wirtinger(&f, &[c(0.5, 0.0)], 0, 0, &FdConfig::default()).unwrap();
        assert!((d.re - 1.0 / 0.75f64.powi(2)).abs() < 1e-6);
    }

    #[test]
    fn gradients() {
        let f = |z: &[Complex64]| Ok(Complex64::new(z[0].norm_sqr(), 0.0));
        let z0 = [c(0.3, 0.2)];
        let g = fd_gradient(&f, &z0, 0, &FdConfig::default()).unwrap();
        assert!((g - z0[0].conj()).norm() < 1e-9);

        let f = |z: &[Complex64]| Ok(Complex64::new(1.0 - z[0].norm_sqr() - z[1].norm_sqr(), 0.0));
        let z0 = [c(0.3, 0.0), c(0.4, 0.0)];
        for (i, e) in [-0.3, -0.4].into_iter().enumerate() {
            let g = fd_gradient(&f, &z0, i, &FdConfig::default()).unwrap();
            assert!((g - c(e, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn step_bounds() {
        assert!(FdConfig::new(1e-9, 2).is_err());
        assert!(FdConfig::new(0.1, 2).is_err());
        assert!(FdConfig::new(1e-3, 0).is_ok());
    }

    #[test]
    fn failing_stencil_is_reported() {
        let f = |z: &[Complex64]| {
            if z[0].re > 0.5 {
                Err(Error::PointOutsideBall { radius: z[0].re })
            } else {
                Ok(Complex64::new(1.0, 0.0))
            }
        };
        let r = fd_wirtinger(&f, &[c(0.5, 0.0)], 0, 0, &FdConfig::new(1e-3, 0).unwrap());
        assert!(matches!(r, Err(Error::EvaluationFailed(_))));
    }
}
