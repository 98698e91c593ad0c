//! Boundary-asymptotics regression.
//!
//! Samples `(t, v)` along a ray are fitted to
//! `v ≈ A·x^{−p}·(1 + B·x^q)` with `x = 1 − t²`, in log coordinates.

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_FIT_SAMPLES: usize = 8;

/// Residual level (in `log v`) below which a pure power law is accepted and
/// no correction term is fitted.
const EXACT_POWER_LAW_RMS: f64 = 1e-11;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    pub rms_residual: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let m = xs.len();
    if m < 2 || ys.len() != m {
        return Err(Error::InsufficientSamples { needed: 2, got: m });
    }
    let mf = m as f64;
    let mx = xs.iter().sum::<f64>() / mf;
    let my = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("abscissae do not vary".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let sigma2 = if m > 2 { ssr / (mf - 2.0) } else { 0.0 };
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr: (sigma2 / sxx).sqrt(),
        intercept_stderr: (sigma2 * (1.0 / mf + mx * mx / sxx)).sqrt(),
        rms_residual: (ssr / mf).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticFit {
    /// Leading constant `A`.
    pub amplitude: f64,
    pub amplitude_stderr: f64,
    /// Blow-up exponent `p`.
    pub exponent: f64,
    pub exponent_stderr: f64,
    /// `B`, absent when a pure power law already fits to rounding level.
    pub correction_coefficient: Option<f64>,
    /// `q`, absent together with `B`.
    pub correction_order: Option<f64>,
    pub correction_order_stderr: Option<f64>,
    pub rms_residual: f64,
}

/// Fits `v ≈ A·(1 − t²)^{−p}·(1 + B(1 − t²)^q)`.
pub fn asymptotic_fit(samples: &[(f64, f64)]) -> Result<AsymptoticFit> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            got: samples.len(),
        });
    }
    let mut logx = Vec::with_capacity(samples.len());
    let mut logv = Vec::with_capacity(samples.len());
    for &(t, v) in samples {
        let x = 1.0 - t * t;
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::DegenerateFit(format!("sample t={t} is not inside (0, 1)")));
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::DegenerateFit(format!("sample value {v} is not positive")));
        }
        logx.push(x.ln());
        logv.push(v.ln());
    }
    let spread = logv.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - logv.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = 1.0 + logv.iter().map(|y| y.abs()).fold(0.0, f64::max);
    if spread <= 1e-12 * scale {
        return Err(Error::DegenerateFit("sample values are constant".into()));
    }

    let power = linear_fit(&logx, &logv)?;
    if power.rms_residual <= EXACT_POWER_LAW_RMS * scale {
        let amplitude = power.intercept.exp();
        return Ok(AsymptoticFit {
            amplitude,
            amplitude_stderr: amplitude * power.intercept_stderr,
            exponent: -power.slope,
            exponent_stderr: power.slope_stderr,
            correction_coefficient: None,
            correction_order: None,
            correction_order_stderr: None,
            rms_residual: power.rms_residual,
        });
    }

    let theta = initial_guess(&logx, &logv)?;
    let (theta, cov, rms) = levenberg_marquardt(&logx, &logv, theta)?;
    let amplitude = theta[0].exp();
    Ok(AsymptoticFit {
        amplitude,
        amplitude_stderr: amplitude * cov[(0, 0)].sqrt(),
        exponent: theta[1],
        exponent_stderr: cov[(1, 1)].sqrt(),
        correction_coefficient: Some(theta[2]),
        correction_order: Some(theta[3]),
        correction_order_stderr: Some(cov[(3, 3)].sqrt()),
        rms_residual: rms,
    })
}

/// Power law from the samples nearest the boundary, then the correction
/// from the log of the remaining relative deviation.
fn initial_guess(logx: &[f64], logv: &[f64]) -> Result<Vector4<f64>> {
    let mut idx: Vec<usize> = (0..logx.len()).collect();
    idx.sort_by(|&a, &b| logx[a].total_cmp(&logx[b]));
    let near: Vec<usize> = idx[..4].to_vec();
    let lead = linear_fit(
        &near.iter().map(|&i| logx[i]).collect::<Vec<_>>(),
        &near.iter().map(|&i| logv[i]).collect::<Vec<_>>(),
    )?;
    let (mut lx, mut ly, mut signs) = (Vec::new(), Vec::new(), 0.0);
    for i in 0..logx.len() {
        let dev = (logv[i] - lead.intercept - lead.slope * logx[i]).exp_m1();
        if dev.abs() > 1e-10 {
            lx.push(logx[i]);
            ly.push(dev.abs().ln());
            signs += dev.signum();
        }
    }
    let (b, q) = if lx.len() >= 2 {
        let corr = linear_fit(&lx, &ly)?;
        (signs.signum() * corr.intercept.exp(), corr.slope.max(0.1))
    } else {
        (0.0, 2.0)
    };
    Ok(Vector4::new(lead.intercept, -lead.slope, b, q))
}

fn model(theta: &Vector4<f64>, lx: f64) -> Option<(f64, Vector4<f64>)> {
    let xq = (theta[3] * lx).exp();
    let inner = 1.0 + theta[2] * xq;
    if !(inner > 0.0) {
        return None;
    }
    let value = theta[0] - theta[1] * lx + inner.ln();
    let grad = Vector4::new(1.0, -lx, xq / inner, theta[2] * xq * lx / inner);
    Some((value, grad))
}

fn sum_sq(logx: &[f64], logv: &[f64], theta: &Vector4<f64>) -> Option<f64> {
    logx.iter().zip(logv).try_fold(0.0, |acc, (&lx, &y)| {
        model(theta, lx).map(|(v, _)| acc + (y - v).powi(2))
    })
}

fn levenberg_marquardt(
    logx: &[f64],
    logv: &[f64],
    mut theta: Vector4<f64>,
) -> Result<(Vector4<f64>, Matrix4<f64>, f64)> {
    let mut cost = sum_sq(logx, logv, &theta)
        .ok_or_else(|| Error::DegenerateFit("initial guess leaves the model domain".into()))?;
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (&lx, &y) in logx.iter().zip(logv) {
            let (v, g) = model(&theta, lx).expect("current iterate is admissible");
            jtj += g * g.transpose();
            jtr += g * (y - v);
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for k in 0..4 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = theta + step;
            match sum_sq(logx, logv, &trial) {
                Some(c) if c < cost => {
                    let rel = (cost - c) / cost.max(f64::MIN_POSITIVE);
                    theta = trial;
                    cost = c;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = rel > 1e-15;
                    break;
                }
                _ => lambda *= 10.0,
            }
        }
        if !improved {
            break;
        }
    }
    let mut jtj = Matrix4::zeros();
    for &lx in logx {
        let (_, g) = model(&theta, lx).expect("final iterate is admissible");
        jtj += g * g.transpose();
    }
    let inv = jtj
        .try_inverse()
        .ok_or_else(|| Error::DegenerateFit("normal matrix is singular".into()))?;
    let m = logx.len() as f64;
    let sigma2 = cost / (m - 4.0);
    Ok((theta, inv * sigma2, (cost / m).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ray(count: usize) -> Vec<f64> {
        (0..count).map(|k| 1.0 - 0.2 * 0.5f64.powi(k as i32)).collect()
    }

    #[test]
    fn pure_power_law() {
        let samples: Vec<(f64, f64)> = ray(10)
            .into_iter()
            .map(|t| (t, 9.0 / (1.0 - t * t).powi(3)))
            .collect();
        let fit = asymptotic_fit(&samples).unwrap();
        assert!((fit.exponent - 3.0).abs() < 1e-9);
        assert!((fit.amplitude - 9.0).abs() < 1e-8);
        assert!(fit.correction_order.is_none());
    }

    #[test]
    fn power_law_with_correction() {
        let samples: Vec<(f64, f64)> = ray(10)
            .into_iter()
            .map(|t| {
                let x = 1.0 - t * t;
                (t, 64.0 * x.powi(-4) * (1.0 + 0.7 * x.powi(3)))
            })
            .collect();
        let fit = asymptotic_fit(&samples).unwrap();
        assert!((fit.exponent - 4.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.amplitude - 64.0).abs() < 1e-4);
        assert!((fit.correction_order.unwrap() - 3.0).abs() < 1e-4);
        assert!((fit.correction_coefficient.unwrap() - 0.7).abs() < 1e-4);
    }

    #[test]
    fn constant_samples_are_degenerate() {
        let samples: Vec<(f64, f64)> = ray(9).into_iter().map(|t| (t, 5.0)).collect();
        assert!(matches!(asymptotic_fit(&samples), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn too_few_samples() {
        let samples = vec![(0.5, 1.0); 7];
        assert!(matches!(
            asymptotic_fit(&samples),
            Err(Error::InsufficientSamples { needed: 8, got: 7 })
        ));
    }

    #[test]
    fn linear_fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!(f.slope_stderr < 1e-12);
    }
}
