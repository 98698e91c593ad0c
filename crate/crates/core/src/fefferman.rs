//! Fefferman's recursive construction of an approximate solution of
//! `J(u) = 1`, `u|∂Ω = 0`:
//!
//! ```text
//! u¹ = r / J(r)^{1/(n+1)}
//! uˢ = uˢ⁻¹ · (1 + (1 − J(uˢ⁻¹)) / ((n + 2 − s)·s)),   2 ≤ s ≤ n + 1
//! ```
//!
//! Each `uˢ` satisfies `J(uˢ) = 1 + O(rˢ)`. Every application of `J` consumes
//! two jet orders, so `J(uˢ)` at order `d` needs the seed at order `d + 2s + 2`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{j_jet_from, j_operator, linear_fit, real_part};
use crate::jets::{factorial, Jet, MAX_ORDER};
use crate::kernels::{Field, ScalarField};

/// `|J(u) − 1|` below this is treated as zero by [`boundary_order_fit`].
pub const CENSOR_LEVEL: f64 = 1e-13;
/// Uncensored samples needed for a slope.
pub const MIN_UNCENSORED: usize = 4;
/// Gradient floor for near-boundary samples of a defining function.
pub const MIN_GRADIENT: f64 = 1e-8;

/// A defining function `r` (`Ω = {r > 0}`) with a known interior point.
#[derive(Debug, Clone)]
pub struct DefiningField {
    field: Field,
    interior_point: Vec<Complex64>,
}

impl DefiningField {
    pub fn new(field: Field, interior_point: Vec<Complex64>) -> Result<Self> {
        let v = real_part(field.value(&interior_point)?, "defining function")?;
        if v <= 0.0 {
            return Err(Error::DimensionMismatch(format!(
                "defining function is {v} at the interior point"
            )));
        }
        Ok(DefiningField {
            field,
            interior_point,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn interior_point(&self) -> &[Complex64] {
        &self.interior_point
    }

    /// Euclidean gradient length `2|∂r|` at `z0`.
    pub fn gradient_norm(&self, z0: &[Complex64]) -> Result<f64> {
        let jet = self.field.jet(z0, 1)?;
        let n = self.dim();
        Ok(2.0 * (0..n).map(|i| jet.first_derivative(i).norm_sqr()).sum::<f64>().sqrt())
    }

    /// Rejects sample points where `r ≤ 0` or `dr` (nearly) vanishes.
    pub fn check_sample(&self, z0: &[Complex64]) -> Result<()> {
        let v = real_part(self.field.value(z0)?, "defining function")?;
        if v <= 0.0 {
            return Err(Error::NumericConsistency(format!(
                "defining function is {v} at a sample point"
            )));
        }
        let grad = self.gradient_norm(z0)?;
        if grad <= MIN_GRADIENT {
            return Err(Error::NumericConsistency(format!(
                "defining function has gradient {grad:e} at a sample point"
            )));
        }
        Ok(())
    }
}

/// Seed order needed to evaluate `J(uˢ)` as a jet of order `d`.
pub fn required_seed_order(step: usize, d: usize) -> usize {
    d + 2 * step + 2
}

struct Seed {
    r: Field,
}

impl ScalarField for Seed {
    fn dim(&self) -> usize {
        self.r.dim()
    }

    fn domain(&self) -> crate::kernels::Domain {
        self.r.domain()
    }

    fn jet(&self, z0: &[Complex64], order: usize) -> Result<Jet> {
        let n = self.dim();
        let rj = self.r.jet(z0, order + 2)?;
        let j = j_jet_from(&rj)?;
        let j0 = real_part(j.constant_term(), "J(r)")?;
        if j0 <= 0.0 {
            return Err(Error::NonpositiveJ { value: j0 });
        }
        Ok(&rj.truncate(order)? * &j.powf(-1.0 / (n as f64 + 1.0))?)
    }

    fn describe(&self) -> String {
        format!("u1[{}]", self.r.describe())
    }
}

/// `u¹ = r / J(r)^{1/(n+1)}`.
pub fn fefferman_seed(r: &DefiningField) -> Field {
    Arc::new(Seed {
        r: r.field().clone(),
    })
}

struct Step {
    prev: Field,
    step: usize,
    denominator: f64,
}

impl ScalarField for Step {
    fn dim(&self) -> usize {
        self.prev.dim()
    }

    fn domain(&self) -> crate::kernels::Domain {
        self.prev.domain()
    }

    fn jet(&self, z0: &[Complex64], order: usize) -> Result<Jet> {
        let pj = self.prev.jet(z0, order + 2)?;
        let j = j_jet_from(&pj)?;
        let factor = (-&j)
            .add_constant(1.0.into())
            .scale_real(1.0 / self.denominator)
            .add_constant(1.0.into());
        Ok(&pj.truncate(order)? * &factor)
    }

    fn describe(&self) -> String {
        format!("u{}", self.step)
    }
}

/// `uˢ = uˢ⁻¹ (1 + (1 − J(uˢ⁻¹))/((n + 2 − s)s))`.
pub fn fefferman_step(prev: Field, step: usize, n: usize) -> Result<Field> {
    if step < 2 || step > n + 1 {
        return Err(Error::InvalidStep { step, max: n + 1 });
    }
    let denominator = ((n + 2 - step) * step) as f64;
    if denominator == 0.0 {
        return Err(Error::DivisionByZeroDenominator { step });
    }
    Ok(Arc::new(Step {
        prev,
        step,
        denominator,
    }))
}

/// `u¹ … u^{n+1}` built from one defining function.
#[derive(Debug, Clone)]
pub struct FeffermanChain {
    seed: DefiningField,
    steps: Vec<Field>,
}

impl FeffermanChain {
    pub fn new(seed: DefiningField) -> Result<Self> {
        let n = seed.dim();
        let mut steps = vec![fefferman_seed(&seed)];
        for s in 2..=n + 1 {
            let prev = steps.last().expect("seed present").clone();
            steps.push(fefferman_step(prev, s, n)?);
        }
        Ok(FeffermanChain { seed, steps })
    }

    pub fn defining(&self) -> &DefiningField {
        &self.seed
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `uˢ`, `1 ≤ s ≤ n + 1`.
    pub fn u(&self, s: usize) -> Result<&Field> {
        if s == 0 || s > self.steps.len() {
            return Err(Error::InvalidStep {
                step: s,
                max: self.steps.len(),
            });
        }
        Ok(&self.steps[s - 1])
    }

    /// Checks up front that `J(uˢ)` can be evaluated at jet order `d`.
    pub fn check_budget(&self, s: usize, d: usize) -> Result<()> {
        let needed = required_seed_order(s, d);
        if needed > MAX_ORDER {
            return Err(Error::OrderTooHigh {
                requested: needed,
                max: MAX_ORDER,
            });
        }
        Ok(())
    }

    /// `J(uˢ)(z0)`.
    pub fn j(&self, s: usize, z0: &[Complex64]) -> Result<f64> {
        self.check_budget(s, 0)?;
        j_operator(self.u(s)?.as_ref(), z0)
    }
}

/// `(πⁿ/n!·k)^{−1/(n+1)}`.
pub fn bergman_defining_field(k: Field) -> Field {
    Arc::new(BergmanDefining { k })
}

struct BergmanDefining {
    k: Field,
}

impl ScalarField for BergmanDefining {
    fn dim(&self) -> usize {
        self.k.dim()
    }

    fn jet(&self, z0: &[Complex64], order: usize) -> Result<Jet> {
        let n = self.dim();
        let kj = self.k.jet(z0, order)?;
        let k0 = kj.constant_term();
        let scaled = kj.scale_real(PI.powi(n as i32) / factorial(n));
        scaled
            .powf(-1.0 / (n as f64 + 1.0))
            .map_err(|_| Error::NonpositiveKernel { value: k0.re })
    }

    fn describe(&self) -> String {
        format!("bergman defining function of {}", self.k.describe())
    }
}

/// Radii `t_k = 1 − 0.2·2^{−k}`, `k = 0..9`.
pub fn default_radii() -> Vec<f64> {
    (0..10).map(|k| 1.0 - 0.2 * 0.5f64.powi(k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderStatus {
    Fitted,
    /// Too few samples above the censoring level.
    Indeterminate,
    /// Every sample censored: `J ≡ 1` to rounding.
    Exact,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrderSample {
    pub t: f64,
    pub r: f64,
    pub defect: f64,
    pub censored: bool,
}

impl OrderSample {
    pub fn new(t: f64, r: f64, defect: f64) -> Self {
        OrderSample {
            t,
            r,
            defect,
            censored: defect < CENSOR_LEVEL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderFit {
    pub status: OrderStatus,
    pub order: Option<f64>,
    pub stderr: Option<f64>,
    pub samples: Vec<OrderSample>,
}

/// Slope of `log|J(u) − 1|` against `log r` along the ray `t·direction`.
pub fn boundary_order_fit(
    field: &dyn ScalarField,
    direction: &[Complex64],
    radii: &[f64],
    reference: &dyn ScalarField,
) -> Result<OrderFit> {
    if radii.len() < MIN_FIT_SAMPLES_ORDER {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES_ORDER,
            got: radii.len(),
        });
    }
    let norm = direction.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::DimensionMismatch("ray direction is zero".into()));
    }
    let mut samples = Vec::with_capacity(radii.len());
    for &t in radii {
        let z: Vec<Complex64> = direction.iter().map(|d| d * (t / norm)).collect();
        let j = j_operator(field, &z)?;
        let r = real_part(reference.value(&z)?, "reference defining function")?;
        let defect = (j - 1.0).abs();
        samples.push(OrderSample::new(t, r, defect));
    }
    fit_order(samples)
}

/// Log-log regression of already evaluated defects against `r`.
pub fn fit_order(samples: Vec<OrderSample>) -> Result<OrderFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|s| !s.censored)
        .map(|s| (s.r.ln(), s.defect.ln()))
        .unzip();
    if xs.is_empty() {
        return Ok(OrderFit {
            status: OrderStatus::Exact,
            order: None,
            stderr: None,
            samples,
        });
    }
    if xs.len() < MIN_UNCENSORED {
        return Ok(OrderFit {
            status: OrderStatus::Indeterminate,
            order: None,
            stderr: None,
            samples,
        });
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(OrderFit {
        status: OrderStatus::Fitted,
        order: Some(fit.slope),
        stderr: Some(fit.slope_stderr),
        samples,
    })
}

const MIN_FIT_SAMPLES_ORDER: usize = 8;
