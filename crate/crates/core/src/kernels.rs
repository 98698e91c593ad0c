//! Jet-evaluable scalar fields: the Bergman kernel of the unit ball, the
//! group-averaged kernel of a ball quotient, two closed forms for quotients,
//! and logarithms of any of them.
//!
//! Kernels are evaluated in polarized form `K(z, w̄)` with `z = z₀ + ζ` and
//! `w̄ = z̄₀ + ω`, so a single jet carries every mixed Wirtinger derivative of
//! the diagonal kernel `K(z, z̄)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{FiniteUnitaryGroup, GroupSpec};
use crate::jets::{Direction, Jet};

/// Evaluation points must satisfy `|z₀| ≤ 1 − BOUNDARY_MARGIN`.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

/// Where a field is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// The open unit ball, shrunk by [`BOUNDARY_MARGIN`].
    Ball,
    /// All of `ℂⁿ` (up to errors raised by the composition itself).
    Everywhere,
}

/// A function of `(z, z̄)` that can be expanded into a [`Jet`] at any point of
/// its domain.
///
/// Evaluation is deterministic, and evaluating at order `d` then truncating
/// to `d' < d` agrees with evaluating at `d'` directly.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn jet(&self, z0: &[Complex64], order: usize) -> Result<Jet>;

    fn domain(&self) -> Domain {
        Domain::Ball
    }

    fn value(&self, z0: &[Complex64]) -> Result<Complex64> {
        Ok(self.jet(z0, 0)?.constant_term())
    }

    fn describe(&self) -> String;
}

pub type Field = Arc<dyn ScalarField>;

impl fmt::Debug for dyn ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.describe())
    }
}

/// Coordinate jets `z_i` and `z̄_i` about one base point.
#[derive(Debug, Clone)]
pub struct PointJets {
    pub z: Vec<Jet>,
    pub zbar: Vec<Jet>,
}

impl PointJets {
    pub fn new(z0: &[Complex64], order: usize) -> Result<Self> {
        let n = z0.len();
        let z = (0..n)
            .map(|i| Jet::coordinate(z0, i, Direction::Holomorphic, order))
            .collect::<Result<_>>()?;
        let zbar = (0..n)
            .map(|i| Jet::coordinate(z0, i, Direction::Antiholomorphic, order))
            .collect::<Result<_>>()?;
        Ok(PointJets { z, zbar })
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn constant(&self, c: f64) -> Jet {
        self.z[0].constant_like(Complex64::new(c, 0.0))
    }

    /// Jets of the holomorphic coordinates after the linear substitution
    /// `z ↦ γ z`.
    pub fn transformed(&self, gamma: &DMatrix<Complex64>) -> Vec<Jet> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.constant(0.0);
                for k in 0..n {
                    let g = gamma[(i, k)];
                    if g.norm() != 0.0 {
                        acc = &acc + &self.z[k].scale(g);
                    }
                }
                acc
            })
            .collect()
    }

    /// `Σ aᵢ bᵢ` over two lists of coordinate jets.
    pub fn pairing(a: &[Jet], b: &[Jet]) -> Jet {
        a.iter()
            .zip(b)
            .map(|(x, y)| x * y)
            .reduce(|acc, t| &acc + &t)
            .expect("dimension is positive")
    }

    /// Jet of `|z|² = Σ z_i z̄_i`.
    pub fn norm_sqr(&self) -> Jet {
        Self::pairing(&self.z, &self.zbar)
    }

    /// Jet of `log|z|²` with the pluriharmonic part `log|z_k|²` of the
    /// largest coordinate expanded separately, so mixed derivatives do not
    /// arise from cancellation. Requires `z0 ≠ 0`.
    pub fn log_norm_sqr(&self) -> Result<Jet> {
        let k = (0..self.dim())
            .max_by(|&a, &b| self.z[a].constant_term().norm().total_cmp(&self.z[b].constant_term().norm()))
            .expect("dimension is positive");
        let a = self.z[k].constant_term();
        if a.norm() == 0.0 {
            return Err(Error::NonpositiveKernel { value: 0.0 });
        }
        let hol = self.z[k].scale(a.inv()).ln()?;
        let antihol = self.zbar[k].scale(a.conj().inv()).ln()?;
        let mut rest = self.constant(0.0);
        for j in (0..self.dim()).filter(|&j| j != k) {
            rest = &rest + &(&self.z[j] * &self.zbar[j]);
        }
        let ratio = &(&rest * &self.z[k].reciprocal()?) * &self.zbar[k].reciprocal()?;
        let tail = ratio.add_constant(1.0.into()).ln()?;
        Ok((&(&hol + &antihol) + &tail).add_constant(a.norm_sqr().ln().into()))
    }
}

pub fn check_in_ball(z0: &[Complex64]) -> Result<()> {
    let radius = z0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !radius.is_finite() || radius > 1.0 - BOUNDARY_MARGIN {
        return Err(Error::PointOutsideBall { radius });
    }
    Ok(())
}

fn check_dim(field_dim: usize, z0: &[Complex64]) -> Result<()> {
    if z0.len() != field_dim {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, field dimension is {field_dim}",
            z0.len()
        )));
    }
    Ok(())
}

/// `n!/πⁿ`, the value of the ball kernel at the origin.
pub fn ball_normalization(n: usize) -> f64 {
    crate::jets::factorial(n) / PI.powi(n as i32)
}

struct BallKernel {
    n: usize,
}

impl ScalarField for BallKernel {
    fn dim(&self) -> usize {
        self.n
    }

    fn jet(&self, z0: &[Complex64], order: usize) -> Result<Jet> {
        check_dim(self.n, z0)?;
        check_in_ball(z0)?;
        let p = PointJets::new(z0, order)?;
        let denom = (-&p.norm_sqr()).add_constant(1.0.into());
        Ok(denom
            .powi(-(self.n as i32 + 1))?
            .scale_real(ball_normalization(self.n)))
    }

    fn describe(&self) -> String {
        format!("ball kernel, n={}", self.n)
    }
}

/// `K(z, w̄) = (n!/πⁿ) / (1 − z·w̄)^{n+1}` on `Bⁿ`.
pub fn ball_kernel(n: usize) -> Field {
    assert!(n >= 1, "dimension must be positive");
    Arc::new(BallKernel { n })
}

struct QuotientKernel {
    group: Arc<FiniteUnitaryGroup>,
}

impl ScalarField for QuotientKernel {
    fn dim(&self) -> usize {
        self.group.dim()
    }

    fn jet(&self, z0: &[Complex64], order: usize) -> Result<Jet> {
        let n = self.dim();
        check_dim(n, z0)?;
        check_in_ball(z0)?;
        let p = PointJets::new(z0, order)?;
        let weight = ball_normalization(n) / self.group.order() as f64;
        let terms = self
            .group
            .elements()
            .iter()
            .zip(self.group.dets())
            .map(|(gamma, &det)| {
                let gz = p.transformed(gamma);
                let denom = (-&PointJets::pairing(&gz, &p.zbar)).add_constant(1.0.into());
                Ok(denom.powi(-(n as i32 + 1))?.scale(det * weight))
            })
            .collect::<Result<Vec<_>>>()?;
        Jet::compensated_sum(&terms)
    }

    fn describe(&self) -> String {
        format!(
            "averaged quotient kernel, n={}, |Γ|={}",
            self.group.dim(),
            self.group.order()
        )
    }
}

/// `K_Γ(z, w̄) = (1/|Γ|) Σ_γ K(γz, w̄) det γ`.
pub fn quotient_kernel(group: Arc<FiniteUnitaryGroup>) -> Field {
    Arc::new(QuotientKernel { group })
}

struct DiscQuotient {
    r: u32,
}

impl ScalarField for DiscQuotient {
    fn dim(&self) -> usize {
        1
    }

    fn jet(&self, z0: &[Complex64], order: usize) -> Result<Jet> {
        check_dim(1, z0)?;
        check_in_ball(z0)?;
        let s = PointJets::new(z0, order)?.norm_sqr();
        let r = self.r as i32;
        let denom = (-&s.powi(r)?).add_constant(1.0.into());
        let k = &s.powi(r - 1)? * &denom.powi(-2)?;
        Ok(k.scale_real(self.r as f64 / PI))
    }

    fn describe(&self) -> String {
        format!("disc quotient closed form, r={}", self.r)
    }
}

/// `K_Γ = (r/π) |z|^{2(r−1)} / (1 − |z|^{2r})²` for the cyclic group of
/// order `r` acting on the unit disc.
pub fn disc_quotient_closed_form(r: u32) -> Field {
    assert!(r >= 1, "group order must be positive");
    Arc::new(DiscQuotient { r })
}

struct AntipodalB3;

impl ScalarField for AntipodalB3 {
    fn dim(&self) -> usize {
        3
    }

    fn jet(&self, z0: &[Complex64], order: usize) -> Result<Jet> {
        check_dim(3, z0)?;
        check_in_ball(z0)?;
        let s = PointJets::new(z0, order)?.norm_sqr();
        let s2 = &s * &s;
        let num = &s * &s2.add_constant(1.0.into());
        let denom = (-&s2).add_constant(1.0.into());
        Ok((&num * &denom.powi(-4)?).scale_real(24.0 / PI.powi(3)))
    }

    fn describe(&self) -> String {
        "B³/{±I} closed form".into()
    }
}

/// `K_Γ = (4!/π³) |z|²(1 + |z|⁴)/(1 − |z|⁴)⁴` for `Γ = {±I}` acting on `B³`.
pub fn antipodal_b3_closed_form() -> Field {
    Arc::new(AntipodalB3)
}

/// `log K_Γ` of a closed form, assembled term by term from
/// `log|z|²`, so the vanishing of `K_Γ` at the origin costs no accuracy
/// nearby.
struct ClosedFormPotential {
    kind: ClosedKind,
}

#[derive(Clone, Copy)]
enum ClosedKind {
    Disc(u32),
    AntipodalB3,
}

impl ScalarField for ClosedFormPotential {
    fn dim(&self) -> usize {
        match self.kind {
            ClosedKind::Disc(_) => 1,
            ClosedKind::AntipodalB3 => 3,
        }
    }

    fn jet(&self, z0: &[Complex64], order: usize) -> Result<Jet> {
        check_dim(self.dim(), z0)?;
        check_in_ball(z0)?;
        let pj = PointJets::new(z0, order)?;
        let s = pj.norm_sqr();
        let one = Complex64::new(1.0, 0.0);
        match self.kind {
            ClosedKind::Disc(r) => {
                let denom = (-&s.powi(r as i32)?).add_constant(one).ln()?;
                let mut u = denom.scale_real(-2.0).add_constant((r as f64 / PI).ln().into());
                if r > 1 {
                    u = &u + &pj.log_norm_sqr()?.scale_real(r as f64 - 1.0);
                }
                Ok(u)
            }
            ClosedKind::AntipodalB3 => {
                let s2 = &s * &s;
                let num = s2.add_constant(one).ln()?;
                let denom = (-&s2).add_constant(one).ln()?;
                let u = &(&pj.log_norm_sqr()? + &num) - &denom.scale_real(4.0);
                Ok(u.add_constant((24.0 / PI.powi(3)).ln().into()))
            }
        }
    }

    fn describe(&self) -> String {
        match self.kind {
            ClosedKind::Disc(r) => format!("log of disc quotient closed form, r={r}"),
            ClosedKind::AntipodalB3 => "log of B³/{±I} closed form".into(),
        }
    }
}

struct LogField {
    inner: Field,
}

impl ScalarField for LogField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn domain(&self) -> Domain {
        self.inner.domain()
    }

    fn jet(&self, z0: &[Complex64], order: usize) -> Result<Jet> {
        let k = self.inner.jet(z0, order)?;
        k.ln().map_err(|e| match e {
            Error::NonpositiveConstantTerm { re, .. } => Error::NonpositiveKernel { value: re },
            other => other,
        })
    }

    fn describe(&self) -> String {
        format!("log({})", self.inner.describe())
    }
}

/// `u = log k`.
pub fn log_field(k: Field) -> Field {
    Arc::new(LogField { inner: k })
}

struct ScaledField {
    inner: Field,
    factor: f64,
}

impl ScalarField for ScaledField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn domain(&self) -> Domain {
        self.inner.domain()
    }

    fn jet(&self, z0: &[Complex64], order: usize) -> Result<Jet> {
        Ok(self.inner.jet(z0, order)?.scale_real(self.factor))
    }

    fn describe(&self) -> String {
        format!("{} · {}", self.factor, self.inner.describe())
    }
}

pub fn scaled_field(inner: Field, factor: f64) -> Field {
    Arc::new(ScaledField { inner, factor })
}

type JetFn = dyn Fn(&PointJets) -> Result<Jet> + Send + Sync;

/// Field given by a closure over the coordinate jets.
pub struct FnField {
    dim: usize,
    domain: Domain,
    name: String,
    f: Box<JetFn>,
}

impl FnField {
    pub fn new(
        dim: usize,
        domain: Domain,
        name: impl Into<String>,
        f: impl Fn(&PointJets) -> Result<Jet> + Send + Sync + 'static,
    ) -> Field {
        Arc::new(FnField {
            dim,
            domain,
            name: name.into(),
            f: Box::new(f),
        })
    }
}

impl ScalarField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn domain(&self) -> Domain {
        self.domain
    }

    fn jet(&self, z0: &[Complex64], order: usize) -> Result<Jet> {
        check_dim(self.dim, z0)?;
        if self.domain == Domain::Ball {
            check_in_ball(z0)?;
        }
        (self.f)(&PointJets::new(z0, order)?)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelVariant {
    /// Group-averaged sum over the elements.
    #[default]
    Averaged,
    /// Matching closed form: the disc quotient for `n = 1`, or the `B³/{±I}`
    /// formula.
    ClosedForm,
}

/// A ball quotient kernel: dimension, group and evaluation route.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    group: Arc<FiniteUnitaryGroup>,
    variant: KernelVariant,
}

impl KernelSpec {
    pub fn new(group: FiniteUnitaryGroup, variant: KernelVariant) -> Result<Self> {
        let spec = KernelSpec {
            group: Arc::new(group),
            variant,
        };
        if variant == KernelVariant::ClosedForm {
            spec.closed_form()?;
        }
        Ok(spec)
    }

    pub fn from_group_spec(dim: usize, group: &GroupSpec, variant: KernelVariant) -> Result<Self> {
        Self::new(group.build(dim)?, variant)
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    pub fn group(&self) -> &Arc<FiniteUnitaryGroup> {
        &self.group
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }

    fn closed_form(&self) -> Result<Field> {
        Ok(match self.closed_kind()? {
            ClosedKind::Disc(r) => disc_quotient_closed_form(r),
            ClosedKind::AntipodalB3 => antipodal_b3_closed_form(),
        })
    }

    fn closed_kind(&self) -> Result<ClosedKind> {
        let n = self.dim();
        let g = &self.group;
        if n == 1 {
            let r = g.order();
            let cyclic = FiniteUnitaryGroup::cyclic_diagonal(1, &[1], r as u64)?;
            if cyclic.elements().iter().all(|e| g.find(e).is_some()) {
                return Ok(ClosedKind::Disc(r as u32));
            }
        }
        if n == 3 && g.order() == 2 {
            let minus = DMatrix::from_diagonal_element(3, 3, Complex64::new(-1.0, 0.0));
            if g.find(&minus).is_some() && g.find(&DMatrix::identity(3, 3)).is_some() {
                return Ok(ClosedKind::AntipodalB3);
            }
        }
        Err(Error::config(
            "kernel",
            "closed forms exist only for cyclic disc quotients and B³/{±I}",
        ))
    }

    /// `K_Γ`, the averaged kernel on `Bⁿ`.
    pub fn kernel(&self) -> Field {
        match self.variant {
            KernelVariant::Averaged if self.group.is_trivial() => ball_kernel(self.dim()),
            KernelVariant::Averaged => quotient_kernel(self.group.clone()),
            KernelVariant::ClosedForm => self.closed_form().expect("checked in constructor"),
        }
    }

    /// Pull-back of the Bergman kernel density of `Bⁿ/Γ`, i.e. `|Γ|·K_Γ`.
    /// This is the density whose `B`-invariant tends to `(n+1)ⁿπⁿ/n!`.
    pub fn bergman_density(&self) -> Field {
        let order = self.group.order();
        if order == 1 {
            self.kernel()
        } else {
            scaled_field(self.kernel(), order as f64)
        }
    }

    /// `u = log K_Γ`. Closed forms are differentiated through their
    /// logarithm directly.
    pub fn potential(&self) -> Field {
        match self.variant {
            KernelVariant::ClosedForm => Arc::new(ClosedFormPotential {
                kind: self.closed_kind().expect("checked in constructor"),
            }),
            KernelVariant::Averaged => log_field(self.kernel()),
        }
    }
}
