//! Truncated multivariate Taylor jets in the formal variables
//! `(ζ₁..ζₙ, ω₁..ωₙ)`.
//!
//! A [`Jet`] of order `d` stores the Taylor coefficients of
//! `f(z₀ + ζ, z̄₀ + ω)` for every monomial `ζ^α ω^β` with `|α| + |β| ≤ d`.
//! Treating `ω` as independent of `ζ` turns every mixed Wirtinger derivative
//! `∂^{|α|+|β|} f / ∂z^α ∂z̄^β` at the base point into `α!·β!` times one
//! stored coefficient.
//!
//! Variables `0..n` are the holomorphic directions, `n..2n` the
//! antiholomorphic ones.

mod det;
mod layout;
mod series;

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

pub use det::det_jet;
pub use layout::{Layout, MAX_ORDER, MAX_VARS};

use crate::error::{Error, Result};

/// Which family of coordinate functions a jet variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `z_i`, carried by the formal variable `ζ_i`.
    Holomorphic,
    /// `z̄_i`, carried by the formal variable `ω_i`.
    Antiholomorphic,
}

#[derive(Clone, Debug)]
pub struct Jet {
    layout: Arc<Layout>,
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn constant(c: Complex64, nvars: usize, order: usize) -> Result<Jet> {
        let layout = Layout::get(nvars, order)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); layout.len()];
        coeffs[0] = c;
        Ok(Jet { layout, coeffs })
    }

    pub fn zero(nvars: usize, order: usize) -> Result<Jet> {
        Jet::constant(Complex64::new(0.0, 0.0), nvars, order)
    }

    /// Jet of the coordinate function `z_i` (or `z̄_i`) about `z0`.
    /// `i` is zero-based.
    pub fn coordinate(
        z0: &[Complex64],
        i: usize,
        direction: Direction,
        order: usize,
    ) -> Result<Jet> {
        let n = z0.len();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        let (value, var) = match direction {
            Direction::Holomorphic => (z0[i], i),
            Direction::Antiholomorphic => (z0[i].conj(), n + i),
        };
        let mut jet = Jet::constant(value, 2 * n, order)?;
        jet.set_linear(var, Complex64::new(1.0, 0.0));
        Ok(jet)
    }

    /// Builds a jet from a coefficient function of the exponent vector
    /// `(α, β)` laid out as one slice of length `2n`.
    pub fn from_fn(
        nvars: usize,
        order: usize,
        mut f: impl FnMut(&[u8]) -> Complex64,
    ) -> Result<Jet> {
        let layout = Layout::get(nvars, order)?;
        let coeffs = (0..layout.len()).map(|r| f(layout.exponents(r))).collect();
        Ok(Jet { layout, coeffs })
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars()
    }

    /// Complex dimension `n` (half the number of formal variables).
    pub fn dim(&self) -> usize {
        self.layout.nvars() / 2
    }

    pub fn order(&self) -> usize {
        self.layout.order()
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn constant_like(&self, c: Complex64) -> Jet {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        coeffs[0] = c;
        Jet {
            layout: self.layout.clone(),
            coeffs,
        }
    }

    fn set_linear(&mut self, var: usize, value: Complex64) {
        if self.order() == 0 {
            return;
        }
        // Degree-one monomials follow the constant in descending lex order.
        self.coeffs[1 + var] = value;
    }

    /// Coefficient of `ζ^α ω^β`; zero beyond the stored order.
    pub fn coeff(&self, alpha: &[usize], beta: &[usize]) -> Complex64 {
        let n = self.dim();
        assert!(alpha.len() == n && beta.len() == n, "multi-index length must be n");
        let mut exps = Vec::with_capacity(2 * n);
        for &e in alpha.iter().chain(beta) {
            if e > MAX_ORDER {
                return Complex64::new(0.0, 0.0);
            }
            exps.push(e as u8);
        }
        self.layout
            .rank(&exps)
            .map_or(Complex64::new(0.0, 0.0), |r| self.coeffs[r])
    }

    /// `∂^{|α|+|β|} f / ∂z^α ∂z̄^β` at the base point.
    pub fn extract_deriv(&self, alpha: &[usize], beta: &[usize]) -> Result<Complex64> {
        let total: usize = alpha.iter().chain(beta).sum();
        if total > self.order() {
            return Err(Error::OrderExceeded {
                requested: total,
                order: self.order(),
            });
        }
        let weight: f64 = alpha.iter().chain(beta).map(|&e| factorial(e)).product();
        Ok(self.coeff(alpha, beta) * weight)
    }

    /// Value, `∂/∂z_i` and `∂/∂z̄_j` shortcuts used by the geometry code.
    pub fn first_derivative(&self, var: usize) -> Complex64 {
        if self.order() == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[1 + var]
    }

    /// Mixed derivative `∂²f/∂z_i∂z̄_j` at the base point.
    pub fn mixed_second(&self, i: usize, j: usize) -> Complex64 {
        let n = self.dim();
        let mut exps = vec![0u8; 2 * n];
        exps[i] += 1;
        exps[n + j] += 1;
        self.layout
            .rank(&exps)
            .map_or(Complex64::new(0.0, 0.0), |r| self.coeffs[r])
    }

    /// Jet of `∂f/∂x_var` at order `d − 1`.
    pub fn differentiate(&self, var: usize) -> Result<Jet> {
        if var >= self.nvars() {
            return Err(Error::IndexOutOfRange {
                index: var,
                len: self.nvars(),
            });
        }
        if self.order() == 0 {
            return Err(Error::OrderExceeded {
                requested: 1,
                order: 0,
            });
        }
        let layout = Layout::get(self.nvars(), self.order() - 1)?;
        let mut exps = vec![0u8; self.nvars()];
        let coeffs = (0..layout.len())
            .map(|r| {
                exps.copy_from_slice(layout.exponents(r));
                let e = exps[var];
                exps[var] += 1;
                let src = self.layout.rank(&exps).expect("shifted monomial within order");
                self.coeffs[src] * f64::from(e + 1)
            })
            .collect();
        Ok(Jet { layout, coeffs })
    }

    /// Jet of `∂²f/∂z_i∂z̄_j` at order `d − 2`.
    pub fn partial_shift(&self, i: usize, j: usize) -> Result<Jet> {
        let n = self.dim();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                len: n,
            });
        }
        if self.order() < 2 {
            return Err(Error::OrderExceeded {
                requested: 2,
                order: self.order(),
            });
        }
        self.differentiate(i)?.differentiate(n + j)
    }

    /// Discards every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Result<Jet> {
        if order > self.order() {
            return Err(Error::OrderExceeded {
                requested: order,
                order: self.order(),
            });
        }
        let layout = Layout::get(self.nvars(), order)?;
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Ok(Jet { layout, coeffs })
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.nvars() != other.nvars() || self.order() != other.order() {
            return Err(Error::LayoutMismatch(format!(
                "({} vars, order {}) vs ({} vars, order {})",
                self.nvars(),
                self.order(),
                other.nvars(),
                other.order()
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Truncated Cauchy product.
    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        let a = &self.coeffs;
        let b = &other.coeffs;
        let mut skip = u32::MAX;
        for &[ia, ib, ic] in self.layout.mul_plan() {
            if ia == skip {
                continue;
            }
            let x = a[ia as usize];
            if x.re == 0.0 && x.im == 0.0 {
                skip = ia;
                continue;
            }
            out[ic as usize] += x * b[ib as usize];
        }
        Ok(Jet {
            layout: self.layout.clone(),
            coeffs: out,
        })
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Jet {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn add_constant(&self, c: Complex64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(Complex64, Complex64) -> Complex64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Largest coefficient-wise distance; infinite for incompatible layouts.
    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        if self.check_compatible(other).is_err() {
            return f64::INFINITY;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max |coeff(β, α) − conj(coeff(α, β))|`, zero for fields that are
    /// real on the diagonal `ω = ζ̄`.
    pub fn conj_symmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut swapped = vec![0u8; 2 * n];
        (0..self.layout.len())
            .map(|r| {
                let e = self.layout.exponents(r);
                swapped[..n].copy_from_slice(&e[n..]);
                swapped[n..].copy_from_slice(&e[..n]);
                let s = self.layout.rank(&swapped).expect("swap preserves degree");
                (self.coeffs[s] - self.coeffs[r].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Sum of jets taken in descending order of constant-term magnitude with
    /// Neumaier-compensated accumulation per coefficient.
    pub fn compensated_sum(terms: &[Jet]) -> Result<Jet> {
        let first = terms
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty sum".into()))?;
        for t in &terms[1..] {
            first.check_compatible(t)?;
        }
        let mut order: Vec<&Jet> = terms.iter().collect();
        order.sort_by(|a, b| {
            b.constant_term()
                .norm()
                .total_cmp(&a.constant_term().norm())
        });
        let len = first.coeffs.len();
        let mut sum = vec![Complex64::new(0.0, 0.0); len];
        let mut comp = vec![Complex64::new(0.0, 0.0); len];
        for t in order {
            for k in 0..len {
                let x = t.coeffs[k];
                sum[k].re = neumaier(sum[k].re, x.re, &mut comp[k].re);
                sum[k].im = neumaier(sum[k].im, x.im, &mut comp[k].im);
            }
        }
        let coeffs = sum.iter().zip(&comp).map(|(s, c)| s + c).collect();
        Ok(Jet {
            layout: first.layout.clone(),
            coeffs,
        })
    }
}

fn neumaier(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl Add for &Jet {
    type Output = Jet;
    /// Panics on layout mismatch; use [`Jet::try_add`] for a checked sum.
    fn add(self, rhs: &Jet) -> Jet {
        self.try_add(rhs).expect("jet layouts must agree")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.try_sub(rhs).expect("jet layouts must agree")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.try_mul(rhs).expect("jet layouts must agree")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale_real(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_jets() {
        let one = Jet::constant(c(1.0, 0.0), 2, 2).unwrap();
        assert_eq!(one.constant_term(), c(1.0, 0.0));
        assert!(one.coeffs()[1..].iter().all(|x| x.norm() == 0.0));

        let zero = Jet::zero(2, 4).unwrap();
        assert_eq!(zero.max_abs(), 0.0);

        let imag = Jet::constant(c(0.0, 1.0), 6, 2).unwrap();
        assert_eq!(imag.constant_term(), c(0.0, 1.0));
        assert_eq!(imag.nvars(), 6);
    }

    #[test]
    fn coordinate_jets() {
        let z0 = [c(0.5, 0.0)];
        let z = Jet::coordinate(&z0, 0, Direction::Holomorphic, 2).unwrap();
        assert_eq!(z.constant_term(), c(0.5, 0.0));
        assert_eq!(z.coeff(&[1], &[0]), c(1.0, 0.0));
        assert_eq!(z.coeff(&[0], &[1]), c(0.0, 0.0));

        let zb = Jet::coordinate(&z0, 0, Direction::Antiholomorphic, 2).unwrap();
        assert_eq!(zb.coeff(&[0], &[1]), c(1.0, 0.0));
        assert_eq!(zb.coeff(&[1], &[0]), c(0.0, 0.0));

        let zb = Jet::coordinate(&[c(0.3, 0.4)], 0, Direction::Antiholomorphic, 2).unwrap();
        assert_eq!(zb.constant_term(), c(0.3, -0.4));

        assert!(matches!(
            Jet::coordinate(&z0, 1, Direction::Holomorphic, 2),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn product_truncates() {
        let z0 = [c(0.0, 0.0)];
        let zeta = Jet::coordinate(&z0, 0, Direction::Holomorphic, 2).unwrap();
        let omega = Jet::coordinate(&z0, 0, Direction::Antiholomorphic, 2).unwrap();
        let p = &zeta * &omega;
        assert_eq!(p.coeff(&[1], &[1]), c(1.0, 0.0));
        assert_eq!(p.max_abs(), 1.0);

        let zeta = zeta.truncate(1).unwrap();
        let omega = omega.truncate(1).unwrap();
        assert_eq!((&zeta * &omega).max_abs(), 0.0);
    }

    #[test]
    fn mismatched_layouts_are_errors() {
        let a = Jet::zero(2, 2).unwrap();
        let b = Jet::zero(2, 3).unwrap();
        let d = Jet::zero(4, 2).unwrap();
        assert!(matches!(a.try_mul(&b), Err(Error::LayoutMismatch(_))));
        assert!(matches!(a.try_add(&d), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn extract_deriv_weights_by_factorials() {
        // f = ζ₁²ω₁² has ∂⁴/∂z²∂z̄² = 4.
        let f = Jet::from_fn(2, 4, |e| if e == [2, 2] { c(1.0, 0.0) } else { c(0.0, 0.0) })
            .unwrap();
        assert_eq!(f.extract_deriv(&[2], &[2]).unwrap(), c(4.0, 0.0));
        assert_eq!(f.extract_deriv(&[0], &[0]).unwrap(), f.constant_term());
        assert!(matches!(
            f.extract_deriv(&[3], &[2]),
            Err(Error::OrderExceeded { .. })
        ));
    }

    #[test]
    fn partial_shift_of_monomials() {
        let f = Jet::from_fn(2, 2, |e| if e == [1, 1] { c(1.0, 0.0) } else { c(0.0, 0.0) })
            .unwrap();
        let s = f.partial_shift(0, 0).unwrap();
        assert_eq!(s.order(), 0);
        assert_eq!(s.constant_term(), c(1.0, 0.0));

        let f = Jet::from_fn(2, 4, |e| if e == [2, 2] { c(1.0, 0.0) } else { c(0.0, 0.0) })
            .unwrap();
        let s = f.partial_shift(0, 0).unwrap();
        assert_eq!(s.order(), 2);
        assert_eq!(s.coeff(&[1], &[1]), c(4.0, 0.0));
        assert_eq!(s.max_abs(), 4.0);

        assert!(matches!(
            Jet::zero(2, 1).unwrap().partial_shift(0, 0),
            Err(Error::OrderExceeded { .. })
        ));
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let big = Jet::constant(c(1.0e16, 0.0), 2, 1).unwrap();
        let small = Jet::constant(c(1.0, 0.0), 2, 1).unwrap();
        let neg = Jet::constant(c(-1.0e16, 0.0), 2, 1).unwrap();
        let s = Jet::compensated_sum(&[big, small, neg]).unwrap();
        assert_eq!(s.constant_term(), c(1.0, 0.0));
    }
}
