//! Composition of jets with scalar analytic functions.
//!
//! For `f = c₀ + x` with `x` free of a constant term, `x^{d+1}` vanishes at
//! order `d`, so `φ(f) = Σ_{k≤d} φ^{(k)}(c₀)/k! · x^k` is exact to the
//! truncation order. The sum is evaluated by Horner's rule.

use num_complex::Complex64;

use super::Jet;
use crate::error::{Error, Result};

impl Jet {
    /// `Σ a_k x^k` with `x = self − self(0)`.
    fn compose(&self, taylor: &[Complex64]) -> Jet {
        let mut x = self.clone();
        x.coeffs[0] = Complex64::new(0.0, 0.0);
        let mut acc = self.constant_like(taylor[taylor.len() - 1]);
        for &a in taylor[..taylor.len() - 1].iter().rev() {
            acc = (&acc * &x).add_constant(a);
        }
        acc
    }

    fn require_positive_real(&self) -> Result<Complex64> {
        let c0 = self.constant_term();
        if c0.re > 0.0 && c0.re.is_finite() {
            Ok(c0)
        } else {
            Err(Error::NonpositiveConstantTerm { re: c0.re, im: c0.im })
        }
    }

    pub fn reciprocal(&self) -> Result<Jet> {
        let c0 = self.constant_term();
        if c0.norm() <= f64::MIN_POSITIVE || !c0.norm().is_finite() {
            return Err(Error::VanishingConstantTerm);
        }
        let inv = c0.inv();
        let mut taylor = Vec::with_capacity(self.order() + 1);
        let mut term = inv;
        for _ in 0..=self.order() {
            taylor.push(term);
            term *= -inv;
        }
        Ok(self.compose(&taylor))
    }

    /// Integer power; negative exponents go through [`Jet::reciprocal`].
    pub fn powi(&self, k: i32) -> Result<Jet> {
        if k < 0 {
            return self.reciprocal()?.powi(-k);
        }
        let mut base = self.clone();
        let mut acc = self.constant_like(Complex64::new(1.0, 0.0));
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// Principal logarithm; the constant term must have positive real part.
    pub fn ln(&self) -> Result<Jet> {
        let c0 = self.require_positive_real()?;
        let inv = c0.inv();
        let mut taylor = Vec::with_capacity(self.order() + 1);
        taylor.push(c0.ln());
        let mut power = inv;
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            taylor.push(power * (sign / k as f64));
            power *= inv;
        }
        Ok(self.compose(&taylor))
    }

    pub fn exp(&self) -> Jet {
        let e0 = self.constant_term().exp();
        let mut taylor = Vec::with_capacity(self.order() + 1);
        let mut term = e0;
        for k in 0..=self.order() {
            taylor.push(term);
            term /= (k + 1) as f64;
        }
        self.compose(&taylor)
    }

    /// Real power `f^p` on the principal branch.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let c0 = self.require_positive_real()?;
        let inv = c0.inv();
        let mut taylor = Vec::with_capacity(self.order() + 1);
        let mut term = c0.powf(p);
        for k in 0..=self.order() {
            taylor.push(term);
            // binom(p, k+1) / binom(p, k) = (p − k)/(k + 1)
            term *= inv * ((p - k as f64) / (k + 1) as f64);
        }
        Ok(self.compose(&taylor))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Direction;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn one_minus_zeta_omega(order: usize, z0: f64) -> Jet {
        let p = [c(z0)];
        let z = Jet::coordinate(&p, 0, Direction::Holomorphic, order).unwrap();
        let zb = Jet::coordinate(&p, 0, Direction::Antiholomorphic, order).unwrap();
        (-&(&z * &zb)).add_constant(c(1.0))
    }

    #[test]
    fn reciprocal_of_constant() {
        let r = Jet::constant(c(2.0), 2, 3).unwrap().reciprocal().unwrap();
        assert_eq!(r.constant_term(), c(0.5));
        assert_eq!(r.max_abs(), 0.5);
        assert!(matches!(
            Jet::zero(2, 2).unwrap().reciprocal(),
            Err(Error::VanishingConstantTerm)
        ));
    }

    #[test]
    fn reciprocal_is_geometric_series() {
        let r = one_minus_zeta_omega(4, 0.0).reciprocal().unwrap();
        for k in 0..=2 {
            assert_eq!(r.coeff(&[k], &[k]), c(1.0));
        }
        let off: f64 = r
            .coeffs()
            .iter()
            .map(|x| x.norm())
            .sum::<f64>()
            - 3.0;
        assert!(off.abs() < 1e-15);
    }

    #[test]
    fn log_of_one_minus_abs_squared() {
        let l = one_minus_zeta_omega(4, 0.0).ln().unwrap();
        assert!((l.coeff(&[1], &[1]) - c(-1.0)).norm() < 1e-15);
        assert!((l.coeff(&[2], &[2]) - c(-0.5)).norm() < 1e-15);
    }

    #[test]
    fn cube_root_of_eight() {
        let r = Jet::constant(c(8.0), 2, 3).unwrap().powf(1.0 / 3.0).unwrap();
        assert!((r.constant_term() - c(2.0)).norm() < 1e-15);
        assert!(r.coeffs()[1..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn log_rejects_nonpositive() {
        let f = Jet::constant(c(-1.0), 2, 2).unwrap();
        assert!(matches!(f.ln(), Err(Error::NonpositiveConstantTerm { .. })));
        assert!(matches!(f.powf(0.5), Err(Error::NonpositiveConstantTerm { .. })));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let f = one_minus_zeta_omega(5, 0.3);
        let cube = &(&f * &f) * &f;
        assert!(f.powi(3).unwrap().max_abs_diff(&cube) < 1e-15);
        let inv = f.powi(-2).unwrap();
        let back = &inv * &(&f * &f);
        assert!(back.max_abs_diff(&f.constant_like(c(1.0))) < 1e-14);
    }
}
