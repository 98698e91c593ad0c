//! `u = log K_Γ` on the disc modulo the cyclic group of order `r` solves
//! `u_{11̄} = 2πr·eᵘ` away from the origin.

use std::f64::consts::PI;

use bergman::geometry::monge_ampere;
use bergman::{FiniteUnitaryGroup, KernelSpec, KernelVariant, Result};
use num_complex::Complex64 as C;

fn main() -> Result<()> {
    for r in 1..=6u64 {
        let group = FiniteUnitaryGroup::cyclic_diagonal(1, &[1], r)?;
        let closed = KernelSpec::new(group.clone(), KernelVariant::ClosedForm)?.potential();
        let averaged = KernelSpec::new(group, KernelVariant::Averaged)?.potential();
        let c = 2.0 * PI * r as f64;
        let mut worst: (f64, f64) = (0.0, 0.0);
        let mut rejected = 0;
        for i in 1..=18 {
            let z = [C::from_polar(0.05 * i as f64, 0.7)];
            worst.0 = worst.0.max(monge_ampere(closed.as_ref(), &z, c)?.relative());
            // Near the origin the averaged sum cancels to a few digits.
            match monge_ampere(averaged.as_ref(), &z, c) {
                Ok(ma) => worst.1 = worst.1.max(ma.relative()),
                Err(_) => rejected += 1,
            }
        }
        println!(
            "r={r}: max relative residual closed form {:.2e}, averaged sum {:.2e} ({rejected} points rejected)",
            worst.0, worst.1
        );
    }
    Ok(())
}
