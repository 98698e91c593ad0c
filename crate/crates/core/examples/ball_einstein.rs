//! The Bergman metric of the unit ball is Kähler–Einstein with constant −1
//! and its B-invariant equals `(n+1)ⁿπⁿ/n!` everywhere.

use bergman::geometry::{b_invariant, einstein_constant, EinsteinDiagnostics};
use bergman::kernels::{ball_kernel, log_field};
use bergman::Result;
use num_complex::Complex64 as C;

fn main() -> Result<()> {
    for n in 1..=4 {
        let k = ball_kernel(n);
        let u = log_field(k.clone());
        let z: Vec<C> = (0..n).map(|i| C::new(0.4 / (i + 1) as f64, 0.1 * i as f64)).collect();
        let d = EinsteinDiagnostics::evaluate(u.as_ref(), &z)?;
        let b = b_invariant(k.as_ref(), &z)?;
        println!(
            "n={n}: ‖Ric + g‖/‖g‖ = {:.2e}, det g = {:.6}, B = {:.9} (C_n = {:.9})",
            d.residual_norm,
            d.metric_det,
            b,
            einstein_constant(n)
        );
    }
    Ok(())
}
