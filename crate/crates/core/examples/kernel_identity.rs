//! `J(k) = (−1)ⁿ C_n k^{n+2}` for the Bergman kernel of the ball, and
//! its failure for the density of `B³/{±I}`.

use bergman::geometry::kernel_ma_identity;
use bergman::kernels::ball_kernel;
use bergman::{FiniteUnitaryGroup, KernelSpec, KernelVariant, Result};
use num_complex::Complex64 as C;

fn main() -> Result<()> {
    for n in 1..=4 {
        let z: Vec<C> = (0..n).map(|i| C::new(0.3, -0.1 * i as f64)).collect();
        let id = kernel_ma_identity(ball_kernel(n).as_ref(), &z)?;
        println!("ball n={n}: J = {:.9e}, rhs = {:.9e}, relative {:.1e}", id.j, id.rhs, id.relative);
    }
    let spec = KernelSpec::new(FiniteUnitaryGroup::cyclic_diagonal(3, &[1, 1, 1], 2)?, KernelVariant::ClosedForm)?;
    let z = [C::new(0.4, 0.0), C::new(0.1, 0.1), C::new(0.0, 0.0)];
    let id = kernel_ma_identity(spec.bergman_density().as_ref(), &z)?;
    println!("B³/{{±I}}: J = {:.6e}, rhs = {:.6e}, relative {:.3}", id.j, id.rhs, id.relative);
    Ok(())
}
