//! `B³/{±I}`: the kernel vanishes at the origin, the leading 2×2 block of
//! `u_ij̄` tends to 20 there, and the metric is not Kähler–Einstein.

use std::sync::Arc;

use bergman::geometry::{einstein_residual, leading_block_det, metric};
use bergman::kernels::{antipodal_b3_closed_form, quotient_kernel};
use bergman::{FiniteUnitaryGroup, KernelSpec, KernelVariant, Result};
use num_complex::Complex64 as C;

fn pt(v: [f64; 3]) -> Vec<C> {
    v.iter().map(|&x| C::new(x, 0.0)).collect()
}

fn main() -> Result<()> {
    let group = FiniteUnitaryGroup::cyclic_diagonal(3, &[1, 1, 1], 2)?;
    let averaged = quotient_kernel(Arc::new(group.clone()));
    let closed = antipodal_b3_closed_form();
    for z in [pt([0.0, 0.0, 0.0]), pt([0.3, 0.2, -0.1]), pt([0.1, 0.5, 0.6])] {
        println!(
            "K_Γ{:?}: averaged {:.3e}, closed form {:.3e}",
            z.iter().map(|w| w.re).collect::<Vec<_>>(),
            averaged.value(&z)?.re,
            closed.value(&z)?.re
        );
    }

    let u = KernelSpec::new(group, KernelVariant::ClosedForm)?.potential();
    for t in [1e-1, 1e-2, 1e-3] {
        let z = pt([t, 0.0, 0.0]);
        let block = leading_block_det(u.as_ref(), &z, 2)?;
        let full = metric(u.as_ref(), &z)?.determinant().re;
        println!("t={t:e}: 2×2 block det {block:.10}, full det {full:.4e}");
    }
    println!("Einstein residual at (0.2, 0.1, 0.1): {:.4}", einstein_residual(u.as_ref(), &pt([0.2, 0.1, 0.1]))?);
    Ok(())
}
