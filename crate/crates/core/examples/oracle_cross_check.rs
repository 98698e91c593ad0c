//! Jet derivatives against Richardson-extrapolated finite differences for
//! the potential of the ball and the `J` operator of its defining function.

use bergman::fd::{fd_j_operator, fd_metric};
use bergman::geometry::{j_operator, metric};
use bergman::kernels::{ball_kernel, log_field, Domain, FnField};
use bergman::{FdConfig, Result};
use num_complex::Complex64 as C;

fn main() -> Result<()> {
    let cfg = FdConfig::default();
    for n in 1..=3 {
        let z: Vec<C> = (0..n).map(|i| C::new(0.25, 0.1 * i as f64)).collect();
        let u = log_field(ball_kernel(n));
        let g = metric(u.as_ref(), &z)?;
        let h = fd_metric(u.as_ref(), &z, &cfg)?;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((g.get(i, j) - h[i][j]).norm() / g.max_abs());
            }
        }
        let r = FnField::new(n, Domain::Ball, "1 − |z|²", |p| Ok((-&p.norm_sqr()).add_constant(1.0.into())));
        let j = j_operator(r.as_ref(), &z)?;
        let jf = fd_j_operator(r.as_ref(), &z, &cfg)?;
        println!("n={n}: metric relative error {worst:.2e}, J jet {j:.12} vs oracle {jf:.12}");
    }
    Ok(())
}
