//! Fefferman's recursion on `B²` from a perturbed defining function: the
//! boundary order of `J(uˢ) − 1` grows with `s`.

use bergman::fefferman::{boundary_order_fit, default_radii, DefiningField, FeffermanChain, OrderStatus};
use bergman::kernels::{Domain, FnField};
use bergman::Result;
use num_complex::Complex64 as C;

fn main() -> Result<()> {
    let a = 0.3;
    let r = FnField::new(2, Domain::Ball, "(1 − |z|²)(1 + a|z₁|²)", move |p| {
        let base = (-&p.norm_sqr()).add_constant(1.0.into());
        Ok(&base * &(&p.z[0] * &p.zbar[0]).scale_real(a).add_constant(1.0.into()))
    });
    let origin = [C::new(0.0, 0.0); 2];
    let chain = FeffermanChain::new(DefiningField::new(r.clone(), origin.to_vec())?)?;
    let dir = [C::new(1.0, 0.0), C::new(0.0, 0.0)];
    for s in 1..=chain.len() {
        let fit = boundary_order_fit(chain.u(s)?.as_ref(), &dir, &default_radii(), r.as_ref())?;
        let last = fit.samples.last().expect("samples present");
        match fit.status {
            OrderStatus::Fitted => println!(
                "u{s}: order {:.3} ± {:.3}, |J − 1| = {:.2e} at t = {}",
                fit.order.unwrap_or(f64::NAN),
                fit.stderr.unwrap_or(f64::NAN),
                last.defect,
                last.t
            ),
            status => println!("u{s}: {status:?}"),
        }
    }
    Ok(())
}
