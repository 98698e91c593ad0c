//! Jets of `(z, z̄)`: arithmetic, series composition and derivative
//! extraction at a point of `C²`.

use bergman::jets::{det_jet, Jet};
use bergman::{Direction, Result};
use num_complex::Complex64 as C;

fn main() -> Result<()> {
    let z0 = [C::new(0.3, 0.1), C::new(-0.2, 0.0)];
    let order = 4;
    let z1 = Jet::coordinate(&z0, 0, Direction::Holomorphic, order)?;
    let w1 = Jet::coordinate(&z0, 0, Direction::Antiholomorphic, order)?;
    let z2 = Jet::coordinate(&z0, 1, Direction::Holomorphic, order)?;
    let w2 = Jet::coordinate(&z0, 1, Direction::Antiholomorphic, order)?;

    let s = &(&z1 * &w1) + &(&z2 * &w2);
    let u = (-&s).add_constant(C::new(1.0, 0.0)).ln()?.scale_real(-3.0);
    println!("u = −3 log(1 − |z|²) at z0: {:.12}", u.constant_term().re);
    println!("u_1 = {:.12}", u.first_derivative(0));
    println!("u_11̄ = {:.12}", u.mixed_second(0, 0));
    println!("∂³u/∂z₁²∂z̄₁ = {:.12}", u.extract_deriv(&[2, 0], &[1, 0])?);

    let back = u.scale_real(-1.0 / 3.0).exp();
    println!("exp(log(1 − |z|²)) round trip defect: {:.2e}", back.max_abs_diff(&(-&s).add_constant(C::new(1.0, 0.0))));

    let g = [
        [u.partial_shift(0, 0)?, u.partial_shift(0, 1)?],
        [u.partial_shift(1, 0)?, u.partial_shift(1, 1)?],
    ];
    let det = det_jet(&g.map(|row| row.to_vec()))?;
    println!("det(u_ij̄) as a {}-jet: value {:.12}, {} coefficients", det.order(), det.constant_term().re, det.coeffs().len());
    Ok(())
}
