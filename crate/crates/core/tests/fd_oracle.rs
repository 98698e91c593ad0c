mod common;

use bergman::fd::{fd_j_operator, fd_metric, fd_wirtinger, FdConfig};
use bergman::geometry::{j_operator, metric};
use bergman::kernels::{ball_kernel, log_field};
use common::*;

#[test]
fn battery_has_enough_fields() {
    assert!(battery().len() >= 20);
}

#[test]
fn jets_match_oracle_on_battery() {
    let out = oracle_battery(10, 0.8, &FdConfig::default());
    assert!(out.worst < 1e-6, "{out:?}");
}

#[test]
fn richardson_gains_an_order_of_magnitude() {
    let coarse = FdConfig::new(1e-2, 0).unwrap();
    let fine = FdConfig::default();
    let plain = oracle_battery(3, 0.8, &coarse).worst;
    let extrapolated = oracle_battery(3, 0.8, &fine).worst;
    assert!(extrapolated * 10.0 <= plain, "level 0: {plain:e}, level 2: {extrapolated:e}");
}

#[test]
fn metric_and_j_match_oracle() {
    let cfg = FdConfig::default();
    for n in 1..=3 {
        let k = ball_kernel(n);
        let u = log_field(k.clone());
        for z in random_points(n, 10, 0.8, 9 + n as u64) {
            let g = metric(u.as_ref(), &z).unwrap();
            let oracle = fd_metric(u.as_ref(), &z, &cfg).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert!((g.get(i, j) - oracle[i][j]).norm() <= 1e-6 * g.max_abs());
                }
            }
            let j_jet = j_operator(k.as_ref(), &z).unwrap();
            let j_fd = fd_j_operator(k.as_ref(), &z, &cfg).unwrap();
            assert!((j_jet - j_fd).abs() <= 1e-6 * j_jet.abs(), "n={n}: {j_jet} vs {j_fd}");
        }
    }
}

#[test]
fn log_kernel_of_disc_at_half() {
    let f = |z: &[C]| Ok(c(-(1.0 - z[0].norm_sqr()).ln(), 0.0));
    let d = fd_wirtinger(&f, &[c(0.5, 0.0)], 0, 0, &FdConfig::default()).unwrap();
    assert!((d.re - 1.77778).abs() < 1e-5);
}

#[test]
fn stencil_outside_the_ball_is_an_evaluation_failure() {
    let k = ball_kernel(1);
    let f = |z: &[C]| k.value(z);
    let cfg = FdConfig::default();
    // Beyond the unit ball the step is not shrunk, so the stencil leaves the domain.
    let err = fd_wirtinger(&f, &[c(1.0 - 1e-3, 0.0)], 0, 0, &cfg);
    assert!(err.is_ok());
    let err = fd_wirtinger(&f, &[c(1.0, 0.0)], 0, 0, &cfg).unwrap_err();
    assert!(matches!(err, bergman::Error::EvaluationFailed(_)));
}
