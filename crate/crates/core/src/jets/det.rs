//! Determinants over the jet ring without division.

use super::Jet;
use crate::error::{Error, Result};

/// Largest size expanded by cofactors; bigger matrices use Berkowitz.
const LAPLACE_MAX: usize = 4;

/// Determinant of a square matrix of jets sharing one layout.
///
/// Never divides, so pivots whose constant term vanishes are harmless.
pub fn det_jet(m: &[Vec<Jet>]) -> Result<Jet> {
    let n = m.len();
    if n == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch("matrix is not square".into()));
    }
    let first = &m[0][0];
    for row in m {
        for x in row {
            if x.nvars() != first.nvars() || x.order() != first.order() {
                return Err(Error::LayoutMismatch(
                    "matrix entries have different jet layouts".into(),
                ));
            }
        }
    }
    if n <= LAPLACE_MAX {
        let rows: Vec<usize> = (0..n).collect();
        Ok(laplace(m, &rows, &rows))
    } else {
        Ok(berkowitz(m))
    }
}

fn laplace(m: &[Vec<Jet>], rows: &[usize], cols: &[usize]) -> Jet {
    if rows.len() == 1 {
        return m[rows[0]][cols[0]].clone();
    }
    if rows.len() == 2 {
        let a = &m[rows[0]][cols[0]] * &m[rows[1]][cols[1]];
        let b = &m[rows[0]][cols[1]] * &m[rows[1]][cols[0]];
        return &a - &b;
    }
    let sub_rows = &rows[1..];
    let mut acc: Option<Jet> = None;
    let mut minor_cols = Vec::with_capacity(cols.len() - 1);
    for (k, &col) in cols.iter().enumerate() {
        minor_cols.clear();
        minor_cols.extend(cols.iter().copied().filter(|&c| c != col));
        let term = &m[rows[0]][col] * &laplace(m, sub_rows, &minor_cols);
        acc = Some(match acc {
            None => term,
            Some(a) if k % 2 == 0 => &a + &term,
            Some(a) => &a - &term,
        });
    }
    acc.expect("non-empty expansion")
}

/// Samuelson–Berkowitz: builds the characteristic polynomial of each leading
/// principal submatrix from the previous one using only ring operations.
fn berkowitz(m: &[Vec<Jet>]) -> Jet {
    let n = m.len();
    let one = m[0][0].constant_like(1.0.into());
    // Coefficients of det(λI − A_r), highest degree first.
    let mut poly = vec![one.clone(), -&m[0][0]];
    for r in 1..n {
        // Toeplitz column: 1, −a_rr, −R·C, −R·M·C, …, −R·M^{r−1}·C
        let mut toeplitz = vec![one.clone(), -&m[r][r]];
        let mut v: Vec<Jet> = (0..r).map(|i| m[i][r].clone()).collect();
        for _ in 0..r {
            let rc = (0..r)
                .map(|j| &m[r][j] * &v[j])
                .reduce(|a, b| &a + &b)
                .expect("r >= 1");
            toeplitz.push(-&rc);
            v = (0..r)
                .map(|i| {
                    (0..r)
                        .map(|j| &m[i][j] * &v[j])
                        .reduce(|a, b| &a + &b)
                        .expect("r >= 1")
                })
                .collect();
        }
        let mut next = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut acc: Option<Jet> = None;
            for (j, p) in poly.iter().enumerate() {
                if i >= j {
                    let term = &toeplitz[i - j] * p;
                    acc = Some(match acc {
                        None => term,
                        Some(a) => &a + &term,
                    });
                }
            }
            next.push(acc.expect("i >= 0 == j"));
        }
        poly = next;
    }
    let last = poly.pop().expect("non-empty polynomial");
    if n.is_multiple_of(2) {
        last
    } else {
        -&last
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn cj(x: f64) -> Jet {
        Jet::constant(Complex64::new(x, 0.0), 2, 2).unwrap()
    }

    #[test]
    fn identity_and_diagonal() {
        let id = vec![vec![cj(1.0), cj(0.0)], vec![cj(0.0), cj(1.0)]];
        assert_eq!(det_jet(&id).unwrap().constant_term(), Complex64::new(1.0, 0.0));
        let d = vec![vec![cj(2.0), cj(0.0)], vec![cj(0.0), cj(3.0)]];
        assert_eq!(det_jet(&d).unwrap().constant_term(), Complex64::new(6.0, 0.0));
    }

    #[test]
    fn berkowitz_agrees_with_laplace() {
        let vals = [
            [2.0, -1.0, 0.5, 3.0],
            [0.25, 1.5, -2.0, 1.0],
            [1.0, 0.0, 4.0, -0.5],
            [-1.5, 2.5, 1.0, 0.75],
        ];
        let m: Vec<Vec<Jet>> = vals
            .iter()
            .map(|r| r.iter().map(|&x| cj(x)).collect())
            .collect();
        let a = det_jet(&m).unwrap();
        let b = berkowitz(&m);
        assert!((a.constant_term() - b.constant_term()).norm() < 1e-12);
        for k in 1..4 {
            let sub: Vec<Vec<Jet>> = m[..k].iter().map(|r| r[..k].to_vec()).collect();
            let rows: Vec<usize> = (0..k).collect();
            let l = laplace(&sub, &rows, &rows);
            assert!((l.constant_term() - berkowitz(&sub).constant_term()).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_square() {
        let m = vec![vec![cj(1.0), cj(2.0)]];
        assert!(matches!(det_jet(&m), Err(Error::DimensionMismatch(_))));
    }
}
