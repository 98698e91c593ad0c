//! Finite subgroups of `U(n)` acting on the unit ball.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cap on the number of stored elements.
pub const MAX_GROUP_ORDER: usize = 10_000;

/// Tolerance for matching elements, unitarity and fixed points.
pub const GROUP_TOL: f64 = 1e-10;

/// Group description as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GroupSpec {
    #[default]
    Trivial,
    CyclicDiagonal { weights: Vec<i64>, order: u64 },
    /// Matrices as rows of `[re, im]` entries.
    Explicit { matrices: Vec<Vec<Vec<[f64; 2]>>> },
}

/// Compact command-line form: `trivial`, `cyclic-diagonal:W1,…,Wn/K`, or an
/// inline JSON object.
impl std::str::FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::config("group", e.to_string()));
        }
        if s == "trivial" {
            return Ok(GroupSpec::Trivial);
        }
        let bad = || Error::config("group", format!("expected `trivial`, `cyclic-diagonal:W1,…,Wn/K` or JSON, got `{s}`"));
        let rest = s.strip_prefix("cyclic-diagonal:").ok_or_else(bad)?;
        let (weights, order) = rest.split_once('/').ok_or_else(bad)?;
        let weights = weights
            .split(',')
            .map(|w| w.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        let order = order.trim().parse::<u64>().map_err(|_| bad())?;
        Ok(GroupSpec::CyclicDiagonal { weights, order })
    }
}

impl GroupSpec {
    pub fn build(&self, dim: usize) -> Result<FiniteUnitaryGroup> {
        match self {
            GroupSpec::Trivial => FiniteUnitaryGroup::trivial(dim),
            GroupSpec::CyclicDiagonal { weights, order } => {
                if weights.len() != dim {
                    return Err(Error::config(
                        "group.weights",
                        format!("expected {dim} weights, got {}", weights.len()),
                    ));
                }
                if *order == 0 {
                    return Err(Error::config("group.order", "must be at least 1"));
                }
                FiniteUnitaryGroup::cyclic_diagonal(dim, weights, *order)
            }
            GroupSpec::Explicit { matrices } => {
                let mats = matrices
                    .iter()
                    .map(|m| {
                        if m.len() != dim || m.iter().any(|row| row.len() != dim) {
                            return Err(Error::config(
                                "group.matrices",
                                format!("every matrix must be {dim}x{dim}"),
                            ));
                        }
                        Ok(DMatrix::from_fn(dim, dim, |i, j| {
                            Complex64::new(m[i][j][0], m[i][j][1])
                        }))
                    })
                    .collect::<Result<Vec<_>>>()?;
                FiniteUnitaryGroup::explicit(dim, mats)
            }
        }
    }
}

/// A finite group stored as its full element list.
#[derive(Debug, Clone)]
pub struct FiniteUnitaryGroup {
    dim: usize,
    elements: Vec<DMatrix<Complex64>>,
    dets: Vec<Complex64>,
}

impl FiniteUnitaryGroup {
    pub fn trivial(dim: usize) -> Result<Self> {
        Self::explicit(dim, vec![DMatrix::identity(dim, dim)])
    }

    /// Group generated by `diag(e^{2πi w₁/k}, …, e^{2πi wₙ/k})`.
    ///
    /// Powers that coincide (when `gcd(k, w) > 1`) are stored once. No
    /// fixed-point check happens here; see [`FiniteUnitaryGroup::validate`].
    pub fn cyclic_diagonal(dim: usize, weights: &[i64], order: u64) -> Result<Self> {
        if weights.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for dimension {dim}",
                weights.len()
            )));
        }
        if order as usize > MAX_GROUP_ORDER {
            return Err(Error::GroupTooLarge {
                size: order as usize,
                max: MAX_GROUP_ORDER,
            });
        }
        let k = order.max(1) as i64;
        let mut seen: Vec<Vec<i64>> = Vec::new();
        let mut elements = Vec::new();
        for m in 0..k {
            let residues: Vec<i64> = weights.iter().map(|w| (w * m).rem_euclid(k)).collect();
            if seen.contains(&residues) {
                continue;
            }
            let diag = residues
                .iter()
                .map(|&r| root_of_unity(r, k))
                .collect::<Vec<_>>();
            elements.push(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)));
            seen.push(residues);
        }
        Self::explicit(dim, elements)
    }

    pub fn explicit(dim: usize, elements: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("dimension must be positive".into()));
        }
        if elements.is_empty() {
            return Err(Error::DimensionMismatch("group needs at least one element".into()));
        }
        if elements.len() > MAX_GROUP_ORDER {
            return Err(Error::GroupTooLarge {
                size: elements.len(),
                max: MAX_GROUP_ORDER,
            });
        }
        if let Some(bad) = elements.iter().find(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "element is {}x{}, expected {dim}x{dim}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        let dets = elements.iter().map(|m| m.determinant()).collect();
        Ok(FiniteUnitaryGroup {
            dim,
            elements,
            dets,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[DMatrix<Complex64>] {
        &self.elements
    }

    pub fn dets(&self) -> &[Complex64] {
        &self.dets
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1 && max_dist(&self.elements[0], &DMatrix::identity(self.dim, self.dim)) <= GROUP_TOL
    }

    pub fn element_det(&self, index: usize) -> Result<Complex64> {
        self.dets.get(index).copied().ok_or(Error::IndexOutOfRange {
            index,
            len: self.order(),
        })
    }

    /// Index of the stored element within [`GROUP_TOL`] of `m`.
    pub fn find(&self, m: &DMatrix<Complex64>) -> Option<usize> {
        self.elements.iter().position(|e| max_dist(e, m) <= GROUP_TOL)
    }

    pub fn validate(&self) -> ValidationReport {
        let id = DMatrix::<Complex64>::identity(self.dim, self.dim);
        let contains_identity = self.find(&id).is_some();

        let mut elements = Vec::with_capacity(self.order());
        for (index, g) in self.elements.iter().enumerate() {
            let unitarity_defect = max_dist(&(g.adjoint() * g), &id);
            let is_identity = max_dist(g, &id) <= GROUP_TOL;
            let fixed_point_margin = (!is_identity).then(|| (g - &id).determinant().norm());
            elements.push(ElementReport {
                index,
                det: self.dets[index],
                unitarity_defect,
                fixed_point_margin,
                inverse_present: self.find(&g.adjoint()).is_some(),
            });
        }

        let mut closure_defect: f64 = 0.0;
        for a in &self.elements {
            for b in &self.elements {
                let p = a * b;
                let nearest = self
                    .elements
                    .iter()
                    .map(|e| max_dist(e, &p))
                    .fold(f64::INFINITY, f64::min);
                closure_defect = closure_defect.max(nearest);
            }
        }

        let max_unitarity_defect = elements
            .iter()
            .map(|e| e.unitarity_defect)
            .fold(0.0, f64::max);
        let min_fixed_point_margin = elements
            .iter()
            .filter_map(|e| e.fixed_point_margin)
            .fold(f64::INFINITY, f64::min);

        ValidationReport {
            contains_identity,
            unitary: max_unitarity_defect <= GROUP_TOL,
            closed: closure_defect <= GROUP_TOL && elements.iter().all(|e| e.inverse_present),
            fixed_point_free: min_fixed_point_margin > GROUP_TOL,
            max_unitarity_defect,
            max_closure_defect: closure_defect,
            min_fixed_point_margin,
            elements,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ElementReport {
    pub index: usize,
    pub det: Complex64,
    /// `‖γ*γ − I‖_max`
    pub unitarity_defect: f64,
    /// `|det(γ − I)|`, absent for the identity.
    pub fixed_point_margin: Option<f64>,
    pub inverse_present: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub contains_identity: bool,
    pub unitary: bool,
    pub closed: bool,
    pub fixed_point_free: bool,
    pub max_unitarity_defect: f64,
    pub max_closure_defect: f64,
    /// Infinite when the group is trivial.
    pub min_fixed_point_margin: f64,
    pub elements: Vec<ElementReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.contains_identity && self.unitary && self.closed && self.fixed_point_free
    }
}

fn root_of_unity(r: i64, k: i64) -> Complex64 {
    // Exact values on the axes keep products of elements exact.
    match (4 * r).checked_rem(k) {
        Some(0) => match (4 * r / k).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        },
        _ => Complex64::from_polar(1.0, 2.0 * PI * r as f64 / k as f64),
    }
}

fn max_dist(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
