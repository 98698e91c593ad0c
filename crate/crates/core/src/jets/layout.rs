//! Dense monomial enumeration shared by every jet of a given shape.
//!
//! Monomials in `nvars` formal variables of total degree at most `order` are
//! ranked degree by degree, and within one degree in descending lexicographic
//! order. The ranking of a monomial does not depend on `order`, so the
//! coefficients of a lower-order jet are a prefix of a higher-order one.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

/// Highest jet order any layout supports.
pub const MAX_ORDER: usize = 12;
/// Highest number of formal variables (twice the complex dimension).
pub const MAX_VARS: usize = 12;

const BITS: u32 = 5;

#[derive(Debug)]
pub struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<u8>,
    degrees: Vec<u8>,
    /// `degree_end[k]` is one past the last rank of degree `k`.
    degree_end: Vec<usize>,
    index: HashMap<u64, u32>,
    mul_plan: OnceLock<Vec<[u32; 3]>>,
}

type LayoutCache = RwLock<HashMap<(usize, usize), Arc<Layout>>>;

impl Layout {
    /// Shared layout for `nvars` variables up to `order`.
    pub fn get(nvars: usize, order: usize) -> Result<Arc<Layout>> {
        if order > MAX_ORDER {
            return Err(Error::OrderTooHigh {
                requested: order,
                max: MAX_ORDER,
            });
        }
        if nvars == 0 || !nvars.is_multiple_of(2) || nvars > MAX_VARS {
            return Err(Error::InvalidVariableCount(nvars));
        }
        static CACHE: OnceLock<LayoutCache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(layout) = cache.read().expect("layout cache poisoned").get(&(nvars, order)) {
            return Ok(layout.clone());
        }
        let layout = Arc::new(Layout::build(nvars, order));
        let mut guard = cache.write().expect("layout cache poisoned");
        Ok(guard.entry((nvars, order)).or_insert(layout).clone())
    }

    fn build(nvars: usize, order: usize) -> Layout {
        let mut exps = Vec::new();
        let mut degrees = Vec::new();
        let mut degree_end = Vec::with_capacity(order + 1);
        let mut current = vec![0u8; nvars];
        for k in 0..=order {
            push_compositions(k, 0, &mut current, &mut exps, &mut degrees);
            degree_end.push(degrees.len());
        }
        let index = exps
            .chunks(nvars)
            .enumerate()
            .map(|(rank, e)| (pack(e), rank as u32))
            .collect();
        Layout {
            nvars,
            order,
            exps,
            degrees,
            degree_end,
            index,
            mul_plan: OnceLock::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    /// Number of monomials of total degree at most `k`.
    pub fn prefix_len(&self, k: usize) -> usize {
        self.degree_end[k.min(self.order)]
    }

    pub fn exponents(&self, rank: usize) -> &[u8] {
        &self.exps[rank * self.nvars..(rank + 1) * self.nvars]
    }

    pub fn degree(&self, rank: usize) -> usize {
        self.degrees[rank] as usize
    }

    /// Rank of a monomial, or `None` when it exceeds the order.
    pub fn rank(&self, exponents: &[u8]) -> Option<usize> {
        debug_assert_eq!(exponents.len(), self.nvars);
        let total: usize = exponents.iter().map(|&e| e as usize).sum();
        if total > self.order {
            return None;
        }
        self.index.get(&pack(exponents)).map(|&r| r as usize)
    }

    /// Triples `(a, b, c)` with monomial `c = a · b`, covering every pair whose
    /// product stays within the order.
    pub(crate) fn mul_plan(&self) -> &[[u32; 3]] {
        self.mul_plan.get_or_init(|| {
            let mut plan = Vec::new();
            for a in 0..self.len() {
                let ka = pack(self.exponents(a));
                let limit = self.degree_end[self.order - self.degree(a)];
                for b in 0..limit {
                    let c = self.index[&(ka + pack(self.exponents(b)))];
                    plan.push([a as u32, b as u32, c]);
                }
            }
            plan
        })
    }
}

fn pack(exponents: &[u8]) -> u64 {
    exponents
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &e)| acc | ((e as u64) << (BITS * i as u32)))
}

fn push_compositions(
    remaining: usize,
    var: usize,
    current: &mut [u8],
    exps: &mut Vec<u8>,
    degrees: &mut Vec<u8>,
) {
    let last = current.len() - 1;
    if var == last {
        current[var] = remaining as u8;
        exps.extend_from_slice(current);
        degrees.push(current.iter().copied().sum());
        current[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u8;
        push_compositions(remaining - e, var + 1, current, exps, degrees);
    }
    current[var] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn counts_match_binomials() {
        for nvars in [2, 4, 6] {
            for order in 0..=6 {
                let layout = Layout::get(nvars, order).unwrap();
                assert_eq!(layout.len(), binomial(order + nvars, nvars));
            }
        }
    }

    #[test]
    fn lower_order_is_prefix() {
        let hi = Layout::get(4, 6).unwrap();
        let lo = Layout::get(4, 3).unwrap();
        for r in 0..lo.len() {
            assert_eq!(lo.exponents(r), hi.exponents(r));
        }
    }

    #[test]
    fn plan_size_counts_pairs() {
        // Pairs (a, b) with |a| + |b| <= d are monomials in 2·nvars variables.
        let layout = Layout::get(4, 5).unwrap();
        assert_eq!(layout.mul_plan().len(), binomial(5 + 8, 8));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(Layout::get(3, 2), Err(Error::InvalidVariableCount(3))));
        assert!(matches!(
            Layout::get(2, MAX_ORDER + 1),
            Err(Error::OrderTooHigh { .. })
        ));
    }
}
