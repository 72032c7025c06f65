//! Multi-indices and the graded index sets that order every structured matrix.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// A d-tuple of nonnegative integers.
///
/// Ordering is graded: total degree first, then within one degree the tuple
/// with the larger leading component comes first, so `(2,0) < (1,1) < (0,2)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        assert!(!components.is_empty(), "multi-index needs d >= 1");
        MultiIndex(components)
    }

    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn unit(d: usize, i: usize) -> Self {
        let mut v = vec![0; d];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    /// `|α|`.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn factorial(&self) -> BigInt {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All `β ≤ α` componentwise.
    pub fn divisors(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::new()];
        for &a in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=a).map(move |b| {
                        let mut p = prefix.clone();
                        p.push(b);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(MultiIndex).collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// `∏ binom(αⱼ, βⱼ)`, zero unless `β ≤ α`.
pub fn mbinom(alpha: &MultiIndex, beta: &MultiIndex) -> BigInt {
    assert_eq!(alpha.dim(), beta.dim());
    alpha
        .0
        .iter()
        .zip(&beta.0)
        .map(|(&a, &b)| binomial(a, b))
        .product()
}

/// `d(L)`: number of multi-indices of length `L` in dimension `d`.
pub fn dim_h(d: usize, l: usize) -> usize {
    assert!(d >= 1);
    binom_usize(d + l - 1, l)
}

/// `ĉd(L)`: number of multi-indices of length at most `L`; `ĉd(-1) = 0`.
pub fn dim_g(d: usize, l: i64) -> usize {
    assert!(d >= 1);
    if l < 0 {
        0
    } else {
        binom_usize(d + l as usize, l as usize)
    }
}

fn binom_usize(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// The homogeneous layer of degree `l`, in graded order.
pub fn layer(d: usize, l: usize) -> Vec<MultiIndex> {
    fn go(d: usize, l: usize, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if d == 1 {
            prefix.push(l as u32);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=l).rev() {
            prefix.push(first as u32);
            go(d - 1, l - first, prefix, out);
            prefix.pop();
        }
    }
    assert!(d >= 1);
    let mut out = Vec::with_capacity(dim_h(d, l));
    go(d, l, &mut Vec::with_capacity(d), &mut out);
    out
}

/// The index sets `𝒜_L` (one layer) and `ĉ𝒜_L` (layers `0..=L` concatenated).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedBasis {
    pub d: usize,
    pub l: usize,
    pub homogeneous: Vec<MultiIndex>,
    pub graded: Vec<MultiIndex>,
}

impl GradedBasis {
    pub fn new(d: usize, l: usize) -> Self {
        let graded: Vec<MultiIndex> = (0..=l).flat_map(|k| layer(d, k)).collect();
        GradedBasis {
            d,
            l,
            homogeneous: layer(d, l),
            graded,
        }
    }

    pub fn len(&self) -> usize {
        self.graded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graded.is_empty()
    }

    /// Position of `alpha` in `ĉ𝒜_L`.
    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        if alpha.order() > self.l {
            return None;
        }
        self.graded.binary_search(alpha).ok()
    }

    /// Column range of layer `k` inside `ĉ𝒜_L`.
    pub fn layer_range(&self, k: usize) -> std::ops::Range<usize> {
        dim_g(self.d, k as i64 - 1)..dim_g(self.d, k as i64)
    }
}

pub fn graded_basis(d: usize, l: usize) -> GradedBasis {
    GradedBasis::new(d, l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn layer_order_first_component_descending() {
        assert_eq!(layer(2, 2), vec![mi(&[2, 0]), mi(&[1, 1]), mi(&[0, 2])]);
        let g = GradedBasis::new(1, 3);
        assert_eq!(g.graded, vec![mi(&[0]), mi(&[1]), mi(&[2]), mi(&[3])]);
    }

    #[test]
    fn graded_list_is_sorted() {
        let g = GradedBasis::new(3, 4);
        assert!(g.graded.windows(2).all(|w| w[0] < w[1]));
        for (i, a) in g.graded.iter().enumerate() {
            assert_eq!(g.position(a), Some(i));
        }
    }

    #[test]
    fn dimensions() {
        assert_eq!(dim_h(5, 0), 1);
        assert_eq!(dim_g(2, 3), 10);
        assert_eq!(dim_g(2, -1), 0);
        assert_eq!(dim_g(3, 4), 35);
        assert_eq!((0..=4).map(|l| dim_h(3, l)).sum::<usize>(), 35);
    }

    #[test]
    fn binomials() {
        assert_eq!(mbinom(&mi(&[3, 0]), &mi(&[1, 0])), BigInt::from(3));
        assert_eq!(mbinom(&mi(&[4, 2]), &mi(&[0, 0])), BigInt::one());
        assert_eq!(mbinom(&mi(&[1, 2]), &mi(&[2, 0])), BigInt::zero());
        assert_eq!(mi(&[2, 1]).factorial(), BigInt::from(2));
    }

    #[test]
    fn divisors_count() {
        assert_eq!(mi(&[2, 1]).divisors().len(), 6);
        assert!(mi(&[2, 1]).divisors().iter().all(|b| b.le(&mi(&[2, 1]))));
    }
}
