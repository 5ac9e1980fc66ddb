//! Multi-indices with graded-lexicographic order.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use smallvec::SmallVec;

/// Exponent vector `(α₁, …, αₙ)`.
///
/// Ordering is graded: lower total degree first, then lexicographic with a
/// larger leading exponent first, so `x¹` sorts before `x²`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(SmallVec<[u16; 4]>);

impl MultiIndex {
    pub fn zeros(n: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, n))
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut m = Self::zeros(n);
        m.0[i] = 1;
        m
    }

    pub fn from_slice(entries: &[u16]) -> Self {
        MultiIndex(SmallVec::from_slice(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u16] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u16 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: u16) {
        self.0[i] = v;
    }

    /// `|α|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&a| a as u32).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self − other`, if `other ≤ self` componentwise.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.len(), other.len());
        let mut out = SmallVec::with_capacity(self.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }

    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `α!`.
    pub fn factorial(&self) -> BigInt {
        self.0.iter().map(|&a| factorial(a as u32)).product()
    }

    /// `γ!/(γ−σ)!` for `σ ≤ γ`; the coefficient of `x^{γ−σ}` in `∂^σ x^γ`.
    pub fn falling_factorial(&self, sigma: &MultiIndex) -> BigInt {
        self.0
            .iter()
            .zip(&sigma.0)
            .map(|(&g, &s)| falling(g as u32, s as u32))
            .product()
    }

    /// `(self, other)` glued into one index on `len + other.len` variables.
    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MultiIndex(v)
    }

    /// Splits at position `k` into the first `k` and remaining entries.
    pub fn split_at(&self, k: usize) -> (MultiIndex, MultiIndex) {
        let (a, b) = self.0.split_at(k);
        (MultiIndex::from_slice(a), MultiIndex::from_slice(b))
    }

    /// All indices on `n` variables of total degree exactly `d`, in order.
    pub fn all_of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u16; n];
        fill(&mut out, &mut cur, 0, d);
        out
    }

    /// All indices of total degree `≤ d`, graded order.
    pub fn all_up_to(n: usize, d: u32) -> Vec<MultiIndex> {
        (0..=d).flat_map(|k| Self::all_of_degree(n, k)).collect()
    }

    /// All `σ ≤ self` componentwise.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(SmallVec::new())];
        for &a in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (a as usize + 1));
            for prefix in &out {
                for s in 0..=a {
                    let mut p = prefix.clone();
                    p.0.push(s);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }
}

fn fill(out: &mut Vec<MultiIndex>, cur: &mut Vec<u16>, pos: usize, remaining: u32) {
    if cur.is_empty() {
        if remaining == 0 {
            out.push(MultiIndex(SmallVec::new()));
        }
        return;
    }
    if pos == cur.len() - 1 {
        cur[pos] = remaining as u16;
        out.push(MultiIndex::from_slice(cur));
        cur[pos] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a as u16;
        fill(out, cur, pos + 1, remaining - a);
    }
    cur[pos] = 0;
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `n (n−1) ⋯ (n−k+1)`.
pub fn falling(n: u32, k: u32) -> BigInt {
    debug_assert!(k <= n);
    ((n - k + 1)..=n).fold(BigInt::one(), |acc, j| acc * j)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    falling(n, k) / factorial(k)
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
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
        write!(f, "{:?}", self.0.as_slice())
    }
}
