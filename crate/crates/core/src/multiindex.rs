//! Multi-indices, the graded-lexicographic order and the partition sets
//! that index the multivariate Faà di Bruno sum.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Total degree |ν|.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    /// Componentwise ≤.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.le(self) {
            return None;
        }
        Some(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, k: u32) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| a * k).collect())
    }

    pub fn with_entry(&self, i: usize, value: u32) -> MultiIndex {
        let mut v = self.0.clone();
        v[i] = value;
        MultiIndex(v)
    }

    /// ν! = Π ν_i! as an exact integer.
    pub fn factorial(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::one(), |acc, &v| acc * factorial_big(v))
    }

    pub fn factorial_f64(&self) -> f64 {
        self.0.iter().map(|&v| factorial_f64(v)).product()
    }

    /// Graded-lexicographic comparison: total degree first, then
    /// lexicographic on the entries.
    pub fn graded_cmp(&self, other: &MultiIndex) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

pub fn factorial_big(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn factorial_f64(n: u32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Strict graded-lexicographic precedence a ≺ b.
pub fn lex_precedes(a: &MultiIndex, b: &MultiIndex) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.graded_cmp(b) == Ordering::Less)
}

/// All multi-indices of dimension `dim` with total degree exactly `degree`,
/// in lexicographic order.
pub fn indices_of_degree(dim: usize, degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; dim];
    fill_degree(&mut cur, 0, degree, &mut out);
    out
}

fn fill_degree(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    let dim = cur.len();
    if dim == 0 {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == dim - 1 {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for v in 0..=remaining {
        cur[pos] = v;
        fill_degree(cur, pos + 1, remaining - v, out);
    }
    cur[pos] = 0;
}

/// All multi-indices with |ν| ≤ order in graded-lexicographic order.
pub fn indices_up_to(dim: usize, order: u32) -> Vec<MultiIndex> {
    (0..=order).flat_map(|d| indices_of_degree(dim, d)).collect()
}

/// All multi-indices componentwise ≤ `bound` (any order; callers sort).
pub fn indices_in_box(bound: &MultiIndex) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex(Vec::new())];
    for &b in bound.entries() {
        let mut next = Vec::with_capacity(out.len() * (b as usize + 1));
        for prefix in &out {
            for v in 0..=b {
                let mut e = prefix.0.clone();
                e.push(v);
                next.push(MultiIndex(e));
            }
        }
        out = next;
    }
    out
}

/// One element of p_s(ν, λ): the pairs (k_j, l_j) with
/// l_1 ≺ … ≺ l_s, Σ k_j = λ and Σ |k_j| l_j = ν.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartitionTerm {
    pub k: Vec<MultiIndex>,
    pub l: Vec<MultiIndex>,
}

impl PartitionTerm {
    pub fn s(&self) -> usize {
        self.k.len()
    }

    /// ν! / Π_j ( k_j! (l_j!)^{|k_j|} ), exact.
    pub fn coefficient(&self, nu: &MultiIndex) -> BigRational {
        let mut den = BigInt::one();
        for (k, l) in self.k.iter().zip(&self.l) {
            den *= k.factorial();
            let lf = l.factorial();
            for _ in 0..k.total() {
                den *= &lf;
            }
        }
        BigRational::new(nu.factorial(), den)
    }

    fn sort_key(&self) -> (usize, Vec<u32>) {
        let mut key = Vec::new();
        for l in &self.l {
            key.extend_from_slice(l.entries());
        }
        for k in &self.k {
            key.extend_from_slice(k.entries());
        }
        (self.s(), key)
    }
}

/// Canonical order for partition lists: by s, then lexicographically on the
/// concatenation l_1…l_s k_1…k_s.
pub fn sort_partitions(terms: &mut [PartitionTerm]) {
    terms.sort_by_key(|a| a.sort_key());
}

/// Enumerates ∪_s p_s(ν, λ) for ν ∈ ℕ^e (inner dimension) and λ ∈ ℕ^d
/// (outer dimension). Empty when λ = 0 or |λ| > |ν|.
pub fn enumerate_partitions(nu: &MultiIndex, lambda: &MultiIndex) -> Vec<PartitionTerm> {
    let mut out = Vec::new();
    if lambda.is_zero() || lambda.total() > nu.total() {
        return out;
    }
    let mut candidates: Vec<MultiIndex> = indices_in_box(nu)
        .into_iter()
        .filter(|l| !l.is_zero())
        .collect();
    candidates.sort_by(|a, b| a.graded_cmp(b));

    let mut k_stack = Vec::new();
    let mut l_stack = Vec::new();
    partitions_rec(
        &candidates,
        0,
        nu.clone(),
        lambda.clone(),
        &mut k_stack,
        &mut l_stack,
        &mut out,
    );
    sort_partitions(&mut out);
    out
}

fn partitions_rec(
    candidates: &[MultiIndex],
    start: usize,
    rem_nu: MultiIndex,
    rem_lambda: MultiIndex,
    k_stack: &mut Vec<MultiIndex>,
    l_stack: &mut Vec<MultiIndex>,
    out: &mut Vec<PartitionTerm>,
) {
    match (rem_nu.is_zero(), rem_lambda.is_zero()) {
        (true, true) => {
            out.push(PartitionTerm {
                k: k_stack.clone(),
                l: l_stack.clone(),
            });
            return;
        }
        (true, false) | (false, true) => return,
        _ => {}
    }
    for (idx, l) in candidates.iter().enumerate().skip(start) {
        if !l.le(&rem_nu) {
            continue;
        }
        for k in indices_in_box(&rem_lambda) {
            let kt = k.total();
            if kt == 0 {
                continue;
            }
            let used = l.scale(kt);
            let Some(next_nu) = rem_nu.checked_sub(&used) else {
                continue;
            };
            let next_lambda = rem_lambda.checked_sub(&k).expect("k within box");
            k_stack.push(k);
            l_stack.push(l.clone());
            partitions_rec(
                candidates,
                idx + 1,
                next_nu,
                next_lambda,
                k_stack,
                l_stack,
                out,
            );
            k_stack.pop();
            l_stack.pop();
        }
    }
}

/// Table of derivatives f^{(ν)} keyed by multi-index.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DerivativeTable {
    entries: BTreeMap<MultiIndex, f64>,
}

impl DerivativeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, nu: MultiIndex, value: f64) {
        self.entries.insert(nu, value);
    }

    pub fn get(&self, nu: &MultiIndex) -> Result<f64> {
        self.entries
            .get(nu)
            .copied()
            .ok_or_else(|| Error::MissingDerivative(nu.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &f64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(MultiIndex, f64)> for DerivativeTable {
    fn from_iter<T: IntoIterator<Item = (MultiIndex, f64)>>(iter: T) -> Self {
        DerivativeTable {
            entries: iter.into_iter().collect(),
        }
    }
}

/// Precomputed partition lists and coefficients for all ν up to an order,
/// so repeated evaluation of the Faà di Bruno sum avoids re-enumeration.
#[derive(Clone, Debug)]
pub struct FaaDiBrunoPlan {
    outer_dim: usize,
    inner_dim: usize,
    order: u32,
    terms: BTreeMap<MultiIndex, Vec<PlanGroup>>,
}

#[derive(Clone, Debug)]
struct PlanGroup {
    lambda: MultiIndex,
    terms: Vec<(f64, PartitionTerm)>,
}

impl FaaDiBrunoPlan {
    pub fn new(outer_dim: usize, inner_dim: usize, order: u32) -> Self {
        let lambdas: Vec<MultiIndex> = indices_up_to(outer_dim, order)
            .into_iter()
            .filter(|l| !l.is_zero())
            .collect();
        let mut terms = BTreeMap::new();
        for nu in indices_up_to(inner_dim, order) {
            let mut groups = Vec::new();
            for lambda in lambdas.iter().filter(|l| l.total() <= nu.total()) {
                let parts = enumerate_partitions(&nu, lambda);
                if parts.is_empty() {
                    continue;
                }
                let terms = parts
                    .into_iter()
                    .map(|p| {
                        let c = p.coefficient(&nu).to_f64().unwrap_or(f64::INFINITY);
                        (c, p)
                    })
                    .collect();
                groups.push(PlanGroup {
                    lambda: lambda.clone(),
                    terms,
                });
            }
            terms.insert(nu, groups);
        }
        FaaDiBrunoPlan {
            outer_dim,
            inner_dim,
            order,
            terms,
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Evaluates (f∘g)^{(ν)} for |ν| ≥ 1 from derivative tables of the outer
    /// function (at g(x)) and each inner component (at x).
    pub fn evaluate(
        &self,
        outer: &DerivativeTable,
        inner: &[DerivativeTable],
        nu: &MultiIndex,
    ) -> Result<f64> {
        if inner.len() != self.outer_dim {
            return Err(Error::DimensionMismatch {
                expected: self.outer_dim,
                found: inner.len(),
            });
        }
        if nu.dim() != self.inner_dim {
            return Err(Error::DimensionMismatch {
                expected: self.inner_dim,
                found: nu.dim(),
            });
        }
        if nu.is_zero() {
            return Err(Error::InvalidParameter(
                "the composition formula needs |nu| >= 1".into(),
            ));
        }
        let groups = self.terms.get(nu).ok_or_else(|| {
            Error::InvalidParameter(format!("{nu} exceeds plan order {}", self.order))
        })?;
        let mut total = 0.0;
        for g in groups {
            let f_lambda = outer.get(&g.lambda)?;
            let mut inner_sum = 0.0;
            for (coef, p) in &g.terms {
                let mut prod = *coef;
                for (k, l) in p.k.iter().zip(&p.l) {
                    for (i, &ki) in k.entries().iter().enumerate() {
                        if ki > 0 {
                            prod *= inner[i].get(l)?.powi(ki as i32);
                        }
                    }
                }
                inner_sum += prod;
            }
            total += f_lambda * inner_sum;
        }
        Ok(total)
    }
}

/// (f∘g)^{(ν)} by the multivariate Faà di Bruno formula. `outer` holds
/// f^{(λ)}(g(x)) for λ ∈ ℕ^d, `inner[i]` holds g_i^{(l)}(x) for l ∈ ℕ^e.
pub fn faa_di_bruno(outer: &DerivativeTable, inner: &[DerivativeTable], nu: &MultiIndex) -> Result<f64> {
    FaaDiBrunoPlan::new(inner.len(), nu.dim(), nu.total()).evaluate(outer, inner, nu)
}

/// Σ over partition terms of the exact coefficient; handy for tests that
/// compare against closed forms.
pub fn coefficient_sum(nu: &MultiIndex, lambda: &MultiIndex) -> BigRational {
    enumerate_partitions(nu, lambda)
        .iter()
        .fold(BigRational::zero(), |acc, p| acc + p.coefficient(nu))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn precedence_examples() {
        assert!(lex_precedes(&mi(&[1, 0]), &mi(&[0, 2])).unwrap());
        assert!(lex_precedes(&mi(&[0, 2]), &mi(&[1, 1])).unwrap());
        assert!(!lex_precedes(&mi(&[1, 1]), &mi(&[0, 2])).unwrap());
        assert!(!lex_precedes(&mi(&[1, 1]), &mi(&[1, 1])).unwrap());
        assert!(lex_precedes(&mi(&[1]), &mi(&[1, 0])).is_err());
    }

    #[test]
    fn univariate_partitions() {
        let p = enumerate_partitions(&mi(&[2]), &mi(&[1]));
        assert_eq!(p, vec![PartitionTerm { k: vec![mi(&[1])], l: vec![mi(&[2])] }]);

        let p = enumerate_partitions(&mi(&[3]), &mi(&[2]));
        assert_eq!(
            p,
            vec![PartitionTerm {
                k: vec![mi(&[1]), mi(&[1])],
                l: vec![mi(&[1]), mi(&[2])]
            }]
        );

        assert!(enumerate_partitions(&mi(&[2]), &mi(&[3])).is_empty());
        assert!(enumerate_partitions(&mi(&[2]), &mi(&[0])).is_empty());
    }

    #[test]
    fn square_of_square() {
        // f(y) = y², g(x) = x² at x = 1: (f∘g)''' = 24.
        let outer: DerivativeTable = [(mi(&[0]), 1.0), (mi(&[1]), 2.0), (mi(&[2]), 2.0), (mi(&[3]), 0.0)]
            .into_iter()
            .collect();
        let inner: DerivativeTable = [(mi(&[0]), 1.0), (mi(&[1]), 2.0), (mi(&[2]), 2.0), (mi(&[3]), 0.0)]
            .into_iter()
            .collect();
        let v = faa_di_bruno(&outer, &[inner], &mi(&[3])).unwrap();
        assert!((v - 24.0).abs() < 1e-12);
    }

    #[test]
    fn missing_entry_is_reported() {
        let outer: DerivativeTable = [(mi(&[1]), 1.0)].into_iter().collect();
        let inner: DerivativeTable = [(mi(&[1]), 1.0)].into_iter().collect();
        match faa_di_bruno(&outer, &[inner], &mi(&[2])) {
            Err(Error::MissingDerivative(_)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bell_numbers_in_one_variable() {
        // Σ_λ Σ coefficients = number of set partitions of a |ν|-set.
        let bell = [1u64, 1, 2, 5, 15, 52, 203];
        for n in 1..=6u32 {
            let total: BigRational = (1..=n)
                .map(|k| coefficient_sum(&mi(&[n]), &mi(&[k])))
                .fold(BigRational::zero(), |a, b| a + b);
            assert_eq!(total, BigRational::from_integer(BigInt::from(bell[n as usize])));
        }
    }

    #[test]
    fn graded_order_listing() {
        let idx = indices_up_to(2, 2);
        let expect = [
            mi(&[0, 0]),
            mi(&[0, 1]),
            mi(&[1, 0]),
            mi(&[0, 2]),
            mi(&[1, 1]),
            mi(&[2, 0]),
        ];
        assert_eq!(idx, expect);
    }
}
