//! Formal differential operators with polynomial coefficients.
//!
//! A term `(a, α, β) ↦ c` denotes `c ν^a x^α ∂^β` in normal order or
//! `c ν^a ∂^β x^α` in anti-normal order. Every algebraic operation works on
//! (and returns) the normal form, which is unique.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::grading::{GradingContext, TruncationSpec};
use crate::index::{binomial, falling, MultiIndex};
use crate::jet::{accumulate, Jet, JetKey};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorOrdering {
    /// Coefficients left of derivatives: `x^α ∂^β`.
    Normal,
    /// Derivatives left of coefficients: `∂^β x^α`.
    AntiNormal,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpKey {
    pub nu: i64,
    pub x: MultiIndex,
    pub d: MultiIndex,
}

#[derive(Clone)]
pub struct FormalOperator {
    num_vars: usize,
    nu_min: i64,
    ordering: OperatorOrdering,
    terms: BTreeMap<OpKey, Scalar>,
}

/// Per-term membership tests for an operator in normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorClassReport {
    /// Every term has `a ≥ 0` and `|β| ≤ a`.
    pub is_natural: bool,
    /// Every term has `a ≥ 1` and `|β| ≤ a + 1`, i.e. the operator is
    /// `ν⁻¹X` with `X = ν²X₂ + ν³X₃ + …` natural.
    pub in_g_nu: bool,
    /// `min (2a + |α| − |β|)`; `None` for the zero operator.
    pub standard_degree: Option<i64>,
}

/// Operators are equal when their normal forms coincide.
impl PartialEq for FormalOperator {
    fn eq(&self, other: &Self) -> bool {
        if self.num_vars != other.num_vars {
            return false;
        }
        if self.ordering == other.ordering {
            return self.terms == other.terms;
        }
        self.to_normal().terms == other.to_normal().terms
    }
}

impl Eq for FormalOperator {}

fn degree_of(g: &GradingContext, k: &OpKey) -> i64 {
    g.nu_weight * k.nu + g.x_weight * k.x.degree() as i64 + g.d_weight * k.d.degree() as i64
}

/// Expands `∂^β x^γ` (`sign = 1`) or `x^γ ∂^β` (`sign = −1`) into the opposite
/// order: `Σ_σ sign^{|σ|} C(β,σ) γ!/(γ−σ)! · x^{γ−σ} ∂^{β−σ}`.
fn swap_expansion(beta: &MultiIndex, gamma: &MultiIndex, sign: i64) -> Vec<(MultiIndex, MultiIndex, BigInt)> {
    let n = beta.len();
    let mut out: Vec<(MultiIndex, MultiIndex, BigInt)> =
        vec![(gamma.clone(), beta.clone(), BigInt::one())];
    for i in 0..n {
        let (b, g) = (beta.get(i) as u32, gamma.get(i) as u32);
        let top = b.min(g);
        if top == 0 {
            continue;
        }
        let mut next = Vec::with_capacity(out.len() * (top as usize + 1));
        for (x, d, c) in &out {
            for s in 0..=top {
                let mut coef = c * binomial(b, s) * falling(g, s);
                if sign < 0 && s % 2 == 1 {
                    coef = -coef;
                }
                let mut x2 = x.clone();
                x2.set(i, (g - s) as u16);
                let mut d2 = d.clone();
                d2.set(i, (b - s) as u16);
                next.push((x2, d2, coef));
            }
        }
        out = next;
    }
    out
}

impl FormalOperator {
    pub fn zero(num_vars: usize) -> Self {
        FormalOperator {
            num_vars,
            nu_min: 0,
            ordering: OperatorOrdering::Normal,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(num_vars: usize) -> Self {
        Self::scalar(num_vars, Scalar::one())
    }

    pub fn scalar(num_vars: usize, c: Scalar) -> Self {
        let mut op = Self::zero(num_vars);
        op.add_term(0, MultiIndex::zeros(num_vars), MultiIndex::zeros(num_vars), c);
        op
    }

    /// `c ν^nu x^x ∂^d` in normal order.
    pub fn monomial(num_vars: usize, nu: i64, x: &[u16], d: &[u16], c: Scalar) -> Self {
        let mut op = Self::zero(num_vars);
        op.add_term(nu, MultiIndex::from_slice(x), MultiIndex::from_slice(d), c);
        op
    }

    /// Builds a normal-order operator from `(ν-exponent, x-exponents, ∂-exponents, c)`.
    pub fn from_terms<I, X>(num_vars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, X, X, Scalar)>,
        X: AsRef<[u16]>,
    {
        let mut op = Self::zero(num_vars);
        for (nu, x, d, c) in terms {
            op.add_term(nu, MultiIndex::from_slice(x.as_ref()), MultiIndex::from_slice(d.as_ref()), c);
        }
        op
    }

    pub fn from_keys<I>(num_vars: usize, ordering: OperatorOrdering, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (OpKey, Scalar)>,
    {
        let mut op = Self::zero(num_vars);
        op.ordering = ordering;
        for (k, c) in terms {
            if k.x.len() != num_vars || k.d.len() != num_vars {
                return Err(Error::InputShape(format!(
                    "operator term {k:?} does not live on {num_vars} variables"
                )));
            }
            op.add_term(k.nu, k.x, k.d, c);
        }
        Ok(op)
    }

    /// Multiplication operator `m_f` for a jet without auxiliary variables.
    pub fn multiplication(f: &Jet) -> Result<Self> {
        if !f.aux_names().is_empty() {
            return Err(Error::InputShape(
                "operator coefficients cannot depend on auxiliary parameters".into(),
            ));
        }
        let n = f.num_vars();
        let mut op = Self::zero(n);
        for (k, c) in f.terms() {
            op.add_term(k.nu, k.x.clone(), MultiIndex::zeros(n), c.clone());
        }
        op.nu_min = op.nu_min.min(f.nu_min());
        Ok(op)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn nu_min(&self) -> i64 {
        self.nu_min
    }

    pub fn ordering(&self) -> OperatorOrdering {
        self.ordering
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OpKey, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, nu: i64, x: &[u16], d: &[u16]) -> Scalar {
        self.terms
            .get(&OpKey { nu, x: MultiIndex::from_slice(x), d: MultiIndex::from_slice(d) })
            .cloned()
            .unwrap_or_default()
    }

    pub fn add_term(&mut self, nu: i64, x: MultiIndex, d: MultiIndex, c: Scalar) {
        debug_assert_eq!(x.len(), self.num_vars);
        debug_assert_eq!(d.len(), self.num_vars);
        self.nu_min = self.nu_min.min(nu);
        accumulate(&mut self.terms, OpKey { nu, x, d }, &c);
    }

    fn with_terms(&self, terms: BTreeMap<OpKey, Scalar>, ordering: OperatorOrdering) -> Self {
        let nu_min = terms.keys().map(|k| k.nu).min().unwrap_or(0).min(self.nu_min);
        FormalOperator { num_vars: self.num_vars, nu_min, ordering, terms }
    }

    pub fn filter(&self, keep: impl Fn(&OpKey) -> bool) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| keep(k))
            .map(|(k, c)| (k.clone(), c.clone()))
            .collect();
        self.with_terms(terms, self.ordering)
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::InputShape(format!(
                "operators on {} and {} variables",
                self.num_vars, other.num_vars
            )));
        }
        Ok(())
    }

    pub fn term_degree(&self, key: &OpKey, grading: &GradingContext) -> i64 {
        degree_of(grading, key)
    }

    /// Filtration degree: the minimum term degree, `None` for zero.
    pub fn min_degree(&self, grading: &GradingContext) -> Option<i64> {
        self.terms.keys().map(|k| degree_of(grading, k)).min()
    }

    pub fn truncate(&self, trunc: &TruncationSpec) -> Self {
        self.filter(|k| trunc.keeps(degree_of(&trunc.grading, k)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let (a, b) = (self.to_normal(), other.to_normal());
        let mut terms = a.terms;
        for (k, c) in &b.terms {
            accumulate(&mut terms, k.clone(), c);
        }
        let mut out = self.with_terms(terms, OperatorOrdering::Normal);
        out.nu_min = out.nu_min.min(other.nu_min);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Scalar::one())
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return self.with_terms(BTreeMap::new(), self.ordering);
        }
        let terms = self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect();
        self.with_terms(terms, self.ordering)
    }

    /// Multiplies every term by `ν^k`.
    pub fn shift_nu(&self, k: i64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(key, c)| (OpKey { nu: key.nu + k, ..key.clone() }, c.clone()))
            .collect();
        let mut out = self.with_terms(terms, self.ordering);
        out.nu_min = self.nu_min + k;
        out
    }

    /// Normal-form product `self ∘ other` modulo `trunc`.
    pub fn compose(&self, other: &Self, trunc: &TruncationSpec) -> Result<Self> {
        self.same_shape(other)?;
        let (a, b) = (self.to_normal(), other.to_normal());
        let g = &trunc.grading;
        let monotone = g.reorder_monotone();
        let rhs: Vec<(i64, &OpKey, &Scalar)> =
            b.terms.iter().map(|(k, c)| (degree_of(g, k), k, c)).collect();
        let min_rhs = rhs.iter().map(|t| t.0).min();
        let mut terms = BTreeMap::new();
        if let Some(min_rhs) = min_rhs {
            for (ka, ca) in &a.terms {
                let da = degree_of(g, ka);
                if monotone && !trunc.keeps(da + min_rhs) {
                    continue;
                }
                for &(db, kb, cb) in &rhs {
                    if monotone && !trunc.keeps(da + db) {
                        continue;
                    }
                    let c = ca * cb;
                    let nu = ka.nu + kb.nu;
                    for (x, d, coef) in swap_expansion(&ka.d, &kb.x, 1) {
                        let key = OpKey { nu, x: ka.x.add(&x), d: d.add(&kb.d) };
                        if !trunc.keeps(degree_of(g, &key)) {
                            continue;
                        }
                        accumulate(&mut terms, key, &(&c * Scalar::from_bigint(coef)));
                    }
                }
            }
        }
        let mut out = a.with_terms(terms, OperatorOrdering::Normal);
        out.nu_min = a.nu_min + b.nu_min;
        Ok(out)
    }

    /// `[self, other] = self∘other − other∘self` modulo `trunc`.
    pub fn commutator(&self, other: &Self, trunc: &TruncationSpec) -> Result<Self> {
        self.compose(other, trunc)?.sub(&other.compose(self, trunc)?)
    }

    /// Applies the operator to a jet, termwise `∂^β x^γ = γ!/(γ−β)! x^{γ−β}`.
    pub fn apply(&self, f: &Jet, trunc: &TruncationSpec) -> Result<Jet> {
        if f.num_vars() != self.num_vars {
            return Err(Error::InputShape(format!(
                "operator on {} variables applied to a jet on {}",
                self.num_vars,
                f.num_vars()
            )));
        }
        let a = self.to_normal();
        let w = f.weights(&trunc.grading);
        let mut out = Jet::zero(f.num_vars(), f.aux_names());
        for (ka, ca) in &a.terms {
            for (kf, cf) in f.terms() {
                let Some(rest) = kf.x.checked_sub(&ka.d) else {
                    continue;
                };
                let key = JetKey { nu: ka.nu + kf.nu, x: rest.add(&ka.x), aux: kf.aux.clone() };
                if !trunc.keeps(w.degree(&key)) {
                    continue;
                }
                let coef = Scalar::from_bigint(kf.x.falling_factorial(&ka.d));
                out.add_key(key, &(ca * cf * coef));
            }
        }
        Ok(out.with_nu_min(a.nu_min + f.nu_min()))
    }

    /// The same operator written in `target` order.
    pub fn reorder(&self, target: OperatorOrdering) -> Self {
        if self.ordering == target {
            return self.clone();
        }
        // normal → anti: x^α∂^β = Σ (−1)^{|σ|} C(β,σ) α!/(α−σ)! ∂^{β−σ} x^{α−σ};
        // anti → normal uses the same expansion without signs.
        let sign = match target {
            OperatorOrdering::AntiNormal => -1,
            OperatorOrdering::Normal => 1,
        };
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            for (x, d, coef) in swap_expansion(&k.d, &k.x, sign) {
                accumulate(&mut terms, OpKey { nu: k.nu, x, d }, &(c * Scalar::from_bigint(coef)));
            }
        }
        self.with_terms(terms, target)
    }

    pub fn to_normal(&self) -> Self {
        self.reorder(OperatorOrdering::Normal)
    }

    /// Formal transpose: `(x^α∂^β)ᵗ = (−1)^{|β|} ∂^β ∘ x^α`, returned in normal form.
    pub fn transpose(&self) -> Self {
        let flipped = match self.ordering {
            OperatorOrdering::Normal => OperatorOrdering::AntiNormal,
            OperatorOrdering::AntiNormal => OperatorOrdering::Normal,
        };
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| {
                let c = if k.d.degree() % 2 == 1 { -c } else { c.clone() };
                (k.clone(), c)
            })
            .collect();
        self.with_terms(terms, flipped).to_normal()
    }

    /// The constant-coefficient part `C` with `δ∘(A − C) = 0`: the `α = 0` terms.
    pub fn constant_part(&self) -> Self {
        self.to_normal().filter(|k| k.x.is_zero())
    }

    pub fn is_multiplication(&self) -> bool {
        self.to_normal().terms.keys().all(|k| k.d.is_zero())
    }

    pub fn has_constant_coefficients(&self) -> bool {
        self.terms.keys().all(|k| k.x.is_zero())
    }

    /// The jet `f` with `self = m_f`, if `self` is a multiplication operator.
    pub fn as_multiplication(&self) -> Option<Jet> {
        let a = self.to_normal();
        if !a.is_multiplication() {
            return None;
        }
        let mut f = Jet::zero(self.num_vars, &[]);
        for (k, c) in &a.terms {
            f.add_term(k.nu, k.x.clone(), MultiIndex::zeros(0), c.clone());
        }
        Some(f)
    }

    /// Full symbol: `ν^a x^α ∂^β ↦ ν^{a−|β|} x^α ξ^β`, a jet with auxiliary
    /// variables `xi1 … xin`.
    pub fn full_symbol(&self) -> Jet {
        let names = symbol_names(self.num_vars);
        let mut out = Jet::zero(self.num_vars, &names);
        for (k, c) in &self.to_normal().terms {
            out.add_key(
                JetKey { nu: k.nu - k.d.degree() as i64, x: k.x.clone(), aux: k.d.clone() },
                c,
            );
        }
        out
    }

    pub fn classify(&self) -> OperatorClassReport {
        let a = self.to_normal();
        let mut report = OperatorClassReport { is_natural: true, in_g_nu: true, standard_degree: None };
        for k in a.terms.keys() {
            let order = k.d.degree() as i64;
            report.is_natural &= k.nu >= 0 && order <= k.nu;
            report.in_g_nu &= k.nu >= 1 && order <= k.nu + 1;
            let d = 2 * k.nu + k.x.degree() as i64 - order;
            report.standard_degree = Some(report.standard_degree.map_or(d, |m: i64| m.min(d)));
        }
        report
    }
}

/// `xi1, …, xin`.
pub fn symbol_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("xi{i}")).collect()
}

impl fmt::Debug for FormalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let mut s = format!("({c})");
                if k.nu != 0 {
                    s += &format!("ν^{}", k.nu);
                }
                let (x, d) = (format!("x{:?}", k.x), format!("∂{:?}", k.d));
                match self.ordering {
                    OperatorOrdering::Normal => {
                        if !k.x.is_zero() {
                            s += &x;
                        }
                        if !k.d.is_zero() {
                            s += &d;
                        }
                    }
                    OperatorOrdering::AntiNormal => {
                        if !k.d.is_zero() {
                            s += &d;
                        }
                        if !k.x.is_zero() {
                            s += &x;
                        }
                    }
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::TruncationSpec;
    use proptest::prelude::*;

    fn op(terms: &[(i64, [u16; 1], [u16; 1], i64)]) -> FormalOperator {
        FormalOperator::from_terms(1, terms.iter().map(|&(a, x, d, c)| (a, x, d, Scalar::from_int(c))))
    }

    fn big() -> TruncationSpec {
        TruncationSpec::nu(50)
    }

    #[test]
    fn composition_examples() {
        let d = op(&[(0, [0], [1], 1)]);
        let x = op(&[(0, [1], [0], 1)]);
        assert_eq!(d.compose(&x, &big()).unwrap(), op(&[(0, [1], [1], 1), (0, [0], [0], 1)]));
        let d2 = op(&[(0, [0], [2], 1)]);
        assert_eq!(d2.compose(&x, &big()).unwrap(), op(&[(0, [1], [2], 1), (0, [0], [1], 2)]));
        let nd = op(&[(1, [0], [1], 1)]);
        assert_eq!(nd.compose(&nd, &big()).unwrap(), op(&[(2, [0], [2], 1)]));
        assert!(d.compose(&FormalOperator::identity(2), &big()).is_err());
    }

    #[test]
    fn application_examples() {
        let xd = op(&[(0, [1], [1], 1)]);
        let x2 = Jet::monomial(1, 0, &[2], Scalar::one());
        assert_eq!(xd.apply(&x2, &big()).unwrap(), Jet::monomial(1, 0, &[2], Scalar::from_int(2)));
        let nd2 = op(&[(2, [0], [2], 1)]);
        assert_eq!(nd2.apply(&x2, &big()).unwrap(), Jet::monomial(1, 2, &[0], Scalar::from_int(2)));
        assert_eq!(FormalOperator::identity(1).apply(&x2, &big()).unwrap(), x2);
    }

    #[test]
    fn reorder_examples() {
        let xd = op(&[(0, [1], [1], 1)]);
        let anti = xd.reorder(OperatorOrdering::AntiNormal);
        assert_eq!(anti.ordering(), OperatorOrdering::AntiNormal);
        assert_eq!(anti.coeff(0, &[1], &[1]), Scalar::one());
        assert_eq!(anti.coeff(0, &[0], &[0]), Scalar::from_int(-1));
        assert_eq!(anti.len(), 2);

        let dx_anti = FormalOperator::from_keys(
            1,
            OperatorOrdering::AntiNormal,
            [(OpKey { nu: 0, x: MultiIndex::from_slice(&[1]), d: MultiIndex::from_slice(&[1]) }, Scalar::one())],
        )
        .unwrap();
        assert_eq!(dx_anti.to_normal(), op(&[(0, [1], [1], 1), (0, [0], [0], 1)]));

        let c = op(&[(1, [0], [2], 1)]);
        let ca = c.reorder(OperatorOrdering::AntiNormal);
        assert_eq!(ca.terms().map(|(k, _)| k.clone()).collect::<Vec<_>>(), c.terms().map(|(k, _)| k.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn transpose_examples() {
        assert_eq!(op(&[(0, [0], [1], 1)]).transpose(), op(&[(0, [0], [1], -1)]));
        // (x∂)ᵗ = −∂∘x = −x∂ − 1
        assert_eq!(op(&[(0, [1], [1], 1)]).transpose(), op(&[(0, [1], [1], -1), (0, [0], [0], -1)]));
        assert_eq!(op(&[(0, [2], [0], 1)]).transpose(), op(&[(0, [2], [0], 1)]));
    }

    #[test]
    fn constant_part_examples() {
        assert_eq!(op(&[(0, [1], [1], 1), (0, [0], [2], 1)]).constant_part(), op(&[(0, [0], [2], 1)]));
        assert!(op(&[(0, [2], [1], 1)]).constant_part().is_zero());
        assert_eq!(op(&[(1, [0], [0], 1), (0, [1], [0], 1)]).constant_part(), op(&[(1, [0], [0], 1)]));
    }

    #[test]
    fn symbol_examples() {
        let names = symbol_names(1);
        let sym = |nu: i64, x: u16, xi: u16| {
            let mut j = Jet::zero(1, &names);
            j.add_term(nu, MultiIndex::from_slice(&[x]), MultiIndex::from_slice(&[xi]), Scalar::one());
            j
        };
        assert_eq!(op(&[(1, [0], [2], 1)]).full_symbol(), sym(-1, 0, 2));
        assert_eq!(op(&[(2, [0], [2], 1)]).full_symbol(), sym(0, 0, 2));
        assert_eq!(op(&[(0, [1], [1], 1)]).full_symbol(), sym(-1, 1, 1));
    }

    #[test]
    fn classify_examples() {
        let r = op(&[(1, [0], [1], 1)]).classify();
        assert!(r.is_natural);
        assert_eq!(r.standard_degree, Some(1));
        assert!(!op(&[(0, [0], [1], 1)]).classify().is_natural);
        let r = op(&[(1, [0], [2], 1)]).classify();
        assert!(!r.is_natural && r.in_g_nu);
        assert_eq!(FormalOperator::zero(1).classify().standard_degree, None);
    }

    fn arb_op(n: usize, natural: bool) -> impl Strategy<Value = FormalOperator> {
        prop::collection::vec(
            (0i64..3, prop::collection::vec(0u16..3, n), prop::collection::vec(0u16..3, n), -4i64..5),
            0..5,
        )
        .prop_map(move |ts| {
            let ts = ts.into_iter().filter(|(a, _, d, _)| {
                !natural || d.iter().map(|&v| v as i64).sum::<i64>() <= *a
            });
            FormalOperator::from_terms(n, ts.map(|(a, x, d, c)| (a, x, d, Scalar::from_int(c))))
        })
    }

    fn arb_jet(n: usize) -> impl Strategy<Value = Jet> {
        prop::collection::vec((0i64..3, prop::collection::vec(0u16..4, n), -4i64..5), 0..5).prop_map(
            move |ts| Jet::from_x_terms(n, ts.into_iter().map(|(a, x, c)| (a, x, Scalar::from_int(c)))),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn compose_associative_and_unital(a in arb_op(2, false), b in arb_op(2, false), c in arb_op(2, false)) {
            let t = TruncationSpec::nu(4);
            let ab_c = a.compose(&b, &t).unwrap().compose(&c, &t).unwrap();
            let a_bc = a.compose(&b.compose(&c, &t).unwrap(), &t).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let id = FormalOperator::identity(2);
            prop_assert_eq!(a.compose(&id, &t).unwrap(), a.truncate(&t));
            prop_assert_eq!(id.compose(&a, &t).unwrap(), a.truncate(&t));
        }

        #[test]
        fn natural_commutator_over_nu_is_natural(a in arb_op(2, true), b in arb_op(2, true)) {
            let t = TruncationSpec::nu(6);
            let c = a.commutator(&b, &t).unwrap();
            // every term of [A, B] carries at least one ν
            prop_assert!(c.terms().all(|(k, _)| k.nu >= 1));
            prop_assert!(c.shift_nu(-1).classify().is_natural);
        }

        #[test]
        fn apply_respects_composition(a in arb_op(2, false), b in arb_op(2, false), f in arb_jet(2)) {
            let t = TruncationSpec::nu(5);
            let lhs = a.compose(&b, &t).unwrap().apply(&f, &t).unwrap();
            let rhs = a.apply(&b.apply(&f, &t).unwrap(), &t).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn symbol_multiplicative_on_constant_coefficients(a in arb_op(2, false), b in arb_op(2, false)) {
            let t = TruncationSpec::nu(8);
            let (a, b) = (a.constant_part(), b.constant_part());
            let ab = a.compose(&b, &t).unwrap().full_symbol();
            let sym_t = TruncationSpec::new(GradingContext::nu(), 100);
            prop_assert_eq!(ab, a.full_symbol().mul(&b.full_symbol(), &sym_t).unwrap());
        }

        #[test]
        fn natural_iff_symbol_nonnegative(a in arb_op(2, false)) {
            let sym_ok = a.full_symbol().min_nu_exponent().is_none_or(|m| m >= 0);
            prop_assert_eq!(a.classify().is_natural, sym_ok);
        }

        #[test]
        fn involutions(a in arb_op(2, false)) {
            let anti = a.reorder(OperatorOrdering::AntiNormal);
            prop_assert_eq!(anti.to_normal(), a.clone());
            prop_assert_eq!(a.transpose().transpose(), a.clone());
        }

        #[test]
        fn transpose_reverses_products(a in arb_op(1, false), b in arb_op(1, false)) {
            let t = TruncationSpec::nu(6);
            let lhs = a.compose(&b, &t).unwrap().transpose();
            let rhs = b.transpose().compose(&a.transpose(), &t).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn delta_kills_nonconstant_part(a in arb_op(2, false), f in arb_jet(2)) {
            let t = TruncationSpec::nu(10);
            let b = a.sub(&a.constant_part()).unwrap();
            prop_assert!(b.apply(&f, &t).unwrap().at_origin().is_zero());
        }
    }
}
