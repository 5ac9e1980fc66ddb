//! Formal distributions supported at the origin.
//!
//! `Λ(f) = Σ c_{r,β} ν^r (∂^β f)(0)`, i.e. `Λ = δ∘D` for the
//! constant-coefficient operator `D = Σ c_{r,β} ν^r ∂^β`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::grading::{GradingContext, TruncationSpec};
use crate::index::MultiIndex;
use crate::jet::{accumulate, Jet, JetKey};
use crate::matrix::{self, Matrix};
use crate::operator::{FormalOperator, OpKey};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq)]
pub struct PointDistribution {
    num_vars: usize,
    terms: BTreeMap<(i64, MultiIndex), Scalar>,
}

impl PointDistribution {
    pub fn zero(num_vars: usize) -> Self {
        PointDistribution { num_vars, terms: BTreeMap::new() }
    }

    /// `δ` at the origin.
    pub fn delta(num_vars: usize) -> Self {
        let mut out = Self::zero(num_vars);
        out.add_term(0, MultiIndex::zeros(num_vars), Scalar::one());
        out
    }

    /// Builds from `(r, β, c)`; `r` must be nonnegative.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, MultiIndex, Scalar)>,
    {
        let mut out = Self::zero(num_vars);
        for (r, beta, c) in terms {
            if r < 0 {
                return Err(Error::NotNuRegular(format!("distribution term at ν^{r}")));
            }
            if beta.len() != num_vars {
                return Err(Error::InputShape(format!(
                    "derivative index {beta:?} does not live on {num_vars} variables"
                )));
            }
            out.add_term(r, beta, c);
        }
        Ok(out)
    }

    /// `δ∘D` for a constant-coefficient operator `D` with `ν`-exponents `≥ 0`.
    pub fn from_constant_operator(d: &FormalOperator) -> Result<Self> {
        let d = d.to_normal();
        if !d.has_constant_coefficients() {
            return Err(Error::InputShape("operator has non-constant coefficients".into()));
        }
        Self::from_terms(d.num_vars(), d.terms().map(|(k, c)| (k.nu, k.d.clone(), c.clone())))
    }

    fn add_term(&mut self, r: i64, beta: MultiIndex, c: Scalar) {
        accumulate(&mut self.terms, (r, beta), &c);
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &MultiIndex, &Scalar)> {
        self.terms.iter().map(|((r, b), c)| (*r, b, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, r: i64, beta: &[u16]) -> Scalar {
        self.terms
            .get(&(r, MultiIndex::from_slice(beta)))
            .cloned()
            .unwrap_or_default()
    }

    pub fn max_order(&self) -> Option<i64> {
        self.terms.keys().map(|k| k.0).max()
    }

    /// Highest derivative order `max |β|`.
    pub fn max_derivative(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.1.degree()).max()
    }

    /// Drops every `ν^r` with `r > n`.
    pub fn truncate_nu(&self, n: i64) -> Self {
        PointDistribution {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.0 <= n)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// `Λ_r` as its own distribution (`ν`-exponent `0`).
    pub fn order(&self, r: i64) -> Self {
        PointDistribution {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.0 == r)
                .map(|((_, b), c)| ((0, b.clone()), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero(self.num_vars);
        for ((r, b), c) in &self.terms {
            out.add_term(*r, b.clone(), c * s);
        }
        out
    }

    /// Multiplies by `ν^k`.
    pub fn shift_nu(&self, k: i64) -> Result<Self> {
        Self::from_terms(self.num_vars, self.terms().map(|(r, b, c)| (r + k, b.clone(), c.clone())))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.num_vars != other.num_vars {
            return Err(Error::InputShape("distributions on different variable counts".into()));
        }
        let mut out = self.clone();
        for ((r, b), c) in &other.terms {
            out.add_term(*r, b.clone(), c.clone());
        }
        Ok(out)
    }

    /// The constant-coefficient operator `D` with `Λ = δ∘D`.
    pub fn operator(&self) -> FormalOperator {
        let zero = MultiIndex::zeros(self.num_vars);
        FormalOperator::from_keys(
            self.num_vars,
            crate::operator::OperatorOrdering::Normal,
            self.terms
                .iter()
                .map(|((r, b), c)| (OpKey { nu: *r, x: zero.clone(), d: b.clone() }, c.clone())),
        )
        .expect("indices match num_vars")
    }

    /// `D` as a commutative polynomial jet, `∂^β ↦ x^β`.
    fn symbol_jet(&self) -> Jet {
        let mut out = Jet::zero(self.num_vars, &[]);
        for ((r, b), c) in &self.terms {
            out.add_term(*r, b.clone(), MultiIndex::zeros(0), c.clone());
        }
        out
    }

    fn from_symbol_jet(j: &Jet) -> Self {
        let mut out = Self::zero(j.num_vars());
        for (k, c) in j.terms() {
            out.add_term(k.nu, k.x.clone(), c.clone());
        }
        out
    }
}

impl std::fmt::Debug for PointDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((r, b), c)| format!("({c})ν^{r}δ∂{b:?}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `δ∘A`: keeps the `α = 0` terms of `A` modulo `trunc`.
pub fn distribution_from_operator(a: &FormalOperator, trunc: &TruncationSpec) -> Result<PointDistribution> {
    let c = a.constant_part().truncate(trunc);
    if let Some((k, _)) = c.terms().find(|(k, _)| k.nu < 0) {
        return Err(Error::NotNuRegular(format!(
            "term ν^{} ∂^{:?} survives evaluation at the origin",
            k.nu, k.d
        )));
    }
    PointDistribution::from_constant_operator(&c)
}

/// `Λ(f)` modulo `ν^{n+1}`, as a jet with no `x`-dependence.
pub fn apply_distribution(l: &PointDistribution, f: &Jet, n: i64) -> Result<Jet> {
    if f.num_vars() != l.num_vars {
        return Err(Error::InputShape(format!(
            "distribution on {} variables applied to a jet on {}",
            l.num_vars,
            f.num_vars()
        )));
    }
    let zero = MultiIndex::zeros(l.num_vars);
    let mut out = Jet::zero(l.num_vars, f.aux_names());
    for (kf, cf) in f.terms() {
        let fact = Scalar::from_bigint(kf.x.factorial());
        for r in 0..=(n - kf.nu) {
            let Some(c) = l.terms.get(&(r, kf.x.clone())) else {
                continue;
            };
            let key = JetKey { nu: r + kf.nu, x: zero.clone(), aux: kf.aux.clone() };
            out.add_key(key, &(cf * c * &fact));
        }
    }
    Ok(out)
}

/// Outcome of the oscillatory test: `Λ = δ∘exp(ν⁻¹X)` with `X` natural and
/// starting at `ν²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OscillatoryVerdict {
    pub oscillatory: bool,
    /// `X = ν·log D` when the verdict is positive.
    pub x: Option<FormalOperator>,
}

/// `C = log D` for a distribution with `Λ₀ = δ`, modulo `ν^{n+1}`; `None` if
/// the `ν⁰` part is not `δ`.
pub fn log_operator(l: &PointDistribution, n: i64) -> Result<Option<FormalOperator>> {
    if l.order(0) != PointDistribution::delta(l.num_vars) {
        return Ok(None);
    }
    let c = l.truncate_nu(n).symbol_jet().log(&TruncationSpec::nu(n))?;
    Ok(Some(PointDistribution::from_symbol_jet(&c).operator()))
}

/// Decides whether `Λ` is oscillatory through order `ν^n`.
pub fn is_oscillatory(l: &PointDistribution, n: i64) -> Result<OscillatoryVerdict> {
    let Some(c) = log_operator(l, n)? else {
        return Ok(OscillatoryVerdict { oscillatory: false, x: None });
    };
    let ok = c.terms().all(|(k, _)| k.nu >= 1 && k.d.degree() as i64 <= k.nu + 1);
    Ok(OscillatoryVerdict { oscillatory: ok, x: ok.then(|| c.shift_nu(1)) })
}

/// `b^{ij} = Λ₁(xⁱxʲ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaForm {
    pub matrix: Matrix,
}

impl BetaForm {
    pub fn determinant(&self) -> Scalar {
        matrix::determinant(&self.matrix).expect("square by construction")
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.determinant().is_zero()
    }
}

/// The symmetric form `β_Λ` of an oscillatory distribution.
pub fn beta_form(l: &PointDistribution) -> Result<BetaForm> {
    let order = l.max_order().unwrap_or(0).max(1);
    if !is_oscillatory(l, order)?.oscillatory {
        return Err(Error::Precondition("the bilinear form needs an oscillatory distribution".into()));
    }
    Ok(beta_matrix(l))
}

fn beta_matrix(l: &PointDistribution) -> BetaForm {
    let n = l.num_vars;
    let matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let idx = MultiIndex::unit(n, i).add(&MultiIndex::unit(n, j));
                    let c = l.terms.get(&(1, idx.clone())).cloned().unwrap_or_default();
                    c * Scalar::from_bigint(idx.factorial())
                })
                .collect()
        })
        .collect();
    BetaForm { matrix }
}

pub fn is_nondegenerate(l: &PointDistribution) -> Result<bool> {
    Ok(beta_form(l)?.is_nondegenerate())
}

/// Pairing matrix `[Λ(bᵢ bⱼ)]` modulo `ν^{n+1}`.
pub fn pairing_matrix(l: &PointDistribution, basis: &[Jet], n: i64) -> Result<Vec<Vec<Jet>>> {
    let trunc = TruncationSpec::nu(n);
    basis
        .iter()
        .map(|a| {
            basis
                .iter()
                .map(|b| apply_distribution(l, &a.mul(b, &trunc)?, n))
                .collect()
        })
        .collect()
}

/// `x`-degree only; used to cut compositions at a fixed polynomial order.
fn x_degree_grading() -> GradingContext {
    GradingContext { nu_weight: 0, x_weight: 1, d_weight: 0, aux_default: 0, aux_weights: BTreeMap::new() }
}

/// Checks that `Φ` is a ν-free map fixing the origin with invertible
/// linear part.
pub fn check_diffeo(phi: &[Jet], n: usize) -> Result<()> {
    if phi.len() != n || phi.iter().any(|p| p.num_vars() != n || !p.aux_names().is_empty()) {
        return Err(Error::InputShape(format!("a diffeomorphism jet needs {n} components on {n} variables")));
    }
    for p in phi {
        if p.terms().any(|(k, _)| k.nu != 0) {
            return Err(Error::InputShape("diffeomorphism jets must not depend on ν".into()));
        }
        if !p.at_origin().is_zero() {
            return Err(Error::InputShape("diffeomorphism does not fix the origin".into()));
        }
    }
    let jac: Matrix = phi
        .iter()
        .map(|p| (0..n).map(|j| p.coeff(0, &MultiIndex::unit(n, j), &MultiIndex::zeros(0))).collect())
        .collect();
    if matrix::determinant(&jac)?.is_zero() {
        return Err(Error::SingularJacobian);
    }
    Ok(())
}

/// `Λ^Φ(f) = Λ(f∘Φ)`, with output terms of degree above `trunc` dropped
/// (a term `ν^r ∂^β` is graded like the operator term).
pub fn pushforward_diffeo(l: &PointDistribution, phi: &[Jet], trunc: &TruncationSpec) -> Result<PointDistribution> {
    let n = l.num_vars;
    check_diffeo(phi, n)?;
    let Some(k) = l.max_derivative() else {
        return Ok(PointDistribution::zero(n));
    };
    // Φ^β vanishes to order |β| at 0, so only |β| ≤ max |β| of Λ matters.
    let cut = TruncationSpec::new(x_degree_grading(), k as i64);
    let phi: Vec<Jet> = phi.iter().map(|p| p.truncate(&cut)).collect();
    let g = &trunc.grading;
    let mut out = PointDistribution::zero(n);
    let max_r = l.max_order().unwrap_or(0);
    // powers[i][e] = Φᵢ^e
    let powers: Vec<Vec<Jet>> = phi
        .iter()
        .map(|p| {
            let mut v = vec![Jet::one(n, &[])];
            for e in 1..=k as usize {
                let next = v[e - 1].mul(p, &cut)?;
                v.push(next);
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    for beta in MultiIndex::all_up_to(n, k) {
        let mut mono = Jet::one(n, &[]);
        for i in 0..n {
            mono = mono.mul(&powers[i][beta.get(i) as usize], &cut)?;
        }
        let value = apply_distribution(l, &mono, max_r)?;
        let inv_fact = Scalar::from_bigint(beta.factorial()).inv().expect("nonzero factorial");
        for (kv, c) in value.terms() {
            let deg = g.nu_weight * kv.nu + g.d_weight * beta.degree() as i64;
            if trunc.keeps(deg) {
                out.add_term(kv.nu, beta.clone(), c * &inv_fact);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtered::{op_exp, FiltrationSpec};
    use proptest::prelude::*;

    fn s(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    fn dist(n: usize, terms: &[(i64, &[u16], Scalar)]) -> PointDistribution {
        PointDistribution::from_terms(n, terms.iter().map(|(r, b, c)| (*r, MultiIndex::from_slice(b), c.clone())))
            .unwrap()
    }

    /// `δ∘exp(νP)` for a constant-coefficient `P`.
    fn exp_dist(p: &FormalOperator, n: i64) -> PointDistribution {
        let e = op_exp(&p.shift_nu(1), &FiltrationSpec::nu(), &TruncationSpec::nu(n)).unwrap();
        distribution_from_operator(&e, &TruncationSpec::nu(n)).unwrap()
    }

    fn d_op(n: usize, d: &[u16], c: i64) -> FormalOperator {
        FormalOperator::monomial(n, 0, &vec![0; n], d, s(c))
    }

    #[test]
    fn from_operator_examples() {
        let l = exp_dist(&d_op(1, &[2], 1), 2);
        assert_eq!(l, dist(1, &[(0, &[0], s(1)), (1, &[2], s(1)), (2, &[4], Scalar::ratio(1, 2))]));
        let x_d = FormalOperator::monomial(1, 0, &[1], &[1], s(1));
        assert!(distribution_from_operator(&x_d, &TruncationSpec::nu(3)).unwrap().is_empty());
        let x_over_nu = FormalOperator::monomial(1, -1, &[1], &[0], s(1));
        assert!(distribution_from_operator(&x_over_nu, &TruncationSpec::nu(3)).unwrap().is_empty());
        let bad = FormalOperator::monomial(1, -1, &[0], &[1], s(1));
        assert!(matches!(
            distribution_from_operator(&bad, &TruncationSpec::nu(3)),
            Err(Error::NotNuRegular(_))
        ));
    }

    #[test]
    fn apply_examples() {
        let l = dist(1, &[(0, &[0], s(1)), (1, &[2], s(1))]);
        let x2 = Jet::monomial(1, 0, &[2], s(1));
        assert_eq!(apply_distribution(&l, &x2, 3).unwrap(), Jet::monomial(1, 1, &[0], s(2)));
        let one = Jet::one(1, &[]);
        assert_eq!(apply_distribution(&l, &one, 3).unwrap().coeff_x(0, &[0]), s(1));
        let x2_nu = Jet::monomial(1, -1, &[2], s(1));
        assert!(apply_distribution(&PointDistribution::delta(1), &x2_nu, 3).unwrap().is_zero());
    }

    #[test]
    fn oscillatory_examples() {
        let v = is_oscillatory(&exp_dist(&d_op(1, &[2], 1), 4), 4).unwrap();
        assert!(v.oscillatory);
        assert_eq!(v.x.unwrap(), FormalOperator::monomial(1, 2, &[0], &[2], s(1)));
        assert!(!is_oscillatory(&exp_dist(&d_op(1, &[3], 1), 4), 4).unwrap().oscillatory);
        let l = dist(1, &[(0, &[0], s(1)), (1, &[1], s(1))]);
        let v = is_oscillatory(&l, 3).unwrap();
        assert!(v.oscillatory);
        // log(1 + ν∂) = ν∂ − ν²∂²/2 + ν³∂³/3, then X = ν·C.
        let expect = FormalOperator::from_terms(
            1,
            [(2, [0], [1], s(1)), (3, [0], [2], Scalar::ratio(-1, 2)), (4, [0], [3], Scalar::ratio(1, 3))],
        );
        assert_eq!(v.x.unwrap(), expect);
        let scaled = dist(1, &[(0, &[0], s(2))]);
        assert!(!is_oscillatory(&scaled, 2).unwrap().oscillatory);
    }

    #[test]
    fn beta_examples() {
        let b = beta_form(&exp_dist(&d_op(1, &[2], 1), 2)).unwrap();
        assert_eq!(b.matrix, vec![vec![s(2)]]);
        assert!(b.is_nondegenerate());
        let l = dist(1, &[(0, &[0], s(1)), (1, &[1], s(1))]);
        assert_eq!(beta_form(&l).unwrap().matrix, vec![vec![s(0)]]);
        assert!(!is_nondegenerate(&l).unwrap());
        let b = beta_form(&exp_dist(&d_op(2, &[1, 1], 1), 2)).unwrap();
        assert_eq!(b.matrix, vec![vec![s(0), s(1)], vec![s(1), s(0)]]);
        assert!(b.is_nondegenerate());
        let not_osc = exp_dist(&d_op(1, &[3], 1), 2);
        assert!(matches!(beta_form(&not_osc), Err(Error::Precondition(_))));
    }

    #[test]
    fn pushforward_examples() {
        let l = exp_dist(&d_op(1, &[2], 1), 3);
        let t = TruncationSpec::nu(3);
        let id = vec![Jet::monomial(1, 0, &[1], s(1))];
        assert_eq!(pushforward_diffeo(&l, &id, &t).unwrap(), l);
        // Φ(x) = 2x: Λ^Φ(x^k) = 2^k Λ(x^k).
        let double = vec![Jet::monomial(1, 0, &[1], s(2))];
        let p = pushforward_diffeo(&l, &double, &t).unwrap();
        assert_eq!(p.coeff(2, &[4]), l.coeff(2, &[4]) * s(16));
        assert!(is_oscillatory(&p, 3).unwrap().oscillatory);
        let bent = vec![Jet::from_x_terms(1, [(0, [1], s(1)), (0, [2], s(1))])];
        assert!(is_oscillatory(&pushforward_diffeo(&l, &bent, &t).unwrap(), 3).unwrap().oscillatory);
        let flat = vec![Jet::monomial(1, 0, &[2], s(1))];
        assert!(matches!(pushforward_diffeo(&l, &flat, &t), Err(Error::SingularJacobian)));
        let moved = vec![Jet::from_x_terms(1, [(0, [0], s(1)), (0, [1], s(1))])];
        assert!(matches!(pushforward_diffeo(&l, &moved, &t), Err(Error::InputShape(_))));
    }

    #[test]
    fn gram_determinant() {
        let gauss = exp_dist(&d_op(1, &[2], -1).scale(&Scalar::ratio(1, 2)), 6);
        let basis: Vec<Jet> = (0..3).map(|k| Jet::monomial(1, 0, &[k], s(1))).collect();
        let g = pairing_matrix(&gauss, &basis, 6).unwrap();
        let det = crate::jet::determinant(&g, &TruncationSpec::nu(6)).unwrap();
        assert_eq!(det, Jet::monomial(1, 3, &[0], s(-2)));
    }

    fn arb_natural_x(n: usize) -> impl Strategy<Value = FormalOperator> {
        let idx = prop::collection::vec(0u16..3, n);
        prop::collection::vec((2i64..5, idx, -3i64..4), 1..5).prop_map(move |ts| {
            let mut x = FormalOperator::zero(n);
            for (nu, mut d, c) in ts {
                while d.iter().map(|&v| v as i64).sum::<i64>() > nu {
                    let i = d.iter().position(|&v| v > 0).unwrap();
                    d[i] -= 1;
                }
                x = x.add(&FormalOperator::monomial(n, nu, &vec![0; n], &d, s(c))).unwrap();
            }
            x
        })
    }

    fn arb_diffeo() -> impl Strategy<Value = Vec<Jet>> {
        let comp = prop::collection::vec((prop::collection::vec(0u16..3, 2), -2i64..3), 0..4);
        (-2i64..3, -2i64..3, -2i64..3, -2i64..3, comp.clone(), comp)
            .prop_filter("invertible", |(a, b, c, d, _, _)| a * d - b * c != 0)
            .prop_map(|(a, b, c, d, h1, h2)| {
                let lin = [[(a, [1u16, 0]), (b, [0, 1])], [(c, [1, 0]), (d, [0, 1])]];
                [h1, h2]
                    .into_iter()
                    .zip(lin)
                    .map(|(h, l)| {
                        let mut j = Jet::from_x_terms(2, l.iter().map(|(v, e)| (0, *e, s(*v))));
                        for (e, v) in h {
                            if (2..=3).contains(&e.iter().sum::<u16>()) {
                                j.add_term(0, MultiIndex::from_slice(&e), MultiIndex::zeros(0), s(v));
                            }
                        }
                        j
                    })
                    .collect()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn round_trip_recovers_x(x in arb_natural_x(2)) {
            let n = 4;
            let g = op_exp(&x.shift_nu(-1), &FiltrationSpec::nu(), &TruncationSpec::nu(n)).unwrap();
            let l = distribution_from_operator(&g, &TruncationSpec::nu(n)).unwrap();
            let v = is_oscillatory(&l, n).unwrap();
            prop_assert!(v.oscillatory);
            prop_assert_eq!(v.x.unwrap(), x.truncate(&TruncationSpec::nu(n + 1)));
        }

        #[test]
        fn pushforward_preserves_verdicts(x in arb_natural_x(2), phi in arb_diffeo(), bad in any::<bool>()) {
            let n = 3;
            let mut x = x;
            if bad {
                x = x.add(&FormalOperator::monomial(2, 2, &[0, 0], &[2, 1], s(1))).unwrap();
            }
            let g = op_exp(&x.shift_nu(-1), &FiltrationSpec::nu(), &TruncationSpec::nu(n)).unwrap();
            let l = distribution_from_operator(&g, &TruncationSpec::nu(n)).unwrap();
            let p = pushforward_diffeo(&l, &phi, &TruncationSpec::nu(n)).unwrap();
            let before = is_oscillatory(&l, n).unwrap().oscillatory;
            prop_assert_eq!(before, !bad);
            prop_assert_eq!(is_oscillatory(&p, n).unwrap().oscillatory, before);
            if before {
                prop_assert_eq!(is_nondegenerate(&p).unwrap(), is_nondegenerate(&l).unwrap());
            }
        }
    }
}
