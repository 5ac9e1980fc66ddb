//! Exponential and logarithm in pronilpotent operator groups, unique
//! factorization `g = ab` along a complementary pair of subalgebras, and the
//! conjugation automorphisms `e^{ad P}`.

use crate::error::{Error, Result};
use crate::grading::{GradingContext, TruncationSpec};
use crate::operator::{FormalOperator, OpKey, OperatorOrdering};
use crate::scalar::Scalar;

/// Hard cap on series lengths when the truncation grading does not bound them.
const MAX_SERIES_TERMS: usize = 512;

/// Which complementary pair of subalgebras to factor along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitSpec {
    /// Normal form: multiplication operators (`β = 0`) ⊕ operators killing
    /// constants (`|β| ≥ 1`).
    MultVsAnnih,
    /// Normal form: `δ`-annihilated part (`|α| ≥ 1`) ⊕ constant coefficients (`α = 0`).
    DeltakerVsConst,
    /// Anti-normal form: divergence part `∂ᵢ ∘ Aⁱ` (`|β| ≥ 1`) ⊕ multiplication (`β = 0`).
    DivVsMult,
}

impl SplitSpec {
    /// The ordering in which the projections are term-diagonal.
    pub fn ordering(self) -> OperatorOrdering {
        match self {
            SplitSpec::DivVsMult => OperatorOrdering::AntiNormal,
            _ => OperatorOrdering::Normal,
        }
    }

    fn in_first(self, k: &OpKey) -> bool {
        match self {
            SplitSpec::MultVsAnnih => k.d.is_zero(),
            SplitSpec::DeltakerVsConst => !k.x.is_zero(),
            SplitSpec::DivVsMult => !k.d.is_zero(),
        }
    }

    /// Splits `op` into its two components, both returned in normal form.
    pub fn project(self, op: &FormalOperator) -> (FormalOperator, FormalOperator) {
        let view = op.reorder(self.ordering());
        let a = view.filter(|k| self.in_first(k)).to_normal();
        let b = view.filter(|k| !self.in_first(k)).to_normal();
        (a, b)
    }

    pub fn project_a(self, op: &FormalOperator) -> FormalOperator {
        self.project(op).0
    }

    pub fn project_b(self, op: &FormalOperator) -> FormalOperator {
        self.project(op).1
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "ab" => Some(SplitSpec::MultVsAnnih),
            "bc" => Some(SplitSpec::DeltakerVsConst),
            "ef" => Some(SplitSpec::DivVsMult),
            _ => None,
        }
    }
}

/// Filtration on the Lie algebra: elements must have degree `≥ floor`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiltrationSpec {
    pub grading: GradingContext,
    pub floor: i64,
}

impl FiltrationSpec {
    pub fn new(grading: GradingContext) -> Self {
        FiltrationSpec { grading, floor: 1 }
    }

    pub fn nu() -> Self {
        Self::new(GradingContext::nu())
    }

    pub fn standard() -> Self {
        Self::new(GradingContext::standard())
    }

    pub fn degree(&self, op: &FormalOperator) -> Option<i64> {
        op.min_degree(&self.grading)
    }

    fn require(&self, op: &FormalOperator, min: i64, what: &str) -> Result<()> {
        if let Some((k, _)) = op.terms().find(|(k, _)| op.term_degree(k, &self.grading) < min) {
            return Err(Error::Convergence(format!(
                "{what}: term {k:?} has filtration degree {} < {min}",
                op.term_degree(k, &self.grading)
            )));
        }
        Ok(())
    }
}

/// `Σ Gⁿ/n!` modulo `trunc`.
pub fn op_exp(g: &FormalOperator, filt: &FiltrationSpec, trunc: &TruncationSpec) -> Result<FormalOperator> {
    filt.require(g, filt.floor.max(1), "exponential")?;
    let n = g.num_vars();
    let one = FormalOperator::identity(n).truncate(trunc);
    let mut sum = one.clone();
    let mut power = one;
    for k in 1..=MAX_SERIES_TERMS as i64 {
        power = power.compose(g, trunc)?.scale(&Scalar::ratio(1, k));
        if power.is_zero() {
            return Ok(sum);
        }
        sum = sum.add(&power)?;
    }
    Err(Error::Convergence("exponential series not exhausted by the truncation".into()))
}

/// `−Σ (1 − g)ⁿ/n` modulo `trunc`; `g − 1` must have filtration degree `≥ 1`.
pub fn op_log(g: &FormalOperator, filt: &FiltrationSpec, trunc: &TruncationSpec) -> Result<FormalOperator> {
    let n = g.num_vars();
    let h = g.sub(&FormalOperator::identity(n))?;
    filt.require(&h, 1, "logarithm of g needs g - 1")?;
    let mut sum = FormalOperator::zero(n);
    let mut power = FormalOperator::identity(n).truncate(trunc);
    for k in 1..=MAX_SERIES_TERMS as i64 {
        power = power.compose(&h, trunc)?;
        if power.is_zero() {
            return Ok(sum);
        }
        let sign = if k % 2 == 1 { 1 } else { -1 };
        sum = sum.add(&power.scale(&Scalar::ratio(sign, k)))?;
    }
    Err(Error::Convergence("logarithm series not exhausted by the truncation".into()))
}

/// Result of [`factorize`]: `g = a ∘ b`, plus the filtration degree of each
/// residual `γᵢ` met by the iteration.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub a: FormalOperator,
    pub b: FormalOperator,
    pub residual_degrees: Vec<i64>,
}

/// Unique factorization `g = ab` with `a ∈ exp 𝔞`, `b ∈ exp 𝔟`.
pub fn factorize(
    g: &FormalOperator,
    split: SplitSpec,
    filt: &FiltrationSpec,
    trunc: &TruncationSpec,
) -> Result<Factorization> {
    let gamma = op_log(g, filt, trunc)?;
    factorize_log(&gamma, split, filt, trunc)
}

/// [`factorize`] for `g = exp(γ)` given by its logarithm `γ`.
///
/// Iterates `γ = α + β`, `γ' = log(e^{−α} e^{γ} e^{−β})`; the residual degree
/// at least doubles per step, so `a = e^{α₀}e^{α₁}⋯` and `b = ⋯e^{β₁}e^{β₀}`.
pub fn factorize_log(
    gamma: &FormalOperator,
    split: SplitSpec,
    filt: &FiltrationSpec,
    trunc: &TruncationSpec,
) -> Result<Factorization> {
    let n = gamma.num_vars();
    let mut gamma = gamma.truncate(trunc);
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut residual_degrees = Vec::new();
    let mut bound: i64 = 1;
    while let Some(deg) = filt.degree(&gamma) {
        if deg < bound {
            return Err(Error::Convergence(format!(
                "residual {} has degree {deg}, expected at least {bound}",
                alphas.len()
            )));
        }
        if alphas.len() >= 64 {
            return Err(Error::Convergence("factorization did not terminate".into()));
        }
        residual_degrees.push(deg);
        let (alpha, beta) = split.project(&gamma);
        let e_alpha = op_exp(&alpha.neg(), filt, trunc)?;
        let e_gamma = op_exp(&gamma, filt, trunc)?;
        let e_beta = op_exp(&beta.neg(), filt, trunc)?;
        let next = e_alpha.compose(&e_gamma, trunc)?.compose(&e_beta, trunc)?;
        alphas.push(alpha);
        betas.push(beta);
        gamma = op_log(&next, filt, trunc)?;
        bound = bound.saturating_mul(2).max(deg.saturating_mul(2));
    }
    let mut a = FormalOperator::identity(n).truncate(trunc);
    for alpha in &alphas {
        a = a.compose(&op_exp(alpha, filt, trunc)?, trunc)?;
    }
    let mut b = FormalOperator::identity(n).truncate(trunc);
    for beta in &betas {
        b = op_exp(beta, filt, trunc)?.compose(&b, trunc)?;
    }
    Ok(Factorization { a, b, residual_degrees })
}

/// Term measure that `ad(P)` must strictly decrease for `e^{ad P}` to be a
/// finite sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjugationMeasure {
    /// `max |β|`; lowered by `ad(ν⁻¹ψ)` for a multiplication generator.
    DerivativeOrder,
    /// `max |α|`; lowered by `ad(νΔ)` for a constant-coefficient generator.
    CoefficientDegree,
}

impl ConjugationMeasure {
    /// Picks the measure matching the shape of the generator, if any.
    pub fn for_generator(p: &FormalOperator) -> Option<Self> {
        if p.is_multiplication() {
            Some(ConjugationMeasure::DerivativeOrder)
        } else if p.to_normal().has_constant_coefficients() {
            Some(ConjugationMeasure::CoefficientDegree)
        } else {
            None
        }
    }

    fn eval(self, op: &FormalOperator) -> Option<u32> {
        op.terms()
            .map(|(k, _)| match self {
                ConjugationMeasure::DerivativeOrder => k.d.degree(),
                ConjugationMeasure::CoefficientDegree => k.x.degree(),
            })
            .max()
    }
}

/// `e^{ad P}(A) = Σ ad(P)ᵏ(A)/k!` modulo `trunc`.
pub fn conjugate(
    p: &FormalOperator,
    a: &FormalOperator,
    measure: ConjugationMeasure,
    trunc: &TruncationSpec,
) -> Result<FormalOperator> {
    let mut sum = a.to_normal().truncate(trunc);
    let mut term = sum.clone();
    let mut last = measure.eval(&term);
    for k in 1..=MAX_SERIES_TERMS as i64 {
        term = p.commutator(&term, trunc)?.scale(&Scalar::ratio(1, k));
        let Some(m) = measure.eval(&term) else {
            return Ok(sum);
        };
        if last.is_some_and(|l| m >= l) {
            return Err(Error::Convergence(format!(
                "ad(P) does not decrease the {measure:?} measure ({m} after {last:?})"
            )));
        }
        last = Some(m);
        sum = sum.add(&term)?;
    }
    Err(Error::Convergence("conjugation series did not terminate".into()))
}

/// `e^{ad P}` with the measure inferred from the generator's shape.
pub fn conjugate_auto(p: &FormalOperator, a: &FormalOperator, trunc: &TruncationSpec) -> Result<FormalOperator> {
    let measure = ConjugationMeasure::for_generator(p).ok_or_else(|| {
        Error::Convergence("generator is neither a multiplication nor constant-coefficient operator".into())
    })?;
    conjugate(p, a, measure, trunc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::TruncationSpec;
    use proptest::prelude::*;

    fn op(terms: &[(i64, [u16; 1], [u16; 1], (i64, i64))]) -> FormalOperator {
        FormalOperator::from_terms(1, terms.iter().map(|&(a, x, d, (p, q))| (a, x, d, Scalar::ratio(p, q))))
    }

    #[test]
    fn exp_examples() {
        let f = FiltrationSpec::nu();
        let t = TruncationSpec::nu(2);
        let g = op(&[(1, [0], [1], (1, 1))]);
        assert_eq!(
            op_exp(&g, &f, &t).unwrap(),
            op(&[(0, [0], [0], (1, 1)), (1, [0], [1], (1, 1)), (2, [0], [2], (1, 2))])
        );
        assert_eq!(op_exp(&FormalOperator::zero(1), &f, &t).unwrap(), FormalOperator::identity(1));
        let bad = op(&[(0, [0], [1], (1, 1))]);
        assert!(matches!(op_exp(&bad, &f, &t), Err(Error::Convergence(_))));
    }

    #[test]
    fn log_examples() {
        let f = FiltrationSpec::nu();
        let t = TruncationSpec::nu(2);
        let g = op(&[(0, [0], [0], (1, 1)), (1, [0], [1], (1, 1))]);
        assert_eq!(op_log(&g, &f, &t).unwrap(), op(&[(1, [0], [1], (1, 1)), (2, [0], [2], (-1, 2))]));
        let t4 = TruncationSpec::nu(4);
        let x = op(&[(2, [0], [2], (1, 1))]);
        assert_eq!(op_log(&op_exp(&x, &f, &t4).unwrap(), &f, &t4).unwrap(), x);
        let two = op(&[(0, [0], [0], (2, 1))]);
        assert!(matches!(op_log(&two, &f, &t), Err(Error::Convergence(_))));
    }

    #[test]
    fn factorize_mult_vs_annih_example() {
        // exp(νx + ν∂) = exp(νx + ν²/2) exp(ν∂), since [νx, ν∂] = −ν².
        let f = FiltrationSpec::nu();
        let t = TruncationSpec::nu(2);
        let g = op_exp(&op(&[(1, [1], [0], (1, 1)), (1, [0], [1], (1, 1))]), &f, &t).unwrap();
        let res = factorize(&g, SplitSpec::MultVsAnnih, &f, &t).unwrap();
        let a = op_exp(&op(&[(1, [1], [0], (1, 1)), (2, [0], [0], (1, 2))]), &f, &t).unwrap();
        let b = op_exp(&op(&[(1, [0], [1], (1, 1))]), &f, &t).unwrap();
        assert_eq!(res.a, a);
        assert_eq!(res.b, b);
        // direct truncated product reproduces g
        assert_eq!(a.compose(&b, &t).unwrap(), g);
    }

    #[test]
    fn factorize_trivial_cases() {
        let f = FiltrationSpec::nu();
        let t = TruncationSpec::nu(4);
        let g = op_exp(&op(&[(1, [1], [0], (1, 1))]), &f, &t).unwrap();
        let res = factorize(&g, SplitSpec::MultVsAnnih, &f, &t).unwrap();
        assert_eq!(res.a, g);
        assert_eq!(res.b, FormalOperator::identity(1));

        let g = op_exp(&op(&[(1, [0], [2], (1, 1))]), &f, &t).unwrap();
        let res = factorize(&g, SplitSpec::DeltakerVsConst, &f, &t).unwrap();
        assert_eq!(res.a, FormalOperator::identity(1));
        assert_eq!(res.b, g);
    }

    #[test]
    fn conjugation_examples() {
        let t = TruncationSpec::standard(20);
        // P = −νΔ = (ν/2)∂², conjugating x gives x + ν∂.
        let p = op(&[(1, [0], [2], (1, 2))]);
        let x = op(&[(0, [1], [0], (1, 1))]);
        let got = conjugate(&p, &x, ConjugationMeasure::CoefficientDegree, &t).unwrap();
        assert_eq!(got, op(&[(0, [1], [0], (1, 1)), (1, [0], [1], (1, 1))]));
        // P = ν⁻¹x²/2 on ∂ gives ∂ − ν⁻¹x.
        let p = op(&[(-1, [2], [0], (1, 2))]);
        let d = op(&[(0, [0], [1], (1, 1))]);
        let got = conjugate(&p, &d, ConjugationMeasure::DerivativeOrder, &t).unwrap();
        assert_eq!(got, op(&[(0, [0], [1], (1, 1)), (-1, [1], [0], (-1, 1))]));
        let one = FormalOperator::identity(1);
        assert_eq!(conjugate_auto(&p, &one, &t).unwrap(), one);
    }

    #[test]
    fn conjugation_rejects_non_decreasing_measure() {
        let t = TruncationSpec::standard(20);
        let p = op(&[(-1, [2], [0], (1, 2))]);
        let x = op(&[(0, [0], [1], (1, 1))]);
        assert!(conjugate(&p, &x, ConjugationMeasure::CoefficientDegree, &t).is_err());
    }

    fn arb_gamma() -> impl Strategy<Value = FormalOperator> {
        prop::collection::vec((1i64..3, 0u16..3, 0u16..3, -3i64..4), 1..4).prop_map(|ts| {
            FormalOperator::from_terms(1, ts.into_iter().map(|(a, x, d, c)| (a, [x], [d], Scalar::from_int(c))))
        })
    }

    fn arb_std_generator() -> impl Strategy<Value = FormalOperator> {
        // ν⁻¹-natural terms of standard degree ≥ 0
        prop::collection::vec((-1i64..3, 0u16..4, 0u16..3, -3i64..4), 1..4).prop_map(|ts| {
            FormalOperator::from_terms(
                1,
                ts.into_iter()
                    .filter(|&(a, x, d, _)| (d as i64) <= a + 1 && 2 * a + x as i64 - d as i64 >= 0)
                    .map(|(a, x, d, c)| (a, [x], [d], Scalar::from_int(c))),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn lemma_congruence(gamma in arb_gamma(), i in 1i64..4) {
            let f = FiltrationSpec::nu();
            let t = TruncationSpec::nu(5);
            let g = op_exp(&gamma, &f, &t).unwrap();
            let h = g.sub(&FormalOperator::identity(1)).unwrap();
            let gamma_ok = f.degree(&gamma).is_none_or(|d| d >= i);
            let h_ok = f.degree(&h).is_none_or(|d| d >= i);
            prop_assert_eq!(gamma_ok, h_ok);
            prop_assert_eq!(op_log(&g, &f, &t).unwrap(), gamma.truncate(&t));
        }

        #[test]
        fn factors_recompose(gamma in arb_gamma()) {
            let f = FiltrationSpec::nu();
            let t = TruncationSpec::nu(4);
            let g = op_exp(&gamma, &f, &t).unwrap();
            for split in [SplitSpec::MultVsAnnih, SplitSpec::DeltakerVsConst, SplitSpec::DivVsMult] {
                let res = factorize(&g, split, &f, &t).unwrap();
                prop_assert_eq!(res.a.compose(&res.b, &t).unwrap(), g.clone());
                for (i, d) in res.residual_degrees.iter().enumerate() {
                    prop_assert!(*d >= 1 << i);
                }
                let (la, lb) = (op_log(&res.a, &f, &t).unwrap(), op_log(&res.b, &f, &t).unwrap());
                prop_assert!(split.project_b(&la).is_zero());
                prop_assert!(split.project_a(&lb).is_zero());
            }
        }

        #[test]
        fn conjugation_is_an_automorphism(a in arb_std_generator(), b in arb_std_generator(), c in -2i64..3) {
            let t = TruncationSpec::standard(6);
            let psi = op(&[(-1, [2], [0], (c, 2))]);
            let nu_delta = op(&[(1, [0], [2], (c, 3))]);
            for p in [psi, nu_delta] {
                let ab = a.compose(&b, &t).unwrap();
                let lhs = conjugate_auto(&p, &ab, &t).unwrap();
                let rhs = conjugate_auto(&p, &a, &t).unwrap().compose(&conjugate_auto(&p, &b, &t).unwrap(), &t).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn conjugation_preserves_naturality(a in arb_std_generator(), c in -2i64..3) {
            let t = TruncationSpec::standard(8);
            let nat = a.shift_nu(1).filter(|k| k.d.degree() as i64 <= k.nu && k.nu >= 0);
            let psi = op(&[(-1, [2], [0], (c, 2))]);
            let nu_delta = op(&[(1, [0], [2], (c, 3))]);
            for p in [psi, nu_delta] {
                prop_assert!(conjugate_auto(&p, &nat, &t).unwrap().classify().is_natural);
            }
        }
    }
}
