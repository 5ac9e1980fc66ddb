//! Formal oscillatory integrals at a nondegenerate critical point.
//!
//! For a phase `φ = ν⁻¹φ₋₁ + φ₀ + νφ₁ + …` with `φ₋₁(0) = 0`, `dφ₋₁(0) = 0`
//! and a density `e^u dx`, the normalized integral is
//! `Λ(f) = (e^{νΔ} e^χ f)(0)` with `Δ = −½hⁱʲ∂ᵢ∂ⱼ` and the phase remainder
//! `χ = φ − ν⁻¹ψ − φ₀(0) + u − u₀(0)`.

use std::collections::HashMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::filtered::{conjugate, factorize_log, op_log, ConjugationMeasure, FiltrationSpec, SplitSpec};
use crate::grading::{GradingContext, TruncationSpec};
use crate::index::MultiIndex;
use crate::jet::{Jet, JetKey, JetVar};
use crate::matrix::{self, Matrix};
use crate::operator::FormalOperator;
use crate::oscillatory::{apply_distribution, beta_form, log_operator, is_oscillatory, PointDistribution};
use crate::scalar::Scalar;

/// Phase jet `φ` and density exponent `u` (density `e^u dx`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseDensityPair {
    num_vars: usize,
    phase: Jet,
    density_exponent: Jet,
}

impl PhaseDensityPair {
    /// Checks shapes and ν-ranges; critical-point conditions are checked by
    /// [`hessian_data`].
    pub fn new(phase: Jet, density_exponent: Jet) -> Result<Self> {
        let n = phase.num_vars();
        if density_exponent.num_vars() != n {
            return Err(Error::InputShape(format!(
                "phase on {n} variables, density exponent on {}",
                density_exponent.num_vars()
            )));
        }
        if !phase.aux_names().is_empty() || !density_exponent.aux_names().is_empty() {
            return Err(Error::InputShape("phase and density cannot carry auxiliary parameters".into()));
        }
        if phase.min_nu_exponent().is_some_and(|m| m < -1) {
            return Err(Error::InputShape("phase has ν-exponents below -1".into()));
        }
        if density_exponent.min_nu_exponent().is_some_and(|m| m < 0) {
            return Err(Error::NotNuRegular("density exponent has negative ν-exponents".into()));
        }
        Ok(PhaseDensityPair { num_vars: n, phase, density_exponent })
    }

    /// `φ = ν⁻¹ψ` for the quadratic form `ψ = ½ h_{ij} xⁱxʲ`, `u = 0`.
    pub fn gaussian(h_lower: &[Vec<Scalar>]) -> Result<Self> {
        let n = matrix::check_square(h_lower)?;
        Self::new(quadratic_form(h_lower).shift_nu(-1), Jet::zero(n, &[]))
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn phase(&self) -> &Jet {
        &self.phase
    }

    pub fn density_exponent(&self) -> &Jet {
        &self.density_exponent
    }
}

/// `½ h_{ij} xⁱxʲ`.
pub fn quadratic_form(h: &[Vec<Scalar>]) -> Jet {
    let n = h.len();
    let half = Scalar::ratio(1, 2);
    let mut out = Jet::zero(n, &[]);
    for i in 0..n {
        for j in 0..n {
            let x = MultiIndex::unit(n, i).add(&MultiIndex::unit(n, j));
            out.add_term(0, x, MultiIndex::zeros(0), &h[i][j] * &half);
        }
    }
    out
}

/// Hessian `h_{ij}` of `φ₋₁` at the origin with its inverse, `ψ` and `Δ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HessianData {
    pub h_lower: Matrix,
    pub h_upper: Matrix,
    /// `ψ = ½ h_{ij} xⁱxʲ`.
    pub psi: Jet,
    /// `Δ = −½ hⁱʲ ∂ᵢ∂ⱼ`.
    pub delta_op: FormalOperator,
}

impl HessianData {
    /// From a symmetric `h_{ij}`; `None` if singular.
    pub fn from_lower(h_lower: Matrix) -> Result<Option<Self>> {
        let n = matrix::check_square(&h_lower)?;
        if !matrix::is_symmetric(&h_lower) {
            return Err(Error::InputShape("Hessian must be symmetric".into()));
        }
        let Some(h_upper) = matrix::inverse(&h_lower)? else {
            return Ok(None);
        };
        let psi = quadratic_form(&h_lower);
        let mut delta_op = FormalOperator::zero(n);
        let half = Scalar::ratio(-1, 2);
        for (i, row) in h_upper.iter().enumerate() {
            for (j, h) in row.iter().enumerate() {
                let d = MultiIndex::unit(n, i).add(&MultiIndex::unit(n, j));
                delta_op.add_term(0, MultiIndex::zeros(n), d, h * &half);
            }
        }
        Ok(Some(HessianData { h_lower, h_upper, psi, delta_op }))
    }
}

/// The Hessian data of `φ₋₁` at the origin.
pub fn hessian_data(pair: &PhaseDensityPair) -> Result<HessianData> {
    let n = pair.num_vars;
    let leading = pair.phase.nu_coefficient(-1);
    if let Some((k, c)) = leading.terms().find(|(k, _)| k.x.degree() < 2) {
        return Err(Error::NotCritical(format!(
            "leading phase has the term ({c}) x^{:?} of degree {}",
            k.x,
            k.x.degree()
        )));
    }
    let h: Matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let x = MultiIndex::unit(n, i).add(&MultiIndex::unit(n, j));
                    leading.coeff(0, &x, &MultiIndex::zeros(0)) * Scalar::from_bigint(x.factorial())
                })
                .collect()
        })
        .collect();
    HessianData::from_lower(h)?.ok_or(Error::DegenerateCriticalPoint)
}

fn origin_value(f: &Jet, nu: i64) -> Scalar {
    f.coeff(nu, &MultiIndex::zeros(f.num_vars()), &MultiIndex::zeros(0))
}

/// `χ = φ − ν⁻¹ψ − φ₀(0) + u − u₀(0)`; every term has standard degree `≥ 1`.
pub fn phase_remainder(pair: &PhaseDensityPair) -> Result<Jet> {
    let hd = hessian_data(pair)?;
    remainder_with(pair, &hd)
}

fn remainder_with(pair: &PhaseDensityPair, hd: &HessianData) -> Result<Jet> {
    let n = pair.num_vars;
    let constants = origin_value(&pair.phase, 0) + origin_value(&pair.density_exponent, 0);
    pair.phase
        .sub(&hd.psi.shift_nu(-1))?
        .add(&pair.density_exponent)?
        .sub(&Jet::constant(n, &[], constants))
}

/// Gaussian moments `m(γ) = (Δᵏ/k!) x^γ |₀` for `|γ| = 2k`, memoized.
struct Moments {
    /// `hⁱʲ ξᵢξⱼ` as a polynomial.
    form: Jet,
    powers: Vec<Jet>,
    cache: HashMap<MultiIndex, Scalar>,
}

impl Moments {
    fn new(h_upper: &[Vec<Scalar>]) -> Self {
        let n = h_upper.len();
        let form = quadratic_form(h_upper).scale(&Scalar::from_int(2));
        Moments { form, powers: vec![Jet::one(n, &[])], cache: HashMap::new() }
    }

    fn get(&mut self, gamma: &MultiIndex) -> Result<Scalar> {
        if let Some(v) = self.cache.get(gamma) {
            return Ok(v.clone());
        }
        let k = (gamma.degree() / 2) as usize;
        while self.powers.len() <= k {
            let next = self.powers.last().expect("nonempty").mul(&self.form, &TruncationSpec::unbounded())?;
            self.powers.push(next);
        }
        // Δᵏ = (−½)ᵏ (hⁱʲ∂ᵢ∂ⱼ)ᵏ and ∂^γ x^γ = γ!.
        let coeff = self.powers[k].coeff(0, gamma, &MultiIndex::zeros(0));
        let value = coeff
            * Scalar::ratio(-1, 2).pow(k as u32)
            * Scalar::from_bigint(gamma.factorial())
            * Scalar::from_bigint(crate::index::factorial(k as u32)).inv().expect("nonzero");
        self.cache.insert(gamma.clone(), value.clone());
        Ok(value)
    }
}

/// `Λ` modulo `ν^{n+1}`, normalized so that `Λ₀ = δ`.
pub fn foi_distribution(pair: &PhaseDensityPair, n: i64) -> Result<PointDistribution> {
    let hd = hessian_data(pair)?;
    let chi = remainder_with(pair, &hd)?;
    let vars = pair.num_vars;
    let e = chi.exp(&TruncationSpec::standard(2 * n))?;
    let mut moments = Moments::new(&hd.h_upper);
    let mut inv_fact: HashMap<MultiIndex, Scalar> = HashMap::new();
    let mut terms: Vec<(i64, MultiIndex, Scalar)> = Vec::new();
    // Λ(x^β)|_{ν^r} collects the degree-(2r − |β|) part of e^χ; e^{νΔ} keeps
    // standard degree, so only the ν^k Δᵏ/k! with 2k = |α + β| survives at 0.
    for (k, c) in e.terms() {
        let deg = 2 * k.nu + k.x.degree() as i64;
        for beta in MultiIndex::all_up_to(vars, (2 * n - deg) as u32) {
            let gamma = k.x.add(&beta);
            if gamma.degree() % 2 == 1 {
                continue;
            }
            let r = k.nu + (gamma.degree() / 2) as i64;
            let m = moments.get(&gamma)?;
            if m.is_zero() {
                continue;
            }
            let f = inv_fact
                .entry(beta.clone())
                .or_insert_with(|| Scalar::from_bigint(beta.factorial()).inv().expect("nonzero"));
            terms.push((r, beta, c * &m * &*f));
        }
    }
    PointDistribution::from_terms(vars, terms)
}

/// `Λ(f)` modulo `ν^{n+1}`; negative ν-powers in `f` are compensated by
/// computing `Λ` to a correspondingly higher order.
pub fn foi_eval(pair: &PhaseDensityPair, f: &Jet, n: i64) -> Result<Jet> {
    let depth = laurent_depth(f);
    let l = foi_distribution(pair, n + depth)?;
    Ok(apply_distribution(&l, f, n)?.truncate_nu(n))
}

fn laurent_depth(f: &Jet) -> i64 {
    f.min_nu_exponent().map_or(0, |m| (-m).max(0))
}

/// A derivation `vⁱ∂ᵢ` with ν-regular coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    components: Vec<Jet>,
}

impl VectorField {
    pub fn new(components: Vec<Jet>) -> Result<Self> {
        let n = components.len();
        if components.iter().any(|c| c.num_vars() != n || !c.aux_names().is_empty()) {
            return Err(Error::InputShape(format!("a vector field needs {n} components on {n} variables")));
        }
        if components.iter().any(|c| c.min_nu_exponent().is_some_and(|m| m < 0)) {
            return Err(Error::NotNuRegular("vector field components have negative ν-exponents".into()));
        }
        Ok(VectorField { components })
    }

    pub fn components(&self) -> &[Jet] {
        &self.components
    }

    /// `v(f) = Σ vⁱ ∂ᵢ f`.
    pub fn apply(&self, f: &Jet) -> Result<Jet> {
        let mut out = Jet::zero(f.num_vars(), f.aux_names());
        for (i, v) in self.components.iter().enumerate() {
            let v = v.extend_aux(f.aux_names())?;
            out = out.add(&v.mul(&f.derive(JetVar::X(i))?, &TruncationSpec::unbounded())?)?;
        }
        Ok(out)
    }
}

/// `div_ρ v = Σ ∂ᵢvⁱ + v(u)` for `ρ = e^u dx`.
pub fn divergence(v: &VectorField, pair: &PhaseDensityPair) -> Result<Jet> {
    let mut out = v.apply(&pair.density_exponent)?;
    for (i, c) in v.components.iter().enumerate() {
        out = out.add(&c.derive(JetVar::X(i))?)?;
    }
    Ok(out)
}

/// A defect series together with the highest ν-order at which it is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Defect {
    pub series: Jet,
    pub exact_order: i64,
}

impl Defect {
    pub fn vanishes(&self) -> bool {
        self.series.is_zero()
    }
}

/// `Λ(vf + (vφ + div_ρ v) f)` through the orders that `Λ mod ν^{n+1}` determines.
pub fn check_foi_axiom(
    l: &PointDistribution,
    pair: &PhaseDensityPair,
    v: &VectorField,
    f: &Jet,
    n: i64,
) -> Result<Defect> {
    let exact = TruncationSpec::unbounded();
    let weight = v.apply(&pair.phase)?.add(&divergence(v, pair)?)?;
    let g = v.apply(f)?.add(&weight.extend_aux(f.aux_names())?.mul(f, &exact)?)?;
    let order = n - laurent_depth(&g);
    let series = apply_distribution(l, &g.truncate_nu(order), order)?.truncate_nu(order);
    Ok(Defect { series, exact_order: order })
}

/// `d/dν Λ(f) − Λ(df/dν + (dφ/dν + du/dν − n/(2ν)) f)` through the orders that
/// `Λ mod ν^{n+1}` determines.
pub fn check_strong(l: &PointDistribution, pair: &PhaseDensityPair, f: &Jet, n: i64) -> Result<Defect> {
    let exact = TruncationSpec::unbounded();
    let vars = pair.num_vars as i64;
    let f_order = n - laurent_depth(f);
    let lhs = apply_distribution(l, f, f_order)?.truncate_nu(f_order).derive(JetVar::Nu)?;
    let weight = pair
        .phase
        .derive(JetVar::Nu)?
        .add(&pair.density_exponent.derive(JetVar::Nu)?)?
        .sub(&Jet::monomial(pair.num_vars, -1, &vec![0; pair.num_vars], Scalar::ratio(vars, 2)))?;
    let g = f.derive(JetVar::Nu)?.add(&weight.extend_aux(f.aux_names())?.mul(f, &exact)?)?;
    let g_order = n - laurent_depth(&g);
    let rhs = apply_distribution(l, &g.truncate_nu(g_order), g_order)?;
    let order = (f_order - 1).min(g_order);
    Ok(Defect { series: lhs.sub(&rhs)?.truncate_nu(order), exact_order: order })
}

/// Reconstructs the normalized phase (`u = 0`) of a nondegenerate oscillatory
/// distribution; `foi_distribution` of the result reproduces `Λ` modulo
/// `ν^{n+1}`. The phase itself is pinned down only through standard degree
/// `n − 1`.
///
/// With `G = e^{ad(ν⁻¹ψ)} C = a·b`, `a ∈ exp 𝔢`, `b = e^χ`, the transposes of
/// `𝔢` kill constants, so `e^χ = exp(Gᵗ)(1)`. Conjugation by `e^{ν⁻¹ψ}` sends
/// `∂ᵢ` to the commuting `Yᵢ = ∂ᵢ + ν⁻¹h_{ij}xʲ`, hence
/// `e^χ = K(Y)(1)` with the commutative symbol `K(ξ) = exp(C(−ξ))`.
pub fn recover_phase(l: &PointDistribution, n: i64) -> Result<PhaseDensityPair> {
    let (hd, c) = recovery_data(l, n)?;
    let vars = l.num_vars();
    let symbol_trunc = TruncationSpec::new(
        GradingContext { nu_weight: 2, x_weight: -1, ..GradingContext::nu() },
        2 * n,
    );
    let mut transposed = Jet::zero(vars, &[]);
    for (k, coef) in c.terms() {
        let coef = if k.d.degree() % 2 == 1 { -coef } else { coef.clone() };
        transposed.add_term(k.nu, k.d.clone(), MultiIndex::zeros(0), coef);
    }
    let symbol = transposed.exp(&symbol_trunc)?;
    let trunc = TruncationSpec::standard(2 * n);
    let mut hermite = Hermite::new(&hd.h_lower);
    let mut e_chi = Jet::zero(vars, &[]);
    for (k, coef) in symbol.terms() {
        for (hk, hc) in hermite.get(&k.x)?.terms() {
            let key = JetKey { nu: hk.nu + k.nu, x: hk.x.clone(), aux: hk.aux.clone() };
            e_chi.add_key(key, &(hc * coef));
        }
    }
    let chi = e_chi.truncate(&trunc).log(&trunc)?;
    PhaseDensityPair::new(hd.psi.shift_nu(-1).add(&chi)?, Jet::zero(vars, &[]))
}

/// `H_β = Y^β(1) = e^{−ν⁻¹ψ} ∂^β e^{ν⁻¹ψ}`, homogeneous of standard degree `−|β|`.
struct Hermite {
    /// `ν⁻¹ h_{ij} xʲ` for each `i`.
    shifts: Vec<Jet>,
    cache: HashMap<MultiIndex, Jet>,
}

impl Hermite {
    fn new(h_lower: &[Vec<Scalar>]) -> Self {
        let n = h_lower.len();
        let shifts = (0..n)
            .map(|i| {
                Jet::from_x_terms(
                    n,
                    (0..n).map(|j| (-1, MultiIndex::unit(n, j).entries().to_vec(), h_lower[i][j].clone())),
                )
            })
            .collect();
        let mut cache = HashMap::new();
        cache.insert(MultiIndex::zeros(n), Jet::one(n, &[]));
        Hermite { shifts, cache }
    }

    fn get(&mut self, beta: &MultiIndex) -> Result<Jet> {
        if let Some(h) = self.cache.get(beta) {
            return Ok(h.clone());
        }
        let i = (0..beta.len()).find(|&i| beta.get(i) > 0).expect("nonzero index");
        let mut lower = beta.clone();
        lower.set(i, beta.get(i) - 1);
        let prev = self.get(&lower)?;
        let h = prev
            .derive(JetVar::X(i))?
            .add(&self.shifts[i].mul(&prev, &TruncationSpec::unbounded())?)?;
        self.cache.insert(beta.clone(), h.clone());
        Ok(h)
    }
}

/// [`recover_phase`] through the explicit factorization `G = e^E e^χ` along
/// the divergence/multiplication split.
pub fn recover_phase_by_factorization(l: &PointDistribution, n: i64) -> Result<PhaseDensityPair> {
    let (hd, c) = recovery_data(l, n)?;
    let trunc = TruncationSpec::standard(2 * n);
    let p = FormalOperator::multiplication(&hd.psi)?.shift_nu(-1);
    let generator = conjugate(&p, &c, ConjugationMeasure::DerivativeOrder, &trunc)?;
    let fact = factorize_log(&generator, SplitSpec::DivVsMult, &FiltrationSpec::standard(), &trunc)?;
    let f_part = op_log(&fact.b, &FiltrationSpec::standard(), &trunc)?;
    let chi = f_part
        .as_multiplication()
        .ok_or_else(|| Error::Convergence("multiplicative factor is not a multiplication operator".into()))?;
    PhaseDensityPair::new(hd.psi.shift_nu(-1).add(&chi)?, Jet::zero(l.num_vars(), &[]))
}

/// Hessian data read off `β_Λ = −h⁻¹` and `C = ν⁻¹X + (ν/2)hⁱʲ∂ᵢ∂ⱼ`.
fn recovery_data(l: &PointDistribution, n: i64) -> Result<(HessianData, FormalOperator)> {
    if !is_oscillatory(l, n)?.oscillatory {
        return Err(Error::Precondition("phase recovery needs an oscillatory distribution".into()));
    }
    let c = log_operator(&l.truncate_nu(n), n)?.expect("oscillatory implies Λ₀ = δ");
    let beta = beta_form(&l.truncate_nu(n.max(1)))?;
    let h_upper: Matrix = beta.matrix.iter().map(|row| row.iter().map(|b| -b).collect()).collect();
    let h_lower = matrix::inverse(&h_upper)?
        .ok_or_else(|| Error::Nondegeneracy("the bilinear form of the distribution is singular".into()))?;
    let hd = HessianData::from_lower(h_lower)?.expect("inverse of an invertible matrix");
    // −νΔ = (ν/2)hⁱʲ∂ᵢ∂ⱼ cancels the degree-0 part of C.
    let c = c.sub(&hd.delta_op.shift_nu(1))?;
    Ok((hd, c))
}
