//! Star products given by their bidifferential operators.
//!
//! `C_r` lives on `2n` variables: `y = x¹…xⁿ` carries the first argument,
//! `z = x^{n+1}…x^{2n}` the second, and `C_r(f, g)` is read off on the
//! diagonal `y = z`. Only the listed `C_r` exist; higher ones are zero.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::grading::TruncationSpec;
use crate::index::MultiIndex;
use crate::jet::{Jet, JetVar};
use crate::matrix::{self, Matrix};
use crate::operator::FormalOperator;
use crate::oscillatory::PointDistribution;
use crate::scalar::Scalar;

/// A constant matrix `π^{ij}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoissonMatrix {
    entries: Matrix,
}

impl PoissonMatrix {
    pub fn new(entries: Matrix) -> Result<Self> {
        matrix::check_square(&entries)?;
        Ok(PoissonMatrix { entries })
    }

    /// The standard symplectic matrix on `2k` variables.
    pub fn symplectic(k: usize) -> Self {
        let n = 2 * k;
        let mut m = vec![vec![Scalar::zero(); n]; n];
        for i in 0..k {
            m[i][i + k] = Scalar::one();
            m[i + k][i] = -Scalar::one();
        }
        PoissonMatrix { entries: m }
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn num_vars(&self) -> usize {
        self.entries.len()
    }

    pub fn determinant(&self) -> Scalar {
        matrix::determinant(&self.entries).expect("square by construction")
    }

    pub fn is_skew(&self) -> bool {
        let m = &self.entries;
        (0..m.len()).all(|i| (0..=i).all(|j| m[i][j] == -m[j][i].clone()))
    }
}

/// `f ⋆ g = fg + Σ_r ν^r C_r(f, g)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarProduct {
    num_vars: usize,
    c_ops: Vec<FormalOperator>,
}

impl StarProduct {
    /// `c_ops[r − 1]` is `C_r`. Every term must differentiate both arguments,
    /// so that `1` stays the unit.
    pub fn new(num_vars: usize, c_ops: Vec<FormalOperator>) -> Result<Self> {
        let mut normal = Vec::with_capacity(c_ops.len());
        for (r, op) in c_ops.into_iter().enumerate() {
            if op.num_vars() != 2 * num_vars {
                return Err(Error::InputShape(format!(
                    "C_{} acts on {} variables, expected {}",
                    r + 1,
                    op.num_vars(),
                    2 * num_vars
                )));
            }
            let op = op.to_normal();
            for (k, _) in op.terms() {
                if k.nu != 0 {
                    return Err(Error::InputShape(format!("C_{} depends on nu", r + 1)));
                }
                let (dy, dz) = k.d.split_at(num_vars);
                if dy.is_zero() || dz.is_zero() {
                    return Err(Error::Precondition(format!(
                        "C_{} does not differentiate both arguments, so 1 is not a unit",
                        r + 1
                    )));
                }
            }
            normal.push(op);
        }
        Ok(StarProduct { num_vars, c_ops: normal })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn c_ops(&self) -> &[FormalOperator] {
        &self.c_ops
    }

    /// `C_r`, if it was given.
    pub fn c(&self, r: usize) -> Option<&FormalOperator> {
        r.checked_sub(1).and_then(|i| self.c_ops.get(i))
    }

    pub fn has_constant_coefficients(&self) -> bool {
        self.c_ops.iter().all(FormalOperator::has_constant_coefficients)
    }

    /// `B(ξ_y, ξ_z) = 1 + Σ ν^r C_r(ξ_y, ξ_z)` for constant-coefficient `C_r`,
    /// as a jet on `2n` variables standing for `(ξ_y, ξ_z)`.
    pub fn bisymbol(&self) -> Result<Jet> {
        if !self.has_constant_coefficients() {
            return Err(Error::Precondition("the bisymbol needs constant coefficients".into()));
        }
        let mut out = Jet::one(2 * self.num_vars, &[]);
        for (r, op) in self.c_ops.iter().enumerate() {
            for (k, c) in op.terms() {
                out.add_term(r as i64 + 1, k.d.clone(), MultiIndex::zeros(0), c.clone());
            }
        }
        Ok(out)
    }

    /// Inverse of [`StarProduct::bisymbol`]: `C_r` is the `ν^r` part for
    /// `1 ≤ r ≤ n`.
    pub fn from_bisymbol(num_vars: usize, b: &Jet, n: i64) -> Result<Self> {
        if b.num_vars() != 2 * num_vars || !b.aux_names().is_empty() {
            return Err(Error::InputShape(format!("a bisymbol lives on {} variables", 2 * num_vars)));
        }
        if b.coeff_x(0, &vec![0; 2 * num_vars]) != Scalar::one() {
            return Err(Error::Precondition("the bisymbol must start with 1".into()));
        }
        let zero = vec![0u16; 2 * num_vars];
        let mut ops = vec![FormalOperator::zero(2 * num_vars); n.max(0) as usize];
        for (k, c) in b.terms() {
            if k.nu == 0 && k.x.is_zero() {
                continue;
            }
            if k.nu < 1 {
                return Err(Error::NotNuRegular(format!("bisymbol term at nu^{}", k.nu)));
            }
            if k.nu <= n {
                ops[k.nu as usize - 1].add_term(0, MultiIndex::from_slice(&zero), k.x.clone(), c.clone());
            }
        }
        Self::new(num_vars, ops)
    }

    /// The equivalent product `f ⋆' g = T⁻¹(Tf ⋆ Tg)` for `T = exp(t(∂))`,
    /// with bisymbol `B · exp(t(ξ_y) + t(ξ_z) − t(ξ_y + ξ_z))`. `t` is a jet in
    /// `ξ` whose terms all carry a positive power of `ν`.
    pub fn gauge_transform(&self, t: &Jet, n: i64) -> Result<Self> {
        let m = self.num_vars;
        if t.num_vars() != m || !t.aux_names().is_empty() {
            return Err(Error::InputShape(format!("the gauge generator must live on {m} variables")));
        }
        if t.min_nu_exponent().is_some_and(|a| a < 1) {
            return Err(Error::Precondition("the gauge generator must be divisible by nu".into()));
        }
        // Constants only rescale the product and would spoil the unit.
        let t = t.filter(|k| !k.x.is_zero());
        let trunc = TruncationSpec::nu(n);
        let y = t.relabel_vars(2 * m, |a| a.concat(&MultiIndex::zeros(m)));
        let z = t.relabel_vars(2 * m, |a| MultiIndex::zeros(m).concat(a));
        let mut exponent = y.add(&z)?;
        for (k, c) in t.terms() {
            let diag = diagonal_power(m, &k.x).shift_nu(k.nu).scale(c);
            exponent = exponent.sub(&diag)?;
        }
        let b = self.bisymbol()?.mul(&exponent.exp(&trunc)?, &trunc)?;
        Self::from_bisymbol(m, &b, n)
    }
}

/// `(ξ_y + ξ_z)^α` on `2m` variables.
fn diagonal_power(m: usize, alpha: &MultiIndex) -> Jet {
    let exact = TruncationSpec::unbounded();
    let mut out = Jet::one(2 * m, &[]);
    for i in 0..m {
        let sum = Jet::from_x_terms(
            2 * m,
            [
                (0, MultiIndex::unit(2 * m, i).entries().to_vec(), Scalar::one()),
                (0, MultiIndex::unit(2 * m, m + i).entries().to_vec(), Scalar::one()),
            ],
        );
        for _ in 0..alpha.get(i) {
            out = out.mul(&sum, &exact).expect("same shape");
        }
    }
    out
}

/// `C_r = (π^{ij} ∂_{yⁱ} ∂_{zʲ})^r / r!` for `r ≤ n`.
pub fn moyal_star(pi: &PoissonMatrix, n: i64) -> StarProduct {
    let m = pi.num_vars();
    let exact = TruncationSpec::unbounded();
    let zero = vec![0u16; 2 * m];
    let mut p = FormalOperator::zero(2 * m);
    for i in 0..m {
        for j in 0..m {
            let c = &pi.entries[i][j];
            if !c.is_zero() {
                let d = MultiIndex::unit(2 * m, i).add(&MultiIndex::unit(2 * m, m + j));
                p.add_term(0, MultiIndex::from_slice(&zero), d, c.clone());
            }
        }
    }
    let mut ops = Vec::new();
    let mut power = FormalOperator::identity(2 * m);
    for r in 1..=n.max(0) {
        power = power.compose(&p, &exact).expect("same shape").scale(&Scalar::ratio(1, r));
        ops.push(power.clone());
    }
    StarProduct::new(m, ops).expect("Moyal terms differentiate both arguments")
}

/// Memoized `∂^β f`.
struct Derivatives<'a> {
    f: &'a Jet,
    cache: HashMap<MultiIndex, Jet>,
}

impl<'a> Derivatives<'a> {
    fn new(f: &'a Jet) -> Self {
        Derivatives { f, cache: HashMap::new() }
    }

    fn get(&mut self, beta: &MultiIndex) -> Result<&Jet> {
        if !self.cache.contains_key(beta) {
            let mut d = self.f.clone();
            for i in 0..beta.len() {
                for _ in 0..beta.get(i) {
                    d = d.derive(JetVar::X(i))?;
                }
            }
            self.cache.insert(beta.clone(), d);
        }
        Ok(&self.cache[beta])
    }
}

/// `fg + Σ_{r ≤ max_r} ν^r C_r(f, g)` truncated by `trunc`.
fn product(s: &StarProduct, f: &Jet, g: &Jet, max_r: i64, trunc: &TruncationSpec) -> Result<Jet> {
    let m = s.num_vars;
    if f.num_vars() != m || g.num_vars() != m {
        return Err(Error::InputShape(format!("star product on {m} variables got jets on {} and {}", f.num_vars(), g.num_vars())));
    }
    let mut out = f.mul(g, trunc)?;
    let mut df = Derivatives::new(f);
    let mut dg = Derivatives::new(g);
    for (r, op) in s.c_ops.iter().enumerate().take(max_r.max(0) as usize) {
        let r = r as i64 + 1;
        for (k, c) in op.terms() {
            let (ay, az) = k.x.split_at(m);
            let alpha = ay.add(&az);
            let (by, bz) = k.d.split_at(m);
            let shift = r * trunc.grading.nu_weight + alpha.degree() as i64 * trunc.grading.x_weight;
            let inner = if shift >= 0 {
                TruncationSpec::new(trunc.grading.clone(), trunc.max_degree - shift)
            } else {
                TruncationSpec::unbounded()
            };
            let a = df.get(&by)?.clone();
            let term = a.mul(dg.get(&bz)?, &inner)?;
            if term.is_zero() {
                continue;
            }
            out = out.add(&term.shift_x(&alpha).shift_nu(r).scale(c))?;
        }
    }
    Ok(out.truncate(trunc))
}

/// `f ⋆ g` modulo `ν^{n+1}`.
pub fn star_multiply(s: &StarProduct, f: &Jet, g: &Jet, n: i64) -> Result<Jet> {
    let depth = f.min_nu_exponent().unwrap_or(0).min(0) + g.min_nu_exponent().unwrap_or(0).min(0);
    product(s, f, g, n - depth, &TruncationSpec::nu(n))
}

/// Every given `C_r` with `r ≤ n` has order at most `r` in each argument.
pub fn is_natural_star(s: &StarProduct, n: i64) -> bool {
    let m = s.num_vars;
    s.c_ops.iter().enumerate().take(n.max(0) as usize).all(|(r, op)| {
        op.terms().all(|(k, _)| {
            let (dy, dz) = k.d.split_at(m);
            dy.degree() as usize <= r + 1 && dz.degree() as usize <= r + 1
        })
    })
}

/// `Λ(f ⊗ g) = (f ⋆ g)(0)` as a distribution on `2n` variables.
pub fn two_point_distribution(s: &StarProduct, n: i64) -> Result<PointDistribution> {
    let mut terms = vec![(0, MultiIndex::zeros(2 * s.num_vars), Scalar::one())];
    for (r, op) in s.c_ops.iter().enumerate().take(n.max(0) as usize) {
        for (k, c) in op.terms().filter(|(k, _)| k.x.is_zero()) {
            terms.push((r as i64 + 1, k.d.clone(), c.clone()));
        }
    }
    PointDistribution::from_terms(2 * s.num_vars, terms)
}

/// `exp_⋆ f = Σ f^{⋆k}/k!` for `f` with ν-exponents `≥ −1` and every term of
/// positive degree under `trunc`.
pub fn star_exponential(s: &StarProduct, f: &Jet, trunc: &TruncationSpec) -> Result<Jet> {
    if f.min_nu_exponent().is_some_and(|a| a < -1) {
        return Err(Error::Convergence("star exponential needs nu-exponents >= -1".into()));
    }
    if f.min_degree(&trunc.grading).is_some_and(|d| d < 1) {
        return Err(Error::Convergence("star exponential needs every term of positive degree".into()));
    }
    let all = s.c_ops.len() as i64;
    let mut out = Jet::one(f.num_vars(), f.aux_names()).truncate(trunc);
    let mut power = out.clone();
    for k in 1..=trunc.max_degree.max(0) {
        power = product(s, &power, f, all, trunc)?.scale(&Scalar::ratio(1, k));
        if power.is_zero() {
            break;
        }
        out = out.add(&power)?;
    }
    Ok(out)
}

/// `L_f g = f ⋆ g` as a differential operator in `g`, modulo `ν^{n+1}`.
pub fn left_mult_operator(s: &StarProduct, f: &Jet, n: i64) -> Result<FormalOperator> {
    mult_operator(s, f, n, true)
}

/// `R_g f = f ⋆ g` as a differential operator in `f`, modulo `ν^{n+1}`.
pub fn right_mult_operator(s: &StarProduct, g: &Jet, n: i64) -> Result<FormalOperator> {
    mult_operator(s, g, n, false)
}

fn mult_operator(s: &StarProduct, f: &Jet, n: i64, left: bool) -> Result<FormalOperator> {
    let m = s.num_vars;
    if f.num_vars() != m {
        return Err(Error::InputShape(format!("star product on {m} variables got a jet on {}", f.num_vars())));
    }
    if f.min_nu_exponent().is_some_and(|a| a < 0) {
        return Err(Error::NotNuRegular("multiplication operators need a nu-regular jet".into()));
    }
    let trunc = TruncationSpec::nu(n);
    let mut out = FormalOperator::multiplication(&f.truncate(&trunc))?;
    let mut df = Derivatives::new(f);
    for (r, op) in s.c_ops.iter().enumerate().take(n.max(0) as usize) {
        for (k, c) in op.terms() {
            let (ay, az) = k.x.split_at(m);
            let (by, bz) = k.d.split_at(m);
            let (own, other) = if left { (by, bz) } else { (bz, by) };
            let coeff = df.get(&own)?.shift_x(&ay.add(&az)).shift_nu(r as i64 + 1).scale(c);
            for (ck, cc) in coeff.truncate(&trunc).terms() {
                out.add_term(ck.nu, ck.x.clone(), other.clone(), cc.clone());
            }
        }
    }
    Ok(out)
}

/// Full symbol of `L_f` with auxiliary variables `xi1 … xin`; free of
/// negative ν-powers when `s` is natural.
pub fn left_mult_symbol(s: &StarProduct, f: &Jet, n: i64) -> Result<Jet> {
    Ok(left_mult_operator(s, f, n)?.full_symbol())
}

/// `(f ⋆ g) ⋆ h − f ⋆ (g ⋆ h)` modulo `ν^{n+1}`.
pub fn associator(s: &StarProduct, f: &Jet, g: &Jet, h: &Jet, n: i64) -> Result<Jet> {
    let lhs = star_multiply(s, &star_multiply(s, f, g, n)?, h, n)?;
    let rhs = star_multiply(s, f, &star_multiply(s, g, h, n)?, n)?;
    lhs.sub(&rhs)
}
