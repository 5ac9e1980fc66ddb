//! Truncated formal series in chart variables, ν (Laurent with a floor) and
//! auxiliary parameters.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::grading::{GradingContext, TruncationSpec};
use crate::index::MultiIndex;
use crate::scalar::Scalar;

/// Monomial `ν^nu · x^x · aux^aux`. Field order gives the canonical term order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetKey {
    pub nu: i64,
    pub x: MultiIndex,
    pub aux: MultiIndex,
}

/// A jet at the chart origin. Stored coefficients are never zero.
#[derive(Clone)]
pub struct Jet {
    num_vars: usize,
    aux_names: Vec<String>,
    nu_min: i64,
    terms: BTreeMap<JetKey, Scalar>,
}

/// Variable with respect to which [`Jet::derive`] differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetVar {
    X(usize),
    Aux(usize),
    Nu,
}

/// The ring operations bundled by [`ring_op`].
#[derive(Debug, Clone)]
pub enum RingOp {
    Add,
    Sub,
    Mul,
    Scale(Scalar),
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars
            && self.aux_names == other.aux_names
            && self.terms == other.terms
    }
}

impl Eq for Jet {}

/// Precomputed term weights for one jet shape under one grading.
pub(crate) struct Weights {
    nu: i64,
    x: i64,
    aux: Vec<i64>,
}

impl Weights {
    pub(crate) fn new(grading: &GradingContext, aux_names: &[String]) -> Self {
        Weights {
            nu: grading.nu_weight,
            x: grading.x_weight,
            aux: aux_names.iter().map(|n| grading.aux_weight(n)).collect(),
        }
    }

    pub(crate) fn degree(&self, key: &JetKey) -> i64 {
        let aux: i64 = key
            .aux
            .entries()
            .iter()
            .zip(&self.aux)
            .map(|(&e, &w)| e as i64 * w)
            .sum();
        self.nu * key.nu + self.x * key.x.degree() as i64 + aux
    }
}

impl Jet {
    pub fn zero(num_vars: usize, aux_names: &[String]) -> Self {
        Jet {
            num_vars,
            aux_names: aux_names.to_vec(),
            nu_min: 0,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, aux_names: &[String], c: Scalar) -> Self {
        let mut j = Self::zero(num_vars, aux_names);
        j.add_term(0, MultiIndex::zeros(num_vars), MultiIndex::zeros(aux_names.len()), c);
        j
    }

    pub fn one(num_vars: usize, aux_names: &[String]) -> Self {
        Self::constant(num_vars, aux_names, Scalar::one())
    }

    /// Jet without auxiliary variables built from `(ν-exponent, x-exponents, c)`.
    pub fn from_x_terms<I, X>(num_vars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, X, Scalar)>,
        X: AsRef<[u16]>,
    {
        let mut j = Self::zero(num_vars, &[]);
        for (nu, x, c) in terms {
            j.add_term(nu, MultiIndex::from_slice(x.as_ref()), MultiIndex::zeros(0), c);
        }
        j
    }

    /// Single term `c · ν^nu · x^x` without auxiliary variables.
    pub fn monomial(num_vars: usize, nu: i64, x: &[u16], c: Scalar) -> Self {
        Self::from_x_terms(num_vars, [(nu, x, c)])
    }

    pub fn from_terms<I>(num_vars: usize, aux_names: &[String], terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (JetKey, Scalar)>,
    {
        let mut j = Self::zero(num_vars, aux_names);
        for (k, c) in terms {
            if k.x.len() != num_vars || k.aux.len() != aux_names.len() {
                return Err(Error::InputShape(format!(
                    "term {k:?} does not match {num_vars} variables and {} aux parameters",
                    aux_names.len()
                )));
            }
            j.add_term(k.nu, k.x, k.aux, c);
        }
        Ok(j)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn aux_names(&self) -> &[String] {
        &self.aux_names
    }

    /// Declared lower bound on ν-exponents.
    pub fn nu_min(&self) -> i64 {
        self.nu_min
    }

    pub(crate) fn with_nu_min(mut self, nu_min: i64) -> Self {
        self.nu_min = nu_min.min(self.min_nu_exponent().unwrap_or(nu_min));
        self
    }

    /// Smallest ν-exponent actually present.
    pub fn min_nu_exponent(&self) -> Option<i64> {
        self.terms.keys().map(|k| k.nu).min()
    }

    pub fn max_nu_exponent(&self) -> Option<i64> {
        self.terms.keys().map(|k| k.nu).max()
    }

    /// Largest total x-degree present.
    pub fn max_x_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.x.degree()).max()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetKey, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, nu: i64, x: &MultiIndex, aux: &MultiIndex) -> Scalar {
        self.terms
            .get(&JetKey { nu, x: x.clone(), aux: aux.clone() })
            .cloned()
            .unwrap_or_default()
    }

    /// Coefficient of `ν^nu x^x` in a jet without auxiliary variables.
    pub fn coeff_x(&self, nu: i64, x: &[u16]) -> Scalar {
        self.coeff(nu, &MultiIndex::from_slice(x), &MultiIndex::zeros(self.aux_names.len()))
    }

    pub fn add_term(&mut self, nu: i64, x: MultiIndex, aux: MultiIndex, c: Scalar) {
        debug_assert_eq!(x.len(), self.num_vars);
        debug_assert_eq!(aux.len(), self.aux_names.len());
        if c.is_zero() {
            return;
        }
        self.nu_min = self.nu_min.min(nu);
        accumulate(&mut self.terms, JetKey { nu, x, aux }, &c);
    }

    pub(crate) fn add_key(&mut self, key: JetKey, c: &Scalar) {
        self.nu_min = self.nu_min.min(key.nu);
        accumulate(&mut self.terms, key, c);
    }

    pub(crate) fn same_shape(&self, other: &Jet) -> Result<()> {
        if self.num_vars != other.num_vars || self.aux_names != other.aux_names {
            return Err(Error::InputShape(format!(
                "jets on ({}, {:?}) and ({}, {:?})",
                self.num_vars, self.aux_names, other.num_vars, other.aux_names
            )));
        }
        Ok(())
    }

    pub(crate) fn weights(&self, grading: &GradingContext) -> Weights {
        Weights::new(grading, &self.aux_names)
    }

    pub fn term_degree(&self, key: &JetKey, grading: &GradingContext) -> i64 {
        self.weights(grading).degree(key)
    }

    /// Minimum term degree, `None` for the zero jet.
    pub fn min_degree(&self, grading: &GradingContext) -> Option<i64> {
        let w = self.weights(grading);
        self.terms.keys().map(|k| w.degree(k)).min()
    }

    pub fn truncate(&self, trunc: &TruncationSpec) -> Jet {
        let w = self.weights(&trunc.grading);
        self.filter(|k| trunc.keeps(w.degree(k)))
    }

    pub fn filter(&self, mut keep: impl FnMut(&JetKey) -> bool) -> Jet {
        Jet {
            num_vars: self.num_vars,
            aux_names: self.aux_names.clone(),
            nu_min: self.nu_min,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// Terms of ν-exponent `≤ max_nu`.
    pub fn truncate_nu(&self, max_nu: i64) -> Jet {
        self.filter(|k| k.nu <= max_nu)
    }

    /// Sum of the terms of degree exactly `d`.
    pub fn graded_component(&self, grading: &GradingContext, d: i64) -> Jet {
        let w = self.weights(grading);
        self.filter(|k| w.degree(k) == d)
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.nu_min = self.nu_min.min(other.nu_min);
        for (k, c) in &other.terms {
            accumulate(&mut out.terms, k.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Jet {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, s: &Scalar) -> Jet {
        if s.is_zero() {
            return Jet::zero(self.num_vars, &self.aux_names).with_nu_min(self.nu_min);
        }
        self.map_coeffs(|c| c * s)
    }

    fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Jet {
        Jet {
            num_vars: self.num_vars,
            aux_names: self.aux_names.clone(),
            nu_min: self.nu_min,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), f(c))).collect(),
        }
    }

    /// Multiplies every term by `ν^k`.
    pub fn shift_nu(&self, k: i64) -> Jet {
        Jet {
            num_vars: self.num_vars,
            aux_names: self.aux_names.clone(),
            nu_min: self.nu_min + k,
            terms: self
                .terms
                .iter()
                .map(|(key, c)| (JetKey { nu: key.nu + k, ..key.clone() }, c.clone()))
                .collect(),
        }
    }

    /// Multiplies every term by `x^beta`.
    pub fn shift_x(&self, beta: &MultiIndex) -> Jet {
        Jet {
            num_vars: self.num_vars,
            aux_names: self.aux_names.clone(),
            nu_min: self.nu_min,
            terms: self
                .terms
                .iter()
                .map(|(key, c)| (JetKey { x: key.x.add(beta), ..key.clone() }, c.clone()))
                .collect(),
        }
    }

    /// Exact product modulo `trunc`.
    pub fn mul(&self, other: &Jet, trunc: &TruncationSpec) -> Result<Jet> {
        self.same_shape(other)?;
        let w = self.weights(&trunc.grading);
        let rhs: Vec<(i64, &JetKey, &Scalar)> =
            other.terms.iter().map(|(k, c)| (w.degree(k), k, c)).collect();
        let min_rhs = rhs.iter().map(|t| t.0).min();
        let mut terms = BTreeMap::new();
        if let Some(min_rhs) = min_rhs {
            for (ka, ca) in &self.terms {
                let da = w.degree(ka);
                if !trunc.keeps(da + min_rhs) {
                    continue;
                }
                for &(db, kb, cb) in &rhs {
                    if !trunc.keeps(da + db) {
                        continue;
                    }
                    let key = JetKey {
                        nu: ka.nu + kb.nu,
                        x: ka.x.add(&kb.x),
                        aux: ka.aux.add(&kb.aux),
                    };
                    accumulate(&mut terms, key, &(ca * cb));
                }
            }
        }
        Ok(Jet {
            num_vars: self.num_vars,
            aux_names: self.aux_names.clone(),
            nu_min: self.nu_min + other.nu_min,
            terms,
        })
    }

    /// Graded components `d ↦ f_d`.
    fn components(&self, grading: &GradingContext) -> BTreeMap<i64, Jet> {
        let w = self.weights(grading);
        let mut out: BTreeMap<i64, Jet> = BTreeMap::new();
        for (k, c) in &self.terms {
            out.entry(w.degree(k))
                .or_insert_with(|| Jet::zero(self.num_vars, &self.aux_names))
                .terms
                .insert(k.clone(), c.clone());
        }
        out
    }

    /// `Σ_k fᵏ/k!` modulo `trunc`; every term of `self` must have degree `≥ 1`.
    ///
    /// Uses the grading derivation: `d·E_d = Σ_k k·f_k·E_{d−k}` for the
    /// components of `E = e^f`.
    pub fn exp(&self, trunc: &TruncationSpec) -> Result<Jet> {
        self.require_positive(&trunc.grading, "exponential")?;
        let zero = Jet::zero(self.num_vars, &self.aux_names);
        if !trunc.keeps(0) {
            return Ok(zero);
        }
        let max = series_length(trunc)?;
        let f = self.components(&trunc.grading);
        let mut e: Vec<Jet> = vec![Jet::one(self.num_vars, &self.aux_names)];
        for d in 1..=max {
            let mut acc = zero.clone();
            for (&k, fk) in f.range(1..=d) {
                let prev = &e[(d - k) as usize];
                if !prev.is_zero() {
                    acc = acc.add(&fk.mul(prev, trunc)?.scale(&Scalar::from_int(k)))?;
                }
            }
            e.push(acc.scale(&Scalar::ratio(1, d)));
        }
        let mut out = zero;
        for c in e {
            out = out.add(&c)?;
        }
        Ok(out)
    }

    /// `log f` modulo `trunc`; requires `f = 1 + h` with `h` of degree `≥ 1`.
    ///
    /// Inverts the recurrence of [`Jet::exp`]:
    /// `d·L_d = d·f_d − Σ_{k<d} k·L_k·f_{d−k}`.
    pub fn log(&self, trunc: &TruncationSpec) -> Result<Jet> {
        let one = Jet::one(self.num_vars, &self.aux_names);
        let h = self.sub(&one)?;
        let w = h.weights(&trunc.grading);
        if let Some((k, _)) = h.terms.iter().find(|(k, _)| w.degree(k) < 1) {
            return Err(Error::Convergence(format!(
                "logarithm needs f = 1 + (degree >= 1); found term {k:?} of degree {}",
                w.degree(k)
            )));
        }
        let zero = Jet::zero(self.num_vars, &self.aux_names);
        let max = series_length(trunc)?;
        let f = h.components(&trunc.grading);
        let mut l: Vec<Jet> = vec![zero.clone()];
        for d in 1..=max {
            let mut acc = f.get(&d).map_or_else(|| zero.clone(), |fd| fd.scale(&Scalar::from_int(d)));
            for k in 1..d {
                let lk = &l[k as usize];
                if lk.is_zero() {
                    continue;
                }
                if let Some(fr) = f.get(&(d - k)) {
                    acc = acc.sub(&lk.mul(fr, trunc)?.scale(&Scalar::from_int(k)))?;
                }
            }
            l.push(acc.scale(&Scalar::ratio(1, d)));
        }
        let mut out = zero;
        for c in l {
            out = out.add(&c)?;
        }
        Ok(out)
    }

    fn require_positive(&self, grading: &GradingContext, what: &str) -> Result<()> {
        let w = self.weights(grading);
        if let Some((k, _)) = self.terms.iter().find(|(k, _)| w.degree(k) < 1) {
            return Err(Error::Convergence(format!(
                "{what} needs every term of degree >= 1; found {k:?} of degree {}",
                w.degree(k)
            )));
        }
        Ok(())
    }

    /// Formal partial derivative.
    pub fn derive(&self, var: JetVar) -> Result<Jet> {
        let mut out = Jet::zero(self.num_vars, &self.aux_names);
        match var {
            JetVar::X(i) if i < self.num_vars => {
                for (k, c) in &self.terms {
                    let e = k.x.get(i);
                    if e == 0 {
                        continue;
                    }
                    let mut x = k.x.clone();
                    x.set(i, e - 1);
                    out.add_term(k.nu, x, k.aux.clone(), c * Scalar::from_int(e as i64));
                }
                out.nu_min = self.nu_min;
            }
            JetVar::Aux(i) if i < self.aux_names.len() => {
                for (k, c) in &self.terms {
                    let e = k.aux.get(i);
                    if e == 0 {
                        continue;
                    }
                    let mut aux = k.aux.clone();
                    aux.set(i, e - 1);
                    out.add_term(k.nu, k.x.clone(), aux, c * Scalar::from_int(e as i64));
                }
                out.nu_min = self.nu_min;
            }
            JetVar::Nu => {
                for (k, c) in &self.terms {
                    if k.nu == 0 {
                        continue;
                    }
                    out.add_term(k.nu - 1, k.x.clone(), k.aux.clone(), c * Scalar::from_int(k.nu));
                }
                out.nu_min = self.nu_min - 1;
            }
            other => {
                return Err(Error::InputShape(format!(
                    "unknown variable {other:?} for a jet on {} variables with aux {:?}",
                    self.num_vars, self.aux_names
                )))
            }
        }
        Ok(out)
    }

    /// The `x = 0` part (a ν-series, possibly in the auxiliary variables).
    pub fn at_origin(&self) -> Jet {
        self.filter(|k| k.x.is_zero())
    }

    /// Coefficient of `ν^k`, as a jet with ν-exponent `0`.
    pub fn nu_coefficient(&self, k: i64) -> Jet {
        self.filter(|key| key.nu == k).shift_nu(-k).with_nu_min(0)
    }

    /// Re-embeds into a jet on more auxiliary variables; `names` must start
    /// with the current auxiliary names.
    pub fn extend_aux(&self, names: &[String]) -> Result<Jet> {
        if !names.starts_with(&self.aux_names) {
            return Err(Error::InputShape(format!(
                "aux names {names:?} do not extend {:?}",
                self.aux_names
            )));
        }
        let pad = MultiIndex::zeros(names.len() - self.aux_names.len());
        let mut out = Jet::zero(self.num_vars, names);
        out.nu_min = self.nu_min;
        for (k, c) in &self.terms {
            out.terms.insert(
                JetKey { nu: k.nu, x: k.x.clone(), aux: k.aux.concat(&pad) },
                c.clone(),
            );
        }
        Ok(out)
    }

    /// The same coefficients viewed on `num_vars` chart variables.
    pub(crate) fn relabel_vars(&self, num_vars: usize, f: impl Fn(&MultiIndex) -> MultiIndex) -> Jet {
        let mut out = Jet::zero(num_vars, &self.aux_names);
        out.nu_min = self.nu_min;
        for (k, c) in &self.terms {
            out.add_key(JetKey { nu: k.nu, x: f(&k.x), aux: k.aux.clone() }, c);
        }
        out
    }
}

/// Number of graded components a series must produce under `trunc`.
fn series_length(trunc: &TruncationSpec) -> Result<i64> {
    const LIMIT: i64 = 1 << 16;
    if trunc.max_degree > LIMIT {
        return Err(Error::Convergence(format!(
            "series truncated at degree {} would not terminate in practice",
            trunc.max_degree
        )));
    }
    Ok(trunc.max_degree)
}

pub(crate) fn accumulate<K: Ord>(terms: &mut BTreeMap<K, Scalar>, key: K, c: &Scalar) {
    use std::collections::btree_map::Entry;
    match terms.entry(key) {
        Entry::Vacant(v) => {
            if !c.is_zero() {
                v.insert(c.clone());
            }
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// `a (op) b` modulo `trunc`.
pub fn ring_op(a: &Jet, b: &Jet, op: RingOp, trunc: &TruncationSpec) -> Result<Jet> {
    let out = match op {
        RingOp::Add => a.add(b)?,
        RingOp::Sub => a.sub(b)?,
        RingOp::Mul => return a.mul(b, trunc),
        RingOp::Scale(s) => a.scale(&s),
    };
    Ok(out.truncate(trunc))
}

/// Determinant of a square matrix of jets, by cofactor expansion modulo `trunc`.
pub fn determinant(m: &[Vec<Jet>], trunc: &TruncationSpec) -> Result<Jet> {
    let n = m.len();
    if n == 0 {
        return Err(Error::InputShape("empty matrix".into()));
    }
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::InputShape("matrix is not square".into()));
    }
    if n == 1 {
        return Ok(m[0][0].truncate(trunc));
    }
    let mut acc = Jet::zero(m[0][0].num_vars, m[0][0].aux_names());
    for col in 0..n {
        if m[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Jet>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != col)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let term = m[0][col].mul(&determinant(&minor, trunc)?, trunc)?;
        acc = if col % 2 == 0 { acc.add(&term)? } else { acc.sub(&term)? };
    }
    Ok(acc)
}

impl fmt::Debug for Jet {
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
                if !k.x.is_zero() {
                    s += &format!("x{:?}", k.x);
                }
                if !k.aux.is_zero() {
                    s += &format!("a{:?}", k.aux);
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
