//! JSON interchange formats.
//!
//! Scalars are strings in the `<rat>[(+|-)<rat>i]` grammar; integers are
//! also accepted on input. Terms are written in canonical key order, so equal
//! values serialize to identical bytes.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::foi::PhaseDensityPair;
use crate::index::MultiIndex;
use crate::jet::{Jet, JetKey};
use crate::matrix::Matrix;
use crate::operator::{FormalOperator, OpKey, OperatorOrdering};
use crate::oscillatory::PointDistribution;
use crate::scalar::Scalar;
use crate::star::{moyal_star, PoissonMatrix, StarProduct};

/// Conversion to and from the JSON schema of a data type.
pub trait JsonFormat: Sized {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;

    fn to_json_string(&self) -> String {
        self.to_json().to_string()
    }

    fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&parse_value(s)?)
    }
}

pub fn parse_value(s: &str) -> Result<Value> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

fn decode<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::Parse(e.to_string()))
}

fn encode<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("plain data serializes")
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarText {
    Int(i64),
    Text(String),
}

impl ScalarText {
    fn parse(&self) -> Result<Scalar> {
        match self {
            ScalarText::Int(v) => Ok(Scalar::from_int(*v)),
            ScalarText::Text(s) => s.parse(),
        }
    }

    fn of(c: &Scalar) -> Self {
        ScalarText::Text(c.to_string())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetTerm {
    nu: i64,
    x: Vec<u16>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    aux: Vec<u16>,
    c: ScalarText,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetDoc {
    num_vars: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    aux: Vec<String>,
    terms: Vec<JetTerm>,
}

impl JsonFormat for Jet {
    fn to_json(&self) -> Value {
        encode(&JetDoc {
            num_vars: self.num_vars(),
            aux: self.aux_names().to_vec(),
            terms: self
                .terms()
                .map(|(k, c)| JetTerm {
                    nu: k.nu,
                    x: k.x.entries().to_vec(),
                    aux: k.aux.entries().to_vec(),
                    c: ScalarText::of(c),
                })
                .collect(),
        })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let doc: JetDoc = decode(v)?;
        let terms = doc
            .terms
            .iter()
            .map(|t| {
                let aux = if t.aux.is_empty() { vec![0; doc.aux.len()] } else { t.aux.clone() };
                let key = JetKey { nu: t.nu, x: MultiIndex::from_slice(&t.x), aux: MultiIndex::from_slice(&aux) };
                Ok((key, t.c.parse()?))
            })
            .collect::<Result<Vec<_>>>()?;
        Jet::from_terms(doc.num_vars, &doc.aux, terms)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpTerm {
    nu: i64,
    x: Vec<u16>,
    dx: Vec<u16>,
    c: ScalarText,
}

#[derive(Serialize, Deserialize, Clone, Copy, Default)]
#[serde(rename_all = "lowercase")]
enum OrderingText {
    #[default]
    Normal,
    Anti,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorDoc {
    num_vars: usize,
    #[serde(default)]
    ordering: OrderingText,
    terms: Vec<OpTerm>,
}

impl JsonFormat for FormalOperator {
    fn to_json(&self) -> Value {
        encode(&OperatorDoc {
            num_vars: self.num_vars(),
            ordering: match self.ordering() {
                OperatorOrdering::Normal => OrderingText::Normal,
                OperatorOrdering::AntiNormal => OrderingText::Anti,
            },
            terms: self
                .terms()
                .map(|(k, c)| OpTerm { nu: k.nu, x: k.x.entries().to_vec(), dx: k.d.entries().to_vec(), c: ScalarText::of(c) })
                .collect(),
        })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let doc: OperatorDoc = decode(v)?;
        let ordering = match doc.ordering {
            OrderingText::Normal => OperatorOrdering::Normal,
            OrderingText::Anti => OperatorOrdering::AntiNormal,
        };
        let terms = doc
            .terms
            .iter()
            .map(|t| {
                let key = OpKey { nu: t.nu, x: MultiIndex::from_slice(&t.x), d: MultiIndex::from_slice(&t.dx) };
                Ok((key, t.c.parse()?))
            })
            .collect::<Result<Vec<_>>>()?;
        FormalOperator::from_keys(doc.num_vars, ordering, terms)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistTerm {
    nu: i64,
    dx: Vec<u16>,
    c: ScalarText,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistDoc {
    num_vars: usize,
    terms: Vec<DistTerm>,
}

impl JsonFormat for PointDistribution {
    fn to_json(&self) -> Value {
        encode(&DistDoc {
            num_vars: self.num_vars(),
            terms: self
                .terms()
                .map(|(r, b, c)| DistTerm { nu: r, dx: b.entries().to_vec(), c: ScalarText::of(c) })
                .collect(),
        })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let doc: DistDoc = decode(v)?;
        let terms = doc
            .terms
            .iter()
            .map(|t| Ok((t.nu, MultiIndex::from_slice(&t.dx), t.c.parse()?)))
            .collect::<Result<Vec<_>>>()?;
        PointDistribution::from_terms(doc.num_vars, terms)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDoc {
    num_vars: usize,
    phase: Value,
    #[serde(default)]
    u: Option<Value>,
}

impl JsonFormat for PhaseDensityPair {
    fn to_json(&self) -> Value {
        encode(&PairDoc {
            num_vars: self.num_vars(),
            phase: self.phase().to_json(),
            u: Some(self.density_exponent().to_json()),
        })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let doc: PairDoc = decode(v)?;
        let phase = Jet::from_json(&doc.phase)?;
        let u = match &doc.u {
            Some(u) => Jet::from_json(u)?,
            None => Jet::zero(doc.num_vars, &[]),
        };
        if phase.num_vars() != doc.num_vars || u.num_vars() != doc.num_vars {
            return Err(Error::InputShape(format!("pair declares {} variables", doc.num_vars)));
        }
        PhaseDensityPair::new(phase, u)
    }
}

fn matrix_from(rows: &[Vec<ScalarText>]) -> Result<Matrix> {
    rows.iter().map(|r| r.iter().map(ScalarText::parse).collect()).collect()
}

fn matrix_text(m: &Matrix) -> Vec<Vec<ScalarText>> {
    m.iter().map(|r| r.iter().map(ScalarText::of).collect()).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PiDoc {
    Wrapped { moyal_pi: Vec<Vec<ScalarText>> },
    Named { pi: Vec<Vec<ScalarText>> },
    Bare(Vec<Vec<ScalarText>>),
}

impl JsonFormat for PoissonMatrix {
    fn to_json(&self) -> Value {
        encode(&matrix_text(self.entries()))
    }

    /// Accepts a bare matrix, `{"pi": …}` or `{"moyal_pi": …}`.
    fn from_json(v: &Value) -> Result<Self> {
        let rows = match decode::<PiDoc>(v)? {
            PiDoc::Wrapped { moyal_pi } => moyal_pi,
            PiDoc::Named { pi } => pi,
            PiDoc::Bare(rows) => rows,
        };
        PoissonMatrix::new(matrix_from(&rows)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StarDoc {
    num_vars: usize,
    #[serde(rename = "C")]
    c: Vec<Value>,
}

impl JsonFormat for StarProduct {
    fn to_json(&self) -> Value {
        encode(&StarDoc { num_vars: self.num_vars(), c: self.c_ops().iter().map(|op| op.to_json()).collect() })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let doc: StarDoc = decode(v)?;
        let ops = doc.c.iter().map(FormalOperator::from_json).collect::<Result<Vec<_>>>()?;
        StarProduct::new(doc.num_vars, ops)
    }
}

/// A star product file: either explicit `C_r` or the Moyal shortcut, which
/// is expanded through order `n`.
pub fn star_from_json(v: &Value, n: i64) -> Result<StarProduct> {
    if v.get("moyal_pi").is_some() {
        Ok(moyal_star(&PoissonMatrix::from_json(v)?, n))
    } else {
        StarProduct::from_json(v)
    }
}

/// A list of jets, e.g. vector-field components or diffeomorphism jets.
pub fn jets_from_json(v: &Value) -> Result<Vec<Jet>> {
    let items = v
        .as_array()
        .or_else(|| v.get("components").and_then(Value::as_array))
        .ok_or_else(|| Error::Parse("expected an array of jets or {\"components\": [...]}".into()))?;
    items.iter().map(Jet::from_json).collect()
}

pub fn jets_to_json(jets: &[Jet]) -> Value {
    Value::Array(jets.iter().map(Jet::to_json).collect())
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    encode(&matrix_text(m))
}

pub fn scalar_to_json(c: &Scalar) -> Value {
    Value::String(c.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    #[test]
    fn jet_text() {
        let j = Jet::from_x_terms(1, [(0, [2], Scalar::ratio(-1, 2)), (1, [0], Scalar::complex((1, 3), (-2, 1)))]);
        let text = j.to_json_string();
        assert_eq!(text, r#"{"num_vars":1,"terms":[{"nu":0,"x":[2],"c":"-1/2"},{"nu":1,"x":[0],"c":"1/3-2i"}]}"#);
        assert_eq!(Jet::from_json_str(&text).unwrap(), j);
        let ints = r#"{"num_vars":1,"terms":[{"nu":0,"x":[2],"c":3}]}"#;
        assert_eq!(Jet::from_json_str(ints).unwrap(), Jet::monomial(1, 0, &[2], s(3)));
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(Jet::from_json_str("{"), Err(Error::Parse(_))));
        assert!(matches!(Jet::from_json_str(r#"{"num_vars":1,"terms":[{"nu":0,"x":[1,2],"c":"1"}]}"#), Err(Error::InputShape(_))));
        assert!(matches!(Jet::from_json_str(r#"{"num_vars":1,"terms":[{"nu":0,"x":[1],"c":"1/0"}]}"#), Err(Error::Parse(_))));
        assert!(matches!(
            PointDistribution::from_json_str(r#"{"num_vars":1,"terms":[{"nu":-1,"dx":[1],"c":"1"}]}"#),
            Err(Error::NotNuRegular(_))
        ));
        assert!(Jet::from_json_str(r#"{"num_vars":1,"terms":[],"extra":1}"#).is_err());
    }

    #[test]
    fn star_and_pi() {
        let m = star_from_json(&parse_value(r#"{"moyal_pi": [[0, 1], [-1, "0"]]}"#).unwrap(), 2).unwrap();
        assert_eq!(m, moyal_star(&PoissonMatrix::symplectic(1), 2));
        assert_eq!(StarProduct::from_json(&m.to_json()).unwrap(), m);
        assert_eq!(PoissonMatrix::from_json_str("[[1]]").unwrap().to_json_string(), r#"[["1"]]"#);
    }

    #[test]
    fn pair_defaults_u() {
        let p = PhaseDensityPair::from_json_str(
            r#"{"num_vars":1,"phase":{"num_vars":1,"terms":[{"nu":-1,"x":[2],"c":"1/2"}]}}"#,
        )
        .unwrap();
        assert_eq!(p, PhaseDensityPair::gaussian(&[vec![s(1)]]).unwrap());
        assert_eq!(PhaseDensityPair::from_json(&p.to_json()).unwrap(), p);
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        (-50i64..50, 1i64..20, -5i64..5, 1i64..7).prop_map(|(a, b, c, d)| Scalar::complex((a, b), (c, d)))
    }

    fn arb_index(n: usize) -> impl Strategy<Value = Vec<u16>> {
        prop::collection::vec(0u16..5, n)
    }

    proptest! {
        #[test]
        fn jet_round_trip(terms in prop::collection::vec((-2i64..3, arb_index(2), arb_index(1), arb_scalar()), 0..8)) {
            let names = vec!["t".to_string()];
            let j = Jet::from_terms(2, &names, terms.into_iter().map(|(nu, x, a, c)| {
                (JetKey { nu, x: MultiIndex::from_slice(&x), aux: MultiIndex::from_slice(&a) }, c)
            })).unwrap();
            let text = j.to_json_string();
            let back = Jet::from_json_str(&text).unwrap();
            prop_assert_eq!(back.to_json_string(), text);
            prop_assert_eq!(back, j);
        }

        #[test]
        fn operator_round_trip(terms in prop::collection::vec((-1i64..3, arb_index(2), arb_index(2), arb_scalar()), 0..8), anti in any::<bool>()) {
            let ordering = if anti { OperatorOrdering::AntiNormal } else { OperatorOrdering::Normal };
            let op = FormalOperator::from_keys(2, ordering, terms.into_iter().map(|(nu, x, d, c)| {
                (OpKey { nu, x: MultiIndex::from_slice(&x), d: MultiIndex::from_slice(&d) }, c)
            })).unwrap();
            let back = FormalOperator::from_json(&op.to_json()).unwrap();
            prop_assert_eq!(back.ordering(), op.ordering());
            prop_assert_eq!(back, op);
        }

        #[test]
        fn distribution_round_trip(terms in prop::collection::vec((0i64..4, arb_index(2), arb_scalar()), 0..8)) {
            let l = PointDistribution::from_terms(2, terms.into_iter().map(|(r, b, c)| (r, MultiIndex::from_slice(&b), c))).unwrap();
            prop_assert_eq!(PointDistribution::from_json(&l.to_json()).unwrap(), l);
        }

        #[test]
        fn pi_round_trip(v in prop::collection::vec(arb_scalar(), 4)) {
            let p = PoissonMatrix::new(vec![v[..2].to_vec(), v[2..].to_vec()]).unwrap();
            prop_assert_eq!(PoissonMatrix::from_json(&p.to_json()).unwrap(), p);
        }
    }
}
