//! Formal differential operators: composition, normal ordering, full
//! symbols and the naturalness test.

use jetphase::grading::TruncationSpec;
use jetphase::operator::{FormalOperator, OperatorOrdering};
use jetphase::scalar::Scalar;

fn main() {
    let one = Scalar::from_int(1);
    let d = FormalOperator::monomial(1, 0, &[0], &[1], one.clone());
    let x = FormalOperator::monomial(1, 0, &[1], &[0], one.clone());
    let exact = TruncationSpec::unbounded();
    println!("∂∘x      = {:?}", d.compose(&x, &exact).unwrap());
    println!("[∂, x]   = {:?}", d.commutator(&x, &exact).unwrap());

    let a = FormalOperator::from_terms(1, [(1, [2], [1], one.clone()), (2, [0], [2], Scalar::ratio(1, 2))]);
    println!("A        = {a:?}");
    println!("anti     = {:?}", a.reorder(OperatorOrdering::AntiNormal));
    println!("symbol   = {:?}", a.full_symbol());
    println!("classify = {:?}", a.classify());

    let bad = FormalOperator::monomial(1, 1, &[0], &[3], one);
    println!("ν∂³ natural? {}", bad.classify().is_natural);
}
