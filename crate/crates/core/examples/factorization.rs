//! Exponentials in the filtered operator algebra and the factorization
//! exp(γ) = a·b along each complementary split.

use jetphase::filtered::{factorize, op_exp, op_log, FiltrationSpec, SplitSpec};
use jetphase::grading::TruncationSpec;
use jetphase::operator::FormalOperator;
use jetphase::scalar::Scalar;

fn main() {
    let filt = FiltrationSpec::nu();
    let trunc = TruncationSpec::nu(3);
    let gamma = FormalOperator::from_terms(1, [(1, [1], [0], Scalar::from_int(1)), (1, [0], [1], Scalar::from_int(1))]);
    let g = op_exp(&gamma, &filt, &trunc).unwrap();
    println!("g = exp(νx + ν∂) = {g:?}");
    for split in [SplitSpec::MultVsAnnih, SplitSpec::DeltakerVsConst, SplitSpec::DivVsMult] {
        let f = factorize(&g, split, &filt, &trunc).unwrap();
        println!("{split:?}");
        println!("  log a = {:?}", op_log(&f.a, &filt, &trunc).unwrap());
        println!("  log b = {:?}", op_log(&f.b, &filt, &trunc).unwrap());
        println!("  residual degrees {:?}", f.residual_degrees);
        assert_eq!(f.a.compose(&f.b, &trunc).unwrap(), g);
    }
}
