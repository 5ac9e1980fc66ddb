//! Testing point distributions for the oscillatory property, reading off
//! their bilinear form and pushing them forward by a coordinate change.

use jetphase::filtered::{op_exp, FiltrationSpec};
use jetphase::grading::TruncationSpec;
use jetphase::jet::Jet;
use jetphase::operator::FormalOperator;
use jetphase::oscillatory::{beta_form, distribution_from_operator, is_oscillatory, pushforward_diffeo, PointDistribution};
use jetphase::scalar::Scalar;

fn exp_distribution(x: &FormalOperator, n: i64) -> PointDistribution {
    let g = op_exp(&x.shift_nu(-1), &FiltrationSpec::nu(), &TruncationSpec::nu(n)).unwrap();
    distribution_from_operator(&g, &TruncationSpec::nu(n)).unwrap()
}

fn main() {
    let n = 3;
    // X = ν²(∂₁∂₂ + ∂₁) + ν³∂₂³
    let x = FormalOperator::from_terms(
        2,
        [
            (2, [0, 0], [1, 1], Scalar::from_int(1)),
            (2, [0, 0], [1, 0], Scalar::from_int(1)),
            (3, [0, 0], [0, 3], Scalar::from_int(1)),
        ],
    );
    let l = exp_distribution(&x, n);
    let verdict = is_oscillatory(&l, n).unwrap();
    println!("Λ = δ∘exp(ν⁻¹X): {} terms, oscillatory {}", l.len(), verdict.oscillatory);
    let b = beta_form(&l).unwrap();
    println!("β = {:?}, det {:?}", b.matrix, b.determinant());

    let phi = vec![
        Jet::from_x_terms(2, [(0, [1, 0], Scalar::from_int(1)), (0, [0, 2], Scalar::from_int(1))]),
        Jet::from_x_terms(2, [(0, [0, 1], Scalar::from_int(2)), (0, [1, 1], Scalar::from_int(-1))]),
    ];
    let moved = pushforward_diffeo(&l, &phi, &TruncationSpec::nu(n)).unwrap();
    println!("after Φ: oscillatory {}", is_oscillatory(&moved, n).unwrap().oscillatory);

    let cube = exp_distribution(&FormalOperator::monomial(1, 2, &[0], &[3], Scalar::from_int(1)), n);
    println!("δ∘exp(ν∂³): oscillatory {}", is_oscillatory(&cube, n).unwrap().oscillatory);
}
