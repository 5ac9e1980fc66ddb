//! Truncated jet arithmetic: products, exponentials and logarithms under the
//! ν-grading and the standard grading.

use jetphase::grading::TruncationSpec;
use jetphase::jet::Jet;
use jetphase::scalar::Scalar;

fn main() {
    // f = ν x + ν⁻¹x³ has standard degree ≥ 1 in every term.
    let f = Jet::from_x_terms(1, [(1, [1], Scalar::from_int(1)), (-1, [3], Scalar::from_int(1))]);
    let trunc = TruncationSpec::standard(4);
    let e = f.exp(&trunc).unwrap();
    println!("f        = {f:?}");
    println!("exp f    = {e:?}");
    println!("log exp f = {:?}", e.log(&trunc).unwrap());

    let g = Jet::from_x_terms(2, [(0, [1, 0], Scalar::from_int(1)), (1, [0, 1], Scalar::ratio(1, 2))]);
    let sq = g.mul(&g, &TruncationSpec::nu(1)).unwrap();
    println!("g² mod ν² = {sq:?}");
}
