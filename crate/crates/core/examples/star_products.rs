//! Star products: the Moyal product, its two-point distribution, a
//! non-natural gauge-equivalent product and star exponentials.

use jetphase::grading::TruncationSpec;
use jetphase::jet::{Jet, JetKey};
use jetphase::index::MultiIndex;
use jetphase::oscillatory::is_oscillatory;
use jetphase::scalar::Scalar;
use jetphase::star::{is_natural_star, left_mult_symbol, moyal_star, star_exponential, star_multiply, two_point_distribution, PoissonMatrix};

fn main() {
    let n = 3;
    let moyal = moyal_star(&PoissonMatrix::symplectic(1), n);
    let x1 = Jet::monomial(2, 0, &[1, 0], Scalar::from_int(1));
    let x2 = Jet::monomial(2, 0, &[0, 1], Scalar::from_int(1));
    println!("x¹⋆x² = {:?}", star_multiply(&moyal, &x1, &x2, n).unwrap());
    println!("x²⋆x¹ = {:?}", star_multiply(&moyal, &x2, &x1, n).unwrap());

    for (name, s) in [
        ("Moyal", moyal.clone()),
        ("gauge ν∂₁³", moyal.gauge_transform(&Jet::monomial(2, 1, &[3, 0], Scalar::from_int(1)), n).unwrap()),
    ] {
        let l = two_point_distribution(&s, n).unwrap();
        println!(
            "{name}: natural {}, two-point oscillatory {}",
            is_natural_star(&s, n),
            is_oscillatory(&l, n).unwrap().oscillatory
        );
        println!("  symbol of L_(x¹)² = {:?}", left_mult_symbol(&s, &x1.mul(&x1, &TruncationSpec::unbounded()).unwrap(), n).unwrap());
    }

    let one_d = moyal_star(&PoissonMatrix::new(vec![vec![Scalar::from_int(1)]]).unwrap(), n);
    let names = vec!["xi".to_string()];
    let key = JetKey { nu: -1, x: MultiIndex::from_slice(&[1]), aux: MultiIndex::from_slice(&[1]) };
    let f = Jet::from_terms(1, &names, [(key, Scalar::from_int(1))]).unwrap();
    let trunc = TruncationSpec::aux(3);
    let e = star_exponential(&one_d, &f, &trunc).unwrap();
    println!("exp⋆(ν⁻¹xξ) = {e:?}");
    println!("log of it   = {:?}", e.log(&trunc).unwrap());
}
