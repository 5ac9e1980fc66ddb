//! Formal oscillatory integrals: Gaussian moments, the cubic-phase
//! correction and recovering a phase from its distribution.

use jetphase::foi::{check_strong, foi_distribution, foi_eval, recover_phase, PhaseDensityPair};
use jetphase::jet::Jet;
use jetphase::oscillatory::apply_distribution;
use jetphase::scalar::Scalar;

fn main() {
    let gauss = PhaseDensityPair::gaussian(&[vec![Scalar::from_int(1)]]).unwrap();
    let l = foi_distribution(&gauss, 4).unwrap();
    for k in 0..=4u16 {
        let m = apply_distribution(&l, &Jet::monomial(1, 0, &[2 * k], Scalar::from_int(1)), 4).unwrap();
        println!("Λ(x^{}) = {m:?}", 2 * k);
    }

    let phase = Jet::from_x_terms(1, [(-1, [2], Scalar::ratio(1, 2)), (-1, [3], Scalar::from_int(1))]);
    let cubic = PhaseDensityPair::new(phase, Jet::zero(1, &[])).unwrap();
    println!("cubic Λ(1) = {:?}", foi_eval(&cubic, &Jet::one(1, &[]), 3).unwrap());

    let l = foi_distribution(&cubic, 3).unwrap();
    let strong = check_strong(&l, &cubic, &Jet::monomial(1, 0, &[2], Scalar::from_int(1)), 3).unwrap();
    println!("strong defect vanishes: {}", strong.vanishes());

    let back = recover_phase(&l, 3).unwrap();
    println!("recovered phase: {:?}", back.phase());
    assert_eq!(foi_distribution(&back, 3).unwrap(), l);
}
