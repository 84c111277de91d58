//! Regression anchors at L=21, T=256, frozen from the first verified run.

use aitlab::{BitString, InfoLab};

fn b(s: &str) -> BitString {
    BitString::parse(s).unwrap()
}

#[test]
fn zero_one_pair_at_twenty_one_bits() {
    let lab = InfoLab::new(21, 256).unwrap();
    let (x, y) = (b("0"), b("1"));

    assert_eq!(lab.khat(&x).unwrap(), Some(6));
    assert_eq!(lab.khat(&y).unwrap(), Some(9));
    assert_eq!(lab.conditional_khat(&x, &y).unwrap(), Some(9));
    assert_eq!(lab.conditional_khat(&y, &x).unwrap(), Some(9));
    assert_eq!(lab.joint_khat(&x, &y).unwrap(), Some(15));
    assert_eq!(lab.symmetry_gap(&x, &y).unwrap(), -3);
    assert_eq!(lab.chain_gap(&x, &y).unwrap(), 0);
    assert_eq!(lab.chain_gap(&y, &x).unwrap(), -3);

    let masses = [
        lab.conditional_mass(&x, &y).unwrap().numerator,
        lab.mass(&x).unwrap().numerator,
        lab.mass(&y).unwrap().numerator,
        lab.conditional_mass(&y, &x).unwrap().numerator,
    ];
    assert_eq!(masses, [50111, 164766, 24532, 44159]);
    // log2 of m(x|y) m(y) / (m(x) m(y|x)); the 2^-21 scales cancel.
    let expected = ((50111.0_f64 * 24532.0) / (164766.0 * 44159.0)).log2();
    assert!((lab.bayes_m_gap(&x, &y).unwrap() - expected).abs() < 1e-9);
    assert!((expected - (-2.565261981194876)).abs() < 1e-9);
}
