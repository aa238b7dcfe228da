use num_traits::ToPrimitive;
use ovmf::padic::*;
use proptest::prelude::*;

fn ring(p: u64, m: u32) -> Modulus {
    Modulus::new(p, m).unwrap()
}

#[test]
fn additive_identity_and_annihilation() {
    let r = ring(5, 24);
    let x = r.residue(123456789);
    assert_eq!(r.zero() + x, x);
    let r = ring(5, 2);
    assert!((r.residue(20) * r.residue(5)).is_zero());
    let r = ring(7, 3);
    assert!((r.residue(342) * r.from_i64(343)).is_zero());
}

#[test]
fn valuations() {
    assert_eq!(ring(5, 24).residue(50).valuation(), 2);
    assert_eq!(ring(5, 24).zero().valuation(), 24);
    assert_eq!(ring(7, 22).one().valuation(), 0);
}

#[test]
fn inverses() {
    assert_eq!(ring(5, 24).one().invert().unwrap(), ring(5, 24).one());
    assert_eq!(ring(5, 2).residue(2).invert().unwrap().value(), 13);
    match ring(5, 24).residue(5).invert() {
        Err(PadicError::NotInvertible { valuation, .. }) => assert_eq!(valuation, 1),
        other => panic!("expected non-invertible error, got {other:?}"),
    }
}

#[test]
fn mismatched_rings_are_rejected() {
    let a = ring(5, 3).one();
    let b = ring(5, 4).one();
    assert!(matches!(
        a.checked_add(&b),
        Err(PadicError::ModulusMismatch { .. })
    ));
}

#[test]
fn modulus_limits() {
    assert!(Modulus::new(3, 4).is_err());
    assert!(Modulus::new(6, 4).is_err());
    assert!(Modulus::new(5, 0).is_err());
    assert!(Modulus::new(5, 54).is_ok());
    assert!(Modulus::new(5, 55).is_err());
}

#[test]
fn hensel_example_one() {
    let r = ring(5, 24);
    let (alpha, beta) = hensel_roots(&r.from_i64(625), &r.from_i64(14)).unwrap();
    assert_eq!(beta.value() % 5, 1);
    assert_eq!(alpha.valuation(), 4);
    assert_eq!(beta.valuation(), 0);
    assert_eq!(alpha * beta, r.from_i64(625));
    assert_eq!(alpha + beta, r.from_i64(-14));
}

#[test]
fn hensel_example_two() {
    let r = ring(7, 22);
    let (alpha, beta) = hensel_roots(&r.from_i64(7i64.pow(6)), &r.from_i64(286)).unwrap();
    assert_eq!(beta.value() % 7, 1);
    assert_eq!(alpha.valuation(), 6);
}

#[test]
fn hensel_exact_factorization() {
    let r = ring(5, 4);
    let (alpha, beta) = hensel_roots(&r.from_i64(5), &r.from_i64(-6)).unwrap();
    assert_eq!((alpha.value(), beta.value()), (5, 1));
}

#[test]
fn hensel_rejects_irregular_quadratics() {
    let r = ring(5, 6);
    // X^2 + 1: both roots are units
    assert!(hensel_roots(&r.one(), &r.zero()).is_err());
    // X^2 + 5: no unit root
    assert!(hensel_roots(&r.from_i64(5), &r.zero()).is_err());
}

fn big_mul_mod(a: u128, b: u128, m: u128) -> u128 {
    let prod = num_bigint::BigUint::from(a) * num_bigint::BigUint::from(b);
    (prod % num_bigint::BigUint::from(m)).to_u128().unwrap()
}

proptest! {
    #[test]
    fn montgomery_matches_bigint(a in any::<u128>(), b in any::<u128>(), m in 1u32..=54) {
        let r = ring(5, m);
        let (a, b) = (a % r.order(), b % r.order());
        prop_assert_eq!(r.mul(a, b), big_mul_mod(a, b, r.order()));
    }

    #[test]
    fn wide_accumulator_matches_bigint(v in proptest::collection::vec((any::<u128>(), any::<u128>()), 1..40)) {
        let r = ring(7, 44);
        let pm = r.order();
        let xs: Vec<_> = v.iter().map(|(a, _)| a % pm).collect();
        let ys: Vec<_> = v.iter().map(|(_, b)| b % pm).collect();
        let expected = xs.iter().zip(&ys).fold(0u128, |acc, (&x, &y)| (acc + big_mul_mod(x, y, pm)) % pm);
        prop_assert_eq!(r.dot(xs.iter().copied(), ys.iter().copied()), expected);
    }

    #[test]
    fn double_inverse(a in any::<u128>()) {
        let r = ring(7, 22);
        let x = r.residue(a % r.order());
        prop_assume!(x.is_unit());
        prop_assert_eq!(x.invert().unwrap().invert().unwrap(), x);
        prop_assert_eq!(x * x.invert().unwrap(), r.one());
    }

    #[test]
    fn valuation_of_products(a in any::<u64>(), b in any::<u64>(), va in 0u32..12, vb in 0u32..12) {
        let r = ring(5, 20);
        let x = r.residue(a as u128 * r.p_pow(va));
        let y = r.residue(b as u128 * r.p_pow(vb));
        prop_assert_eq!((x * y).valuation(), (x.valuation() + y.valuation()).min(20));
    }

    #[test]
    fn hensel_output_satisfies_quadratic(u in 1u64..1_000_000, t in 0u64..1_000_000, k in 2u32..9) {
        // (X - beta)(X - alpha) with beta a unit and alpha of valuation k-1
        let r = ring(7, 30);
        let beta0 = r.residue(u as u128);
        prop_assume!(beta0.is_unit());
        let alpha0 = r.residue(r.p_pow(k - 1) * (1 + 7 * t as u128));
        let c1 = -(alpha0 + beta0);
        let c0 = alpha0 * beta0;
        let (alpha, beta) = hensel_roots(&c0, &c1).unwrap();
        prop_assert_eq!(beta, beta0);
        prop_assert_eq!(alpha, alpha0);
        prop_assert_eq!(alpha.valuation(), k - 1);
    }
}
