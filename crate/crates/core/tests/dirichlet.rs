use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use ovmf::dirichlet::*;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn kronecker_examples() {
    let c4 = kronecker_character(-4).unwrap();
    assert_eq!((c4.eval(1), c4.eval(3), c4.eval(2)), (1, -1, 0));
    assert!(!c4.is_even());
    let c3 = kronecker_character(-3).unwrap();
    assert_eq!((c3.eval(1), c3.eval(2)), (1, -1));
    assert!(kronecker_character(-12).is_err());
    assert!(kronecker_character(5).is_ok());
    assert_eq!(kronecker(-3, 2), -1);
    assert_eq!(kronecker(-7, 2), 1);
    assert_eq!(kronecker(-4, 13), 1);
}

#[test]
fn bernoulli_values() {
    let c4 = kronecker_character(-4).unwrap();
    assert_eq!(generalized_bernoulli(&c4, 1), rat(-1, 2));
    assert_eq!(generalized_bernoulli(&DirichletCharacter::trivial(1), 4), rat(-1, 30));
    let c3 = kronecker_character(-3).unwrap();
    assert_eq!(generalized_bernoulli(&c3, 1), rat(-1, 3));
    assert_eq!(bernoulli(6), rat(1, 42));
    assert_eq!(bernoulli(12), rat(-691, 2730));
    // B_{3, chi_{-3}} = 2/3
    assert_eq!(generalized_bernoulli(&c3, 3), rat(2, 3));
}

#[test]
fn parity_vanishing() {
    for d in [-3i64, -4, -7, -8, 5, 8, 12] {
        let chi = kronecker_character(d).unwrap();
        for k in 1..8 {
            let parity_ok = chi.is_even() == (k % 2 == 0);
            if !parity_ok {
                assert!(generalized_bernoulli(&chi, k).is_zero(), "d={d} k={k}");
            }
        }
    }
}

#[test]
fn character_groups() {
    assert_eq!(characters_mod(4).unwrap().len(), 2);
    assert_eq!(characters_mod(3).unwrap().len(), 2);
    assert_eq!(characters_mod(24).unwrap().len(), 8);
    assert!(characters_mod(5).is_err());
    assert_eq!(real_characters(20).unwrap().len(), 4);
}

#[test]
fn multiplicativity_exhaustive() {
    for n in 1..=12u64 {
        for chi in real_characters(n).unwrap() {
            assert_eq!(chi.eval(1), 1);
            for a in 0..n as i64 {
                assert_eq!(chi.eval(a) == 0, (a as u64).gcd(&n) != 1);
                for b in 0..n as i64 {
                    assert_eq!(chi.eval(a * b), chi.eval(a) * chi.eval(b));
                }
            }
        }
    }
}

#[test]
fn products_track_discriminants() {
    let c4 = kronecker_character(-4).unwrap().lift(12).unwrap();
    let c3 = kronecker_character(-3).unwrap().lift(12).unwrap();
    let prod = c4.product(&c3);
    assert_eq!(prod.discriminant(), 12);
    assert_eq!(prod, kronecker_character(12).unwrap());
}
