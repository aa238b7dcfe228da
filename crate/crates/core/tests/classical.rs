use num_rational::BigRational;
use num_traits::{One, Zero};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}
use ovmf::dirichlet::*;
use ovmf::qseries::QSeries;
use ovmf::classical::*;

fn ints(f: &QSeries<BigRational>) -> Vec<i64> {
    f.to_integers()
        .unwrap()
        .iter()
        .map(|x| i64::try_from(x).unwrap())
        .collect()
}

#[test]
fn e4_from_level_one() {
    let e4 = level_one_eisenstein(4, 4).unwrap();
    assert_eq!(ints(&e4), vec![1, 240, 2160, 6720, 17520]);
    let e6 = level_one_eisenstein(6, 2).unwrap();
    assert_eq!(ints(&e6), vec![1, -504, -16632]);
}

#[test]
fn weight_one_constants() {
    let one = DirichletCharacter::trivial(1);
    let c4 = kronecker_character(-4).unwrap();
    let e = eisenstein_series(&one, &c4, 1, 4).unwrap();
    assert_eq!(e.coeffs()[0], BigRational::new(1.into(), 4.into()));
    assert_eq!(e.coeffs()[1], rat(1));
    let e2 = eisenstein_series(&c4, &one, 1, 4).unwrap();
    assert_eq!(e2, e);
    assert_eq!(e2.coeffs()[2], rat(1));
    assert!(eisenstein_series(&one, &one, 1, 4).is_err());
    assert!(eisenstein_series(&one, &one, 2, 4).is_err());
}

#[test]
fn dimensions_match_ranks() {
    for level in [3u64, 4] {
        for w in 1..=8 {
            let t = sturm_bound(level, w) + 20;
            let b = space_basis(level, w, t).unwrap();
            assert_eq!(b.dim(), dimension(level, w).unwrap());
            // extra terms do not move the pivots
            let b2 = space_basis(level, w, t + 20).unwrap();
            assert_eq!(b.pivots, b2.pivots);
        }
    }
}

#[test]
fn generators() {
    let g4 = IntegralGenerators::new(4, 12).unwrap();
    assert_eq!(ints(&g4.g1)[..6], [1, 4, 4, 0, 4, 8]);
    assert_eq!(ints(&g4.h)[..8], [0, 1, 0, 4, 0, 6, 0, 8]);
    let g3 = IntegralGenerators::new(3, 12).unwrap();
    assert_eq!(ints(&g3.g1)[..5], [1, 6, 0, 6, 6]);
    assert_eq!(ints(&g3.h)[..4], [0, 1, 3, 9]);
}

#[test]
fn monomials_span_the_space() {
    for level in [3u64, 4] {
        let gens = IntegralGenerators::new(level, 40).unwrap();
        for w in 1..=9 {
            let space = space_basis(level, w, 40).unwrap();
            let mono = gens.monomial_basis(w);
            assert_eq!(mono.len(), space.dim());
            for (b, m) in mono.iter().enumerate() {
                assert!(space.solve(m).is_some());
                assert!(m.is_integral());
                assert!(m.coeffs()[..b].iter().all(|c| c.is_zero()));
                assert!(m.coeffs()[b].is_one());
            }
        }
    }
}

#[test]
fn complement_dimension() {
    let e4 = level_one_eisenstein(4, 60).unwrap();
    let lower = space_basis(4, 5, 60).unwrap();
    let upper = space_basis(4, 9, 60).unwrap();
    let scaled: Vec<_> = lower.basis.iter().map(|b| b.mul(&e4)).collect();
    let comp = complement_basis(&lower, &scaled, &upper).unwrap();
    assert_eq!(comp.len(), upper.dim() - lower.dim());
    let empty = ClassicalBasis { level: 4, weight: 1, basis: vec![], pivots: vec![] };
    assert_eq!(complement_basis(&empty, &[], &upper).unwrap().len(), upper.dim());
    assert!(space_basis(4, 5, 60).unwrap().is_p_integral(5));
}

#[test]
fn indices() {
    assert_eq!(psl_index(3), 4);
    assert_eq!(psl_index(4), 6);
    assert_eq!(psl_index(5), 12);
    assert_eq!(sturm_bound(4, 5), 3);
}
