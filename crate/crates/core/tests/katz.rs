use ovmf::classical::IntegralGenerators;
use ovmf::cmforms::CMSpec;
use ovmf::katz::*;

fn small_system() -> KatzSystem {
    let spec = CMSpec::new(-4, 5, 5, 6).unwrap();
    build_katz(&spec, 8, default_levels(8, 5), None, &[3]).unwrap()
}

#[test]
fn heuristics() {
    assert_eq!(default_levels(30, 5), 47);
    assert_eq!(default_levels(36, 5), 56);
    assert_eq!(default_levels(34, 7), 47);
    let spec = CMSpec::new(-4, 5, 5, 24).unwrap();
    assert_eq!(total_dimension(&spec, 56).unwrap(), 113);
}

#[test]
fn basis_is_unitriangular_and_layered() {
    let sys = small_system();
    assert_eq!(sys.dim(), total_dimension(sys.spec(), sys.n_levels()).unwrap());
    for j in 0..sys.dim() {
        let e = sys.coords_raw(sys.basis_raw(j));
        assert!(e.vector.iter().enumerate().all(|(i, &x)| x == u128::from(i == j)));
    }
    assert_eq!(sys.layer_index(0), 0);
    assert!(sys.coords_raw(&vec![0; sys.truncation() + 1]).vector.iter().all(|&x| x == 0));
}

#[test]
fn eisenstein_is_one_mod_p() {
    let sys = small_system();
    let e = sys.eisenstein();
    assert_eq!(e.coeffs()[0].value(), 1);
    assert!(e.coeffs()[1..].iter().all(|c| c.valuation() >= 1));
}

#[test]
fn basis_times_eisenstein_power_is_classical() {
    let sys = small_system();
    let md = sys.modulus();
    let gens = IntegralGenerators::new(4, sys.truncation()).unwrap();
    let e = sys.eisenstein();
    for j in [0, 3, sys.dim() / 2, sys.dim() - 1] {
        let l = sys.labels()[j];
        let back = sys.basis_series(j).mul(&e.pow(l.layer as u32));
        let mono = gens.monomial(l.weight, l.h_exp).reduce(&md).unwrap();
        assert_eq!(back, mono);
    }
}

#[test]
fn coords_round_trip() {
    let sys = small_system();
    let v: Vec<u128> = (0..sys.dim() as u128).map(|i| (i * i + 7) % sys.modulus().order()).collect();
    let f = sys.qexp(&v);
    let c = sys.coords(&f);
    assert_eq!(c.vector, v);
    assert_eq!(c.residual_valuation, sys.modulus().precision());
}

#[test]
fn hecke_primes_are_validated() {
    let sys = small_system();
    assert!(matches!(sys.hecke_matrix(2), Err(KatzError::BadHeckePrime { .. })));
    assert!(matches!(sys.hecke_matrix(5), Err(KatzError::BadHeckePrime { .. })));
    assert!(matches!(sys.hecke_matrix(13), Err(KatzError::TruncationTooShort { .. })));
    assert!(sys.hecke_matrix(3).is_ok());
}
