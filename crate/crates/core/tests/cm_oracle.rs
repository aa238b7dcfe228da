mod common;

#[test]
fn expansions_match_lattice_sums() {
    common::cm_lattice_oracle();
}

#[test]
fn hecke_multiplicativity_up_to_fifty() {
    common::cm_multiplicativity_oracle();
}
