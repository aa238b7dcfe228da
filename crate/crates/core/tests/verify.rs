use ovmf::padic::Modulus;
use ovmf::qseries::QSeries;
use ovmf::verify::*;

#[test]
fn fixtures_parse() {
    let (md, rows) = reference_table(1).unwrap();
    assert_eq!(md.to_string(), "5^24");
    assert_eq!(rows.len(), 13);
    let (_, rows) = reference_table(2).unwrap();
    assert_eq!(rows.len(), 12);
    assert!(reference_table(3).is_none());
}

#[test]
fn fixture_valuations() {
    let (_, rows) = reference_table(1).unwrap();
    let v: Vec<u32> = rows.iter().map(|(_, x)| x.valuation()).collect();
    assert_eq!(v[0], 0);
    // 43442244692236520 is divisible by 5
    assert_eq!(v[1], 1);
    let (_, rows) = reference_table(2).unwrap();
    assert_eq!(rows[0].1.valuation(), 0);
}

#[test]
fn ap_negative_control() {
    let md = Modulus::new(5, 10).unwrap();
    let mut c = vec![md.zero(); 12];
    c[1] = md.one();
    let f = QSeries::new(c.clone()).unwrap();
    assert_eq!(check_ap_vanishing(&f, 5, 8).status, Status::Pass);
    c[5] = md.one();
    let f = QSeries::new(c).unwrap();
    let chk = check_ap_vanishing(&f, 5, 8);
    assert_eq!(chk.status, Status::Fail);
    assert_eq!(chk.witness["valuation"], 0);
}

#[test]
fn ef_toys() {
    assert_eq!(measure_ef(1, 1, &[1, 1]).witness["e_f"], 1);
    assert_eq!(measure_ef(3, 1, &[1, 2, 3, 3]).witness["equals_two"], false);
}
