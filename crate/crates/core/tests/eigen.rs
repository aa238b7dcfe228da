use ovmf::padic::Modulus;
use ovmf::eigen::*;

fn z(p: u64, m: u32) -> Modulus {
    Modulus::new(p, m).unwrap()
}

#[test]
fn howell_examples() {
    let md = z(5, 2);
    let id = ModMatrix::identity(md, 3);
    assert_eq!(howell_form(&id), id);
    let m = ModMatrix::from_i64_rows(md, &[vec![5, 0], vec![0, 1]]);
    assert_eq!(howell_form(&m), m);
    assert_eq!(howell_form(&ModMatrix::zeros(md, 2, 2)).rows(), 0);
    // (5, 1) generates (0, 5) after multiplying by 5
    let m = ModMatrix::from_i64_rows(md, &[vec![5, 1]]);
    let h = howell_form(&m);
    assert_eq!(h.to_rows(), vec![vec![5, 1], vec![0, 5]]);
    let m = ModMatrix::from_i64_rows(md, &[vec![10, 2]]);
    assert_eq!(howell_form(&m).to_rows(), vec![vec![5, 1], vec![0, 5]]);
    let m = ModMatrix::from_i64_rows(md, &[vec![5, 5]]);
    assert_eq!(howell_form(&m).to_rows(), vec![vec![5, 5]]);
    let m = ModMatrix::from_i64_rows(md, &[vec![1, 5]]);
    assert_eq!(howell_form(&m).to_rows(), vec![vec![1, 5]]);
}

#[test]
fn kernel_examples() {
    let md = z(5, 2);
    let m = ModMatrix::from_i64_rows(md, &[vec![5, 0], vec![0, 1]]);
    assert_eq!(kernel_mod_pm(&m), vec![vec![5, 0]]);
    let inv = ModMatrix::from_i64_rows(md, &[vec![1, 2], vec![3, 4]]);
    assert!(kernel_mod_pm(&inv).is_empty());
    let zero = ModMatrix::zeros(md, 2, 2);
    assert_eq!(kernel_mod_pm(&zero), vec![vec![1, 0], vec![0, 1]]);
}

#[test]
fn determinants() {
    let md = z(7, 3);
    let m = ModMatrix::from_i64_rows(md, &[vec![7, 1], vec![2, 3]]);
    assert_eq!(determinant(&m), md.from_i64(19));
    let m = ModMatrix::from_i64_rows(md, &[vec![0, 7], vec![49, 0]]);
    assert_eq!(determinant(&m), md.from_i64(-343));
    let m = ModMatrix::from_i64_rows(md, &[vec![2, 0, 0], vec![0, 7, 0], vec![1, 1, 14]]);
    assert_eq!(determinant(&m), md.from_i64(196));
}

#[test]
fn jordan_and_diagonal_toys() {
    let md = z(5, 6);
    let alpha = md.from_i64(25);
    let jordan = ModMatrix::from_i64_rows(md, &[vec![25, 1], vec![0, 25]]);
    let data = generalized_eigenspace(&jordan, &alpha, &[], None).unwrap();
    assert_eq!(data.e_f, 2);
    assert_eq!(data.up_kernel_dim, 1);

    let diag = ModMatrix::from_i64_rows(md, &[vec![25, 0], vec![0, 1]]);
    let data = generalized_eigenspace(&diag, &alpha, &[], Some(&[1, 0])).unwrap();
    assert_eq!(data.e_f, 1);
    assert_eq!(data.space.len(), 1);
    assert_eq!(data.space[0][1], 0);

    let j3 = ModMatrix::from_i64_rows(
        md,
        &[vec![25, 1, 0], vec![0, 25, 1], vec![0, 0, 25]],
    );
    let data = generalized_eigenspace(&j3, &alpha, &[], None).unwrap();
    assert_eq!(data.e_f, 3);
    assert_eq!(data.power_dims, vec![1, 2, 3, 3]);
}

#[test]
fn stable_kernel_of_rank_one() {
    let md = z(7, 10);
    let m = ModMatrix::from_i64_rows(md, &[vec![1, 2, 3], vec![2, 4, 6], vec![7, 14, 21]]);
    let k = stable_kernel(&m, 5);
    assert_eq!(k.dim(), 2);
    for v in &k.vectors {
        assert!(m.mul_vec(v).iter().all(|&x| x == 0));
    }
    assert_eq!(k.loss, 0);
    assert_eq!(k.kernel_precision, 10);
}
