//! Independent oracles shared by several test targets.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use ovmf::cmforms::{integer_coefficients, Grossencharacter};
use ovmf::dirichlet::kronecker;
use ovmf::eigen::{howell_form, kernel_mod_pm, ModMatrix};
use ovmf::padic::Modulus;
use ovmf::qseries::QSeries;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

const Q: u128 = 125;

fn encode(v: &[u128]) -> usize {
    v.iter().fold(0usize, |acc, &x| acc * Q as usize + x as usize)
}

fn decode(mut code: usize, n: usize) -> [u128; 3] {
    let mut v = [0u128; 3];
    for x in v[..n].iter_mut().rev() {
        *x = (code % Q as usize) as u128;
        code /= Q as usize;
    }
    v
}

/// Every vector in the Z/125-span of `gens`, as a membership bitmap.
fn span(gens: &[Vec<u128>], n: usize) -> Vec<bool> {
    let size = (Q as usize).pow(n as u32);
    let mut seen = vec![false; size];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(c) = stack.pop() {
        let v = decode(c, n);
        for g in gens {
            let mut w = [0u128; 3];
            for i in 0..n {
                w[i] = (v[i] + g[i]) % Q;
            }
            let e = encode(&w[..n]);
            if !seen[e] {
                seen[e] = true;
                stack.push(e);
            }
        }
    }
    seen
}

fn random_entry(rng: &mut StdRng) -> u128 {
    // bias towards non-units so that small spans and deep pivots both occur
    match rng.gen_range(0..4) {
        0 => 0,
        1 => rng.gen_range(0..Q),
        2 => 5 * rng.gen_range(0..25),
        _ => 25 * rng.gen_range(0..5),
    }
}

fn random_matrix(rng: &mut StdRng, md: Modulus) -> ModMatrix {
    let r = rng.gen_range(1..=3);
    let c = rng.gen_range(1..=3);
    let rows: Vec<Vec<u128>> = (0..r).map(|_| (0..c).map(|_| random_entry(rng)).collect()).collect();
    ModMatrix::from_rows(md, &rows)
}

fn valuation(x: u128) -> u32 {
    if x == 0 {
        return 3;
    }
    let mut v = 0;
    let mut y = x;
    while y.is_multiple_of(5) {
        y /= 5;
        v += 1;
    }
    v
}

fn check_howell_shape(h: &ModMatrix) {
    let mut last: Option<usize> = None;
    for i in 0..h.rows() {
        let row = h.row(i);
        let c = row.iter().position(|&x| x != 0).expect("no zero rows");
        assert!(last.is_none_or(|l| c > l), "pivots strictly increase");
        assert_eq!(row[c], 5u128.pow(valuation(row[c])), "pivot is a power of p");
        for j in 0..i {
            assert!(h.row(j)[c] < row[c], "entries above a pivot are reduced");
        }
        last = Some(c);
    }
}

/// Checks `trials` random matrices of size at most 3x3 over Z/125 against enumeration.
pub fn howell_kernel_oracle(trials: u64, seed: u64) {
    let md = Modulus::new(5, 3).unwrap();
    (0..trials).into_par_iter().for_each(|trial| {
        let mut rng = StdRng::seed_from_u64(seed + trial);
        let m = random_matrix(&mut rng, md);
        let (r, c) = (m.rows(), m.cols());
        let h = howell_form(&m);
        check_howell_shape(&h);

        let full = span(&m.to_rows(), c);
        let hs = span(&h.to_rows(), c);
        assert_eq!(full, hs, "trial {trial}: span changed");

        // Howell property: vectors with leading zeros come from the trailing rows
        for lead in 1..=c {
            let tail: Vec<Vec<u128>> = h
                .to_rows()
                .into_iter()
                .filter(|row| row[..lead].iter().all(|&x| x == 0))
                .collect();
            let ts = span(&tail, c);
            for (code, &inside) in full.iter().enumerate() {
                if inside && decode(code, c)[..lead].iter().all(|&x| x == 0) {
                    assert!(ts[code], "trial {trial}: Howell property fails at column {lead}");
                }
            }
        }

        // canonical: a row-shuffled, row-combined matrix has the same form
        let mut rows = m.to_rows();
        rows.reverse();
        if rows.len() > 1 {
            let k = rng.gen_range(0..Q);
            let first = rows[0].clone();
            for (x, y) in rows[1].iter_mut().zip(&first) {
                *x = (*x + k * y) % Q;
            }
        }
        assert_eq!(howell_form(&ModMatrix::from_rows(md, &rows)), h, "trial {trial}: not canonical");

        // kernel against exhaustive search
        let ker = kernel_mod_pm(&m);
        let ks = span(&ker, c);
        for (code, &inside) in ks.iter().enumerate() {
            let x = decode(code, c);
            let x = &x[..c];
            let zero = (0..r).all(|i| m.row(i).iter().zip(x).map(|(a, b)| a * b).sum::<u128>() % Q == 0);
            assert_eq!(inside, zero, "trial {trial}: kernel mismatch at {x:?}");
        }
    });
}

/// `(1/w) sum x^{k-1}` over `x = a + b*omega` with norm `n`, where `omega^2 = -1`
/// for `D = -4` and `omega^2 = -omega - 1` for `D = -3`.
pub fn lattice_sum(d: i64, k: u32, t: usize) -> Vec<i128> {
    let mut out = vec![0i128; t + 1];
    let r = (t as f64).sqrt() as i64 + 2;
    for a in -2 * r..=2 * r {
        for b in -2 * r..=2 * r {
            let norm = if d == -4 { a * a + b * b } else { a * a - a * b + b * b };
            if norm == 0 || norm as usize > t {
                continue;
            }
            // multiply (x, y) representing x + y*omega
            let (mut x, mut y) = (1i128, 0i128);
            for _ in 0..k - 1 {
                let (a, b) = (a as i128, b as i128);
                (x, y) = if d == -4 {
                    (x * a - y * b, x * b + y * a)
                } else {
                    (x * a - y * b, x * b + y * a - y * b)
                };
            }
            out[norm as usize] += x;
        }
    }
    let w = if d == -4 { 4 } else { 6 };
    out.iter().map(|&s| {
        assert_eq!(s % w, 0);
        s / w
    }).collect()
}

/// Compares CM expansions with the lattice sums through `q^120`.
pub fn cm_lattice_oracle() {
    for (d, k) in [(-4i64, 5u32), (-4, 9), (-3, 7), (-3, 13)] {
        let t = 120;
        let g = integer_coefficients(&Grossencharacter::new(d, k).unwrap().qexpansion(t));
        let oracle = lattice_sum(d, k, t);
        for n in 0..=t {
            assert_eq!(g[n] as i128, oracle[n], "D={d} k={k} n={n}");
        }
    }
}

fn primes(n: i64) -> Vec<i64> {
    (2..=n).filter(|&l| (2..l).all(|d| l % d != 0)).collect()
}

/// Hecke relations at every prime up to 50 for several CM forms.
pub fn cm_multiplicativity_oracle() {
    for (d, k) in [(-4i64, 5u32), (-3, 7), (-7, 3), (-8, 5), (-11, 3)] {
        let t = 50 * 50;
        let a = integer_coefficients(&Grossencharacter::new(d, k).unwrap().qexpansion(t));
        let a = |n: i64| a[n as usize] as i128;
        assert_eq!(a(1), 1);
        for l in primes(50) {
            let chi = kronecker(d, l as u64) as i128;
            let lk = (l as i128).pow(k - 1);
            // prime powers
            let mut r = l;
            while r * l <= t as i64 {
                let prev = if r == l { 1 } else { a(r / l) };
                assert_eq!(a(r * l), a(l) * a(r) - chi * lk * prev, "D={d} k={k} l={l} r={r}");
                r *= l;
            }
            // coprime products
            for m in 2..=50 {
                if m % l != 0 {
                    assert_eq!(a(l * m), a(l) * a(m), "D={d} k={k} l={l} m={m}");
                }
            }
        }
    }
}

fn random_series(rng: &mut StdRng) -> QSeries<BigRational> {
    let len = rng.gen_range(1..30);
    let dens = [1i64, 2, 3, 4, 6, 8, 9, 12, 13, 17];
    QSeries::new(
        (0..len)
            .map(|_| {
                let d = dens[rng.gen_range(0..dens.len())];
                BigRational::new(BigInt::from(rng.gen::<i64>()), BigInt::from(d))
            })
            .collect(),
    )
    .unwrap()
}

/// Random products of rational series reduce to the products of the reductions.
pub fn reduction_oracle(cases: u64, seed: u64) {
    let mut rng = StdRng::seed_from_u64(seed);
    for case in 0..cases {
        let p = [5u64, 7, 11][rng.gen_range(0..3)];
        let md = Modulus::new(p, rng.gen_range(1..30)).unwrap();
        let (a, b) = (random_series(&mut rng), random_series(&mut rng));
        let lhs = a.mul(&b).reduce(&md).unwrap();
        let rhs = a.reduce(&md).unwrap().mul(&b.reduce(&md).unwrap());
        assert_eq!(lhs, rhs, "case {case}");
    }
}
