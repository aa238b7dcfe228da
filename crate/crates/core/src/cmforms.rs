//! CM eigenforms attached to Hecke characters of imaginary quadratic fields of
//! class number one, and their critical p-stabilizations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dirichlet::{kronecker_character, DirichletCharacter};
use crate::padic::{hensel_roots, is_prime, Modulus, PadicError, ResidueInt};
use crate::qseries::QSeries;

pub const CLASS_NUMBER_ONE: [i64; 9] = [-3, -4, -7, -8, -11, -19, -43, -67, -163];

#[derive(Debug, Error)]
pub enum CmError {
    #[error("discriminant {0} is not one of the class number one fields")]
    UnsupportedField(i64),
    #[error("weight {weight} is invalid: the unit group of order {units} must divide k-1")]
    UnitObstruction { weight: u32, units: u32 },
    #[error("weight must be at least 2")]
    WeightTooSmall,
    #[error("p = {p} must be a prime >= 5")]
    BadPrime { p: u64 },
    #[error("p = {p} is not split in the field of discriminant {disc}")]
    NotSplit { p: u64, disc: i64 },
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("stabilization failed: {0}")]
    Stabilization(#[from] PadicError),
    #[error("truncation {t} is below p = {p}")]
    TruncationTooShort { t: usize, p: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitType {
    Split,
    Inert,
    Ramified,
}

/// A Hecke character of trivial conductor and infinity type `x -> x^{k-1}`.
#[derive(Clone, Debug)]
pub struct Grossencharacter {
    disc: i64,
    weight: u32,
    chi: DirichletCharacter,
}

pub fn unit_count(disc: i64) -> u32 {
    match disc {
        -3 => 6,
        -4 => 4,
        _ => 2,
    }
}

impl Grossencharacter {
    pub fn new(disc: i64, weight: u32) -> Result<Self, CmError> {
        if !CLASS_NUMBER_ONE.contains(&disc) {
            return Err(CmError::UnsupportedField(disc));
        }
        if weight < 2 {
            return Err(CmError::WeightTooSmall);
        }
        let units = unit_count(disc);
        if !(weight - 1).is_multiple_of(units) {
            return Err(CmError::UnitObstruction { weight, units });
        }
        let chi = kronecker_character(disc).expect("class number one discriminants are fundamental");
        Ok(Self { disc, weight, chi })
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn level(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    /// Nebentypus of the attached form.
    pub fn character(&self) -> &DirichletCharacter {
        &self.chi
    }

    pub fn split_type(&self, l: u64) -> SplitType {
        match self.chi.eval(l as i64) {
            1 => SplitType::Split,
            -1 => SplitType::Inert,
            _ => SplitType::Ramified,
        }
    }

    /// `a_n = (1/w_K) sum_{x in O_K, N(x) = n} x^{k-1}` for `n <= t`.
    ///
    /// Elements are written `x = (A + B sqrt(D)) / 2` with `A = 2a + b, B = b`
    /// for `D = 1 mod 4` and `A = 2a, B = b` otherwise, where `x = a + b omega`.
    pub fn qexpansion(&self, t: usize) -> QSeries<BigRational> {
        let d = self.disc;
        let odd = d.rem_euclid(4) == 1;
        let e = self.weight as usize - 1;
        // |B| <= 2 sqrt(t/|D|) since N(x) = (A^2 - D B^2)/4
        let bmax = (2.0 * ((t as f64) / (d.unsigned_abs() as f64)).sqrt()) as i64 + 1;
        let per_b: Vec<(Vec<BigInt>, BigInt)> = (-bmax..=bmax)
            .into_par_iter()
            .map(|b| {
                let mut real = vec![BigInt::zero(); t + 1];
                let mut imag = BigInt::zero();
                let amax = ((t as f64).sqrt() as i64 + 1) + b.abs();
                for a in -amax..=amax {
                    let (big_a, big_b) = if odd { (2 * a + b, b) } else { (2 * a, b) };
                    let norm4 = big_a * big_a - d * big_b * big_b;
                    debug_assert_eq!(norm4 % 4, 0);
                    let n = (norm4 / 4) as usize;
                    if n == 0 || n > t {
                        continue;
                    }
                    let (r, s) = power(big_a, big_b, d, e);
                    real[n] += r;
                    imag += s;
                }
                (real, imag)
            })
            .collect();
        let mut real = vec![BigInt::zero(); t + 1];
        let mut imag = BigInt::zero();
        for (r, s) in per_b {
            for (x, y) in real.iter_mut().zip(r) {
                *x += y;
            }
            imag += s;
        }
        assert!(imag.is_zero(), "irrational parts must cancel");
        let denom = BigInt::from(2).pow(e as u32) * BigInt::from(unit_count(d));
        let coeffs = real
            .into_iter()
            .map(|r| {
                let (q, rem) = r.div_rem(&denom);
                assert!(rem.is_zero(), "CM coefficient is not integral");
                q
            })
            .collect::<Vec<_>>();
        QSeries::from_integers(coeffs).expect("nonempty")
    }
}

/// `(A + B sqrt(D))^e = R + S sqrt(D)`.
fn power(a: i64, b: i64, d: i64, e: usize) -> (BigInt, BigInt) {
    let (a, b, d) = (BigInt::from(a), BigInt::from(b), BigInt::from(d));
    let mut r = BigInt::from(1);
    let mut s = BigInt::zero();
    for _ in 0..e {
        let nr = &r * &a + &d * &s * &b;
        let ns = &r * &b + &s * &a;
        r = nr;
        s = ns;
    }
    (r, s)
}

/// A CM form together with a split prime and a target precision.
#[derive(Clone, Debug)]
pub struct CMSpec {
    psi: Grossencharacter,
    p: u64,
    m: u32,
}

impl CMSpec {
    pub fn new(disc: i64, weight: u32, p: u64, m: u32) -> Result<Self, CmError> {
        let psi = Grossencharacter::new(disc, weight)?;
        if p < 5 || !is_prime(p) {
            return Err(CmError::BadPrime { p });
        }
        if psi.split_type(p) != SplitType::Split {
            return Err(CmError::NotSplit { p, disc });
        }
        if m == 0 {
            return Err(CmError::ZeroPrecision);
        }
        Ok(Self { psi, p, m })
    }

    pub fn grossencharacter(&self) -> &Grossencharacter {
        &self.psi
    }

    pub fn disc(&self) -> i64 {
        self.psi.disc
    }

    pub fn weight(&self) -> u32 {
        self.psi.weight
    }

    pub fn level(&self) -> u64 {
        self.psi.level()
    }

    pub fn units(&self) -> u32 {
        unit_count(self.psi.disc)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.m
    }

    pub fn with_precision(&self, m: u32) -> Self {
        Self { m, ..self.clone() }
    }

    pub fn character(&self) -> &DirichletCharacter {
        self.psi.character()
    }

    pub fn chi(&self, l: u64) -> i8 {
        self.psi.chi.eval(l as i64)
    }

    pub fn split_type(&self, l: u64) -> SplitType {
        self.psi.split_type(l)
    }

    /// Smallest rational prime inert in the field.
    pub fn smallest_inert_prime(&self) -> u64 {
        (2..)
            .find(|&l| is_prime(l) && self.split_type(l) == SplitType::Inert)
            .expect("inert primes exist")
    }

    /// True when `l` divides `N p`.
    pub fn divides_np(&self, l: u64) -> bool {
        l == self.p || self.level().is_multiple_of(l)
    }

    pub fn qexpansion(&self, t: usize) -> QSeries<BigRational> {
        self.psi.qexpansion(t)
    }
}

pub fn cm_qexpansion(spec: &CMSpec, t: usize) -> QSeries<BigRational> {
    spec.qexpansion(t)
}

pub fn split_type(spec: &CMSpec, l: u64) -> SplitType {
    spec.split_type(l)
}

/// The critical p-stabilization `f = g0 - beta V_p g0`.
#[derive(Clone, Debug)]
pub struct StabilizedForm {
    pub g0: QSeries<BigRational>,
    pub f: QSeries<ResidueInt>,
    pub a_p: BigInt,
    pub alpha: ResidueInt,
    pub beta: ResidueInt,
    pub chi_p: i8,
}

impl StabilizedForm {
    /// Whether `val(alpha) = k-1` and `val(beta) = 0`, which also forces the
    /// ratio of the two Hecke character values at the primes above `p` to differ from `p`.
    pub fn critical_slope_holds(&self, weight: u32) -> bool {
        self.alpha.valuation() == weight - 1 && self.beta.valuation() == 0
    }
}

pub fn stabilize(spec: &CMSpec, g0: &QSeries<BigRational>, modulus: &Modulus) -> Result<StabilizedForm, CmError> {
    let p = spec.p();
    let t = g0.truncation();
    if t < p as usize {
        return Err(CmError::TruncationTooShort { t, p });
    }
    let ints = g0.to_integers().expect("CM forms have integral coefficients");
    let a_p = ints[p as usize].clone();
    let chi_p = spec.chi(p);
    let pk = BigInt::from(p).pow(spec.weight() - 1) * BigInt::from(chi_p);
    let c1 = modulus.from_bigint(&-&a_p);
    let c0 = modulus.from_bigint(&pk);
    let (alpha, beta) = hensel_roots(&c0, &c1)?;
    let g = g0.reduce(modulus)?;
    let f = g.sub(&g.vp_operator(p as usize, Some(t)).scale(&beta));
    Ok(StabilizedForm {
        g0: g0.clone(),
        f,
        a_p,
        alpha,
        beta,
        chi_p,
    })
}

/// Residual of the Hecke recursion `a_{l^{r+1}} = a_l a_{l^r} - chi(l) l^{k-1} a_{l^{r-1}}`
/// and of multiplicativity at coprime indices, for `l <= lmax`.
/// Returns the first failing index, if any.
pub fn hecke_recursion_failure(
    g: &[BigInt],
    chi: impl Fn(u64) -> i64,
    weight: u32,
    lmax: u64,
) -> Option<usize> {
    let t = g.len() - 1;
    for m in 2..=t {
        for n in 2..=t / m {
            if m.gcd(&n) == 1 && g[m * n] != &g[m] * &g[n] {
                return Some(m * n);
            }
        }
    }
    for l in (2..=lmax).filter(|&l| is_prime(l)) {
        let lk = BigInt::from(l).pow(weight - 1) * BigInt::from(chi(l));
        let l = l as usize;
        let mut prev = BigInt::from(1);
        let mut cur_idx = l;
        while cur_idx * l <= t {
            let cur = &g[cur_idx];
            let expect = &g[l] * cur - &lk * &prev;
            if g[cur_idx * l] != expect {
                return Some(cur_idx * l);
            }
            prev = cur.clone();
            cur_idx *= l;
        }
    }
    None
}

pub fn integer_coefficients(g0: &QSeries<BigRational>) -> Vec<i64> {
    g0.to_integers()
        .expect("integral")
        .iter()
        .map(|x| x.to_i64().unwrap_or_else(|| if x.is_negative() { i64::MIN } else { i64::MAX }))
        .collect()
}
