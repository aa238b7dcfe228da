//! Real Dirichlet characters, Kronecker symbols and generalized Bernoulli numbers.

use num_bigint::BigInt;
use num_integer::{binomial, Integer};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharacterError {
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("modulus {0} has non-real characters; only real characters are supported")]
    NonRealCharacters(u64),
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("character of modulus {inner} cannot be lifted to modulus {outer}")]
    NotDivisor { inner: u64, outer: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirichletCharacter {
    modulus: u64,
    values: Vec<i8>,
    // fundamental discriminant of the primitive character behind it (1 for trivial)
    disc: i64,
}

fn is_squarefree(mut n: u64) -> bool {
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d * d) {
            return false;
        }
        while n.is_multiple_of(d) {
            n /= d;
        }
        d += 1;
    }
    true
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// Kronecker symbol `(d / n)` for `n >= 1`.
pub fn kronecker(d: i64, n: u64) -> i8 {
    let mut n = n;
    let mut result = 1i8;
    let tz = n.trailing_zeros();
    if tz > 0 {
        if d % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 && matches!(d.rem_euclid(8), 3 | 5) {
            result = -result;
        }
        n >>= tz;
    }
    if n == 1 {
        return result;
    }
    // Jacobi symbol (d mod n / n) for odd n
    let mut a = d.rem_euclid(n as i64) as u64;
    let mut m = n;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if matches!(m % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            result = -result;
        }
        a %= m;
    }
    if m == 1 {
        result
    } else {
        0
    }
}

impl DirichletCharacter {
    pub fn trivial(modulus: u64) -> Self {
        assert!(modulus > 0);
        let values = (0..modulus)
            .map(|a| if a.gcd(&modulus) == 1 { 1 } else { 0 })
            .collect();
        Self {
            modulus,
            values,
            disc: 1,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Discriminant of the primitive character inducing this one.
    pub fn discriminant(&self) -> i64 {
        self.disc
    }

    pub fn conductor(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    pub fn eval(&self, a: i64) -> i8 {
        self.values[a.rem_euclid(self.modulus as i64) as usize]
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.disc == 1
    }

    pub fn is_even(&self) -> bool {
        self.eval(-1) == 1
    }

    /// The induced character of modulus `outer`, a multiple of this modulus.
    pub fn lift(&self, outer: u64) -> Result<Self, CharacterError> {
        if outer == 0 || !outer.is_multiple_of(self.modulus) {
            return Err(CharacterError::NotDivisor {
                inner: self.modulus,
                outer,
            });
        }
        let values = (0..outer)
            .map(|a| {
                if a.gcd(&outer) == 1 {
                    self.values[(a % self.modulus) as usize]
                } else {
                    0
                }
            })
            .collect();
        Ok(Self {
            modulus: outer,
            values,
            disc: self.disc,
        })
    }

    /// Pointwise product of two characters of the same modulus.
    pub fn product(&self, other: &Self) -> Self {
        assert_eq!(self.modulus, other.modulus, "characters of different moduli");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        let d = self.disc * other.disc;
        let g = self.disc.gcd(&other.disc);
        let mut disc = d / (g * g);
        if !is_fundamental_discriminant(disc) {
            disc *= 4;
        }
        Self {
            modulus: self.modulus,
            values,
            disc,
        }
    }
}

/// The character `a -> (D / a)` of modulus `|D|`.
pub fn kronecker_character(d: i64) -> Result<DirichletCharacter, CharacterError> {
    if !is_fundamental_discriminant(d) {
        return Err(CharacterError::NotFundamental(d));
    }
    if d == 1 {
        return Ok(DirichletCharacter::trivial(1));
    }
    let modulus = d.unsigned_abs();
    let values = (0..modulus)
        .map(|a| if a == 0 { 0 } else { kronecker(d, a) })
        .collect();
    Ok(DirichletCharacter {
        modulus,
        values,
        disc: d,
    })
}

/// All real characters modulo `n`, trivial first, then by conductor.
pub fn real_characters(n: u64) -> Result<Vec<DirichletCharacter>, CharacterError> {
    if n == 0 {
        return Err(CharacterError::ZeroModulus);
    }
    let mut discs: Vec<i64> = (1..=n as i64)
        .filter(|f| n.is_multiple_of(*f as u64))
        .flat_map(|f| [f, -f])
        .filter(|&d| is_fundamental_discriminant(d))
        .collect();
    discs.sort_by_key(|d| (d.unsigned_abs(), *d));
    discs.dedup();
    discs
        .into_iter()
        .map(|d| kronecker_character(d)?.lift(n))
        .collect()
}

/// The full character group modulo `n`, available only when every character is real.
pub fn characters_mod(n: u64) -> Result<Vec<DirichletCharacter>, CharacterError> {
    if n == 0 {
        return Err(CharacterError::ZeroModulus);
    }
    // (Z/n)^x has exponent <= 2 exactly when n | 24
    if 24 % n != 0 {
        return Err(CharacterError::NonRealCharacters(n));
    }
    real_characters(n)
}

/// `B_0..=B_n` with `B_1 = -1/2`.
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    b.push(BigRational::one());
    for m in 1..=n {
        let s = (0..m).fold(BigRational::zero(), |acc, j| {
            acc + BigRational::from_integer(binomial(BigInt::from(m + 1), BigInt::from(j))) * &b[j]
        });
        b.push(-s / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b
}

pub fn bernoulli(k: usize) -> BigRational {
    bernoulli_numbers(k).pop().expect("nonempty")
}

/// `B_{k,chi} = N^{k-1} sum_{a=1}^{N} chi(a) B_k(a/N)`, with `N` the modulus of `chi`.
pub fn generalized_bernoulli(chi: &DirichletCharacter, k: usize) -> BigRational {
    let b = bernoulli_numbers(k);
    let n = BigInt::from(chi.modulus());
    let mut total = BigRational::zero();
    for a in 1..=chi.modulus() {
        let c = chi.eval(a as i64);
        if c == 0 {
            continue;
        }
        let x = BigRational::new(BigInt::from(a), n.clone());
        // Bernoulli polynomial B_k(x) = sum_j C(k, j) B_j x^{k-j}
        let mut poly = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            let coeff = BigRational::from_integer(binomial(BigInt::from(k), BigInt::from(j)));
            poly += coeff * bj * num_traits::pow(x.clone(), k - j);
        }
        total += BigRational::from_integer(BigInt::from(c)) * poly;
    }
    total * BigRational::from_integer(num_traits::pow(n, k - 1))
}

/// The characters of a modulus together with cached generalized Bernoulli numbers.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    modulus: u64,
    characters: Vec<DirichletCharacter>,
}

impl CharacterTable {
    pub fn new(modulus: u64) -> Result<Self, CharacterError> {
        Ok(Self {
            modulus,
            characters: characters_mod(modulus)?,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn characters(&self) -> &[DirichletCharacter] {
        &self.characters
    }

    pub fn bernoulli(&self, index: usize, k: usize) -> BigRational {
        generalized_bernoulli(&self.characters[index], k)
    }
}
