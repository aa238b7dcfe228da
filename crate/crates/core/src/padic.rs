//! Exact arithmetic in `Z/p^m` with valuation tracking.
//!
//! A [`Modulus`] carries the Montgomery constants for `p^m`; a [`ResidueInt`]
//! is a canonical representative in `[0, p^m)` together with its modulus.
//! Bulk kernels (series products, matrix elimination) work on raw `u128`
//! values through the `Modulus` methods and only wrap results at the API.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Largest admissible `p^m` is below `2^MAX_MODULUS_BITS`.
pub const MAX_MODULUS_BITS: u32 = 126;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("invalid modulus {p}^{m}: {reason}")]
    InvalidModulus { p: u64, m: u32, reason: &'static str },
    #[error("residues live in different rings: {left} vs {right}")]
    ModulusMismatch { left: String, right: String },
    #[error("{value} is not a unit modulo {modulus} (valuation {valuation})")]
    NotInvertible {
        value: String,
        modulus: String,
        valuation: u32,
    },
    #[error("denominator of {0} is divisible by p")]
    NotIntegral(String),
    #[error("quadratic has no simple unit root modulo {p}: {reason}")]
    IrregularQuadratic { p: u64, reason: &'static str },
}

pub type Result<T> = std::result::Result<T, PadicError>;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes up to and including `bound`.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    (2..=bound).filter(|&n| is_prime(n)).collect()
}

/// The ring `Z/p^m`.
#[derive(Clone, Copy)]
pub struct Modulus {
    p: u64,
    m: u32,
    pm: u128,
    // -pm^{-1} mod 2^128
    minv: u128,
    // 2^256 mod pm
    r2: u128,
}

impl PartialEq for Modulus {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m
    }
}

impl Eq for Modulus {}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Modulus({}^{})", self.p, self.m)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.m)
    }
}

#[inline]
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a0, a1) = (a as u64 as u128, a >> 64);
    let (b0, b1) = (b as u64 as u128, b >> 64);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 as u64 as u128) + (p10 as u64 as u128);
    let lo = (p00 as u64 as u128) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (lo, hi)
}

impl Modulus {
    /// `p` must be a prime `>= 5`, `m >= 1`, and `p^m < 2^126`.
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if p < 5 || !is_prime(p) {
            return Err(PadicError::InvalidModulus {
                p,
                m,
                reason: "p must be a prime >= 5",
            });
        }
        Self::with_odd_prime(p, m)
    }

    /// Like [`Modulus::new`] but admits `p = 3`; used by the small test rings.
    pub fn with_odd_prime(p: u64, m: u32) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(PadicError::InvalidModulus {
                p,
                m,
                reason: "p must be an odd prime",
            });
        }
        if m == 0 {
            return Err(PadicError::InvalidModulus {
                p,
                m,
                reason: "precision must be at least 1",
            });
        }
        let mut pm: u128 = 1;
        for _ in 0..m {
            pm = pm
                .checked_mul(p as u128)
                .filter(|v| v.leading_zeros() >= 128 - MAX_MODULUS_BITS)
                .ok_or(PadicError::InvalidModulus {
                    p,
                    m,
                    reason: "p^m exceeds 2^126",
                })?;
        }
        let mut inv: u128 = 1;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(pm.wrapping_mul(inv)));
        }
        let r1 = (u128::MAX % pm + 1) % pm;
        let mut r2 = r1;
        for _ in 0..128 {
            r2 <<= 1;
            if r2 >= pm {
                r2 -= pm;
            }
        }
        Ok(Self {
            p,
            m,
            pm,
            minv: inv.wrapping_neg(),
            r2,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.m
    }

    /// `p^m` as an integer.
    pub fn order(&self) -> u128 {
        self.pm
    }

    /// `p^k` for `k <= m`.
    pub fn p_pow(&self, k: u32) -> u128 {
        assert!(k <= self.m, "p^{k} exceeds the modulus {self}");
        (self.p as u128).pow(k)
    }

    /// Same prime, different precision.
    pub fn with_precision(&self, m: u32) -> Result<Self> {
        Self::with_odd_prime(self.p, m)
    }

    #[inline]
    fn redc(&self, lo: u128, hi: u128) -> u128 {
        let u = lo.wrapping_mul(self.minv);
        let (ulo, uhi) = mul_wide(u, self.pm);
        let (_, carry) = lo.overflowing_add(ulo);
        let t = hi + uhi + carry as u128;
        if t >= self.pm {
            t - self.pm
        } else {
            t
        }
    }

    #[inline]
    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.pm {
            s - self.pm
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.pm - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u128) -> u128 {
        if a == 0 {
            0
        } else {
            self.pm - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        let (lo, hi) = mul_wide(a, b);
        let x = self.redc(lo, hi);
        let (lo, hi) = mul_wide(x, self.r2);
        self.redc(lo, hi)
    }

    /// Reduces a 256-bit value `hi * 2^128 + lo`.
    #[inline]
    pub fn reduce_wide(&self, lo: u128, hi: u128) -> u128 {
        let x = self.redc(lo, hi % self.pm);
        let (lo, hi) = mul_wide(x, self.r2);
        self.redc(lo, hi)
    }

    /// `sum_i a[i] * b[i]` with one reduction at the end.
    pub fn dot(&self, a: impl IntoIterator<Item = u128>, b: impl IntoIterator<Item = u128>) -> u128 {
        let mut acc = WideAcc::default();
        for (x, y) in a.into_iter().zip(b) {
            acc.add_product(self, x, y);
        }
        acc.finish(self)
    }

    pub fn reduce_i64(&self, n: i64) -> u128 {
        let r = (n.unsigned_abs() as u128) % self.pm;
        if n < 0 {
            self.neg(r)
        } else {
            r
        }
    }

    pub fn reduce_bigint(&self, n: &BigInt) -> u128 {
        let pm = BigInt::from(self.pm);
        let r = n.mod_floor(&pm);
        r.to_u128().expect("residue below p^m fits in u128")
    }

    /// Valuation of a raw residue; `m` for zero.
    pub fn valuation_of(&self, mut a: u128) -> u32 {
        if a == 0 {
            return self.m;
        }
        let p = self.p as u128;
        let mut v = 0;
        while a.is_multiple_of(p) {
            a /= p;
            v += 1;
        }
        v
    }

    /// Inverse of a unit given as a raw residue.
    pub fn inv(&self, a: u128) -> Option<u128> {
        if a.is_multiple_of(self.p as u128) {
            return None;
        }
        let (mut r0, mut r1) = (self.pm as i128, a as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        Some(s0.rem_euclid(self.pm as i128) as u128)
    }

    pub fn pow(&self, base: u128, mut exp: u64) -> u128 {
        let mut result = 1 % self.pm;
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        result
    }

    pub fn residue(&self, value: u128) -> ResidueInt {
        ResidueInt {
            value: value % self.pm,
            modulus: *self,
        }
    }

    pub fn zero(&self) -> ResidueInt {
        self.residue(0)
    }

    pub fn one(&self) -> ResidueInt {
        self.residue(1)
    }

    pub fn from_i64(&self, n: i64) -> ResidueInt {
        self.residue(self.reduce_i64(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> ResidueInt {
        self.residue(self.reduce_bigint(n))
    }

    /// Reduction of a p-integral rational.
    pub fn from_rational(&self, q: &BigRational) -> Result<ResidueInt> {
        let den = self.reduce_bigint(q.denom());
        let inv = self
            .inv(den)
            .ok_or_else(|| PadicError::NotIntegral(q.to_string()))?;
        Ok(self.residue(self.mul(self.reduce_bigint(q.numer()), inv)))
    }

    /// Parses a decimal residue.
    pub fn parse(&self, s: &str) -> Option<ResidueInt> {
        let v: u128 = s.trim().parse().ok()?;
        (v < self.pm).then(|| self.residue(v))
    }
}

/// 256-bit accumulator for sums of products with lazy reduction.
#[derive(Default, Clone, Copy)]
pub struct WideAcc {
    lo: u128,
    hi: u128,
}

impl WideAcc {
    #[inline]
    pub fn add_product(&mut self, modulus: &Modulus, a: u128, b: u128) {
        let (plo, phi) = mul_wide(a, b);
        let (lo, carry) = self.lo.overflowing_add(plo);
        self.lo = lo;
        self.hi += phi + carry as u128;
        if self.hi >> 127 != 0 {
            self.hi %= modulus.pm;
        }
    }

    #[inline]
    pub fn finish(self, modulus: &Modulus) -> u128 {
        modulus.reduce_wide(self.lo, self.hi)
    }
}

/// An element of `Z/p^m`, stored as its canonical representative.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct ResidueInt {
    value: u128,
    modulus: Modulus,
}

impl ResidueInt {
    pub fn new(value: u128, modulus: Modulus) -> Self {
        modulus.residue(value)
    }

    pub fn value(&self) -> u128 {
        self.value
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == 0
    }

    /// Largest `v <= m` with `p^v | value`.
    pub fn valuation(&self) -> u32 {
        self.modulus.valuation_of(self.value)
    }

    pub fn invert(&self) -> Result<Self> {
        self.modulus
            .inv(self.value)
            .map(|v| self.modulus.residue(v))
            .ok_or_else(|| PadicError::NotInvertible {
                value: self.value.to_string(),
                modulus: self.modulus.to_string(),
                valuation: self.valuation(),
            })
    }

    pub fn pow(&self, exp: u64) -> Self {
        self.modulus.residue(self.modulus.pow(self.value, exp))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(PadicError::ModulusMismatch {
                left: self.modulus.to_string(),
                right: other.modulus.to_string(),
            })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.modulus.residue(self.modulus.add(self.value, other.value)))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.modulus.residue(self.modulus.sub(self.value, other.value)))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.modulus.residue(self.modulus.mul(self.value, other.value)))
    }

    /// Image in `Z/p^k`, `k <= m`.
    pub fn reduce(&self, k: u32) -> Result<Self> {
        if k > self.modulus.m {
            return Err(PadicError::InvalidModulus {
                p: self.modulus.p,
                m: k,
                reason: "cannot reduce to a finer precision",
            });
        }
        let target = self.modulus.with_precision(k)?;
        Ok(target.residue(self.value % target.pm))
    }

    /// The residue divided by `p^v`, where `v` is its valuation (zero stays zero).
    pub fn unit_part(&self) -> u128 {
        if self.value == 0 {
            return 0;
        }
        self.value / self.modulus.p_pow(self.valuation())
    }

    pub fn to_bigint(&self) -> BigInt {
        BigInt::from_biguint(Sign::Plus, self.value.into())
    }
}

impl fmt::Debug for ResidueInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for ResidueInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Serialize for ResidueInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.value.to_string())
    }
}

impl Add for ResidueInt {
    type Output = ResidueInt;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(&rhs).expect("residue addition")
    }
}

impl Sub for ResidueInt {
    type Output = ResidueInt;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(&rhs).expect("residue subtraction")
    }
}

impl Mul for ResidueInt {
    type Output = ResidueInt;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(&rhs).expect("residue multiplication")
    }
}

impl Neg for ResidueInt {
    type Output = ResidueInt;
    fn neg(self) -> Self {
        self.modulus.residue(self.modulus.neg(self.value))
    }
}

/// Roots of `X^2 + c1 X + c0` with `c0` divisible by `p`.
///
/// Returns `(alpha, beta)` where `beta` is the unit root obtained by Newton
/// iteration from its reduction mod `p`, and `alpha = -c1 - beta`.
pub fn hensel_roots(c0: &ResidueInt, c1: &ResidueInt) -> Result<(ResidueInt, ResidueInt)> {
    c0.check(c1)?;
    let modulus = c0.modulus;
    let p = modulus.p;
    if c0.is_unit() {
        return Err(PadicError::IrregularQuadratic {
            p,
            reason: "constant term is a unit, so both roots are units",
        });
    }
    let quad = |x: ResidueInt| x * x + *c1 * x + *c0;
    let deriv = |x: ResidueInt| modulus.from_i64(2) * x + *c1;
    let start = (1..p)
        .map(|r| modulus.residue(r as u128))
        .find(|&r| quad(r).value() % p as u128 == 0)
        .ok_or(PadicError::IrregularQuadratic {
            p,
            reason: "no unit root modulo p",
        })?;
    if !deriv(start).is_unit() {
        return Err(PadicError::IrregularQuadratic {
            p,
            reason: "unit root modulo p is repeated",
        });
    }
    let mut beta = start;
    let mut correct = 1u32;
    while correct < modulus.m {
        beta = beta - quad(beta) * deriv(beta).invert()?;
        correct = correct.saturating_mul(2);
    }
    debug_assert!(quad(beta).is_zero());
    let alpha = -*c1 - beta;
    Ok((alpha, beta))
}
