//! Truncated q-expansions `a_0 + a_1 q + ... + a_T q^T`.
//!
//! Coefficients past `T` are unknown, not zero: every operation returns the
//! largest truncation it can actually prove.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::padic::{Modulus, ResidueInt, WideAcc};

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("series must have at least one coefficient")]
    Empty,
    #[error("constant term is not invertible")]
    NotInvertible,
    #[error("cannot parse coefficient {0:?}")]
    Parse(String),
    #[error("declared truncation {declared} does not match {found} coefficients")]
    Truncation { declared: usize, found: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Scalar ring of a [`QSeries`].
///
/// Every method that creates a new scalar takes `&self` as a template so that
/// residues inherit their modulus.
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn from_i64_like(&self, n: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn try_inverse(&self) -> Option<Self>;
    fn to_decimal(&self) -> String;

    fn one_like(&self) -> Self {
        self.from_i64_like(1)
    }

    /// First `len` coefficients of the product of `a` and `b`.
    fn convolve(a: &[Self], b: &[Self], len: usize) -> Vec<Self> {
        let zero = a[0].zero_like();
        (0..len)
            .map(|n| {
                let lo = n.saturating_sub(b.len() - 1);
                let hi = n.min(a.len() - 1);
                (lo..=hi).fold(zero.clone(), |acc, i| {
                    if a[i].is_zero() || b[n - i].is_zero() {
                        acc
                    } else {
                        acc.add(&a[i].mul(&b[n - i]))
                    }
                })
            })
            .collect()
    }
}

impl Coeff for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn try_inverse(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
    fn to_decimal(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Coeff for ResidueInt {
    fn zero_like(&self) -> Self {
        self.modulus().zero()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        self.modulus().from_i64(n)
    }
    fn is_zero(&self) -> bool {
        ResidueInt::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        *self + *other
    }
    fn sub(&self, other: &Self) -> Self {
        *self - *other
    }
    fn mul(&self, other: &Self) -> Self {
        *self * *other
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn try_inverse(&self) -> Option<Self> {
        self.invert().ok()
    }
    fn to_decimal(&self) -> String {
        self.value().to_string()
    }

    fn convolve(a: &[Self], b: &[Self], len: usize) -> Vec<Self> {
        let modulus = a[0].modulus();
        let ra: Vec<u128> = a.iter().map(|x| x.value()).collect();
        let rb: Vec<u128> = b.iter().map(|x| x.value()).collect();
        mul_raw(&modulus, &ra, &rb, len)
            .into_iter()
            .map(|v| modulus.residue(v))
            .collect()
    }
}

/// Truncated product of raw residue vectors, `len` output coefficients.
pub fn mul_raw(modulus: &Modulus, a: &[u128], b: &[u128], len: usize) -> Vec<u128> {
    (0..len)
        .map(|n| {
            if a.is_empty() || b.is_empty() || n > a.len() + b.len() - 2 {
                return 0;
            }
            let lo = n.saturating_sub(b.len() - 1);
            let hi = n.min(a.len() - 1);
            let mut acc = WideAcc::default();
            for i in lo..=hi {
                acc.add_product(modulus, a[i], b[n - i]);
            }
            acc.finish(modulus)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct QSeries<C> {
    coeffs: Vec<C>,
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    #[serde(rename = "T")]
    t: usize,
    coeffs: Vec<String>,
}

impl<C: Coeff> QSeries<C> {
    pub fn new(coeffs: Vec<C>) -> Result<Self, SeriesError> {
        if coeffs.is_empty() {
            return Err(SeriesError::Empty);
        }
        Ok(Self { coeffs })
    }

    /// The truncation order: coefficients of `q^0..=q^T` are known.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Option<&C> {
        self.coeffs.get(n)
    }

    fn template(&self) -> &C {
        &self.coeffs[0]
    }

    pub fn zero_like(&self, t: usize) -> Self {
        Self {
            coeffs: vec![self.template().zero_like(); t + 1],
        }
    }

    pub fn truncate(&self, t: usize) -> Self {
        Self {
            coeffs: self.coeffs[..=t.min(self.truncation())].to_vec(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.coeffs.len().min(other.coeffs.len());
        Self {
            coeffs: C::convolve(&self.coeffs, &other.coeffs, len),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map(|a| a.mul(c))
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> QSeries<D> {
        QSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut result = self.zero_like(self.truncation());
        result.coeffs[0] = self.template().one_like();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `b_n = a_{np}`, known to `floor(T/p)`.
    pub fn up_operator(&self, p: usize) -> Self {
        let t = self.truncation() / p;
        Self {
            coeffs: (0..=t).map(|n| self.coeffs[n * p].clone()).collect(),
        }
    }

    /// `q -> q^t`, known to `min(T*t, budget)`.
    pub fn vp_operator(&self, t: usize, budget: Option<usize>) -> Self {
        let full = self.truncation() * t + t - 1;
        let len = budget.map_or(full, |b| b.min(full)) + 1;
        let zero = self.template().zero_like();
        Self {
            coeffs: (0..len)
                .map(|n| {
                    if n % t == 0 {
                        self.coeffs[n / t].clone()
                    } else {
                        zero.clone()
                    }
                })
                .collect(),
        }
    }

    /// `theta = q d/dq`.
    pub fn theta(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, a)| a.mul(&a.from_i64_like(n as i64)))
                .collect(),
        }
    }

    /// `b_n = a_{nl} + chi_l * a_{n/l}`, where `chi_l = chi(l) l^{k-1}`.
    pub fn hecke_coeff_transform(&self, l: usize, chi_l: &C) -> Self {
        let t = self.truncation() / l;
        Self {
            coeffs: (0..=t)
                .map(|n| {
                    let head = self.coeffs[n * l].clone();
                    if n % l == 0 && !chi_l.is_zero() {
                        head.add(&chi_l.mul(&self.coeffs[n / l]))
                    } else {
                        head
                    }
                })
                .collect(),
        }
    }

    /// Multiplicative inverse; the constant term must be a unit.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let inv0 = self.coeffs[0]
            .try_inverse()
            .ok_or(SeriesError::NotInvertible)?;
        let mut out = Vec::with_capacity(self.coeffs.len());
        out.push(inv0.clone());
        for n in 1..self.coeffs.len() {
            let s = (1..=n).fold(inv0.zero_like(), |acc, i| {
                if self.coeffs[i].is_zero() {
                    acc
                } else {
                    acc.add(&self.coeffs[i].mul(&out[n - i]))
                }
            });
            out.push(s.mul(&inv0).neg());
        }
        Ok(Self { coeffs: out })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SeriesJson {
            t: self.truncation(),
            coeffs: self.coeffs.iter().map(Coeff::to_decimal).collect(),
        })
        .expect("series json")
    }

    fn from_json_with(
        s: &str,
        parse: impl Fn(&str) -> Option<C>,
    ) -> Result<Self, SeriesError> {
        let raw: SeriesJson = serde_json::from_str(s)?;
        if raw.coeffs.len() != raw.t + 1 {
            return Err(SeriesError::Truncation {
                declared: raw.t,
                found: raw.coeffs.len(),
            });
        }
        let coeffs = raw
            .coeffs
            .iter()
            .map(|c| parse(c).ok_or_else(|| SeriesError::Parse(c.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(coeffs)
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::one()),
    };
    (!d.is_zero()).then(|| BigRational::new(n, d))
}

impl QSeries<BigRational> {
    pub fn from_integers(coeffs: impl IntoIterator<Item = BigInt>) -> Result<Self, SeriesError> {
        Self::new(coeffs.into_iter().map(BigRational::from_integer).collect())
    }

    pub fn from_i64s(coeffs: &[i64]) -> Result<Self, SeriesError> {
        Self::from_integers(coeffs.iter().map(|&c| BigInt::from(c)))
    }

    pub fn from_json(s: &str) -> Result<Self, SeriesError> {
        Self::from_json_with(s, parse_rational)
    }

    /// Coefficientwise reduction; fails if some denominator is divisible by `p`.
    pub fn reduce(&self, modulus: &Modulus) -> Result<QSeries<ResidueInt>, crate::padic::PadicError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| modulus.from_rational(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(QSeries { coeffs })
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one())
    }

    /// Integer coefficients, if all are integral.
    pub fn to_integers(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.denom().is_one().then(|| c.numer().clone()))
            .collect()
    }

    pub fn max_abs_numerator_bits(&self) -> u64 {
        self.coeffs
            .iter()
            .map(|c| c.numer().abs().bits())
            .max()
            .unwrap_or(0)
    }
}

impl QSeries<ResidueInt> {
    pub fn from_raw(modulus: &Modulus, raw: &[u128]) -> Result<Self, SeriesError> {
        Self::new(raw.iter().map(|&v| modulus.residue(v)).collect())
    }

    pub fn raw(&self) -> Vec<u128> {
        self.coeffs.iter().map(|c| c.value()).collect()
    }

    pub fn modulus(&self) -> Modulus {
        self.coeffs[0].modulus()
    }

    pub fn from_json(s: &str, modulus: &Modulus) -> Result<Self, SeriesError> {
        Self::from_json_with(s, |c| modulus.parse(c))
    }
}
