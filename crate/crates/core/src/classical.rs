//! Classical modular forms on `Gamma_1(N)` for small `N`, as exact rational
//! q-expansions: Eisenstein series, spanning sets, echelon bases, and the
//! integral generators used for high weights.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::dirichlet::{
    bernoulli, generalized_bernoulli, kronecker_character, real_characters, CharacterError,
    DirichletCharacter,
};
use crate::qseries::QSeries;

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("parity mismatch: chi(-1) psi(-1) must equal (-1)^{weight}")]
    Parity { weight: u32 },
    #[error("weight 2 Eisenstein series with trivial characters is not modular; use the level-raised variant")]
    QuasiModular,
    #[error("level {0} is not supported (only levels 3 and 4)")]
    UnsupportedLevel(u64),
    #[error("span of Eisenstein series and their products has rank {rank} < {dim} in weight {weight}")]
    RankDeficit { weight: u32, rank: usize, dim: usize },
    #[error("truncation {t} is below the Sturm bound {bound}")]
    TruncationTooShort { t: usize, bound: usize },
    #[error("scaled lower space is not contained in the upper space")]
    NotContained,
    #[error(transparent)]
    Character(#[from] CharacterError),
}

pub type Result<T> = std::result::Result<T, ClassicalError>;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `E_w^{phi,psi}`: constant term plus `sum_n sum_{d|n} phi(n/d) psi(d) d^{w-1} q^n`.
///
/// Both characters are taken primitive. In weight 1 the two orderings give the
/// same series, so the constant term is `-B_{1,chi}/2` for whichever of the two
/// is nontrivial.
pub fn eisenstein_series(
    phi: &DirichletCharacter,
    psi: &DirichletCharacter,
    w: u32,
    t: usize,
) -> Result<QSeries<BigRational>> {
    let sign = phi.eval(-1) * psi.eval(-1);
    if (sign == 1) != w.is_multiple_of(2) {
        return Err(ClassicalError::Parity { weight: w });
    }
    if w == 2 && phi.is_trivial() && psi.is_trivial() {
        return Err(ClassicalError::QuasiModular);
    }
    let constant = match (phi.is_trivial(), psi.is_trivial()) {
        (true, _) => {
            -generalized_bernoulli(psi, w as usize) / rat(2 * w as i64)
        }
        (false, true) if w == 1 => -generalized_bernoulli(phi, 1) / rat(2),
        _ => BigRational::zero(),
    };
    let mut coeffs = vec![BigRational::zero(); t + 1];
    coeffs[0] = constant;
    for (n, c) in coeffs.iter_mut().enumerate().skip(1) {
        let mut s = BigInt::zero();
        for d in 1..=n {
            if n % d != 0 {
                continue;
            }
            let v = phi.eval((n / d) as i64) * psi.eval(d as i64);
            if v != 0 {
                s += BigInt::from(v) * num_traits::pow(BigInt::from(d), w as usize - 1);
            }
        }
        *c = BigRational::from_integer(s);
    }
    Ok(QSeries::new(coeffs).expect("nonempty"))
}

/// The level one Eisenstein series `E_w = 1 - (2w/B_w) sum sigma_{w-1}(n) q^n`, `w >= 4` even.
pub fn level_one_eisenstein(w: u32, t: usize) -> Result<QSeries<BigRational>> {
    let one = DirichletCharacter::trivial(1);
    let e = eisenstein_series(&one, &one, w, t)?;
    let scale = rat(-2 * w as i64) / bernoulli(w as usize);
    Ok(e.scale(&scale))
}

/// `E_2(z) - s E_2(sz)`, holomorphic of weight 2 on `Gamma_0(s)`.
pub fn level_raised_e2(s: usize, t: usize) -> QSeries<BigRational> {
    let mut coeffs = vec![BigRational::zero(); t + 1];
    coeffs[0] = rat(1 - s as i64);
    let sigma = |n: usize| -> i64 { (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| d as i64).sum() };
    for (n, c) in coeffs.iter_mut().enumerate().skip(1) {
        let mut v = -24 * sigma(n);
        if n % s == 0 {
            v += 24 * s as i64 * sigma(n / s);
        }
        *c = rat(v);
    }
    QSeries::new(coeffs).expect("nonempty")
}

/// `dim M_w(Gamma_1(N))` for the supported levels.
pub fn dimension(level: u64, w: u32) -> Result<usize> {
    match level {
        // genus 0, one elliptic point of order 3, two regular cusps
        3 => Ok(w as usize / 3 + 1),
        // genus 0, three cusps of which one is irregular
        4 => Ok(w as usize / 2 + 1),
        n => Err(ClassicalError::UnsupportedLevel(n)),
    }
}

/// Index of the image of `Gamma_1(N)` in `PSL_2(Z)`.
pub fn psl_index(level: u64) -> u64 {
    if level <= 2 {
        return [1, 1, 3][level as usize];
    }
    let mut idx = level * level;
    let mut n = level;
    let mut q = 2;
    while n > 1 {
        if n.is_multiple_of(q) {
            idx = idx / (q * q) * (q * q - 1);
            while n.is_multiple_of(q) {
                n /= q;
            }
        }
        q += 1;
    }
    idx / 2
}

pub fn sturm_bound(level: u64, w: u32) -> usize {
    (w as u64 * psl_index(level)).div_ceil(12) as usize
}

/// Reduced row echelon form over `Q`, pivots ordered by column.
pub fn rref(rows: &[Vec<BigRational>]) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut out: Vec<Vec<BigRational>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for row in rows {
        let mut v = row.clone();
        for (r, &c) in out.iter().zip(&pivots) {
            if !v[c].is_zero() {
                let f = v[c].clone();
                for (x, y) in v.iter_mut().zip(r) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        let Some(c) = v.iter().position(|x| !x.is_zero()) else {
            continue;
        };
        let inv = v[c].recip();
        for x in v.iter_mut() {
            *x *= &inv;
        }
        for r in out.iter_mut() {
            if !r[c].is_zero() {
                let f = r[c].clone();
                for (x, y) in r.iter_mut().zip(&v) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        out.push(v);
        pivots.push(c);
    }
    let mut order: Vec<usize> = (0..out.len()).collect();
    order.sort_by_key(|&i| pivots[i]);
    (
        order.iter().map(|&i| out[i].clone()).collect(),
        order.iter().map(|&i| pivots[i]).collect(),
    )
}

/// Echelon basis of `M_w(Gamma_1(N))` over `Q`.
#[derive(Clone, Debug)]
pub struct ClassicalBasis {
    pub level: u64,
    pub weight: u32,
    pub basis: Vec<QSeries<BigRational>>,
    pub pivots: Vec<usize>,
}

#[derive(Serialize)]
struct BasisDump {
    level: u64,
    weight: u32,
    #[serde(rename = "T")]
    t: usize,
    rows: Vec<Vec<String>>,
}

impl ClassicalBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn truncation(&self) -> usize {
        self.basis.first().map_or(0, |b| b.truncation())
    }

    pub fn is_p_integral(&self, p: u64) -> bool {
        let p = BigInt::from(p);
        self.basis.iter().all(|b| {
            b.coeffs()
                .iter()
                .all(|c| !(c.denom() % &p).is_zero())
        })
    }

    /// Coordinates of `f` in the basis, if `f` lies in its span through the truncation.
    pub fn solve(&self, f: &QSeries<BigRational>) -> Option<Vec<BigRational>> {
        let mut r: Vec<BigRational> = f.coeffs().to_vec();
        let mut x = Vec::with_capacity(self.dim());
        for (b, &c) in self.basis.iter().zip(&self.pivots) {
            let coef = r.get(c)?.clone();
            for (ri, bi) in r.iter_mut().zip(b.coeffs()) {
                *ri -= &coef * bi;
            }
            x.push(coef);
        }
        r.iter().all(|c| c.is_zero()).then_some(x)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(BasisDump {
            level: self.level,
            weight: self.weight,
            t: self.truncation(),
            rows: self
                .basis
                .iter()
                .map(|b| b.coeffs().iter().map(crate::qseries::Coeff::to_decimal).collect())
                .collect(),
        })
        .expect("basis json")
    }
}

/// Every Eisenstein series of weight `w` and level dividing `N`, including level raises.
pub fn eisenstein_family(level: u64, w: u32, t: usize) -> Result<Vec<QSeries<BigRational>>> {
    let chars: Vec<DirichletCharacter> = real_characters(level)?
        .into_iter()
        .map(|c| kronecker_character(c.discriminant()))
        .collect::<std::result::Result<_, _>>()?;
    let mut out = Vec::new();
    for phi in &chars {
        for psi in &chars {
            let cond = phi.conductor() * psi.conductor();
            if !level.is_multiple_of(cond) {
                continue;
            }
            let base = match eisenstein_series(phi, psi, w, t) {
                Ok(e) => e,
                Err(ClassicalError::Parity { .. } | ClassicalError::QuasiModular) => continue,
                Err(e) => return Err(e),
            };
            for s in (1..=level / cond).filter(|s| (level / cond).is_multiple_of(*s)) {
                out.push(base.vp_operator(s as usize, Some(t)));
            }
        }
    }
    if w == 2 {
        for s in (2..=level).filter(|s| level.is_multiple_of(*s)) {
            out.push(level_raised_e2(s as usize, t));
        }
    }
    Ok(out)
}

/// Echelon basis of `M_w(Gamma_1(N))` from Eisenstein series and their products.
pub fn space_basis(level: u64, w: u32, t: usize) -> Result<ClassicalBasis> {
    let dim = dimension(level, w)?;
    let bound = sturm_bound(level, w);
    if t < bound {
        return Err(ClassicalError::TruncationTooShort { t, bound });
    }
    let mut spanning = eisenstein_family(level, w, t)?;
    let rows = |s: &[QSeries<BigRational>]| -> Vec<Vec<BigRational>> {
        s.iter().map(|f| f.coeffs().to_vec()).collect()
    };
    let (mut ech, mut piv) = rref(&rows(&spanning));
    if ech.len() < dim {
        for a in 1..w {
            let b = w - a;
            if a > b {
                break;
            }
            let left = eisenstein_family(level, a, t)?;
            let right = eisenstein_family(level, b, t)?;
            for x in &left {
                for y in &right {
                    spanning.push(x.mul(y));
                }
            }
        }
        (ech, piv) = rref(&rows(&spanning));
    }
    if ech.len() < dim {
        for a in 1..w {
            for b in a..w {
                if a + b >= w {
                    break;
                }
                let c = w - a - b;
                if c < b {
                    continue;
                }
                for x in eisenstein_family(level, a, t)? {
                    for y in eisenstein_family(level, b, t)? {
                        let xy = x.mul(&y);
                        for z in eisenstein_family(level, c, t)? {
                            spanning.push(xy.mul(&z));
                        }
                    }
                }
            }
        }
        (ech, piv) = rref(&rows(&spanning));
    }
    if ech.len() != dim {
        return Err(ClassicalError::RankDeficit {
            weight: w,
            rank: ech.len(),
            dim,
        });
    }
    Ok(ClassicalBasis {
        level,
        weight: w,
        basis: ech
            .into_iter()
            .map(|r| QSeries::new(r).expect("nonempty"))
            .collect(),
        pivots: piv,
    })
}

/// Echelon basis of a complement of `span(scaled)` inside `span(upper)`.
pub fn complement_basis(
    lower: &ClassicalBasis,
    scaled: &[QSeries<BigRational>],
    upper: &ClassicalBasis,
) -> Result<Vec<QSeries<BigRational>>> {
    debug_assert_eq!(lower.dim(), scaled.len());
    if scaled.iter().any(|s| upper.solve(s).is_none()) {
        return Err(ClassicalError::NotContained);
    }
    let (sech, spiv) = rref(&scaled.iter().map(|s| s.coeffs().to_vec()).collect::<Vec<_>>());
    let mut residues = Vec::new();
    for u in &upper.basis {
        let mut v = u.coeffs().to_vec();
        for (r, &c) in sech.iter().zip(&spiv) {
            if !v[c].is_zero() {
                let f = v[c].clone();
                for (x, y) in v.iter_mut().zip(r) {
                    *x -= &f * y;
                }
            }
        }
        residues.push(v);
    }
    let (comp, _) = rref(&residues);
    Ok(comp
        .into_iter()
        .map(|r| QSeries::new(r).expect("nonempty"))
        .collect())
}

/// Integral generators of the graded ring of `Gamma_1(N)` forms for `N` in {3, 4}.
///
/// `g1` spans weight 1 with constant term 1, and `h` is the form of weight
/// `w0` with expansion `q + O(q^2)`. The monomials `g1^{w - w0 b} h^b`,
/// `0 <= b <= w / w0`, are a basis of weight `w` whose `b`-th element starts
/// with `q^b`.
#[derive(Clone, Debug)]
pub struct IntegralGenerators {
    pub level: u64,
    pub w0: u32,
    pub g1: QSeries<BigRational>,
    pub h: QSeries<BigRational>,
}

impl IntegralGenerators {
    pub fn new(level: u64, t: usize) -> Result<Self> {
        let w0 = match level {
            3 => 3,
            4 => 2,
            n => return Err(ClassicalError::UnsupportedLevel(n)),
        };
        let m1 = space_basis(level, 1, t.max(sturm_bound(level, 1)))?;
        let mw = space_basis(level, w0, t.max(sturm_bound(level, w0)))?;
        debug_assert_eq!(mw.pivots, vec![0, 1]);
        Ok(Self {
            level,
            w0,
            g1: m1.basis[0].truncate(t),
            h: mw.basis[1].truncate(t),
        })
    }

    pub fn monomial_count(&self, w: u32) -> usize {
        (w / self.w0) as usize + 1
    }

    pub fn monomial(&self, w: u32, b: u32) -> QSeries<BigRational> {
        self.g1.pow(w - self.w0 * b).mul(&self.h.pow(b))
    }

    pub fn monomial_basis(&self, w: u32) -> Vec<QSeries<BigRational>> {
        (0..self.monomial_count(w) as u32)
            .map(|b| self.monomial(w, b))
            .collect()
    }
}
