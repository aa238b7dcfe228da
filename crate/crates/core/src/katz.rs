//! Katz expansions of overconvergent forms and the matrices of `U_p` and `T_l`.
//!
//! Layer `i` consists of the weight `k + i(p-1)` monomials `g1^e h^b` that are
//! not already accounted for by lower layers, divided by `E_{p-1}^i`. The `j`-th
//! basis element has expansion `q^j + O(q^{j+1})`, so coordinates are read off
//! by forward substitution.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classical::{dimension, level_one_eisenstein, ClassicalError, IntegralGenerators};
use crate::cmforms::CMSpec;
use crate::eigen::ModMatrix;
use crate::padic::{Modulus, PadicError, ResidueInt};
use crate::qseries::{mul_raw, QSeries};

#[derive(Debug, Error)]
pub enum KatzError {
    #[error(transparent)]
    Classical(#[from] ClassicalError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("E_{{p-1}} is not congruent to 1 mod p")]
    EisensteinNotOne,
    #[error("basis element {index} does not start with q^{index}")]
    NotTriangular { index: usize },
    #[error("operator T_{l} needs {needed} q-expansion terms but only {available} are stored")]
    TruncationTooShort { l: u64, needed: usize, available: usize },
    #[error("T_{l} is only defined here for l not dividing Np")]
    BadHeckePrime { l: u64 },
    #[error("series is not in the span of the basis (residual valuation {residual} < {tolerance})")]
    NotInSpace { residual: u32, tolerance: u32 },
    #[error("need at least one level")]
    NoLevels,
}

/// Position of a basis element in the layered construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BasisLabel {
    pub layer: usize,
    pub weight: u32,
    pub g1_exp: u32,
    pub h_exp: u32,
}

/// Coordinates of a series together with the valuation of what is left over.
#[derive(Clone, Debug)]
pub struct Coords {
    pub vector: Vec<u128>,
    /// Valuation of the residual on coefficients past the basis size.
    pub residual_valuation: u32,
}

pub fn default_levels(m_work: u32, p: u64) -> usize {
    ((m_work as u64 + 1) * (p + 1)).div_ceil(p - 1) as usize
}

pub fn total_dimension(spec: &CMSpec, n_levels: usize) -> Result<usize, KatzError> {
    if n_levels == 0 {
        return Err(KatzError::NoLevels);
    }
    let top = spec.weight() + (n_levels as u32 - 1) * (spec.p() as u32 - 1);
    Ok(dimension(spec.level(), top)?)
}

pub fn default_truncation(p: u64, d: usize) -> usize {
    p as usize * (d + 10)
}

#[derive(Clone, Debug)]
pub struct KatzSystem {
    spec: CMSpec,
    modulus: Modulus,
    n_levels: usize,
    t_q: usize,
    labels: Vec<BasisLabel>,
    basis: Vec<Vec<u128>>,
    e_pm1: Vec<u128>,
    up: ModMatrix,
    up_residual: u32,
    hecke: BTreeMap<u64, ModMatrix>,
}

fn raw_pow_table(md: &Modulus, base: &[u128], count: usize, len: usize) -> Vec<Vec<u128>> {
    let mut out = Vec::with_capacity(count + 1);
    let mut one = vec![0u128; len];
    one[0] = 1;
    out.push(one);
    for i in 0..count {
        let next = mul_raw(md, &out[i], base, len);
        out.push(next);
    }
    out
}

fn hecke_raw(md: &Modulus, f: &[u128], l: usize, chi_l: u128) -> Vec<u128> {
    let t = (f.len() - 1) / l;
    (0..=t)
        .map(|n| {
            let head = f[n * l];
            if n % l == 0 && chi_l != 0 {
                md.add(head, md.mul(chi_l, f[n / l]))
            } else {
                head
            }
        })
        .collect()
}

/// Builds the layered basis and the `U_p` matrix, plus `T_l` for each `l` in `hecke_primes`.
pub fn build_katz(
    spec: &CMSpec,
    m_work: u32,
    n_levels: usize,
    t_q: Option<usize>,
    hecke_primes: &[u64],
) -> Result<KatzSystem, KatzError> {
    let p = spec.p();
    let md = Modulus::new(p, m_work)?;
    let d = total_dimension(spec, n_levels)?;
    let t_q = t_q.unwrap_or_else(|| default_truncation(p, d));
    let len = t_q + 1;

    let gens = IntegralGenerators::new(spec.level(), t_q)?;
    let g1: Vec<u128> = gens.g1.reduce(&md)?.raw();
    let h: Vec<u128> = gens.h.reduce(&md)?.raw();
    let e = level_one_eisenstein(p as u32 - 1, t_q)?.reduce(&md)?.raw();
    if e[0] != 1 || e[1..].iter().any(|&c| c % p as u128 != 0) {
        return Err(KatzError::EisensteinNotOne);
    }
    let e_inv = QSeries::from_raw(&md, &e)
        .expect("nonempty")
        .inverse()
        .expect("constant term 1")
        .raw();

    let k = spec.weight();
    let w0 = gens.w0;
    let mut labels = Vec::with_capacity(d);
    let mut prev = 0usize;
    for i in 0..n_levels {
        let w = k + i as u32 * (p as u32 - 1);
        let di = dimension(spec.level(), w)?;
        for b in prev..di {
            labels.push(BasisLabel {
                layer: i,
                weight: w,
                g1_exp: w - w0 * b as u32,
                h_exp: b as u32,
            });
        }
        prev = di;
    }
    debug_assert_eq!(labels.len(), d);

    let max_g = labels.iter().map(|l| l.g1_exp).max().unwrap_or(0) as usize;
    let (g_pows, (h_pows, e_pows)) = rayon::join(
        || raw_pow_table(&md, &g1, max_g, len),
        || {
            rayon::join(
                || raw_pow_table(&md, &h, d, len),
                || raw_pow_table(&md, &e_inv, n_levels, len),
            )
        },
    );
    let basis: Vec<Vec<u128>> = labels
        .par_iter()
        .map(|l| {
            let gh = mul_raw(&md, &g_pows[l.g1_exp as usize], &h_pows[l.h_exp as usize], len);
            if l.layer == 0 {
                gh
            } else {
                mul_raw(&md, &gh, &e_pows[l.layer], len)
            }
        })
        .collect();
    for (j, b) in basis.iter().enumerate() {
        if b[..j].iter().any(|&x| x != 0) || b[j] != 1 {
            return Err(KatzError::NotTriangular { index: j });
        }
    }

    let mut sys = KatzSystem {
        spec: spec.clone(),
        modulus: md,
        n_levels,
        t_q,
        labels,
        basis,
        e_pm1: e,
        up: ModMatrix::zeros(md, d, d),
        up_residual: m_work,
        hecke: BTreeMap::new(),
    };
    let (up, res) = sys.operator_matrix(|b| {
        let t = (b.len() - 1) / p as usize;
        (0..=t).map(|n| b[n * p as usize]).collect()
    });
    sys.up = up;
    sys.up_residual = res;
    for &l in hecke_primes {
        let m = sys.compute_hecke(l)?;
        sys.hecke.insert(l, m);
    }
    Ok(sys)
}

impl KatzSystem {
    pub fn spec(&self) -> &CMSpec {
        &self.spec
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn truncation(&self) -> usize {
        self.t_q
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn layer_index(&self, j: usize) -> usize {
        self.labels[j].layer
    }

    pub fn basis_series(&self, j: usize) -> QSeries<ResidueInt> {
        QSeries::from_raw(&self.modulus, &self.basis[j]).expect("nonempty")
    }

    pub fn basis_raw(&self, j: usize) -> &[u128] {
        &self.basis[j]
    }

    pub fn eisenstein(&self) -> QSeries<ResidueInt> {
        QSeries::from_raw(&self.modulus, &self.e_pm1).expect("nonempty")
    }

    pub fn up_matrix(&self) -> &ModMatrix {
        &self.up
    }

    /// Smallest valuation of the residuals left when expressing `U_p` of the basis in the basis.
    pub fn up_residual_valuation(&self) -> u32 {
        self.up_residual
    }

    pub fn stored_hecke(&self) -> &BTreeMap<u64, ModMatrix> {
        &self.hecke
    }

    /// Coordinates of a raw series by forward substitution on its first `dim` terms.
    pub fn coords_raw(&self, f: &[u128]) -> Coords {
        let md = self.modulus;
        let d = self.dim();
        let len = f.len().min(self.t_q + 1);
        let mut r: Vec<u128> = f[..len].to_vec();
        r.resize(len.max(d), 0);
        let mut c = vec![0u128; d];
        for j in 0..d {
            let x = r[j];
            c[j] = x;
            if x == 0 {
                continue;
            }
            let b = &self.basis[j];
            for t in j..r.len() {
                if b[t] != 0 {
                    r[t] = md.sub(r[t], md.mul(x, b[t]));
                }
            }
        }
        let residual_valuation = r[d.min(r.len())..]
            .iter()
            .map(|&x| md.valuation_of(x))
            .min()
            .unwrap_or(md.precision());
        Coords {
            vector: c,
            residual_valuation,
        }
    }

    pub fn coords(&self, f: &QSeries<ResidueInt>) -> Coords {
        self.coords_raw(&f.raw())
    }

    /// Like [`KatzSystem::coords`] but fails when the residual valuation is below `tolerance`.
    pub fn coords_checked(&self, f: &QSeries<ResidueInt>, tolerance: u32) -> Result<Vec<u128>, KatzError> {
        let c = self.coords(f);
        if c.residual_valuation < tolerance {
            return Err(KatzError::NotInSpace {
                residual: c.residual_valuation,
                tolerance,
            });
        }
        Ok(c.vector)
    }

    /// The q-expansion `sum_j v_j basis_j` through the stored truncation.
    pub fn qexp_raw(&self, v: &[u128]) -> Vec<u128> {
        let md = self.modulus;
        (0..=self.t_q)
            .into_par_iter()
            .map(|t| {
                let hi = t.min(v.len() - 1);
                md.dot(v[..=hi].iter().copied(), self.basis[..=hi].iter().map(|b| b[t]))
            })
            .collect()
    }

    pub fn qexp(&self, v: &[u128]) -> QSeries<ResidueInt> {
        QSeries::from_raw(&self.modulus, &self.qexp_raw(v)).expect("nonempty")
    }

    fn operator_matrix(&self, op: impl Fn(&[u128]) -> Vec<u128> + Sync) -> (ModMatrix, u32) {
        let cols: Vec<Coords> = self
            .basis
            .par_iter()
            .map(|b| self.coords_raw(&op(b)))
            .collect();
        let res = cols.iter().map(|c| c.residual_valuation).min().unwrap_or(self.modulus.precision());
        let vecs: Vec<Vec<u128>> = cols.into_iter().map(|c| c.vector).collect();
        (ModMatrix::from_columns(self.modulus, self.dim(), &vecs), res)
    }

    fn compute_hecke(&self, l: u64) -> Result<ModMatrix, KatzError> {
        if self.spec.divides_np(l) || !crate::padic::is_prime(l) {
            return Err(KatzError::BadHeckePrime { l });
        }
        let available = self.t_q / l as usize + 1;
        if available < self.dim() {
            return Err(KatzError::TruncationTooShort {
                l,
                needed: l as usize * self.dim(),
                available: self.t_q,
            });
        }
        let md = self.modulus;
        let chi_l = md.mul(
            md.reduce_i64(self.spec.chi(l) as i64),
            md.pow(l as u128 % md.order(), self.spec.weight() as u64 - 1),
        );
        Ok(self
            .operator_matrix(|b| hecke_raw(&md, b, l as usize, chi_l))
            .0)
    }

    /// The matrix of `T_l`; computed on demand if it was not requested at build time.
    pub fn hecke_matrix(&self, l: u64) -> Result<ModMatrix, KatzError> {
        match self.hecke.get(&l) {
            Some(m) => Ok(m.clone()),
            None => self.compute_hecke(l),
        }
    }

    /// Minimum valuation over the `U` columns belonging to each layer.
    pub fn layer_min_valuations(&self) -> Vec<u32> {
        let mut out = vec![self.modulus.precision(); self.n_levels];
        for j in 0..self.dim() {
            let v = crate::eigen::vector_valuation(&self.modulus, &self.up.column(j));
            let l = self.labels[j].layer;
            out[l] = out[l].min(v);
        }
        out
    }

    pub fn up_json(&self) -> serde_json::Value {
        self.up.to_json()
    }
}
