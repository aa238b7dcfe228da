//! Linear algebra over `Z/p^m`: Howell forms, kernels, determinants,
//! precision-aware elimination, and generalized eigenspaces.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::padic::{Modulus, ResidueInt};

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("matrix shapes do not match: {0}")]
    Shape(String),
    #[error("form is not in the computed eigenspace (residual valuations {residuals:?}, needed {needed})")]
    NotInSpace { residuals: Vec<u32>, needed: u32 },
    #[error("eigenspace contains no vector independent of the eigenform")]
    NoComplement,
    #[error("normalizing coefficient a_{index} has valuation {valuation}")]
    Normalization { index: usize, valuation: u32 },
}

/// Dense matrix over `Z/p^m`, row major, raw residues.
#[derive(Clone, PartialEq, Eq)]
pub struct ModMatrix {
    rows: usize,
    cols: usize,
    modulus: Modulus,
    data: Vec<u128>,
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ModMatrix {}x{} mod {}", self.rows, self.cols, self.modulus)?;
        for r in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", &self.row(r)[..self.cols.min(8)])?;
        }
        Ok(())
    }
}

impl ModMatrix {
    pub fn zeros(modulus: Modulus, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            modulus,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(modulus: Modulus, n: usize) -> Self {
        let mut m = Self::zeros(modulus, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % modulus.order();
        }
        m
    }

    pub fn from_rows(modulus: Modulus, rows: &[Vec<u128>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            modulus,
            data: rows
                .iter()
                .flatten()
                .map(|&x| x % modulus.order())
                .collect(),
        }
    }

    pub fn from_i64_rows(modulus: Modulus, rows: &[Vec<i64>]) -> Self {
        let raw: Vec<Vec<u128>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| modulus.reduce_i64(x)).collect())
            .collect();
        Self::from_rows(modulus, &raw)
    }

    pub fn from_columns(modulus: Modulus, rows: usize, columns: &[Vec<u128>]) -> Self {
        let mut m = Self::zeros(modulus, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, &x) in col.iter().enumerate() {
                m.data[i * m.cols + j] = x;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn get(&self, i: usize, j: usize) -> u128 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u128) {
        self.data[i * self.cols + j] = v % self.modulus.order();
    }

    pub fn entry(&self, i: usize, j: usize) -> ResidueInt {
        self.modulus.residue(self.get(i, j))
    }

    pub fn row(&self, i: usize) -> &[u128] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u128> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u128>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.modulus, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self, EigenError> {
        if self.cols != other.rows || self.modulus != other.modulus {
            return Err(EigenError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let ot = other.transpose();
        let md = self.modulus;
        let data: Vec<u128> = (0..self.rows)
            .into_par_iter()
            .flat_map_iter(|i| {
                let a = self.row(i);
                (0..other.cols)
                    .map(|j| md.dot(a.iter().copied(), ot.row(j).iter().copied()))
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            modulus: md,
            data,
        })
    }

    pub fn mul_vec(&self, v: &[u128]) -> Vec<u128> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| self.modulus.dot(self.row(i).iter().copied(), v.iter().copied()))
            .collect()
    }

    /// `self - c I` for square matrices.
    pub fn sub_scalar(&self, c: u128) -> Self {
        assert_eq!(self.rows, self.cols, "square matrix");
        let mut m = self.clone();
        for i in 0..self.rows {
            let k = i * self.cols + i;
            m.data[k] = self.modulus.sub(m.data[k], c);
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| self.modulus.sub(a, b))
                .collect(),
            ..self.clone()
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::identity(self.modulus, self.rows);
        for _ in 0..e {
            out = out.mul(self).expect("square");
        }
        out
    }

    pub fn vstack(parts: &[&ModMatrix]) -> Self {
        let cols = parts[0].cols;
        assert!(parts.iter().all(|m| m.cols == cols), "column counts differ");
        Self {
            rows: parts.iter().map(|m| m.rows).sum(),
            cols,
            modulus: parts[0].modulus,
            data: parts.iter().flat_map(|m| m.data.iter().copied()).collect(),
        }
    }

    /// Smallest valuation among the entries (`m` for the zero matrix).
    pub fn min_valuation(&self) -> u32 {
        self.data
            .iter()
            .map(|&x| self.modulus.valuation_of(x))
            .min()
            .unwrap_or(self.modulus.precision())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect())
            .collect();
        serde_json::json!({
            "p": self.modulus.p(),
            "m": self.modulus.precision(),
            "rows": rows,
        })
    }
}

pub fn vector_valuation(modulus: &Modulus, v: &[u128]) -> u32 {
    v.iter()
        .map(|&x| modulus.valuation_of(x))
        .min()
        .unwrap_or(modulus.precision())
}

/// Howell normal form: rows in pivot order, pivots `p^v`, entries above a
/// pivot reduced modulo it, and every vector of the span with leading zeros
/// in the first `c` positions is a combination of the rows with pivots past `c`.
pub fn howell_form(m: &ModMatrix) -> ModMatrix {
    let md = m.modulus;
    let prec = md.precision();
    let mut pool: Vec<Vec<u128>> = m.to_rows().into_iter().filter(|r| r.iter().any(|&x| x != 0)).collect();
    let mut pivots: Vec<(usize, u32, Vec<u128>)> = Vec::new();
    for c in 0..m.cols {
        let best = pool
            .iter()
            .enumerate()
            .filter(|(_, r)| r[c] != 0)
            .min_by_key(|(_, r)| md.valuation_of(r[c]))
            .map(|(i, _)| i);
        let Some(i) = best else { continue };
        let mut row = pool.swap_remove(i);
        let v = md.valuation_of(row[c]);
        let pv = md.p_pow(v);
        let unit_inv = md.inv(row[c] / pv).expect("unit part");
        for x in row.iter_mut() {
            *x = md.mul(*x, unit_inv);
        }
        for other in pool.iter_mut() {
            if other[c] != 0 {
                let f = other[c] / pv;
                for (x, &y) in other.iter_mut().zip(&row) {
                    *x = md.sub(*x, md.mul(f, y));
                }
            }
        }
        if v > 0 {
            let s = md.p_pow(prec - v);
            let extra: Vec<u128> = row.iter().map(|&x| md.mul(x, s)).collect();
            if extra.iter().any(|&x| x != 0) {
                pool.push(extra);
            }
        }
        pool.retain(|r| r.iter().any(|&x| x != 0));
        pivots.push((c, v, row));
    }
    for i in 0..pivots.len() {
        let (c, v, row) = pivots[i].clone();
        let pv = md.p_pow(v);
        for (_, _, above) in pivots[..i].iter_mut() {
            let f = above[c] / pv;
            if f != 0 {
                for (x, &y) in above.iter_mut().zip(&row) {
                    *x = md.sub(*x, md.mul(f, y));
                }
            }
        }
    }
    let rows: Vec<Vec<u128>> = pivots.into_iter().map(|(_, _, r)| r).collect();
    if rows.is_empty() {
        return ModMatrix::zeros(md, 0, m.cols);
    }
    ModMatrix::from_rows(md, &rows)
}

/// Generators of `{v : M v = 0 mod p^m}`, read off the Howell form of `[M^T | I]`.
pub fn kernel_mod_pm(m: &ModMatrix) -> Vec<Vec<u128>> {
    let md = m.modulus;
    let n = m.cols;
    let aug: Vec<Vec<u128>> = (0..n)
        .map(|j| {
            let mut row = m.column(j);
            row.extend((0..n).map(|i| u128::from(i == j)));
            row
        })
        .collect();
    let h = howell_form(&ModMatrix::from_rows(md, &aug));
    (0..h.rows())
        .map(|i| h.row(i))
        .filter(|r| r[..m.rows].iter().all(|&x| x == 0))
        .map(|r| r[m.rows..].to_vec())
        .collect()
}

/// Determinant by valuation-pivoted row reduction; exact over `Z/p^m`.
pub fn determinant(m: &ModMatrix) -> ResidueInt {
    assert_eq!(m.rows, m.cols, "square matrix");
    let md = m.modulus;
    let mut a = m.to_rows();
    let n = m.rows;
    let mut det = 1 % md.order();
    for c in 0..n {
        let piv = (c..n)
            .filter(|&r| a[r][c] != 0)
            .min_by_key(|&r| md.valuation_of(a[r][c]));
        let Some(r) = piv else {
            return md.zero();
        };
        if r != c {
            a.swap(r, c);
            det = md.neg(det);
        }
        let v = md.valuation_of(a[c][c]);
        let pv = md.p_pow(v);
        let uinv = md.inv(a[c][c] / pv).expect("unit part");
        det = md.mul(det, a[c][c]);
        let (top, bottom) = a.split_at_mut(c + 1);
        let prow = &top[c];
        for row in bottom.iter_mut() {
            if row[c] != 0 {
                let f = md.mul(row[c] / pv, uinv);
                for (x, &y) in row[c..].iter_mut().zip(&prow[c..]) {
                    *x = md.sub(*x, md.mul(f, y));
                }
            }
        }
    }
    md.residue(det)
}

/// Result of [`stable_kernel`].
#[derive(Clone, Debug, Serialize)]
pub struct StableKernel {
    /// Basis of the numerical kernel, as coordinate vectors.
    #[serde(skip)]
    pub vectors: Vec<Vec<u128>>,
    /// Every entry of the unreduced block is divisible by `p^kernel_precision`.
    pub kernel_precision: u32,
    /// Largest pivot exponent used during elimination.
    pub loss: u32,
    pub pivot_exponents: Vec<u32>,
}

impl StableKernel {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Digits of the kernel basis that are insensitive to `p^m` perturbations of the input.
    pub fn verified_precision(&self) -> u32 {
        self.kernel_precision.saturating_sub(self.loss)
    }
}

/// Full-pivot column elimination of `a`, stopping once every remaining entry
/// is divisible by `p^threshold`; the untouched columns of the accumulated
/// column transform span the numerical kernel.
pub fn stable_kernel(a: &ModMatrix, threshold: u32) -> StableKernel {
    let md = a.modulus;
    let prec = md.precision();
    let (nr, nc) = (a.rows, a.cols);
    let mut cols: Vec<Vec<u128>> = (0..nc).map(|j| a.column(j)).collect();
    let mut q: Vec<Vec<u128>> = (0..nc)
        .map(|j| (0..nc).map(|i| u128::from(i == j)).collect())
        .collect();
    let mut row_active = vec![true; nr];
    let mut col_active: Vec<usize> = (0..nc).collect();
    let mut exps = Vec::new();
    loop {
        let mut best: Option<(u32, usize, usize)> = None;
        'search: for &c in &col_active {
            for r in (0..nr).filter(|&r| row_active[r]) {
                let x = cols[c][r];
                if x == 0 {
                    continue;
                }
                let v = md.valuation_of(x);
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, r, c));
                    if v == 0 {
                        break 'search;
                    }
                }
            }
        }
        let Some((v, r, c)) = best else { break };
        if v >= threshold {
            break;
        }
        let pv = md.p_pow(v);
        let uinv = md.inv(cols[c][r] / pv).expect("unit part");
        let pivot_col = cols[c].clone();
        let pivot_q = q[c].clone();
        let others: Vec<usize> = col_active.iter().copied().filter(|&c2| c2 != c).collect();
        let updates: Vec<(usize, Vec<u128>, Vec<u128>)> = others
            .par_iter()
            .filter(|&&c2| cols[c2][r] != 0)
            .map(|&c2| {
                let f = md.mul(cols[c2][r] / pv, uinv);
                let col: Vec<u128> = cols[c2]
                    .iter()
                    .zip(&pivot_col)
                    .map(|(&x, &y)| md.sub(x, md.mul(f, y)))
                    .collect();
                let qc: Vec<u128> = q[c2]
                    .iter()
                    .zip(&pivot_q)
                    .map(|(&x, &y)| md.sub(x, md.mul(f, y)))
                    .collect();
                (c2, col, qc)
            })
            .collect();
        for (c2, col, qc) in updates {
            cols[c2] = col;
            q[c2] = qc;
        }
        row_active[r] = false;
        col_active.retain(|&x| x != c);
        exps.push(v);
    }
    let kernel_precision = col_active
        .iter()
        .flat_map(|&c| (0..nr).filter(|&r| row_active[r]).map(move |r| (c, r)))
        .map(|(c, r)| md.valuation_of(cols[c][r]))
        .min()
        .unwrap_or(prec);
    StableKernel {
        vectors: col_active.iter().map(|&c| q[c].clone()).collect(),
        kernel_precision,
        loss: exps.iter().copied().max().unwrap_or(0),
        pivot_exponents: exps,
    }
}

pub fn default_threshold(modulus: &Modulus) -> u32 {
    modulus.precision().div_ceil(2)
}

/// The generalized eigenspace of `U` at `alpha` cut out by Hecke conditions.
#[derive(Clone, Debug, Serialize)]
pub struct GeneralizedEigenData {
    pub alpha: ResidueInt,
    #[serde(skip)]
    pub space: Vec<Vec<u128>>,
    /// Stabilized dimension of the generalized eigenspace.
    pub e_f: usize,
    /// Dimension of the joint kernel of `U - alpha` and the `T_l - a_l`.
    pub eigen_dim: usize,
    /// Dimensions of `ker (U - alpha)^j` with the Hecke conditions, `j = 1, 2, ...`.
    pub power_dims: Vec<usize>,
    /// Dimension of `ker (U - alpha)` alone.
    pub up_kernel_dim: usize,
    #[serde(skip)]
    pub f_coords: Option<Vec<u128>>,
    pub m_verified: u32,
    pub kernel_precision: u32,
    pub loss: u32,
}

pub const MAX_POWER: u32 = 6;

/// Stacks `(U - alpha)^j` with `(T_l - a_l)^2` for the supplied pairs and
/// grows `j` until the kernel dimension stabilizes.
pub fn generalized_eigenspace(
    u: &ModMatrix,
    alpha: &ResidueInt,
    hecke: &[(ModMatrix, ResidueInt)],
    f_coords: Option<&[u128]>,
) -> Result<GeneralizedEigenData, EigenError> {
    let md = u.modulus;
    let threshold = default_threshold(&md);
    let a = u.sub_scalar(alpha.value());
    let t1: Vec<ModMatrix> = hecke.iter().map(|(t, al)| t.sub_scalar(al.value())).collect();
    let t2: Vec<ModMatrix> = t1.iter().map(|t| t.mul(t).expect("square")).collect();

    let up_kernel = stable_kernel(&a, threshold);
    let mut parts = vec![&a];
    parts.extend(t1.iter());
    let eigen = stable_kernel(&ModMatrix::vstack(&parts), threshold);

    let mut power = a.clone();
    let mut dims = Vec::new();
    let mut residuals = Vec::new();
    let mut last: Option<(ModMatrix, StableKernel)> = None;
    for j in 1..=MAX_POWER {
        if j > 1 {
            power = power.mul(&a)?;
        }
        let mut parts = vec![&power];
        parts.extend(t2.iter());
        let stacked = ModMatrix::vstack(&parts);
        let k = stable_kernel(&stacked, threshold);
        if let Some(f) = f_coords {
            residuals.push(vector_valuation(&md, &stacked.mul_vec(f)));
        }
        dims.push(k.dim());
        let stable = j > 1 && dims[j as usize - 2] == k.dim();
        last = Some((stacked, k));
        if stable {
            break;
        }
    }
    let (stacked, kernel) = last.expect("at least one power");
    let m_verified = kernel.verified_precision();
    if let Some(f) = f_coords {
        let r = vector_valuation(&md, &stacked.mul_vec(f));
        if r < m_verified {
            return Err(EigenError::NotInSpace {
                residuals,
                needed: m_verified,
            });
        }
    }
    Ok(GeneralizedEigenData {
        alpha: *alpha,
        e_f: kernel.dim(),
        eigen_dim: eigen.dim(),
        power_dims: dims,
        up_kernel_dim: up_kernel.dim(),
        f_coords: f_coords.map(<[u128]>::to_vec),
        m_verified,
        kernel_precision: kernel.kernel_precision,
        loss: kernel.loss,
        space: kernel.vectors,
    })
}

/// Which coefficient of `f'` is scaled to 1 after making `a_1' = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Scale the coefficient at the smallest inert prime.
    Paper,
    /// Scale `a_2'`.
    Table,
}

impl Convention {
    pub fn scaling_index(&self, spec: &crate::cmforms::CMSpec) -> usize {
        match self {
            Convention::Paper => spec.smallest_inert_prime() as usize,
            Convention::Table => 2,
        }
    }
}

/// The normalized generalized eigenform.
#[derive(Clone, Debug)]
pub struct FPrime {
    pub series: crate::qseries::QSeries<ResidueInt>,
    pub coords: Vec<u128>,
    pub scaling_index: usize,
    pub convention: Convention,
}

/// Picks the element of the eigenspace that is independent of `f`, removes its
/// `a_1` multiple of `f` and scales the designated coefficient to 1.
///
/// Among the basis vectors of the space, the one whose designated coefficient
/// has the smallest valuation wins; ties go to the first.
pub fn normalize_fprime(
    data: &GeneralizedEigenData,
    sys: &crate::katz::KatzSystem,
    f: &crate::qseries::QSeries<ResidueInt>,
    convention: Convention,
) -> Result<FPrime, EigenError> {
    let md = sys.modulus();
    let idx = convention.scaling_index(sys.spec());
    let f_raw = f.raw();
    let f_coords = data
        .f_coords
        .clone()
        .unwrap_or_else(|| sys.coords_raw(&f_raw).vector);
    let candidates: Vec<(Vec<u128>, Vec<u128>)> = data
        .space
        .iter()
        .map(|v| {
            let g = sys.qexp_raw(v);
            let a1 = g[1];
            let g: Vec<u128> = g.iter().zip(&f_raw).map(|(&x, &y)| md.sub(x, md.mul(a1, y))).collect();
            let c: Vec<u128> = v.iter().zip(&f_coords).map(|(&x, &y)| md.sub(x, md.mul(a1, y))).collect();
            (g, c)
        })
        .collect();
    let (series, coords) = candidates
        .into_iter()
        .min_by_key(|(g, _)| md.valuation_of(g[idx]))
        .ok_or(EigenError::NoComplement)?;
    let v = md.valuation_of(series[idx]);
    if v >= data.m_verified {
        return Err(EigenError::NoComplement);
    }
    if v > 0 {
        return Err(EigenError::Normalization { index: idx, valuation: v });
    }
    let u = md.inv(series[idx]).expect("unit");
    let scale = |xs: Vec<u128>| -> Vec<u128> { xs.into_iter().map(|x| md.mul(x, u)).collect() };
    Ok(FPrime {
        series: crate::qseries::QSeries::from_raw(&md, &scale(series)).expect("nonempty"),
        coords: scale(coords),
        scaling_index: idx,
        convention,
    })
}
