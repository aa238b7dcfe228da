//! End-to-end computation: CM form, stabilization, Katz system, generalized
//! eigenspace and the normalized `f'`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmforms::{stabilize, CMSpec, CmError, StabilizedForm};
use crate::eigen::{generalized_eigenspace, normalize_fprime, Convention, EigenError, FPrime, GeneralizedEigenData};
use crate::katz::{build_katz, default_levels, default_truncation, total_dimension, KatzError, KatzSystem};
use crate::padic::{is_prime, Modulus, PadicError, ResidueInt};

pub const DEFAULT_BUFFER: u32 = 6;
const MAX_ATTEMPTS: usize = 4;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Cm(#[from] CmError),
    #[error(transparent)]
    Katz(#[from] KatzError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// User-facing parameters; `None` means "choose automatically".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub disc: i64,
    pub weight: u32,
    pub p: u64,
    pub m_target: u32,
    pub buffer: Option<u32>,
    pub n_levels: Option<usize>,
    pub t_q: Option<usize>,
    pub convention: Convention,
    pub lmax: u64,
}

impl RunConfig {
    pub fn new(disc: i64, weight: u32, p: u64, m_target: u32) -> Self {
        Self {
            disc,
            weight,
            p,
            m_target,
            buffer: None,
            n_levels: None,
            t_q: None,
            convention: Convention::Table,
            lmax: 100,
        }
    }

    pub fn example(n: u8) -> Option<Self> {
        match n {
            1 => Some(Self::new(-4, 5, 5, 24)),
            2 => Some(Self::new(-3, 7, 7, 22)),
            _ => None,
        }
    }
}

/// Parameters actually used by a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Resolved {
    pub buffer: u32,
    pub m_work: u32,
    pub n_levels: usize,
    pub t_q: usize,
    pub dim: usize,
    pub hecke_primes: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Attempt {
    pub buffer: u32,
    pub m_work: u32,
    pub m_verified: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableEntry {
    pub l: u64,
    pub value: ResidueInt,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub config: RunConfig,
    pub resolved: Resolved,
    pub attempts: Vec<Attempt>,
    pub spec: CMSpec,
    pub stabilized: StabilizedForm,
    pub system: KatzSystem,
    pub f_coords: Vec<u128>,
    pub f_residual: u32,
    pub eigen: GeneralizedEigenData,
    pub fprime: FPrime,
    pub m_verified: u32,
}

impl RunResult {
    /// Precision at which results are reported.
    pub fn report_precision(&self) -> u32 {
        self.m_verified.min(self.config.m_target)
    }

    pub fn report_modulus(&self) -> Modulus {
        Modulus::new(self.config.p, self.report_precision().max(1)).expect("valid modulus")
    }

    /// `a_n(f')` reduced to the reported precision.
    pub fn fprime_coeff(&self, n: usize) -> ResidueInt {
        self.fprime.series.coeffs()[n]
            .reduce(self.report_precision().max(1))
            .expect("coarser precision")
    }

    /// Nonzero `a_l'` for primes `l <= lmax` not dividing `Np`, except the scaling index.
    pub fn table(&self) -> Vec<TableEntry> {
        (2..=self.config.lmax)
            .filter(|&l| is_prime(l) && !self.spec.divides_np(l))
            .filter(|&l| l as usize != self.fprime.scaling_index)
            .map(|l| TableEntry {
                l,
                value: self.fprime_coeff(l as usize),
            })
            .filter(|e| !e.value.is_zero())
            .collect()
    }

    /// `a_l'` at every prime up to `lmax`, including zeros and primes dividing `Np`.
    pub fn all_prime_coefficients(&self) -> Vec<TableEntry> {
        (2..=self.config.lmax)
            .filter(|&l| is_prime(l))
            .map(|l| TableEntry {
                l,
                value: self.fprime_coeff(l as usize),
            })
            .collect()
    }
}

fn hecke_primes_for(spec: &CMSpec) -> Vec<u64> {
    let small: Vec<u64> = (2..spec.p())
        .filter(|&l| is_prime(l) && !spec.divides_np(l))
        .collect();
    if small.is_empty() {
        let l = (2..).find(|&l| is_prime(l) && !spec.divides_np(l)).expect("primes exist");
        vec![l]
    } else {
        small
    }
}

/// One pass at a fixed buffer.
pub fn run_once(config: &RunConfig, buffer: u32) -> Result<RunResult, PipelineError> {
    let spec = CMSpec::new(config.disc, config.weight, config.p, config.m_target)?;
    let p = spec.p();
    let m_work = config.m_target + buffer;
    let n_levels = config.n_levels.unwrap_or_else(|| default_levels(m_work, p));
    let d = total_dimension(&spec, n_levels)?;
    let hecke_primes = hecke_primes_for(&spec);
    let lmax_hecke = *hecke_primes.iter().max().expect("nonempty") as usize;
    let t_q = config.t_q.unwrap_or_else(|| {
        default_truncation(p, d)
            .max(lmax_hecke * (d + 10))
            .max(config.lmax as usize)
    });

    let modulus = Modulus::new(p, m_work)?;
    let g0 = spec.qexpansion(t_q);
    let stabilized = stabilize(&spec, &g0, &modulus)?;
    let system = build_katz(&spec, m_work, n_levels, Some(t_q), &hecke_primes)?;
    let fc = system.coords(&stabilized.f);
    let pairs: Vec<(crate::eigen::ModMatrix, ResidueInt)> = hecke_primes
        .iter()
        .map(|&l| {
            let m = system.hecke_matrix(l)?;
            Ok((m, stabilized.f.coeffs()[l as usize]))
        })
        .collect::<Result<_, KatzError>>()?;
    let eigen = generalized_eigenspace(system.up_matrix(), &stabilized.alpha, &pairs, Some(&fc.vector))?;
    let fprime = normalize_fprime(&eigen, &system, &stabilized.f, config.convention)?;
    let m_verified = eigen.m_verified;
    Ok(RunResult {
        config: config.clone(),
        resolved: Resolved {
            buffer,
            m_work,
            n_levels,
            t_q,
            dim: d,
            hecke_primes,
        },
        attempts: vec![],
        spec,
        stabilized,
        system,
        f_coords: fc.vector,
        f_residual: fc.residual_valuation,
        eigen,
        fprime,
        m_verified,
    })
}

/// Runs the pipeline, raising the working precision while the certified
/// precision falls short of the target (unless the buffer was fixed).
pub fn run(config: &RunConfig) -> Result<RunResult, PipelineError> {
    let mut buffer = config.buffer.unwrap_or(DEFAULT_BUFFER);
    let mut attempts = Vec::new();
    loop {
        let mut result = run_once(config, buffer)?;
        attempts.push(Attempt {
            buffer,
            m_work: result.resolved.m_work,
            m_verified: result.m_verified,
        });
        let short = config.m_target.saturating_sub(result.m_verified);
        if short == 0 || config.buffer.is_some() || attempts.len() >= MAX_ATTEMPTS {
            result.attempts = attempts;
            return Ok(result);
        }
        buffer += short + 2;
    }
}

/// Reruns with two more levels and two more digits of working precision.
pub fn enlarged(result: &RunResult) -> Result<RunResult, PipelineError> {
    let mut cfg = result.config.clone();
    cfg.n_levels = Some(result.resolved.n_levels + 2);
    cfg.t_q = None;
    let mut r = run_once(&cfg, result.resolved.buffer + 2)?;
    r.attempts = vec![Attempt {
        buffer: r.resolved.buffer,
        m_work: r.resolved.m_work,
        m_verified: r.m_verified,
    }];
    Ok(r)
}
