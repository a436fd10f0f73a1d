use serde::{Deserialize, Serialize};

use super::field::PrimeField;
use super::geometry::realize;
use super::rows::build_matrix;
use super::{mix_seed, InterpError};
use crate::expected::{conditions_fat_line, hilbert_poly_pn, length_p3};
use crate::schemes::SchemeSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    CertifiedMaximal,
    NotCertified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub rows: u64,
    pub cols: u64,
    pub rank: u64,
    pub expected_rank: u64,
    pub verdict: Verdict,
    pub prime: u64,
    pub seed: u64,
    pub retries_used: u32,
}

impl RankReport {
    pub fn defect(&self) -> u64 {
        self.expected_rank - self.rank.min(self.expected_rank)
    }

    pub fn certified(&self) -> bool {
        self.verdict == Verdict::CertifiedMaximal
    }
}

/// Number of conditions a general realization of `z` imposes on degree-`d`
/// forms of P^n, before clamping by the column count.
pub fn scheme_length(z: &SchemeSpec, d: u64, n: usize) -> Result<u64, InterpError> {
    if n == 3 {
        return Ok(length_p3(d, z)?);
    }
    let fat = if z.m > 0 { conditions_fat_line(n as u64, z.m, d)? } else { 0 };
    let zig = if z.z >= 2 { z.z * (d + 1) - (z.z - 1) } else { 0 };
    Ok(fat + z.r * (d + 1) + z.s * (2 * d + 1) + z.q + zig)
}

/// `(rows, cols)` of the interpolation matrix, without building it.
pub fn matrix_shape(z: &SchemeSpec, d: u64, n: usize) -> Result<(u64, u64), InterpError> {
    Ok((scheme_length(z, d, n)?, hilbert_poly_pn(n as u64, d)))
}

/// Realizes `z` up to `retries` times and keeps the best rank. Certification
/// is one-sided: a full-rank instance proves maximal rank, a deficient one
/// is only evidence of speciality.
pub fn verify_maximal_rank(
    z: &SchemeSpec,
    d: u64,
    n: usize,
    field: PrimeField,
    seed: u64,
    retries: u32,
) -> Result<RankReport, InterpError> {
    if z.m > d {
        return Err(InterpError::MultiplicityExceedsDegree { m: z.m, d });
    }
    let (rows, cols) = matrix_shape(z, d, n)?;
    let expected_rank = rows.min(cols);
    let mut best = 0;
    let mut used = 0;
    for attempt in 0..retries.max(1) {
        used = attempt + 1;
        let c = realize(z, n, field, mix_seed(&[seed, attempt as u64]))?;
        let mat = build_matrix(&c, d)?;
        debug_assert_eq!(mat.rows() as u64, rows);
        best = best.max(mat.into_rank() as u64);
        if best == expected_rank {
            break;
        }
    }
    let verdict = if best == expected_rank {
        Verdict::CertifiedMaximal
    } else {
        Verdict::NotCertified
    };
    Ok(RankReport {
        rows,
        cols,
        rank: best,
        expected_rank,
        verdict,
        prime: field.p(),
        seed,
        retries_used: used,
    })
}

/// A rank job, re-runnable over several primes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankJob {
    pub scheme: SchemeSpec,
    pub d: u64,
    pub n: usize,
    pub seed: u64,
    pub retries: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsensusReport {
    pub reports: Vec<RankReport>,
    pub agree: bool,
    pub certified: bool,
    pub flag: Option<String>,
}

pub const SUSPECT_FLAG: &str = "SPECIAL_CHARACTERISTIC_SUSPECT";

impl ConsensusReport {
    /// Deficient in every characteristic tried.
    pub fn persistent_defect(&self) -> bool {
        self.reports.iter().all(|r| !r.certified())
    }

    pub fn from_reports(reports: Vec<RankReport>) -> Self {
        let agree = reports.windows(2).all(|w| w[0].rank == w[1].rank);
        let certified = reports.iter().any(RankReport::certified);
        let flag = (!agree).then(|| SUSPECT_FLAG.to_string());
        Self { reports, agree, certified, flag }
    }
}

/// Runs `job` once per prime with a seed derived from the prime, and flags
/// rank disagreement across characteristics.
pub fn multi_prime_check(job: &RankJob, primes: &[u64]) -> Result<ConsensusReport, InterpError> {
    let mut distinct = primes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(InterpError::TooFewPrimes);
    }
    let reports = primes
        .iter()
        .map(|&p| {
            let f = PrimeField::new(p)?;
            let seed = mix_seed(&[job.seed, p]);
            verify_maximal_rank(&job.scheme, job.d, job.n, f, seed, job.retries)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConsensusReport::from_reports(reports))
}
