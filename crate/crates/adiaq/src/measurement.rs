//! Calculated and measured distributions over the truncated basis: Born
//! probabilities, seeded projective shot sampling, total-variation distance,
//! and the calculated-vs-measured match verdict.
//!
//! Sampling is bit-exact reproducible: shots are drawn sequentially from a
//! ChaCha8 generator seeded with `seed_from_u64`, each shot mapping one
//! uniform `f64` in `[0, 1)` through the inverse CDF of the distribution.

use crate::evolution::WaveFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Name recorded in shot records for the generator/draw scheme above.
pub const GENERATOR_NAME: &str = "chacha8";
/// Minimum shot count accepted by the match verdict.
pub const SHOT_FLOOR: u64 = 100;
/// Probability floor below which an index does not count toward the
/// effective support size.
pub const SUPPORT_FLOOR: f64 = 1e-6;
/// Tolerance on probability normalization.
pub const PROBABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeasurementError {
    #[error("distributions have different dimensions: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("probabilities must be non-negative and sum to 1 within {tol:e}; sum was {sum}")]
    NotADistribution { sum: f64, tol: f64 },
    #[error("need at least one shot")]
    NoShots,
    #[error("{got} shots is below the floor of {floor}")]
    ShotsBelowFloor { got: u64, floor: u64 },
}

/// A probability vector over basis indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probabilities: Vec<f64>,
}

impl Distribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, MeasurementError> {
        let sum: f64 = probabilities.iter().sum();
        let valid = probabilities.iter().all(|&p| (0.0..=1.0 + PROBABILITY_TOL).contains(&p))
            && (sum - 1.0).abs() <= PROBABILITY_TOL;
        if !valid {
            return Err(MeasurementError::NotADistribution {
                sum,
                tol: PROBABILITY_TOL,
            });
        }
        Ok(Self { probabilities })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Number of indices carrying more than the support floor.
    pub fn effective_support(&self) -> usize {
        self.probabilities
            .iter()
            .filter(|&&p| p > SUPPORT_FLOOR)
            .count()
    }
}

/// Born probabilities `|c_j|^2` of a normalized state.
pub fn born_distribution(state: &WaveFunction) -> Distribution {
    let mut probabilities: Vec<f64> =
        state.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    // squash the tiny normalization residue so downstream checks stay exact
    let sum: f64 = probabilities.iter().sum();
    if sum > 0.0 {
        for p in &mut probabilities {
            *p /= sum;
        }
    }
    Distribution { probabilities }
}

/// Record of a finite measurement run: shot count, seed, generator name, and
/// per-index occurrence counts. Reproducible bit-exactly from
/// `(distribution, shots, seed)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shots: u64,
    pub seed: u64,
    pub generator: String,
    pub counts: BTreeMap<usize, u64>,
}

impl ShotRecord {
    /// Empirical distribution `counts / shots` over `dimension` indices.
    pub fn to_distribution(&self, dimension: usize) -> Distribution {
        let mut probabilities = vec![0.0; dimension];
        for (&index, &count) in &self.counts {
            probabilities[index] = count as f64 / self.shots as f64;
        }
        Distribution { probabilities }
    }
}

/// Draws `shots` independent samples from the Born distribution of `state`.
pub fn sample(
    state: &WaveFunction,
    shots: u64,
    seed: u64,
) -> Result<ShotRecord, MeasurementError> {
    sample_distribution(&born_distribution(state), shots, seed)
}

/// Draws `shots` independent samples from an explicit distribution using the
/// seeded generator: one uniform `f64` per shot, mapped through the inverse
/// CDF (binary search on the cumulative sums).
pub fn sample_distribution(
    distribution: &Distribution,
    shots: u64,
    seed: u64,
) -> Result<ShotRecord, MeasurementError> {
    if shots == 0 {
        return Err(MeasurementError::NoShots);
    }
    let mut cumulative = Vec::with_capacity(distribution.len());
    let mut acc = 0.0f64;
    for &p in distribution.probabilities() {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let index = cumulative
            .partition_point(|&c| c <= u)
            .min(distribution.len() - 1);
        *counts.entry(index).or_insert(0) += 1;
    }
    Ok(ShotRecord {
        shots,
        seed,
        generator: GENERATOR_NAME.to_string(),
        counts,
    })
}

/// Total variation distance `0.5 * sum |p_j - q_j|`.
pub fn total_variation(a: &Distribution, b: &Distribution) -> Result<f64, MeasurementError> {
    if a.len() != b.len() {
        return Err(MeasurementError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(0.5
        * a.probabilities()
            .iter()
            .zip(b.probabilities())
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>())
}

/// Which statistic the match verdict uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchStatistic {
    /// Total variation against the threshold `c * sqrt(d / M)`.
    TotalVariation,
    /// Pearson chi-square over the effective support, against the
    /// mean-plus-`c + 2`-sigma bound `df + (c+2) * sqrt(2 df)`.
    ChiSquare,
}

/// Outcome of matching a calculated distribution against sampled counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchVerdict {
    pub statistic: f64,
    pub threshold: f64,
    /// Effective support size `d` used in the threshold.
    pub effective_support: usize,
    pub pass: bool,
}

/// Matches the calculated distribution against measured counts.
///
/// With the default total-variation statistic the verdict passes when
/// `TV(calc, measured/M) <= c * sqrt(d / M)`, where `d` counts indices with
/// calculated probability above the support floor.
pub fn match_verdict(
    calculated: &Distribution,
    measured: &ShotRecord,
    constant: f64,
    statistic: MatchStatistic,
) -> Result<MatchVerdict, MeasurementError> {
    if measured.shots < SHOT_FLOOR {
        return Err(MeasurementError::ShotsBelowFloor {
            got: measured.shots,
            floor: SHOT_FLOOR,
        });
    }
    if let Some(&max_index) = measured.counts.keys().max() {
        if max_index >= calculated.len() {
            return Err(MeasurementError::DimensionMismatch {
                left: calculated.len(),
                right: max_index + 1,
            });
        }
    }
    let empirical = measured.to_distribution(calculated.len());
    let d = calculated.effective_support().max(1);
    let m = measured.shots as f64;

    match statistic {
        MatchStatistic::TotalVariation => {
            let tv = total_variation(calculated, &empirical)?;
            let threshold = constant * (d as f64 / m).sqrt();
            Ok(MatchVerdict {
                statistic: tv,
                threshold,
                effective_support: d,
                pass: tv <= threshold,
            })
        }
        MatchStatistic::ChiSquare => {
            // Pool everything below the support floor into one bin.
            let mut stat = 0.0f64;
            let mut pooled_expected = 0.0f64;
            let mut pooled_observed = 0.0f64;
            let mut bins = 0usize;
            for (j, &p) in calculated.probabilities().iter().enumerate() {
                let observed = empirical.probabilities()[j] * m;
                if p > SUPPORT_FLOOR {
                    let expected = p * m;
                    stat += (observed - expected).powi(2) / expected;
                    bins += 1;
                } else {
                    pooled_expected += p * m;
                    pooled_observed += observed;
                }
            }
            if pooled_expected > 0.0 {
                stat += (pooled_observed - pooled_expected).powi(2) / pooled_expected;
                bins += 1;
            }
            let df = (bins.saturating_sub(1)).max(1) as f64;
            let threshold = df + (constant + 2.0) * (2.0 * df).sqrt();
            Ok(MatchVerdict {
                statistic: stat,
                threshold,
                effective_support: d,
                pass: stat <= threshold,
            })
        }
    }
}
