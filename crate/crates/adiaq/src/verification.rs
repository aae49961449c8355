//! Ground-state identification over a sweep of evolution times, and the
//! resulting solvability decision with exact witnesses.
//!
//! For each evolution time the protocol evolves the truncated ground state of
//! `H_I` into a candidate final state, computes its Born distribution, samples
//! seeded shots from it, and matches calculated against measured. The
//! candidate ground space at one time is the set of sampled indices sharing
//! the minimal problem-Hamiltonian diagonal; it counts as dominant when its
//! combined sampled probability exceeds `theta`. The ground space is declared
//! identified when the match verdict passes and the candidate set (and its
//! energy) is stable across the two largest evolution times.
//!
//! A `NO_SOLUTION` decision is always cutoff-qualified: a truncated simulation
//! can only ever rule out zeros inside the box `[0, N]^k`.

use crate::diophantine::{DiophantineError, EvaluationPoint, Polynomial};
use crate::evolution::{evolve, EvolveError, Schedule, WaveFunction};
use crate::fock::{
    build_initial_hamiltonian, build_problem_hamiltonian, default_degeneracy_tol,
    spectral_decomposition_guarded, FockBasis, FockError, DEFAULT_DENSE_SOLVER_GUARD,
    DEFAULT_DIMENSION_GUARD,
};
use crate::measurement::{
    born_distribution, match_verdict, sample_distribution, MatchStatistic, MeasurementError,
    ShotRecord, SHOT_FLOOR,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("witness {witness} failed exact substitution; this is a protocol bug")]
    WitnessSubstitutionFailed { witness: String },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    Diophantine(#[from] DiophantineError),
}

impl VerifyError {
    /// True when the failure is a dimension or solver guard, which `decide`
    /// reports as an `INCONCLUSIVE(guard-exceeded)` outcome instead of an
    /// error.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            VerifyError::Fock(FockError::DimensionGuard { .. })
                | VerifyError::Fock(FockError::SolverGuard { .. })
                | VerifyError::Evolve(EvolveError::Fock(FockError::SolverGuard { .. }))
        )
    }
}

/// Free parameters of the identification protocol.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub polynomial: Polynomial,
    pub cutoff: u32,
    /// Displacement per mode for the initial Hamiltonian.
    pub alpha: Vec<Complex64>,
    /// Evolution times, strictly increasing.
    pub t_list: Vec<f64>,
    pub steps_per_unit_time: f64,
    pub shots: u64,
    pub seed: u64,
    /// Dominance threshold on the combined sampled probability.
    pub theta: f64,
    pub match_constant: f64,
    pub match_statistic: MatchStatistic,
    pub dimension_guard: usize,
    pub dense_solver_guard: usize,
}

impl RunConfig {
    pub const DEFAULT_T_MAX: f64 = 128.0;
    pub const DEFAULT_STEPS_PER_UNIT_TIME: f64 = 40.0;
    pub const DEFAULT_SHOTS: u64 = 100_000;
    pub const DEFAULT_SEED: u64 = 42;
    pub const DEFAULT_THETA: f64 = 0.5;
    pub const DEFAULT_MATCH_CONSTANT: f64 = 2.0;

    /// Defaults: unit displacement, doubling sweep to 128, 1e5 shots,
    /// seed 42, theta 1/2, total-variation matching with c = 2.
    pub fn new(polynomial: Polynomial, cutoff: u32) -> Self {
        let modes = polynomial.num_variables();
        Self {
            polynomial,
            cutoff,
            alpha: vec![Complex64::new(1.0, 0.0); modes],
            t_list: Self::doubling_t_list(Self::DEFAULT_T_MAX),
            steps_per_unit_time: Self::DEFAULT_STEPS_PER_UNIT_TIME,
            shots: Self::DEFAULT_SHOTS,
            seed: Self::DEFAULT_SEED,
            theta: Self::DEFAULT_THETA,
            match_constant: Self::DEFAULT_MATCH_CONSTANT,
            match_statistic: MatchStatistic::TotalVariation,
            dimension_guard: DEFAULT_DIMENSION_GUARD,
            dense_solver_guard: DEFAULT_DENSE_SOLVER_GUARD,
        }
    }

    /// The sweep `{1, 2, 4, ..., t_max}`, capped at `t_max`.
    pub fn doubling_t_list(t_max: f64) -> Vec<f64> {
        let mut list = Vec::new();
        let mut t = 1.0;
        while t < t_max {
            list.push(t);
            t *= 2.0;
        }
        list.push(t_max);
        list
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        let fail = |message: &str| Err(VerifyError::InvalidConfig(message.into()));
        if self.alpha.len() != self.polynomial.num_variables() {
            return fail("alpha must have one entry per variable");
        }
        if self.t_list.is_empty() {
            return fail("t_list must not be empty");
        }
        if !self
            .t_list
            .iter()
            .all(|t| t.is_finite() && *t > 0.0)
        {
            return fail("evolution times must be positive and finite");
        }
        if !self.t_list.windows(2).all(|w| w[0] < w[1]) {
            return fail("t_list must be strictly increasing");
        }
        if !(self.steps_per_unit_time.is_finite() && self.steps_per_unit_time > 0.0) {
            return fail("steps_per_unit_time must be positive");
        }
        if self.shots < SHOT_FLOOR {
            return fail("shots must be at least 100");
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return fail("theta must lie strictly between 0 and 1");
        }
        if !(self.match_constant.is_finite() && self.match_constant > 0.0) {
            return fail("match constant must be positive");
        }
        Ok(())
    }

    /// Step count for one evolution time.
    pub fn steps_for(&self, evolution_time: f64) -> usize {
        (self.steps_per_unit_time * evolution_time).ceil().max(1.0) as usize
    }
}

/// Fixed per-run seed derivation: splitmix64 of the base seed XOR the
/// IEEE-754 bits of the evolution time.
pub fn seed_for_time(seed: u64, evolution_time: f64) -> u64 {
    splitmix64(seed ^ evolution_time.to_bits())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Machine-readable reason an identification stayed inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReasonCode {
    #[serde(rename = "match-failed")]
    MatchFailed,
    #[serde(rename = "not-dominant")]
    NotDominant,
    #[serde(rename = "unstable-across-T")]
    UnstableAcrossT,
    #[serde(rename = "guard-exceeded")]
    GuardExceeded,
}

/// The solvability decision, scoped to the truncation box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Decision {
    #[serde(rename = "HAS_SOLUTION")]
    HasSolution { witnesses: Vec<Vec<u32>> },
    #[serde(rename = "NO_SOLUTION_WITHIN_CUTOFF")]
    NoSolutionWithinCutoff { min_value: u64, argmin: Vec<Vec<u32>> },
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive { reason: ReasonCode },
}

/// Record of one evolution time in the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub evolution_time: f64,
    pub steps: usize,
    /// Per-run seed derived via [`seed_for_time`].
    pub seed: u64,
    /// Calculated (Born) final distribution over basis indices.
    pub calculated: Vec<f64>,
    pub shot_record: ShotRecord,
    pub match_statistic: f64,
    pub match_threshold: f64,
    pub match_passed: bool,
    /// Sampled indices sharing the minimal problem-Hamiltonian diagonal.
    pub dominant_indices: Vec<usize>,
    /// Combined sampled probability of the dominant indices.
    pub dominant_probability: f64,
    /// The shared diagonal value of the dominant indices (exact integer).
    pub dominant_energy: u64,
    /// Whether `dominant_probability` exceeds theta.
    pub is_dominant: bool,
    pub max_norm_deviation: f64,
}

/// Full output of the identification protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Wall-clock time of the run; the single nondeterministic field.
    pub timestamp: String,
    pub equation: String,
    pub variables: Vec<String>,
    pub cutoff: u32,
    pub basis_dimension: u64,
    pub t_list: Vec<f64>,
    pub steps_per_unit_time: f64,
    pub shots: u64,
    pub seed: u64,
    pub theta: f64,
    pub match_constant: f64,
    pub runs: Vec<RunRecord>,
    /// Basis indices of the identified ground space, or null.
    pub identified_ground_space: Option<Vec<usize>>,
    /// The same ground space as occupation tuples, or null.
    pub identified_ground_tuples: Option<Vec<Vec<u32>>>,
    pub min_energy_observed: Option<u64>,
    pub decision: Decision,
    /// Witness points for HAS_SOLUTION, re-verified by exact substitution.
    pub witnesses: Vec<Vec<u64>>,
    pub caveats: Vec<String>,
}

fn timestamp_now() -> String {
    chrono::Utc::now().to_rfc3339()
}

/// Runs the full protocol: sweep the evolution times, identify the ground
/// space, and attach the decision.
pub fn identify_ground_state(config: &RunConfig) -> Result<VerificationReport, VerifyError> {
    config.validate()?;
    let basis = FockBasis::with_guard(
        config.polynomial.num_variables(),
        config.cutoff,
        config.dimension_guard,
    )?;
    let h_p = build_problem_hamiltonian(&config.polynomial, &basis)?;
    let h_i = build_initial_hamiltonian(&basis, &config.alpha)?;
    let hp_diag = h_p
        .diagonal_entries()
        .expect("problem Hamiltonian is diagonal")
        .clone();

    let spectral_i = spectral_decomposition_guarded(
        &h_i,
        default_degeneracy_tol(&h_i),
        config.dense_solver_guard,
    )?;
    let initial =
        WaveFunction::normalized(basis, spectral_i.eigenvectors.column(0).clone_owned())?;

    let mut runs: Vec<RunRecord> = Vec::with_capacity(config.t_list.len());
    for &evolution_time in &config.t_list {
        let steps = config.steps_for(evolution_time);
        let schedule = Schedule::linear(evolution_time, steps)?;
        let trajectory = evolve(&initial, &h_i, &h_p, &schedule, None)?;
        let calculated = born_distribution(&trajectory.final_state);
        let run_seed = seed_for_time(config.seed, evolution_time);
        let shot_record = sample_distribution(&calculated, config.shots, run_seed)?;
        let verdict = match_verdict(
            &calculated,
            &shot_record,
            config.match_constant,
            config.match_statistic,
        )?;

        let dominant_energy = shot_record
            .counts
            .keys()
            .map(|&j| hp_diag[j])
            .fold(f64::INFINITY, f64::min);
        let dominant_indices: Vec<usize> = shot_record
            .counts
            .keys()
            .copied()
            .filter(|&j| hp_diag[j] == dominant_energy)
            .collect();
        let dominant_probability = dominant_indices
            .iter()
            .map(|j| shot_record.counts[j] as f64)
            .sum::<f64>()
            / config.shots as f64;

        runs.push(RunRecord {
            evolution_time,
            steps,
            seed: run_seed,
            calculated: calculated.probabilities().to_vec(),
            shot_record,
            match_statistic: verdict.statistic,
            match_threshold: verdict.threshold,
            match_passed: verdict.pass,
            dominant_indices,
            dominant_probability,
            dominant_energy: dominant_energy as u64,
            is_dominant: dominant_probability > config.theta,
            max_norm_deviation: trajectory.max_norm_deviation,
        });
    }

    // Identification looks at the two largest evolution times (or the single
    // run when the sweep has only one).
    let tail: Vec<&RunRecord> = runs.iter().rev().take(2).collect();
    let all_match = tail.iter().all(|r| r.match_passed);
    let all_dominant = tail.iter().all(|r| r.is_dominant);
    let stable = tail
        .iter()
        .all(|r| {
            r.dominant_indices == tail[0].dominant_indices
                && r.dominant_energy == tail[0].dominant_energy
        });
    let identified = all_match && all_dominant && stable;

    let mut identified_ground_space = None;
    let mut identified_ground_tuples = None;
    let mut min_energy_observed = None;
    let mut witnesses: Vec<Vec<u64>> = Vec::new();
    let decision = if identified {
        let indices = tail[0].dominant_indices.clone();
        let tuples: Vec<Vec<u32>> = indices.iter().map(|&j| basis.tuple_of(j)).collect();
        let min_energy = tail[0].dominant_energy;
        identified_ground_space = Some(indices);
        identified_ground_tuples = Some(tuples.clone());
        min_energy_observed = Some(min_energy);
        if min_energy == 0 {
            for tuple in &tuples {
                let point = EvaluationPoint::from_occupations(tuple);
                let value = config.polynomial.evaluate(&point)?;
                if value != 0.into() {
                    return Err(VerifyError::WitnessSubstitutionFailed {
                        witness: point.to_string(),
                    });
                }
                witnesses.push(point.values().to_vec());
            }
            Decision::HasSolution { witnesses: tuples }
        } else {
            Decision::NoSolutionWithinCutoff {
                min_value: min_energy,
                argmin: tuples,
            }
        }
    } else {
        let reason = if !all_match {
            ReasonCode::MatchFailed
        } else if !all_dominant {
            ReasonCode::NotDominant
        } else {
            ReasonCode::UnstableAcrossT
        };
        Decision::Inconclusive { reason }
    };

    let mut caveats = Vec::new();
    if matches!(decision, Decision::NoSolutionWithinCutoff { .. }) {
        caveats.push("cutoff-limited".to_string());
    }
    if runs.iter().any(|r| !r.match_passed) {
        caveats.push("match-failed".to_string());
    }
    if runs.iter().any(|r| !r.is_dominant) {
        caveats.push("not-dominant".to_string());
    }

    Ok(VerificationReport {
        timestamp: timestamp_now(),
        equation: config.polynomial.to_string(),
        variables: config.polynomial.variables().to_vec(),
        cutoff: config.cutoff,
        basis_dimension: basis.dimension() as u64,
        t_list: config.t_list.clone(),
        steps_per_unit_time: config.steps_per_unit_time,
        shots: config.shots,
        seed: config.seed,
        theta: config.theta,
        match_constant: config.match_constant,
        runs,
        identified_ground_space,
        identified_ground_tuples,
        min_energy_observed,
        decision,
        witnesses,
        caveats,
    })
}

/// Report substitute for runs refused by a guard.
pub fn guard_exceeded_report(config: &RunConfig, error: &VerifyError) -> VerificationReport {
    let side = u64::from(config.cutoff) + 1;
    let dimension = (0..config.polynomial.num_variables())
        .try_fold(1u64, |acc, _| acc.checked_mul(side))
        .unwrap_or(u64::MAX);
    VerificationReport {
        timestamp: timestamp_now(),
        equation: config.polynomial.to_string(),
        variables: config.polynomial.variables().to_vec(),
        cutoff: config.cutoff,
        basis_dimension: dimension,
        t_list: config.t_list.clone(),
        steps_per_unit_time: config.steps_per_unit_time,
        shots: config.shots,
        seed: config.seed,
        theta: config.theta,
        match_constant: config.match_constant,
        runs: Vec::new(),
        identified_ground_space: None,
        identified_ground_tuples: None,
        min_energy_observed: None,
        decision: Decision::Inconclusive {
            reason: ReasonCode::GuardExceeded,
        },
        witnesses: Vec::new(),
        caveats: vec![format!("guard-exceeded: {error}")],
    }
}

/// Runs the protocol and extracts the decision; guard refusals come back as
/// `INCONCLUSIVE(guard-exceeded)` rather than errors.
pub fn decide(config: &RunConfig) -> Result<Decision, VerifyError> {
    match identify_ground_state(config) {
        Ok(report) => Ok(report.decision),
        Err(error) if error.is_guard() => Ok(Decision::Inconclusive {
            reason: ReasonCode::GuardExceeded,
        }),
        Err(error) => Err(error),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::parse_polynomial;

    fn config(equation: &str, cutoff: u32) -> RunConfig {
        RunConfig::new(parse_polynomial(equation).unwrap(), cutoff)
    }

    #[test]
    fn doubling_sweep_shapes() {
        assert_eq!(
            RunConfig::doubling_t_list(128.0),
            vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0]
        );
        assert_eq!(
            RunConfig::doubling_t_list(100.0),
            vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 100.0]
        );
        assert_eq!(RunConfig::doubling_t_list(0.5), vec![0.5]);
    }

    #[test]
    fn seed_derivation_is_stable_and_spread() {
        assert_eq!(seed_for_time(42, 1.0), seed_for_time(42, 1.0));
        assert_ne!(seed_for_time(42, 1.0), seed_for_time(42, 2.0));
        assert_ne!(seed_for_time(42, 1.0), seed_for_time(43, 1.0));
    }

    #[test]
    fn config_validation() {
        let mut bad = config("x - 1", 3);
        bad.theta = 1.0;
        assert!(matches!(bad.validate(), Err(VerifyError::InvalidConfig(_))));

        let mut bad = config("x - 1", 3);
        bad.t_list = vec![2.0, 2.0];
        assert!(bad.validate().is_err());

        let mut bad = config("x - 1", 3);
        bad.shots = 10;
        assert!(bad.validate().is_err());

        let mut bad = config("x - 1", 3);
        bad.alpha = vec![];
        assert!(bad.validate().is_err());

        assert!(config("x - 1", 3).validate().is_ok());
    }

    #[test]
    fn identifies_degenerate_line_solutions() {
        let cfg = config("x + y - 2", 2);
        let report = identify_ground_state(&cfg).unwrap();
        let basis = FockBasis::new(2, 2).unwrap();
        let expected: Vec<usize> = [[0u32, 2], [1, 1], [2, 0]]
            .iter()
            .map(|t| basis.index_of(t).unwrap())
            .collect();
        assert_eq!(report.identified_ground_space.as_deref(), Some(&expected[..]));
        assert_eq!(report.min_energy_observed, Some(0));
        match &report.decision {
            Decision::HasSolution { witnesses } => {
                assert_eq!(
                    witnesses,
                    &vec![vec![0, 2], vec![1, 1], vec![2, 0]]
                );
            }
            other => panic!("unexpected decision {other:?}"),
        }
        assert_eq!(report.witnesses.len(), 3);
    }

    #[test]
    fn reports_cutoff_qualified_no_solution() {
        let cfg = config("x^2 + y^2 - 3", 4);
        let report = identify_ground_state(&cfg).unwrap();
        match &report.decision {
            Decision::NoSolutionWithinCutoff { min_value, argmin } => {
                assert_eq!(*min_value, 1);
                assert_eq!(argmin, &vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
            }
            other => panic!("unexpected decision {other:?}"),
        }
        assert!(report.caveats.contains(&"cutoff-limited".to_string()));
    }

    #[test]
    fn finds_pythagorean_witnesses() {
        // The zeros sit at box corners remote from the coherent start, so
        // the default sweep to T=128 stalls near ground population 0.41;
        // doubling out to 1024 concentrates past theta and identifies.
        let mut cfg = config("x^2 + y^2 - 25", 5);
        cfg.t_list = RunConfig::doubling_t_list(1024.0);
        let decision = decide(&cfg).unwrap();
        match decision {
            Decision::HasSolution { witnesses } => {
                assert!(witnesses.contains(&vec![3, 4]));
                assert!(witnesses.contains(&vec![0, 5]));
                assert_eq!(witnesses.len(), 4);
            }
            other => panic!("unexpected decision {other:?}"),
        }
    }

    #[test]
    fn diabatic_single_time_is_inconclusive() {
        let mut cfg = config("x + y - 2", 2);
        cfg.t_list = vec![1e-3];
        let decision = decide(&cfg).unwrap();
        assert_eq!(
            decision,
            Decision::Inconclusive {
                reason: ReasonCode::NotDominant
            }
        );
    }

    #[test]
    fn strict_theta_with_few_shots_is_not_dominant() {
        // With 100 shots and theta = 0.99, the candidate is the whole
        // threefold-degenerate subspace (never a singleton), yet stray shots
        // keep the combined empirical probability at or below 0.99. The
        // sweep stops at T=4 where the true population is ~0.85, so the
        // outcome does not hinge on a lucky 100-out-of-100 draw.
        let mut cfg = config("x + y - 2", 2);
        cfg.shots = 100;
        cfg.theta = 0.99;
        cfg.t_list = vec![1.0, 2.0, 4.0];
        let report = identify_ground_state(&cfg).unwrap();
        assert_eq!(
            report.decision,
            Decision::Inconclusive {
                reason: ReasonCode::NotDominant
            }
        );
        assert!(report.caveats.contains(&"not-dominant".to_string()));
        let basis = FockBasis::new(2, 2).unwrap();
        let triple: Vec<usize> = [[0u32, 2], [1, 1], [2, 0]]
            .iter()
            .map(|t| basis.index_of(t).unwrap())
            .collect();
        let last = report.runs.last().unwrap();
        assert_eq!(last.dominant_indices, triple);
        assert_eq!(last.dominant_energy, 0);
    }

    #[test]
    fn guard_exceeded_becomes_inconclusive() {
        let cfg = config("x + y - 2", 511);
        let err = identify_ground_state(&cfg).unwrap_err();
        assert!(err.is_guard());
        let decision = decide(&cfg).unwrap();
        assert_eq!(
            decision,
            Decision::Inconclusive {
                reason: ReasonCode::GuardExceeded
            }
        );
        let report = guard_exceeded_report(&cfg, &err);
        assert!(report.runs.is_empty());
        assert_eq!(report.basis_dimension, 512 * 512);
    }

    #[test]
    fn report_round_trips_through_json() {
        let mut cfg = config("x - 1", 2);
        cfg.t_list = vec![1.0, 2.0];
        cfg.shots = 1000;
        let report = identify_ground_state(&cfg).unwrap();
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.decision, report.decision);
        assert_eq!(back.runs.len(), report.runs.len());
        assert_eq!(back.equation, "x - 1");
    }
}
