//! Time-dependent Schrödinger integration along the adiabatic interpolation.
//!
//! The propagator is the norm-preserving Cayley (Crank-Nicolson) form with
//! the interpolation parameter sampled at the step midpoint:
//!
//! ```text
//! (I + i dt/2 H(s_mid)) psi' = (I - i dt/2 H(s_mid)) psi
//! ```
//!
//! so eigenphases advance as `e^{-i E t}` (hbar = 1). Each linear solve gets
//! one iterative-refinement pass, which keeps the cumulative norm drift well
//! below the 1e-9 budget over every tested schedule. The state is never
//! renormalized; norm drift is measured, not hidden.

use crate::fock::{
    default_degeneracy_tol, interpolate, spectral_decomposition, FockBasis, FockError, Operator,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Tolerance on `|norm - 1|` for states handed in or out.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("state has {got} amplitudes but the basis dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state norm {norm} is not within {tol:e} of 1")]
    NotNormalized { norm: f64, tol: f64 },
    #[error("cannot normalize a zero or non-finite vector")]
    ZeroState,
    #[error("schedule must make at least one step")]
    NoSteps,
    #[error("total time must be positive and finite, got {0}")]
    BadTotalTime(f64),
    #[error("schedule profile must start at 0, end at 1, and be nondecreasing")]
    BadProfile,
    #[error("operator dimension {operator} does not match state dimension {state}")]
    OperatorMismatch { operator: usize, state: usize },
    #[error("linear solve failed in the Cayley step {step}")]
    LinearSolveFailure { step: usize },
    #[error("non-finite amplitude detected after step {step}")]
    NonFinite { step: usize },
    #[error("norm drifted to {norm} after step {step}")]
    NormDrift { step: usize, norm: f64 },
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// A normalized state over the truncated basis.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    basis: FockBasis,
    amplitudes: DVector<Complex64>,
}

impl WaveFunction {
    /// Wraps an amplitude vector, requiring unit norm within [`NORM_TOL`].
    pub fn try_new(
        basis: FockBasis,
        amplitudes: DVector<Complex64>,
    ) -> Result<Self, EvolveError> {
        if amplitudes.len() != basis.dimension() {
            return Err(EvolveError::DimensionMismatch {
                expected: basis.dimension(),
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(EvolveError::NotNormalized {
                norm,
                tol: NORM_TOL,
            });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(
        basis: FockBasis,
        amplitudes: DVector<Complex64>,
    ) -> Result<Self, EvolveError> {
        if amplitudes.len() != basis.dimension() {
            return Err(EvolveError::DimensionMismatch {
                expected: basis.dimension(),
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(EvolveError::ZeroState);
        }
        Ok(Self {
            basis,
            amplitudes: amplitudes / Complex64::new(norm, 0.0),
        })
    }

    /// The basis state `|index>`.
    pub fn basis_state(basis: FockBasis, index: usize) -> Self {
        let mut amplitudes = DVector::zeros(basis.dimension());
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// Interpolation schedule: total time `T`, step count `M`, and the profile
/// mapping step boundaries to `s` in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Schedule {
    total_time: f64,
    steps: usize,
    profile: Profile,
}

#[derive(Debug, Clone)]
enum Profile {
    Linear,
    /// Sampled `s` values at the `M + 1` step boundaries.
    Custom(Vec<f64>),
}

impl Schedule {
    /// The default linear ramp `s = t / T`.
    pub fn linear(total_time: f64, steps: usize) -> Result<Self, EvolveError> {
        if steps == 0 {
            return Err(EvolveError::NoSteps);
        }
        if !(total_time.is_finite() && total_time > 0.0) {
            return Err(EvolveError::BadTotalTime(total_time));
        }
        Ok(Self {
            total_time,
            steps,
            profile: Profile::Linear,
        })
    }

    /// A custom profile sampled at the `points.len() - 1` step boundaries;
    /// must run from exactly 0 to exactly 1 and never decrease.
    pub fn custom(total_time: f64, points: Vec<f64>) -> Result<Self, EvolveError> {
        if points.len() < 2 {
            return Err(EvolveError::NoSteps);
        }
        if !(total_time.is_finite() && total_time > 0.0) {
            return Err(EvolveError::BadTotalTime(total_time));
        }
        let valid = points[0] == 0.0
            && *points.last().expect("nonempty") == 1.0
            && points.iter().all(|s| s.is_finite())
            && points.windows(2).all(|w| w[0] <= w[1]);
        if !valid {
            return Err(EvolveError::BadProfile);
        }
        Ok(Self {
            total_time,
            steps: points.len() - 1,
            profile: Profile::Custom(points),
        })
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.steps as f64
    }

    /// `s` at a step boundary, `0 <= step <= M`.
    pub fn s_at_boundary(&self, step: usize) -> f64 {
        debug_assert!(step <= self.steps);
        match &self.profile {
            Profile::Linear => step as f64 / self.steps as f64,
            Profile::Custom(points) => points[step],
        }
    }

    /// Midpoint `s` for the step from boundary `step` to `step + 1`.
    pub fn s_midpoint(&self, step: usize) -> f64 {
        0.5 * (self.s_at_boundary(step) + self.s_at_boundary(step + 1))
    }

    /// Default checkpoint stride of about one percent of the run.
    pub fn default_checkpoint_stride(&self) -> usize {
        (self.steps / 100).max(1)
    }
}

/// State snapshot along the evolution.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub step: usize,
    pub s: f64,
    pub state: WaveFunction,
    /// Squared projection onto the instantaneous ground group of `H(s)`.
    pub ground_population: f64,
    /// `<psi| H(s) |psi>`.
    pub energy_expectation: f64,
    /// Raw norm of the evolving vector at this step.
    pub norm: f64,
}

/// Full record of one evolution run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub checkpoints: Vec<Checkpoint>,
    pub final_state: WaveFunction,
    /// Largest `|norm - 1|` seen at any step boundary.
    pub max_norm_deviation: f64,
    /// Largest single-step change of the norm.
    pub max_step_norm_change: f64,
}

/// Integrates the Schrödinger equation from `initial` along
/// `H(s) = (1-s) H_I + s H_P` under the given schedule.
///
/// With `checkpoint_stride = Some(n)` a checkpoint is recorded at step 0,
/// every `n`-th step, and the final step; `None` records none. Checkpoints
/// cost a dense eigensolve each for the instantaneous ground population.
pub fn evolve(
    initial: &WaveFunction,
    h_i: &Operator,
    h_p: &Operator,
    schedule: &Schedule,
    checkpoint_stride: Option<usize>,
) -> Result<Trajectory, EvolveError> {
    let d = initial.dim();
    for op in [h_i, h_p] {
        if op.dim() != d {
            return Err(EvolveError::OperatorMismatch {
                operator: op.dim(),
                state: d,
            });
        }
    }
    let norm0 = initial.norm();
    if (norm0 - 1.0).abs() > NORM_TOL {
        return Err(EvolveError::NotNormalized {
            norm: norm0,
            tol: NORM_TOL,
        });
    }

    let h_i_dense = h_i.to_dense();
    let difference = h_p.to_dense() - &h_i_dense;
    let dt = schedule.dt();
    let half_step = Complex64::new(0.0, 0.5 * dt);
    let identity = DMatrix::<Complex64>::identity(d, d);

    let stride = checkpoint_stride.map(|s| s.max(1));
    let mut checkpoints = Vec::new();
    let mut psi = initial.amplitudes().clone();
    let mut max_norm_deviation = (norm0 - 1.0).abs();
    let mut max_step_norm_change = 0.0f64;
    let mut previous_norm = norm0;

    let record = |step: usize,
                  psi: &DVector<Complex64>,
                  checkpoints: &mut Vec<Checkpoint>|
     -> Result<(), EvolveError> {
        let s = schedule.s_at_boundary(step);
        let h_s = interpolate(h_i, h_p, s)?;
        let spectral = spectral_decomposition(&h_s, default_degeneracy_tol(&h_s))?;
        let ground_population = spectral.group_population(spectral.ground_group(), psi);
        let energy_expectation = h_s.expectation(psi);
        checkpoints.push(Checkpoint {
            step,
            s,
            state: WaveFunction::try_new(*initial.basis(), psi.clone())?,
            ground_population,
            energy_expectation,
            norm: psi.norm(),
        });
        Ok(())
    };

    if stride.is_some() {
        record(0, &psi, &mut checkpoints)?;
    }

    for step in 0..schedule.steps() {
        let s_mid = schedule.s_midpoint(step);
        let h_mid = &h_i_dense + &difference * Complex64::new(s_mid, 0.0);
        let implicit = &identity + &h_mid * half_step;
        let rhs = &psi - (&h_mid * &psi) * half_step;
        let lu = implicit.clone().lu();
        let mut next = lu
            .solve(&rhs)
            .ok_or(EvolveError::LinearSolveFailure { step })?;
        // one refinement pass against the unfactored matrix
        let residual = &rhs - &implicit * &next;
        if let Some(correction) = lu.solve(&residual) {
            next += correction;
        }
        if next.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(EvolveError::NonFinite { step });
        }
        let norm = next.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(EvolveError::NormDrift { step, norm });
        }
        max_norm_deviation = max_norm_deviation.max((norm - 1.0).abs());
        max_step_norm_change = max_step_norm_change.max((norm - previous_norm).abs());
        previous_norm = norm;
        psi = next;

        let boundary = step + 1;
        if let Some(n) = stride {
            if boundary % n == 0 || boundary == schedule.steps() {
                record(boundary, &psi, &mut checkpoints)?;
            }
        }
    }

    Ok(Trajectory {
        checkpoints,
        final_state: WaveFunction::try_new(*initial.basis(), psi)?,
        max_norm_deviation,
        max_step_norm_change,
    })
}

/// Squared projection of a state onto the (possibly degenerate) ground
/// eigenspace of `H(s)`.
pub fn instantaneous_ground_population(
    state: &WaveFunction,
    h_i: &Operator,
    h_p: &Operator,
    s: f64,
) -> Result<f64, EvolveError> {
    let h_s = interpolate(h_i, h_p, s)?;
    if h_s.dim() != state.dim() {
        return Err(EvolveError::OperatorMismatch {
            operator: h_s.dim(),
            state: state.dim(),
        });
    }
    let spectral = spectral_decomposition(&h_s, default_degeneracy_tol(&h_s))?;
    Ok(spectral.group_population(spectral.ground_group(), state.amplitudes()))
}
