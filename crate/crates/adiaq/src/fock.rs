//! Truncated multi-mode occupation-number basis and the operators built on
//! it: bosonic ladder matrices, the diagonal problem Hamiltonian encoding the
//! squared polynomial, the displaced-number initial Hamiltonian, their
//! interpolation, and dense Hermitian spectral decomposition.
//!
//! Truncation is a per-mode occupation box: each mode holds `0..=N` quanta,
//! so the problem Hamiltonian's spectrum matches the brute-force oracle on
//! `[0, N]^k` exactly.

use crate::diophantine::{DiophantineError, EvaluationPoint, Polynomial};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Default cap on the basis dimension `(N+1)^k`.
pub const DEFAULT_DIMENSION_GUARD: usize = 1 << 16;
/// Default cap on the dimension accepted by the dense eigensolver.
pub const DEFAULT_DENSE_SOLVER_GUARD: usize = 4096;
/// Entrywise bound under which a matrix counts as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Largest diagonal entry representable exactly as a float.
const FLOAT_SAFE_RANGE: u64 = 1 << 53;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("basis must have at least one mode")]
    NoModes,
    #[error("basis dimension {dimension} exceeds the guard of {guard}")]
    DimensionGuard { dimension: u128, guard: usize },
    #[error("mode {mode} out of range for a {modes}-mode basis")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("occupation tuple has length {got}, expected {expected}")]
    TupleLength { expected: usize, got: usize },
    #[error("occupation {occupation} exceeds the cutoff {cutoff}")]
    OccupationOutOfRange { occupation: u32, cutoff: u32 },
    #[error("expected {expected} entries, got {got}")]
    ModeCountMismatch { expected: usize, got: usize },
    #[error("operator dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian within {tol:e}")]
    NotHermitian { tol: f64 },
    #[error("alpha must be finite")]
    NonFiniteAlpha,
    #[error("interpolation parameter s={0} outside [0, 1]")]
    SOutOfRange(f64),
    #[error(
        "diagonal entry {value} at basis index {index} exceeds 2^53 and cannot \
         be stored exactly as a float; reduce the cutoff"
    )]
    EntryExceedsSafeRange { index: usize, value: String },
    #[error("dimension {dimension} exceeds the dense eigensolver guard of {guard}")]
    SolverGuard { dimension: usize, guard: usize },
    #[error(transparent)]
    Diophantine(#[from] DiophantineError),
}

/// Truncated occupation-number basis: `k` modes, each holding `0..=N` quanta.
///
/// Indices run row-major over tuples with the first mode slowest, so
/// `index = n1*(N+1)^(k-1) + ... + nk`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    modes: usize,
    cutoff: u32,
    dimension: usize,
}

impl FockBasis {
    pub fn new(modes: usize, cutoff: u32) -> Result<Self, FockError> {
        Self::with_guard(modes, cutoff, DEFAULT_DIMENSION_GUARD)
    }

    pub fn with_guard(modes: usize, cutoff: u32, guard: usize) -> Result<Self, FockError> {
        if modes == 0 {
            return Err(FockError::NoModes);
        }
        let side = u128::from(cutoff) + 1;
        let dimension = side
            .checked_pow(modes as u32)
            .ok_or(FockError::DimensionGuard {
                dimension: u128::MAX,
                guard,
            })?;
        if dimension > guard as u128 {
            return Err(FockError::DimensionGuard { dimension, guard });
        }
        Ok(Self {
            modes,
            cutoff,
            dimension: dimension as usize,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Basis index of an occupation tuple.
    pub fn index_of(&self, tuple: &[u32]) -> Result<usize, FockError> {
        if tuple.len() != self.modes {
            return Err(FockError::TupleLength {
                expected: self.modes,
                got: tuple.len(),
            });
        }
        let side = self.cutoff as usize + 1;
        let mut index = 0usize;
        for &n in tuple {
            if n > self.cutoff {
                return Err(FockError::OccupationOutOfRange {
                    occupation: n,
                    cutoff: self.cutoff,
                });
            }
            index = index * side + n as usize;
        }
        Ok(index)
    }

    /// Occupation tuple at a basis index; inverse of [`index_of`].
    ///
    /// [`index_of`]: FockBasis::index_of
    pub fn tuple_of(&self, index: usize) -> Vec<u32> {
        assert!(index < self.dimension, "basis index out of range");
        let side = self.cutoff as usize + 1;
        let mut tuple = vec![0u32; self.modes];
        let mut rest = index;
        for slot in tuple.iter_mut().rev() {
            *slot = (rest % side) as u32;
            rest /= side;
        }
        tuple
    }

    /// All occupation tuples in index order.
    pub fn tuples(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        (0..self.dimension).map(|i| self.tuple_of(i))
    }
}

/// A finite operator over the truncated basis. Diagonal operators are stored
/// as real vectors; everything else is a dense complex matrix. The Hermitian
/// flag is only set by constructors that verify (or guarantee) it.
#[derive(Debug, Clone)]
pub struct Operator {
    storage: Storage,
    hermitian: bool,
}

#[derive(Debug, Clone)]
enum Storage {
    Diagonal(DVector<f64>),
    Dense(DMatrix<Complex64>),
}

impl Operator {
    /// Diagonal operator with exactly real entries; Hermitian by form.
    pub fn diagonal(entries: DVector<f64>) -> Self {
        Self {
            storage: Storage::Diagonal(entries),
            hermitian: true,
        }
    }

    /// General dense operator; not flagged Hermitian.
    pub fn dense(matrix: DMatrix<Complex64>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "operator must be square");
        Self {
            storage: Storage::Dense(matrix),
            hermitian: false,
        }
    }

    /// Dense operator checked against the entrywise Hermiticity bound.
    pub fn dense_hermitian(matrix: DMatrix<Complex64>) -> Result<Self, FockError> {
        assert_eq!(matrix.nrows(), matrix.ncols(), "operator must be square");
        for i in 0..matrix.nrows() {
            for j in i..matrix.ncols() {
                let delta = matrix[(i, j)] - matrix[(j, i)].conj();
                if delta.norm() > HERMITICITY_TOL {
                    return Err(FockError::NotHermitian {
                        tol: HERMITICITY_TOL,
                    });
                }
            }
        }
        Ok(Self {
            storage: Storage::Dense(matrix),
            hermitian: true,
        })
    }

    pub fn dim(&self) -> usize {
        match &self.storage {
            Storage::Diagonal(d) => d.len(),
            Storage::Dense(m) => m.nrows(),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.storage, Storage::Diagonal(_))
    }

    /// Real diagonal entries, if this operator is stored diagonally.
    pub fn diagonal_entries(&self) -> Option<&DVector<f64>> {
        match &self.storage {
            Storage::Diagonal(d) => Some(d),
            Storage::Dense(_) => None,
        }
    }

    /// Materializes the operator as a dense complex matrix.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match &self.storage {
            Storage::Diagonal(d) => {
                DMatrix::from_diagonal(&d.map(|x| Complex64::new(x, 0.0)))
            }
            Storage::Dense(m) => m.clone(),
        }
    }

    /// Applies the operator to a state vector.
    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        match &self.storage {
            Storage::Diagonal(d) => {
                DVector::from_iterator(d.len(), d.iter().zip(v.iter()).map(|(&e, &a)| e * a))
            }
            Storage::Dense(m) => m * v,
        }
    }

    /// `<v|A|v>` for a Hermitian operator; the real part of the quadratic form.
    pub fn expectation(&self, v: &DVector<Complex64>) -> f64 {
        match &self.storage {
            Storage::Diagonal(d) => d
                .iter()
                .zip(v.iter())
                .map(|(&e, a)| e * a.norm_sqr())
                .sum(),
            Storage::Dense(m) => v.dotc(&(m * v)).re,
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs_entry(&self) -> f64 {
        match &self.storage {
            Storage::Diagonal(d) => d.iter().fold(0.0, |acc, &x| acc.max(x.abs())),
            Storage::Dense(m) => m.iter().fold(0.0, |acc, x| acc.max(x.norm())),
        }
    }
}

/// Bosonic annihilation operator for one mode on the truncated basis:
/// `<.., n_i - 1, ..| a_i |.., n_i, ..> = sqrt(n_i)`, transitions out of the
/// box dropped. The result is a general (non-Hermitian) matrix carrier.
pub fn annihilation_operator(basis: &FockBasis, mode: usize) -> Result<Operator, FockError> {
    if mode >= basis.modes() {
        return Err(FockError::ModeOutOfRange {
            mode,
            modes: basis.modes(),
        });
    }
    let d = basis.dimension();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for col in 0..d {
        let mut tuple = basis.tuple_of(col);
        let n = tuple[mode];
        if n > 0 {
            tuple[mode] = n - 1;
            let row = basis.index_of(&tuple).expect("lowered tuple stays in box");
            m[(row, col)] = Complex64::new(f64::from(n).sqrt(), 0.0);
        }
    }
    Ok(Operator::dense(m))
}

/// Diagonal number operator for one mode: eigenvalue `n_i` on each tuple.
pub fn number_operator(basis: &FockBasis, mode: usize) -> Result<Operator, FockError> {
    if mode >= basis.modes() {
        return Err(FockError::ModeOutOfRange {
            mode,
            modes: basis.modes(),
        });
    }
    let entries = DVector::from_iterator(
        basis.dimension(),
        basis.tuples().map(|t| f64::from(t[mode])),
    );
    Ok(Operator::diagonal(entries))
}

/// Diagonal problem Hamiltonian: entry `D(n1,...,nk)^2` at each basis tuple.
///
/// Entries are exact integers stored as floats; any entry above 2^53 is
/// rejected so the stored spectrum stays exact.
pub fn build_problem_hamiltonian(
    polynomial: &Polynomial,
    basis: &FockBasis,
) -> Result<Operator, FockError> {
    if polynomial.num_variables() != basis.modes() {
        return Err(FockError::ModeCountMismatch {
            expected: basis.modes(),
            got: polynomial.num_variables(),
        });
    }
    let mut entries = DVector::zeros(basis.dimension());
    for (index, tuple) in basis.tuples().enumerate() {
        let value =
            polynomial.evaluate_squared(&EvaluationPoint::from_occupations(&tuple))?;
        let as_u64 = u64::try_from(&value).ok().filter(|&v| v <= FLOAT_SAFE_RANGE);
        match as_u64 {
            Some(v) => entries[index] = v as f64,
            None => {
                return Err(FockError::EntryExceedsSafeRange {
                    index,
                    value: value.to_string(),
                });
            }
        }
    }
    Ok(Operator::diagonal(entries))
}

/// Initial Hamiltonian with a known ground state: the sum over modes of
/// `(a_i^dag - conj(alpha_i)) (a_i - alpha_i)`, assembled from the truncated
/// ladder matrices. Its untruncated ground state is the product of coherent
/// states `|alpha_i>`, which overlaps every number state.
pub fn build_initial_hamiltonian(
    basis: &FockBasis,
    alpha: &[Complex64],
) -> Result<Operator, FockError> {
    if alpha.len() != basis.modes() {
        return Err(FockError::ModeCountMismatch {
            expected: basis.modes(),
            got: alpha.len(),
        });
    }
    if alpha.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(FockError::NonFiniteAlpha);
    }
    for (mode, a) in alpha.iter().enumerate() {
        if a.norm_sqr() > f64::from(basis.cutoff()) / 2.0 {
            log::warn!(
                "|alpha|^2 = {:.3} for mode {mode} is large relative to the cutoff {}; \
                 the truncated ground state will deviate from the coherent state",
                a.norm_sqr(),
                basis.cutoff()
            );
        }
    }
    let d = basis.dimension();
    let identity = DMatrix::<Complex64>::identity(d, d);
    let mut h = DMatrix::<Complex64>::zeros(d, d);
    for (mode, &a) in alpha.iter().enumerate() {
        let ladder = annihilation_operator(basis, mode)?.to_dense();
        let shifted = &ladder - &identity * a;
        h += shifted.adjoint() * &shifted;
    }
    Operator::dense_hermitian(h)
}

/// The interpolating Hamiltonian `(1-s)·H_I + s·H_P`.
pub fn interpolate(h_i: &Operator, h_p: &Operator, s: f64) -> Result<Operator, FockError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(FockError::SOutOfRange(s));
    }
    if h_i.dim() != h_p.dim() {
        return Err(FockError::DimensionMismatch {
            left: h_i.dim(),
            right: h_p.dim(),
        });
    }
    let (w_i, w_p) = (1.0 - s, s);
    match (h_i.diagonal_entries(), h_p.diagonal_entries()) {
        (Some(a), Some(b)) => Ok(Operator::diagonal(a * w_i + b * w_p)),
        _ => {
            let dense = h_i.to_dense() * Complex64::new(w_i, 0.0)
                + h_p.to_dense() * Complex64::new(w_p, 0.0);
            if h_i.is_hermitian() && h_p.is_hermitian() {
                Operator::dense_hermitian(dense)
            } else {
                Ok(Operator::dense(dense))
            }
        }
    }
}

/// Full eigensystem of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one column per eigenvalue.
    pub eigenvectors: DMatrix<Complex64>,
    /// Partition of eigenvalue indices into near-degenerate groups.
    pub degeneracy_groups: Vec<Vec<usize>>,
}

impl SpectralDecomposition {
    /// Indices of the (possibly degenerate) ground group.
    pub fn ground_group(&self) -> &[usize] {
        &self.degeneracy_groups[0]
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Squared projection of a state onto the subspace spanned by one
    /// degeneracy group.
    pub fn group_population(&self, group: &[usize], state: &DVector<Complex64>) -> f64 {
        group
            .iter()
            .map(|&j| self.eigenvectors.column(j).dotc(state).norm_sqr())
            .sum()
    }
}

/// Degeneracy tolerance scaled to the operator's entry magnitude, separating
/// exact integer degeneracies from numerical noise.
pub fn default_degeneracy_tol(operator: &Operator) -> f64 {
    1e-8 * (1.0 + operator.max_abs_entry())
}

/// Spectral decomposition under the default dense-solver guard.
pub fn spectral_decomposition(
    operator: &Operator,
    degeneracy_tol: f64,
) -> Result<SpectralDecomposition, FockError> {
    spectral_decomposition_guarded(operator, degeneracy_tol, DEFAULT_DENSE_SOLVER_GUARD)
}

/// Full spectrum of a Hermitian operator. Diagonal operators are sorted
/// exactly; dense ones go through the Hermitian eigensolver.
pub fn spectral_decomposition_guarded(
    operator: &Operator,
    degeneracy_tol: f64,
    guard: usize,
) -> Result<SpectralDecomposition, FockError> {
    if !operator.is_hermitian() {
        return Err(FockError::NotHermitian {
            tol: HERMITICITY_TOL,
        });
    }
    let d = operator.dim();
    if d > guard {
        return Err(FockError::SolverGuard {
            dimension: d,
            guard,
        });
    }

    let (eigenvalues, eigenvectors) = match operator.diagonal_entries() {
        Some(entries) => {
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&a, &b| {
                entries[a]
                    .partial_cmp(&entries[b])
                    .expect("diagonal entries are finite")
                    .then(a.cmp(&b))
            });
            let eigenvalues: Vec<f64> = order.iter().map(|&j| entries[j]).collect();
            let mut vectors = DMatrix::<Complex64>::zeros(d, d);
            for (col, &j) in order.iter().enumerate() {
                vectors[(j, col)] = Complex64::new(1.0, 0.0);
            }
            (eigenvalues, vectors)
        }
        None => {
            let eigen = operator.to_dense().symmetric_eigen();
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&a, &b| {
                eigen.eigenvalues[a]
                    .partial_cmp(&eigen.eigenvalues[b])
                    .expect("eigenvalues are finite")
                    .then(a.cmp(&b))
            });
            let eigenvalues: Vec<f64> = order.iter().map(|&j| eigen.eigenvalues[j]).collect();
            let mut vectors = DMatrix::<Complex64>::zeros(d, d);
            for (col, &j) in order.iter().enumerate() {
                vectors.set_column(col, &eigen.eigenvectors.column(j));
            }
            (eigenvalues, vectors)
        }
    };

    let mut degeneracy_groups: Vec<Vec<usize>> = Vec::new();
    for j in 0..d {
        match degeneracy_groups.last_mut() {
            Some(group)
                if eigenvalues[j] - eigenvalues[*group.last().expect("nonempty")]
                    < degeneracy_tol =>
            {
                group.push(j);
            }
            _ => degeneracy_groups.push(vec![j]),
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        degeneracy_groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::parse_polynomial;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_dimensions() {
        assert_eq!(FockBasis::new(2, 3).unwrap().dimension(), 16);
        let single = FockBasis::new(1, 0).unwrap();
        assert_eq!(single.dimension(), 1);
        assert_eq!(single.tuple_of(0), vec![0]);
    }

    #[test]
    fn basis_row_major_order() {
        let basis = FockBasis::new(3, 2).unwrap();
        assert_eq!(basis.dimension(), 27);
        assert_eq!(basis.index_of(&[0, 0, 1]).unwrap(), 1);
        assert_eq!(basis.index_of(&[0, 1, 0]).unwrap(), 3);
        assert_eq!(basis.index_of(&[1, 0, 0]).unwrap(), 9);
        for index in 0..basis.dimension() {
            assert_eq!(basis.index_of(&basis.tuple_of(index)).unwrap(), index);
        }
    }

    #[test]
    fn basis_guard() {
        let err = FockBasis::with_guard(4, 9, 1 << 10).unwrap_err();
        assert!(matches!(
            err,
            FockError::DimensionGuard {
                dimension: 10_000,
                ..
            }
        ));
    }

    #[test]
    fn basis_rejects_bad_tuples() {
        let basis = FockBasis::new(2, 3).unwrap();
        assert!(matches!(
            basis.index_of(&[1]),
            Err(FockError::TupleLength { .. })
        ));
        assert!(matches!(
            basis.index_of(&[4, 0]),
            Err(FockError::OccupationOutOfRange { .. })
        ));
    }

    #[test]
    fn annihilation_matrix_elements() {
        let basis = FockBasis::new(1, 2).unwrap();
        let a = annihilation_operator(&basis, 0).unwrap();
        assert!(!a.is_hermitian());
        let m = a.to_dense();
        assert_eq!(m[(0, 1)], c(1.0, 0.0));
        assert_relative_eq!(m[(1, 2)].re, 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(m[(0, 0)], c(0.0, 0.0));
        assert_eq!(m[(2, 1)], c(0.0, 0.0));
    }

    #[test]
    fn annihilation_kills_vacuum() {
        let basis = FockBasis::new(2, 2).unwrap();
        let a = annihilation_operator(&basis, 1).unwrap();
        let mut vacuum = DVector::<Complex64>::zeros(basis.dimension());
        vacuum[basis.index_of(&[0, 0]).unwrap()] = c(1.0, 0.0);
        assert_eq!(a.apply(&vacuum).norm(), 0.0);
    }

    #[test]
    fn number_operator_from_ladders() {
        let basis = FockBasis::new(1, 4).unwrap();
        let a = annihilation_operator(&basis, 0).unwrap().to_dense();
        let num = a.adjoint() * &a;
        for n in 0..=4usize {
            assert_relative_eq!(num[(n, n)].re, n as f64, max_relative = 1e-14);
        }
    }

    #[test]
    fn number_operator_row_major_diagonal() {
        let basis = FockBasis::new(2, 1).unwrap();
        let n1 = number_operator(&basis, 1).unwrap();
        let diag: Vec<f64> = n1.diagonal_entries().unwrap().iter().copied().collect();
        assert_eq!(diag, vec![0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn number_operator_trace() {
        let basis = FockBasis::new(1, 6).unwrap();
        let n = number_operator(&basis, 0).unwrap();
        let trace: f64 = n.diagonal_entries().unwrap().iter().sum();
        assert_eq!(trace, (6 * 7 / 2) as f64);
    }

    #[test]
    fn commutator_is_one_on_the_interior() {
        let basis = FockBasis::new(2, 3).unwrap();
        for mode in 0..2 {
            let a = annihilation_operator(&basis, mode).unwrap().to_dense();
            let commutator = &a * a.adjoint() - a.adjoint() * &a;
            for (j, tuple) in basis.tuples().enumerate() {
                let expected = if tuple[mode] < 3 { 1.0 } else { -3.0 };
                assert_relative_eq!(commutator[(j, j)].re, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn problem_hamiltonian_line() {
        let p = parse_polynomial("x + y - 2").unwrap();
        let basis = FockBasis::new(2, 2).unwrap();
        let h = build_problem_hamiltonian(&p, &basis).unwrap();
        let diag = h.diagonal_entries().unwrap();
        for tuple in [[0u32, 2], [1, 1], [2, 0]] {
            assert_eq!(diag[basis.index_of(&tuple).unwrap()], 0.0);
        }
        assert_eq!(diag[basis.index_of(&[0, 0]).unwrap()], 4.0);
    }

    #[test]
    fn problem_hamiltonian_matches_oracle_minimum() {
        let p = parse_polynomial("x^2 + y^2 - 3").unwrap();
        let basis = FockBasis::new(2, 4).unwrap();
        let h = build_problem_hamiltonian(&p, &basis).unwrap();
        let diag = h.diagonal_entries().unwrap();
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(min, 1.0);
        let oracle = p.brute_force_minimum(4).unwrap();
        let argmin: Vec<usize> = (0..basis.dimension())
            .filter(|&j| diag[j] == min)
            .collect();
        let expected: Vec<usize> = oracle
            .argmin
            .iter()
            .map(|pt| {
                let tuple: Vec<u32> = pt.values().iter().map(|&v| v as u32).collect();
                basis.index_of(&tuple).unwrap()
            })
            .collect();
        assert_eq!(argmin, expected);
    }

    #[test]
    fn problem_hamiltonian_single_mode() {
        let p = parse_polynomial("x").unwrap();
        let basis = FockBasis::new(1, 3).unwrap();
        let h = build_problem_hamiltonian(&p, &basis).unwrap();
        let diag: Vec<f64> = h.diagonal_entries().unwrap().iter().copied().collect();
        assert_eq!(diag, vec![0.0, 1.0, 4.0, 9.0]);
    }

    #[test]
    fn problem_hamiltonian_safe_range() {
        let p = parse_polynomial("99999999999999999999*x").unwrap();
        let basis = FockBasis::new(1, 1).unwrap();
        let err = build_problem_hamiltonian(&p, &basis).unwrap_err();
        assert!(matches!(err, FockError::EntryExceedsSafeRange { index: 1, .. }));
    }

    #[test]
    fn initial_hamiltonian_alpha_zero_is_number_operator() {
        let basis = FockBasis::new(1, 3).unwrap();
        let h = build_initial_hamiltonian(&basis, &[c(0.0, 0.0)]).unwrap();
        let spectral = spectral_decomposition(&h, 1e-8).unwrap();
        assert_relative_eq!(spectral.ground_energy(), 0.0, epsilon = 1e-12);
        // ground state is the vacuum
        assert_relative_eq!(
            spectral.eigenvectors.column(0)[0].norm(),
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn initial_hamiltonian_ground_is_truncated_coherent_state() {
        // Oracle: the explicit coherent expansion e^{-|a|^2/2} a^n / sqrt(n!),
        // truncated and renormalized.
        let basis = FockBasis::new(1, 8).unwrap();
        let h = build_initial_hamiltonian(&basis, &[c(1.0, 0.0)]).unwrap();
        let spectral = spectral_decomposition(&h, default_degeneracy_tol(&h)).unwrap();
        assert!(spectral.ground_energy().abs() < 1e-3);

        let mut coherent = DVector::<Complex64>::zeros(basis.dimension());
        let mut factorial = 1.0f64;
        for n in 0..=8usize {
            if n > 0 {
                factorial *= n as f64;
            }
            coherent[n] = c((-0.5f64).exp() / factorial.sqrt(), 0.0);
        }
        coherent /= c(coherent.norm(), 0.0);
        let fidelity = spectral.eigenvectors.column(0).dotc(&coherent).norm_sqr();
        assert!(fidelity >= 0.999, "fidelity {fidelity}");
    }

    #[test]
    fn initial_hamiltonian_vacuum_expectation() {
        for alpha in [c(0.7, 0.0), c(0.3, -0.9), c(1.5, 2.0)] {
            let basis = FockBasis::new(1, 4).unwrap();
            let h = build_initial_hamiltonian(&basis, &[alpha]).unwrap();
            let mut vacuum = DVector::<Complex64>::zeros(basis.dimension());
            vacuum[0] = c(1.0, 0.0);
            assert_relative_eq!(
                h.expectation(&vacuum),
                alpha.norm_sqr(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn initial_hamiltonian_is_hermitian_for_complex_alpha() {
        let basis = FockBasis::new(2, 3).unwrap();
        let h = build_initial_hamiltonian(&basis, &[c(0.4, 0.8), c(-0.2, 0.1)]).unwrap();
        assert!(h.is_hermitian());
    }

    #[test]
    fn interpolation_endpoints() {
        let p = parse_polynomial("x - 1").unwrap();
        let basis = FockBasis::new(1, 3).unwrap();
        let h_p = build_problem_hamiltonian(&p, &basis).unwrap();
        let h_i = build_initial_hamiltonian(&basis, &[c(1.0, 0.0)]).unwrap();

        let at_zero = interpolate(&h_i, &h_p, 0.0).unwrap();
        assert_eq!(at_zero.to_dense(), h_i.to_dense());
        let at_one = interpolate(&h_i, &h_p, 1.0).unwrap();
        assert_eq!(at_one.to_dense(), h_p.to_dense());

        let identity = Operator::diagonal(DVector::from_element(4, 1.0));
        let half = interpolate(&identity, &identity, 0.5).unwrap();
        assert_eq!(half.to_dense(), identity.to_dense());

        assert!(matches!(
            interpolate(&h_i, &h_p, 1.5),
            Err(FockError::SOutOfRange(_))
        ));
    }

    #[test]
    fn spectral_decomposition_of_problem_hamiltonian() {
        let p = parse_polynomial("x + y - 2").unwrap();
        let basis = FockBasis::new(2, 2).unwrap();
        let h = build_problem_hamiltonian(&p, &basis).unwrap();
        let spectral = spectral_decomposition(&h, default_degeneracy_tol(&h)).unwrap();
        assert_eq!(spectral.ground_energy(), 0.0);
        assert_eq!(spectral.ground_group().len(), 3);

        // spectrum of a diagonal operator is exactly its diagonal multiset
        let mut diag: Vec<f64> = h.diagonal_entries().unwrap().iter().copied().collect();
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(spectral.eigenvalues, diag);
    }

    #[test]
    fn spectral_decomposition_scalar_and_identity() {
        let scalar = Operator::diagonal(DVector::from_element(1, 5.0));
        let s = spectral_decomposition(&scalar, 1e-8).unwrap();
        assert_eq!(s.eigenvalues, vec![5.0]);

        let identity = Operator::dense_hermitian(DMatrix::identity(4, 4)).unwrap();
        let s = spectral_decomposition(&identity, 1e-8).unwrap();
        assert_eq!(s.degeneracy_groups, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn spectral_decomposition_complex_hermitian() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)],
        );
        let op = Operator::dense_hermitian(m.clone()).unwrap();
        let s = spectral_decomposition(&op, 1e-10).unwrap();
        assert_relative_eq!(s.eigenvalues[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(s.eigenvalues[1], 2.0, epsilon = 1e-12);
        for j in 0..2 {
            let v = s.eigenvectors.column(j).clone_owned();
            let residual = (&m * &v - v * c(s.eigenvalues[j], 0.0)).norm();
            assert!(residual < 1e-12);
        }
        let overlap = s.eigenvectors.column(0).dotc(&s.eigenvectors.column(1));
        assert!(overlap.norm() < 1e-12);
    }

    #[test]
    fn spectral_decomposition_rejects_non_hermitian() {
        let basis = FockBasis::new(1, 2).unwrap();
        let a = annihilation_operator(&basis, 0).unwrap();
        assert!(matches!(
            spectral_decomposition(&a, 1e-8),
            Err(FockError::NotHermitian { .. })
        ));
    }

    #[test]
    fn spectral_decomposition_guard() {
        let op = Operator::diagonal(DVector::zeros(10));
        assert!(matches!(
            spectral_decomposition_guarded(&op, 1e-8, 4),
            Err(FockError::SolverGuard {
                dimension: 10,
                guard: 4
            })
        ));
    }

    #[test]
    fn mode_out_of_range() {
        let basis = FockBasis::new(2, 2).unwrap();
        assert!(matches!(
            annihilation_operator(&basis, 2),
            Err(FockError::ModeOutOfRange { mode: 2, modes: 2 })
        ));
        assert!(matches!(
            number_operator(&basis, 5),
            Err(FockError::ModeOutOfRange { mode: 5, modes: 2 })
        ));
    }

    #[test]
    fn eigensolver_residual_and_orthonormality() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for d in [2usize, 5, 9, 16] {
            let raw = DMatrix::from_fn(d, d, |_, _| {
                c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let hermitian = (&raw + raw.adjoint()) * c(0.5, 0.0);
            let op = Operator::dense_hermitian(hermitian.clone()).unwrap();
            let s = spectral_decomposition(&op, default_degeneracy_tol(&op)).unwrap();
            let scale = s
                .eigenvalues
                .iter()
                .fold(0.0f64, |acc, &x| acc.max(x.abs()))
                .max(1e-30);
            for j in 0..d {
                let v = s.eigenvectors.column(j).clone_owned();
                let residual = (&hermitian * &v - &v * c(s.eigenvalues[j], 0.0)).norm();
                assert!(
                    residual <= 1e-9 * scale,
                    "residual {residual} at dim {d}, eigenpair {j}"
                );
            }
            let overlap = s.eigenvectors.adjoint() * &s.eigenvectors;
            let identity = DMatrix::<Complex64>::identity(d, d);
            assert!((overlap - identity).norm() <= 1e-9);
        }
    }
}
