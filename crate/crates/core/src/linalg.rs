//! Complex-matrix foundation: state and observable types, validation, and
//! Hermitian spectral decomposition.
//!
//! All types are immutable values after construction and all operations are
//! pure functions, so everything here is safe to share across threads.

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// Default entrywise tolerance for Hermiticity checks and repairs.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Allowed deviation of a density-matrix trace from 1.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed negativity of the smallest density-matrix eigenvalue.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Allowed deviation of a pure-state norm from 1.
pub const NORM_TOL: f64 = 1e-10;
/// Target absolute accuracy of the spectral decomposition for dims <= 64.
pub const SPECTRAL_TOL: f64 = 1e-9;

/// Iteration cap for the eigensolver; far above what any dim <= 256 needs.
const MAX_EIG_ITERATIONS: usize = 10_000;

/// Dense complex matrix in row-major order.
///
/// This is the raw carrier for every operator in the crate (states,
/// Hamiltonians, unitaries, Kraus operators). Entries are dimensionless
/// amplitudes; constructors reject non-finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, checking count and finiteness.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::EntryCount {
                found: entries.len(),
                rows,
                cols,
            });
        }
        for (index, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    /// Square matrix with the given real numbers on the diagonal.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        Self::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "inner dimensions must agree");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |M - M^H| over all entries; 0 for an exactly Hermitian matrix.
    pub fn hermiticity_deviation(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..=i {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// (M + M^H) / 2. Repairs float-level asymmetry; forces a real diagonal.
    pub fn symmetrize(&self) -> Self {
        debug_assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * Complex64::new(0.5, 0.0)
        })
    }

    /// max |A - B| over all entries.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Wire form shared by all modules: `{"dim": n, "entries": [[re, im], ...]}`
/// with entries in row-major order. Only square matrices have a wire form.
#[derive(Serialize, Deserialize)]
struct MatrixWire {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.is_square() {
            return Err(serde::ser::Error::custom(
                "only square matrices have a JSON form",
            ));
        }
        MatrixWire {
            dim: self.rows,
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(deserializer)?;
        let entries = wire
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        ComplexMatrix::new(wire.dim, wire.dim, entries).map_err(D::Error::custom)
    }
}

/// Normalized state vector |psi>.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Checks finiteness and that the Euclidean norm is within 1e-10 of 1.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        for (index, z) in amplitudes.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NormDeviation {
                norm,
                tol: NORM_TOL,
            });
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state |index>.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    /// Uniform superposition of the given basis indices, e.g. (|a> + |b>)/sqrt(2).
    pub fn equal_superposition(dim: usize, indices: &[usize]) -> Result<Self> {
        assert!(!indices.is_empty(), "superposition needs at least one index");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        let amp = Complex64::new(1.0 / (indices.len() as f64).sqrt(), 0.0);
        for &index in indices {
            if index >= dim {
                return Err(Error::IndexOutOfRange { index, dim });
            }
            amplitudes[index] = amp;
        }
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Projector |psi><psi| as a density matrix. Renormalizes first so the
    /// trace is 1 to machine precision even when the stored norm sits at the
    /// edge of the admission tolerance.
    pub fn to_density(&self) -> DensityMatrix {
        let norm = self
            .amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let amps: Vec<Complex64> = self.amplitudes.iter().map(|z| z / norm).collect();
        let dim = amps.len();
        let projector = ComplexMatrix::from_fn(dim, dim, |i, j| amps[i] * amps[j].conj());
        validate_density(&projector, HERMITICITY_TOL)
            .expect("projector of a normalized state is a valid density matrix")
    }
}

/// Vector wire form: `{"dim": n, "amplitudes": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct VectorWire {
    dim: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl Serialize for PureState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        VectorWire {
            dim: self.dim(),
            amplitudes: self.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = VectorWire::deserialize(deserializer)?;
        if wire.amplitudes.len() != wire.dim {
            return Err(D::Error::custom(format!(
                "amplitude count {} does not match dim {}",
                wire.amplitudes.len(),
                wire.dim
            )));
        }
        let amps = wire
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        PureState::new(amps).map_err(D::Error::custom)
    }
}

/// Trace-one positive-semidefinite Hermitian matrix: the state rho.
///
/// Construct through [`validate_density`] (or deserialization, which routes
/// through it); the stored matrix is already symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates with the default Hermiticity tolerance.
    pub fn new(matrix: &ComplexMatrix) -> Result<Self> {
        validate_density(matrix, HERMITICITY_TOL)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        assert!(dim >= 1);
        let p = 1.0 / dim as f64;
        Self {
            matrix: ComplexMatrix::from_real_diagonal(&vec![p; dim]),
        }
    }

    /// Diagonal (incoherent) state from classical probabilities.
    pub fn from_diagonal(probabilities: &[f64]) -> Result<Self> {
        validate_density(
            &ComplexMatrix::from_real_diagonal(probabilities),
            HERMITICITY_TOL,
        )
    }

    /// Convex combination of states. Weights must match states in length;
    /// the result is revalidated, so weights that do not sum to 1 are rejected
    /// through the trace check.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        assert_eq!(weights.len(), states.len());
        assert!(!states.is_empty());
        let dim = states[0].dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, state) in weights.iter().zip(states) {
            if state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: state.dim(),
                });
            }
            acc = acc.add(&state.matrix.scale(Complex64::new(*w, 0.0)));
        }
        validate_density(&acc, HERMITICITY_TOL)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix.get(row, col)
    }

    /// Largest off-diagonal modulus; 0 exactly for incoherent states.
    pub fn max_offdiagonal_modulus(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    worst = worst.max(self.matrix.get(i, j).norm());
                }
            }
        }
        worst
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let matrix = ComplexMatrix::deserialize(deserializer)?;
        validate_density(&matrix, HERMITICITY_TOL).map_err(D::Error::custom)
    }
}

/// Hermitian matrix with a distinguished eigenbasis; the Hamiltonian H whose
/// basis defines which states count as incoherent.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
    basis_labels: Option<Vec<String>>,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let asymmetry = matrix.hermiticity_deviation();
        if asymmetry > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                asymmetry,
                tol: HERMITICITY_TOL,
            });
        }
        Ok(Self {
            matrix,
            basis_labels: None,
        })
    }

    pub fn with_labels(matrix: ComplexMatrix, labels: Vec<String>) -> Result<Self> {
        let mut obs = Self::new(matrix)?;
        if labels.len() != obs.dim() {
            return Err(Error::EntryCount {
                found: labels.len(),
                rows: obs.dim(),
                cols: 1,
            });
        }
        obs.basis_labels = Some(labels);
        Ok(obs)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn basis_labels(&self) -> Option<&[String]> {
        self.basis_labels.as_deref()
    }
}

impl Serialize for Observable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let matrix = ComplexMatrix::deserialize(deserializer)?;
        Observable::new(matrix).map_err(D::Error::custom)
    }
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending, column k
/// of the eigenvector matrix paired with eigenvalue k.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvector for eigenvalue index k (column k).
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.eigenvectors.get(i, k)).collect()
    }

    /// V diag(lambda) V^H; used by the reconstruction invariant.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = self.dim();
        let scaled = ComplexMatrix::from_fn(dim, dim, |i, k| {
            self.eigenvectors.get(i, k) * Complex64::new(self.eigenvalues[k], 0.0)
        });
        scaled.matmul(&self.eigenvectors.adjoint())
    }
}

/// Validates a matrix as a density matrix.
///
/// Symmetrizes (M + M^H)/2 when the asymmetry is at most `tol`, rejects
/// larger asymmetry, then checks trace and positivity against the fixed
/// invariant tolerances.
pub fn validate_density(matrix: &ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    if !matrix.is_square() {
        return Err(Error::NotSquare {
            rows: matrix.rows(),
            cols: matrix.cols(),
        });
    }
    for (index, z) in matrix.entries().iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite { index });
        }
    }
    let asymmetry = matrix.hermiticity_deviation();
    if asymmetry > tol {
        return Err(Error::NotHermitian { asymmetry, tol });
    }
    let symmetric = matrix.symmetrize();
    let trace = symmetric.trace().re;
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceDeviation {
            trace,
            tol: TRACE_TOL,
        });
    }
    let spectrum = eigh(&symmetric)?;
    let smallest = spectrum.eigenvalues().first().copied().unwrap_or(0.0);
    if smallest < -POSITIVITY_TOL {
        return Err(Error::NegativeEigenvalue {
            value: smallest,
            tol: POSITIVITY_TOL,
        });
    }
    Ok(DensityMatrix { matrix: symmetric })
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
///
/// Deterministic for identical input bits. Ties inside degenerate blocks keep
/// the column order produced by the decomposition routine.
pub fn eigh(matrix: &ComplexMatrix) -> Result<Spectrum> {
    if !matrix.is_square() {
        return Err(Error::NotSquare {
            rows: matrix.rows(),
            cols: matrix.cols(),
        });
    }
    let asymmetry = matrix.hermiticity_deviation();
    if asymmetry > HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            asymmetry,
            tol: HERMITICITY_TOL,
        });
    }
    let dim = matrix.rows();
    let symmetric = matrix.symmetrize();
    let m = DMatrix::from_fn(dim, dim, |i, j| symmetric.get(i, j));
    let eig = nalgebra::SymmetricEigen::try_new(m, f64::EPSILON, MAX_EIG_ITERATIONS)
        .ok_or(Error::ConvergenceFailure)?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues of a finite Hermitian matrix are finite")
    });

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors =
        ComplexMatrix::from_fn(dim, dim, |i, col| eig.eigenvectors[(i, order[col])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// <psi|H|psi>. The imaginary residue must stay within 1e-10 and is then
/// discarded.
pub fn expectation(state: &PureState, obs: &Observable) -> Result<f64> {
    if state.dim() != obs.dim() {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: obs.dim(),
        });
    }
    let h_psi = obs.matrix().matvec(state.amplitudes());
    let value: Complex64 = state
        .amplitudes()
        .iter()
        .zip(&h_psi)
        .map(|(a, b)| a.conj() * b)
        .sum();
    if value.im.abs() > 1e-10 {
        return Err(Error::NonRealExpectation {
            imag: value.im,
            tol: 1e-10,
        });
    }
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn maximally_mixed_is_valid() {
        let rho = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        let dm = validate_density(&rho, HERMITICITY_TOL).unwrap();
        assert_eq!(dm.dim(), 2);
        assert!((dm.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_deviation_is_rejected() {
        let bad = ComplexMatrix::from_real_diagonal(&[0.5, 0.6]);
        match validate_density(&bad, HERMITICITY_TOL) {
            Err(Error::TraceDeviation { trace, .. }) => assert!((trace - 1.1).abs() < 1e-12),
            other => panic!("expected TraceDeviation, got {other:?}"),
        }
    }

    #[test]
    fn plus_projector_is_valid() {
        let psi = PureState::equal_superposition(2, &[0, 1]).unwrap();
        let dm = psi.to_density();
        assert!((dm.get(0, 1).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let mut m = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        m.set(0, 1, cx(0.2, 0.0));
        m.set(1, 0, cx(-0.2, 0.0));
        assert!(matches!(
            validate_density(&m, HERMITICITY_TOL),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn negative_eigenvalue_is_rejected() {
        let m = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(
            validate_density(&m, HERMITICITY_TOL),
            Err(Error::NegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn non_square_is_rejected() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            validate_density(&m, HERMITICITY_TOL),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn validate_density_roundtrip_is_exact() {
        let psi = PureState::equal_superposition(3, &[0, 2]).unwrap();
        let dm = psi.to_density();
        let again = validate_density(dm.matrix(), HERMITICITY_TOL).unwrap();
        assert!(dm.matrix().max_abs_diff(again.matrix()) <= 1e-12);
    }

    #[test]
    fn eigh_diagonal_matrix() {
        let m = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 2.0]);
        let s = eigh(&m).unwrap();
        assert_eq!(s.eigenvalues(), &[0.0, 1.0, 2.0]);
        // eigenvectors are the standard basis up to phase
        for k in 0..3 {
            let v = s.eigenvector(k);
            assert!((v[k].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigh_plus_projector() {
        let psi = PureState::equal_superposition(2, &[0, 1]).unwrap();
        let s = eigh(psi.to_density().matrix()).unwrap();
        assert!((s.eigenvalues()[0] - 0.0).abs() < 1e-12);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(0, 1, cx(1.0, 0.0));
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn expectation_basis_state() {
        let h = Observable::new(ComplexMatrix::from_real_diagonal(&[0.0, 1.0])).unwrap();
        let psi = PureState::basis_state(2, 0).unwrap();
        assert_eq!(expectation(&psi, &h).unwrap(), 0.0);
    }

    #[test]
    fn expectation_symmetric_superposition() {
        let h = Observable::new(ComplexMatrix::from_real_diagonal(&[0.0, 1.0])).unwrap();
        let psi = PureState::equal_superposition(2, &[0, 1]).unwrap();
        assert!((expectation(&psi, &h).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn expectation_top_rung_superposition() {
        // (|0> + |N>)/sqrt(2) against diag(0..N) gives N/2 by direct inner product.
        for n in 2..=6usize {
            let diag: Vec<f64> = (0..=n).map(|k| k as f64).collect();
            let h = Observable::new(ComplexMatrix::from_real_diagonal(&diag)).unwrap();
            let psi = PureState::equal_superposition(n + 1, &[0, n]).unwrap();
            assert!((expectation(&psi, &h).unwrap() - n as f64 / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let h = Observable::new(ComplexMatrix::from_real_diagonal(&[0.0, 1.0])).unwrap();
        let psi = PureState::basis_state(3, 0).unwrap();
        assert!(matches!(
            expectation(&psi, &h),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pure_state_rejects_unnormalized() {
        let amps = vec![cx(1.0, 0.0), cx(1.0, 0.0)];
        assert!(matches!(
            PureState::new(amps),
            Err(Error::NormDeviation { .. })
        ));
    }

    #[test]
    fn matrix_rejects_nan() {
        let bad = vec![cx(f64::NAN, 0.0)];
        assert!(matches!(
            ComplexMatrix::new(1, 1, bad),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn matrix_json_round_trip() {
        let psi = PureState::equal_superposition(3, &[0, 1]).unwrap();
        let dm = psi.to_density();
        let json = serde_json::to_string(&dm).unwrap();
        assert!(json.starts_with("{\"dim\":3,\"entries\":["));
        let back: DensityMatrix = serde_json::from_str(&json).unwrap();
        assert!(dm.matrix().max_abs_diff(back.matrix()) == 0.0);
    }

    #[test]
    fn vector_json_round_trip() {
        let psi = PureState::equal_superposition(4, &[0, 3]).unwrap();
        let json = serde_json::to_string(&psi).unwrap();
        assert!(json.starts_with("{\"dim\":4,\"amplitudes\":["));
        let back: PureState = serde_json::from_str(&json).unwrap();
        assert_eq!(psi, back);
    }

    #[test]
    fn density_json_rejects_invalid() {
        let json = r#"{"dim":2,"entries":[[0.5,0.0],[0.0,0.0],[0.0,0.0],[0.6,0.0]]}"#;
        let parsed: std::result::Result<DensityMatrix, _> = serde_json::from_str(json);
        assert!(parsed.is_err());
    }
}
