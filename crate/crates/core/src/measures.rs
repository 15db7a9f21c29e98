//! The quantum Fisher information functional (spectral and pure-state forms)
//! plus two reference coherence measures, all usable through one
//! [`CoherenceMeasure`] interface.
//!
//! QFI here is F(rho, H) = 2 sum_{i,j} (l_i - l_j)^2 / (l_i + l_j) |<l_i|H|l_j>|^2
//! over the eigenpairs (l_i, |l_i>) of rho, with no division by 4, so a pure
//! state gives exactly four times the variance of H.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{eigh, expectation, Complex64, ComplexMatrix, DensityMatrix, Observable, PureState};

/// Ordered pairs whose eigenvalue sum is at or below this floor belong to the
/// kernel of rho and are skipped before any division.
pub const DEFAULT_EIG_FLOOR: f64 = 1e-12;
/// Eigenvalues at or below this are treated as exact zeros by the entropy.
const ENTROPY_EIG_FLOOR: f64 = 1e-14;

/// Ladder Hamiltonian diag(0, 1, ..., N) on an (N+1)-dimensional system.
///
/// Levels run 0..N so the spacing is 1 and the bottom level is 0; this is the
/// reading under which the uniform two-level superposition has F = 1 and its
/// top-rung image has F = N^2.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualSpacingHamiltonian {
    n_max: usize,
    observable: Observable,
}

impl EqualSpacingHamiltonian {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn into_observable(self) -> Observable {
        self.observable
    }
}

/// Builds diag(0, ..., n_max) with basis labels "0" through "n_max".
pub fn equal_spacing_hamiltonian(n_max: usize) -> EqualSpacingHamiltonian {
    assert!(n_max >= 1, "ladder needs at least two levels");
    let diag: Vec<f64> = (0..=n_max).map(|k| k as f64).collect();
    let labels: Vec<String> = (0..=n_max).map(|k| k.to_string()).collect();
    let observable = Observable::with_labels(ComplexMatrix::from_real_diagonal(&diag), labels)
        .expect("integer diagonal is Hermitian");
    EqualSpacingHamiltonian { n_max, observable }
}

/// Returns n_max when `obs` is exactly diag(0, 1, ..., dim-1), else None.
pub(crate) fn equal_spacing_n_max(obs: &Observable) -> Option<usize> {
    let dim = obs.dim();
    if dim < 2 {
        return None;
    }
    for i in 0..dim {
        for j in 0..dim {
            let want = if i == j {
                Complex64::new(i as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            if obs.matrix().get(i, j) != want {
                return None;
            }
        }
    }
    Some(dim - 1)
}

/// QFI of a general state from the spectral formula.
///
/// Ordered pairs with l_i + l_j <= `eig_floor` are skipped (kernel pairs carry
/// no Fisher information); the squared difference is formed before the
/// division so exact degeneracies contribute a clean zero. Float noise that
/// would produce a tiny negative total is clamped at 0.
pub fn qfi_spectral(rho: &DensityMatrix, hamiltonian: &Observable, eig_floor: f64) -> Result<f64> {
    if rho.dim() != hamiltonian.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: hamiltonian.dim(),
        });
    }
    let spectrum = eigh(rho.matrix())?;
    let vectors = spectrum.eigenvectors();
    let h_eig = vectors
        .adjoint()
        .matmul(hamiltonian.matrix())
        .matmul(vectors);
    let lambda = spectrum.eigenvalues();
    let dim = rho.dim();

    let mut total = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                continue;
            }
            let sum = lambda[i] + lambda[j];
            if sum <= eig_floor {
                continue;
            }
            let diff_sq = (lambda[i] - lambda[j]).powi(2);
            total += diff_sq / sum * h_eig.get(i, j).norm_sqr();
        }
    }
    Ok((2.0 * total).max(0.0))
}

/// QFI of a pure state: four times the variance of H.
pub fn qfi_pure(psi: &PureState, hamiltonian: &Observable) -> Result<f64> {
    if psi.dim() != hamiltonian.dim() {
        return Err(Error::DimensionMismatch {
            left: psi.dim(),
            right: hamiltonian.dim(),
        });
    }
    let mean = expectation(psi, hamiltonian)?;
    let h_psi = hamiltonian.matrix().matvec(psi.amplitudes());
    // <psi|H^2|psi> = |H psi|^2 since H is Hermitian
    let second_moment: f64 = h_psi.iter().map(|z| z.norm_sqr()).sum();
    Ok((4.0 * (second_moment - mean * mean)).max(0.0))
}

/// l1-norm of coherence: sum of off-diagonal moduli.
pub fn c_l1(rho: &DensityMatrix) -> f64 {
    let dim = rho.dim();
    let mut total = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                total += rho.get(i, j).norm();
            }
        }
    }
    total
}

fn entropy_nat(values: impl Iterator<Item = f64>) -> f64 {
    values
        .filter(|&p| p > ENTROPY_EIG_FLOOR)
        .map(|p| -p * p.ln())
        .sum()
}

/// Relative entropy of coherence S(dephase(rho)) - S(rho), natural log,
/// clamped at 0.
pub fn c_rel_ent(rho: &DensityMatrix) -> f64 {
    let diag = (0..rho.dim()).map(|i| rho.get(i, i).re);
    let s_dephased = entropy_nat(diag);
    let spectrum = eigh(rho.matrix()).expect("a stored density matrix is Hermitian");
    let s_rho = entropy_nat(spectrum.eigenvalues().iter().copied());
    (s_dephased - s_rho).max(0.0)
}

#[derive(Clone)]
enum MeasureKind {
    /// QFI bound to a fixed Hamiltonian whose eigenbasis defines coherence.
    Qfi {
        hamiltonian: Observable,
        eig_floor: f64,
    },
    L1,
    RelEnt,
    /// Arbitrary functional; used for planted-fault auditor self-tests.
    Custom(Arc<dyn Fn(&DensityMatrix) -> f64 + Send + Sync>),
}

/// A named coherence functional over density matrices.
///
/// Evaluation is deterministic for identical input bits; the measure owns no
/// mutable state, so values can be shared across threads.
#[derive(Clone)]
pub struct CoherenceMeasure {
    name: String,
    kind: MeasureKind,
}

impl CoherenceMeasure {
    /// QFI with respect to `hamiltonian`, registry name "qfi".
    pub fn qfi(hamiltonian: Observable) -> Self {
        Self {
            name: "qfi".to_string(),
            kind: MeasureKind::Qfi {
                hamiltonian,
                eig_floor: DEFAULT_EIG_FLOOR,
            },
        }
    }

    /// l1-norm of coherence, registry name "l1".
    pub fn l1() -> Self {
        Self {
            name: "l1".to_string(),
            kind: MeasureKind::L1,
        }
    }

    /// Relative entropy of coherence, registry name "rel_ent".
    pub fn rel_ent() -> Self {
        Self {
            name: "rel_ent".to_string(),
            kind: MeasureKind::RelEnt,
        }
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(&DensityMatrix) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            kind: MeasureKind::Custom(Arc::new(f)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<f64> {
        match &self.kind {
            MeasureKind::Qfi {
                hamiltonian,
                eig_floor,
            } => qfi_spectral(rho, hamiltonian, *eig_floor),
            MeasureKind::L1 => Ok(c_l1(rho)),
            MeasureKind::RelEnt => Ok(c_rel_ent(rho)),
            MeasureKind::Custom(f) => Ok(f(rho)),
        }
    }

    /// When this is QFI bound to diag(0..dim-1) of the given dimension,
    /// returns n_max = dim - 1. Drives the pinned counterexample trial.
    pub(crate) fn qfi_ladder_n_max(&self, dim: usize) -> Option<usize> {
        match &self.kind {
            MeasureKind::Qfi { hamiltonian, .. } if hamiltonian.dim() == dim => {
                equal_spacing_n_max(hamiltonian)
            }
            _ => None,
        }
    }
}

impl fmt::Debug for CoherenceMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoherenceMeasure")
            .field("name", &self.name)
            .finish()
    }
}
