//! Kraus-channel machinery: incoherence predicates, channel application,
//! selective outcomes, and builders/samplers for incoherent operations.
//!
//! A channel is incoherent when every Kraus operator has at most one nonzero
//! entry per column; such operators map diagonal states to diagonal states
//! operator by operator. The predicate here is structural; behavioral
//! diagonality preservation is exercised by the property suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{validate_density, Complex64, ComplexMatrix, DensityMatrix, PureState};
use crate::linalg::HERMITICITY_TOL;

/// Allowed entrywise deviation of sum A^H A from the identity.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Default off-diagonal / off-column modulus below which an entry counts as zero.
pub const DEFAULT_INCOHERENCE_TOL: f64 = 1e-10;
/// Default probability floor below which a selective branch is flagged as vanishing.
pub const DEFAULT_P_FLOOR: f64 = 1e-12;

/// Ordered set of Kraus operators {A_n} satisfying sum A_n^H A_n = I.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Validates operator shapes and the completeness relation.
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::EmptyKraus);
        };
        if !first.is_square() {
            return Err(Error::NotSquare {
                rows: first.rows(),
                cols: first.cols(),
            });
        }
        let dim = first.rows();
        for op in &operators {
            if op.rows() != dim || op.cols() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: op.rows(),
                });
            }
        }
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for op in &operators {
            sum = sum.add(&op.adjoint().matmul(op));
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > COMPLETENESS_TOL {
            return Err(Error::IncompleteKraus { deviation });
        }
        Ok(Self { dim, operators })
    }

    /// Single-operator channel; completeness then enforces unitarity.
    pub fn unitary(operator: ComplexMatrix) -> Result<Self> {
        Self::new(vec![operator])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn n_operators(&self) -> usize {
        self.operators.len()
    }
}

#[derive(Serialize, Deserialize)]
struct ChannelWire {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl Serialize for KrausChannel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut state = serializer.serialize_struct("KrausChannel", 2)?;
        use serde::ser::SerializeStruct;
        state.serialize_field("dim", &self.dim)?;
        state.serialize_field("operators", &self.operators)?;
        state.end()
    }
}

impl<'de> Deserialize<'de> for KrausChannel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = ChannelWire::deserialize(deserializer)?;
        let channel = KrausChannel::new(wire.operators).map_err(D::Error::custom)?;
        if channel.dim() != wire.dim {
            return Err(D::Error::custom(format!(
                "declared dim {} does not match operator dim {}",
                wire.dim,
                channel.dim()
            )));
        }
        Ok(channel)
    }
}

/// One selective-measurement branch: probability p_n and, when p_n is above
/// the floor, the normalized post-state A_n rho A_n^H / p_n.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Outcome {
    pub probability: f64,
    /// `None` marks a vanishing branch (p_n at or below the floor).
    pub state: Option<DensityMatrix>,
}

impl Outcome {
    pub fn is_vanishing(&self) -> bool {
        self.state.is_none()
    }
}

/// Selective outcomes aligned with the channel's Kraus operator order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeEnsemble {
    pub outcomes: Vec<Outcome>,
}

/// True iff every off-diagonal modulus of rho is at most `tol`.
pub fn is_incoherent_state(rho: &DensityMatrix, tol: f64) -> bool {
    rho.max_offdiagonal_modulus() <= tol
}

/// Structural incoherence criterion: every Kraus operator has at most one
/// entry of modulus above `tol` per column.
pub fn is_incoherent_kraus(channel: &KrausChannel, tol: f64) -> bool {
    channel.operators().iter().all(|op| {
        (0..op.cols()).all(|j| {
            let nonzeros = (0..op.rows()).filter(|&i| op.get(i, j).norm() > tol).count();
            nonzeros <= 1
        })
    })
}

/// Phi(rho) = sum A_n rho A_n^H, revalidated as a density matrix.
pub fn apply_channel(rho: &DensityMatrix, channel: &KrausChannel) -> Result<DensityMatrix> {
    if rho.dim() != channel.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: channel.dim(),
        });
    }
    let dim = rho.dim();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for op in channel.operators() {
        out = out.add(&op.matmul(rho.matrix()).matmul(&op.adjoint()));
    }
    validate_density(&out, HERMITICITY_TOL)
}

/// Per-operator probabilities p_n = Tr rho A_n^H A_n and normalized
/// post-states. Branches with p_n <= `p_floor` are flagged and carry no
/// state, preserving the operator alignment.
pub fn selective_outcomes(
    rho: &DensityMatrix,
    channel: &KrausChannel,
    p_floor: f64,
) -> Result<OutcomeEnsemble> {
    if rho.dim() != channel.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: channel.dim(),
        });
    }
    let mut outcomes = Vec::with_capacity(channel.n_operators());
    for op in channel.operators() {
        let branch = op.matmul(rho.matrix()).matmul(&op.adjoint());
        let probability = branch.trace().re;
        if probability <= p_floor {
            outcomes.push(Outcome {
                probability,
                state: None,
            });
            continue;
        }
        let normalized = branch.scale(Complex64::new(1.0 / probability, 0.0));
        let state = validate_density(&normalized, HERMITICITY_TOL)?;
        outcomes.push(Outcome {
            probability,
            state: Some(state),
        });
    }
    Ok(OutcomeEnsemble { outcomes })
}

/// Permutation unitary exchanging basis indices `a` and `b`, identity elsewhere.
pub fn build_swap_unitary(dim: usize, a: usize, b: usize) -> Result<KrausChannel> {
    if a >= dim {
        return Err(Error::IndexOutOfRange { index: a, dim });
    }
    if b >= dim {
        return Err(Error::IndexOutOfRange { index: b, dim });
    }
    if a == b {
        return Err(Error::EqualIndices { index: a });
    }
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.swap(a, b);
    build_permutation_unitary(&perm)
}

/// Single-operator channel for the permutation |j> -> |perm[j]>.
pub fn build_permutation_unitary(perm: &[usize]) -> Result<KrausChannel> {
    let dim = perm.len();
    let mut seen = vec![false; dim];
    for &target in perm {
        if target >= dim || seen[target] {
            return Err(Error::NotABijection { dim });
        }
        seen[target] = true;
    }
    let mut op = ComplexMatrix::zeros(dim, dim);
    for (j, &target) in perm.iter().enumerate() {
        op.set(target, j, Complex64::new(1.0, 0.0));
    }
    KrausChannel::unitary(op)
}

/// Monomial (generalized permutation) unitary: |j> -> e^{i phase_j} |perm[j]>.
pub fn build_monomial_unitary(perm: &[usize], phases: &[f64]) -> Result<KrausChannel> {
    let dim = perm.len();
    if phases.len() != dim {
        return Err(Error::EntryCount {
            found: phases.len(),
            rows: dim,
            cols: 1,
        });
    }
    let mut seen = vec![false; dim];
    for &target in perm {
        if target >= dim || seen[target] {
            return Err(Error::NotABijection { dim });
        }
        seen[target] = true;
    }
    let mut op = ComplexMatrix::zeros(dim, dim);
    for (j, &target) in perm.iter().enumerate() {
        op.set(target, j, Complex64::from_polar(1.0, phases[j]));
    }
    KrausChannel::unitary(op)
}

/// Full dephasing channel {|i><i|}; its output is the diagonal part of the input.
pub fn build_dephasing(dim: usize) -> KrausChannel {
    assert!(dim >= 1, "dephasing channel needs dim >= 1");
    let operators = (0..dim)
        .map(|i| {
            let mut op = ComplexMatrix::zeros(dim, dim);
            op.set(i, i, Complex64::new(1.0, 0.0));
            op
        })
        .collect();
    KrausChannel::new(operators).expect("projector set onto the full basis is complete")
}

fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

fn random_permutation(dim: usize, rng: &mut impl Rng) -> Vec<usize> {
    // Fisher-Yates; kept explicit so the draw sequence is pinned.
    let mut perm: Vec<usize> = (0..dim).collect();
    for i in (1..dim).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Random incoherent channel, deterministic in `seed`.
///
/// Each operator A_n places a single nonzero c_{n,j} per column j at row
/// f_n(j), with f_n a random permutation and the column amplitude vectors
/// (c_{0,j}, ..., c_{n_ops-1,j}) Gaussian then normalized. Completeness and
/// the column criterion hold by construction.
pub fn sample_incoherent_channel(dim: usize, n_ops: usize, seed: u64) -> KrausChannel {
    assert!(dim >= 1, "channel needs dim >= 1");
    assert!(n_ops >= 1, "channel needs at least one Kraus operator");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let row_maps: Vec<Vec<usize>> = (0..n_ops).map(|_| random_permutation(dim, &mut rng)).collect();

    let mut operators = vec![ComplexMatrix::zeros(dim, dim); n_ops];
    for j in 0..dim {
        let mut column: Vec<Complex64> = Vec::with_capacity(n_ops);
        let mut norm_sqr = 0.0;
        while norm_sqr < 1e-24 {
            column = (0..n_ops).map(|_| complex_gaussian(&mut rng)).collect();
            norm_sqr = column.iter().map(|z| z.norm_sqr()).sum();
        }
        let inv_norm = Complex64::new(1.0 / norm_sqr.sqrt(), 0.0);
        for (n, amp) in column.iter().enumerate() {
            operators[n].set(row_maps[n][j], j, amp * inv_norm);
        }
    }
    KrausChannel::new(operators)
        .expect("permutation row maps with normalized columns satisfy completeness")
}

/// Ginibre-sampled density matrix G G^H / Tr(G G^H) with G of shape
/// dim x rank; deterministic in `seed`. rank < dim yields rank-deficient states.
pub fn sample_density_matrix(dim: usize, rank: usize, seed: u64) -> DensityMatrix {
    assert!(dim >= 1, "state needs dim >= 1");
    assert!((1..=dim).contains(&rank), "rank must lie in 1..=dim");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..rank).map(|_| complex_gaussian(&mut rng)).collect())
        .collect();
    let gram = ComplexMatrix::from_fn(dim, dim, |i, j| {
        (0..rank).map(|k| g[i][k] * g[j][k].conj()).sum()
    });
    let trace = gram.trace().re;
    let rho = gram.scale(Complex64::new(1.0 / trace, 0.0));
    validate_density(&rho, HERMITICITY_TOL).expect("normalized Gram matrix is a valid state")
}

/// Haar-like random pure state from normalized Gaussian amplitudes;
/// deterministic in `seed`.
pub fn sample_pure_state(dim: usize, seed: u64) -> PureState {
    assert!(dim >= 1, "state needs dim >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps: Vec<Complex64> = Vec::with_capacity(dim);
    let mut norm_sqr = 0.0;
    while norm_sqr < 1e-24 {
        amps = (0..dim).map(|_| complex_gaussian(&mut rng)).collect();
        norm_sqr = amps.iter().map(|z| z.norm_sqr()).sum();
    }
    let inv_norm = Complex64::new(1.0 / norm_sqr.sqrt(), 0.0);
    PureState::new(amps.into_iter().map(|z| z * inv_norm).collect())
        .expect("normalized Gaussian amplitudes form a valid pure state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HERMITICITY_TOL;

    #[test]
    fn diagonal_state_is_incoherent() {
        let rho = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        assert!(is_incoherent_state(&rho, DEFAULT_INCOHERENCE_TOL));
    }

    #[test]
    fn plus_state_is_coherent() {
        let rho = PureState::equal_superposition(2, &[0, 1]).unwrap().to_density();
        assert!(!is_incoherent_state(&rho, DEFAULT_INCOHERENCE_TOL));
    }

    #[test]
    fn maximally_mixed_is_incoherent() {
        let rho = DensityMatrix::maximally_mixed(5);
        assert!(is_incoherent_state(&rho, DEFAULT_INCOHERENCE_TOL));
    }

    #[test]
    fn swap_unitary_is_incoherent_kraus() {
        let u = build_swap_unitary(3, 1, 2).unwrap();
        assert!(is_incoherent_kraus(&u, DEFAULT_INCOHERENCE_TOL));
    }

    #[test]
    fn hadamard_is_not_incoherent_kraus() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = ComplexMatrix::new(
            2,
            2,
            vec![
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(-s, 0.0),
            ],
        )
        .unwrap();
        let channel = KrausChannel::unitary(h).unwrap();
        assert!(!is_incoherent_kraus(&channel, DEFAULT_INCOHERENCE_TOL));
    }

    #[test]
    fn dephasing_is_incoherent_and_complete() {
        let channel = build_dephasing(4);
        assert!(is_incoherent_kraus(&channel, DEFAULT_INCOHERENCE_TOL));
        assert_eq!(channel.n_operators(), 4);
    }

    #[test]
    fn identity_channel_preserves_state() {
        let rho = sample_density_matrix(3, 3, 11);
        let identity = KrausChannel::unitary(ComplexMatrix::identity(3)).unwrap();
        let out = apply_channel(&rho, &identity).unwrap();
        assert!(rho.matrix().max_abs_diff(out.matrix()) <= 1e-12);
    }

    #[test]
    fn swap_channel_moves_superposition_to_top_rung() {
        // (|0>+|1>)/sqrt(2) under swap(1, 2) in dim 3 becomes (|0>+|2>)/sqrt(2).
        let rho = PureState::equal_superposition(3, &[0, 1]).unwrap().to_density();
        let u = build_swap_unitary(3, 1, 2).unwrap();
        let out = apply_channel(&rho, &u).unwrap();
        let expected = PureState::equal_superposition(3, &[0, 2]).unwrap().to_density();
        assert!(out.matrix().max_abs_diff(expected.matrix()) <= 1e-12);
    }

    #[test]
    fn dephasing_kills_off_diagonals() {
        let rho = PureState::equal_superposition(2, &[0, 1]).unwrap().to_density();
        let out = apply_channel(&rho, &build_dephasing(2)).unwrap();
        let expected = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        assert!(out.matrix().max_abs_diff(expected.matrix()) <= 1e-12);
    }

    #[test]
    fn dephasing_fixes_diagonal_states() {
        let rho = DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]).unwrap();
        let out = apply_channel(&rho, &build_dephasing(3)).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) <= 1e-12);
    }

    #[test]
    fn basis_measurement_outcomes_on_plus() {
        let rho = PureState::equal_superposition(2, &[0, 1]).unwrap().to_density();
        let ensemble = selective_outcomes(&rho, &build_dephasing(2), DEFAULT_P_FLOOR).unwrap();
        assert_eq!(ensemble.outcomes.len(), 2);
        for (k, outcome) in ensemble.outcomes.iter().enumerate() {
            assert!((outcome.probability - 0.5).abs() < 1e-12);
            let state = outcome.state.as_ref().unwrap();
            assert!((state.get(k, k).re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_channel_has_single_outcome() {
        let rho = sample_density_matrix(3, 2, 5);
        let u = build_swap_unitary(3, 0, 2).unwrap();
        let ensemble = selective_outcomes(&rho, &u, DEFAULT_P_FLOOR).unwrap();
        assert_eq!(ensemble.outcomes.len(), 1);
        assert!((ensemble.outcomes[0].probability - 1.0).abs() < 1e-12);
        let state = ensemble.outcomes[0].state.as_ref().unwrap();
        let direct = apply_channel(&rho, &u).unwrap();
        assert!(state.matrix().max_abs_diff(direct.matrix()) <= 1e-12);
    }

    #[test]
    fn vanishing_branch_is_flagged() {
        let rho = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let ensemble = selective_outcomes(&rho, &build_dephasing(2), DEFAULT_P_FLOOR).unwrap();
        assert!((ensemble.outcomes[0].probability - 1.0).abs() < 1e-12);
        assert!(!ensemble.outcomes[0].is_vanishing());
        assert!(ensemble.outcomes[1].is_vanishing());
    }

    #[test]
    fn swap_is_an_involution() {
        let u = build_swap_unitary(5, 1, 4).unwrap();
        let op = &u.operators()[0];
        let square = op.matmul(op);
        assert!(square.max_abs_diff(&ComplexMatrix::identity(5)) <= 1e-12);
    }

    #[test]
    fn swap_rejects_bad_indices() {
        assert!(matches!(
            build_swap_unitary(3, 1, 3),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            build_swap_unitary(3, 2, 2),
            Err(Error::EqualIndices { .. })
        ));
    }

    #[test]
    fn permutation_identity_is_identity_channel() {
        let channel = build_permutation_unitary(&[0, 1, 2]).unwrap();
        assert!(channel.operators()[0].max_abs_diff(&ComplexMatrix::identity(3)) == 0.0);
    }

    #[test]
    fn transposition_equals_swap_builder() {
        let via_perm = build_permutation_unitary(&[0, 3, 2, 1]).unwrap();
        let via_swap = build_swap_unitary(4, 1, 3).unwrap();
        assert!(via_perm.operators()[0].max_abs_diff(&via_swap.operators()[0]) == 0.0);
    }

    #[test]
    fn cycle_rotates_diagonal() {
        // 0 -> 1 -> 2 -> 0 sends diag(a, b, c) to diag(c, a, b).
        let rho = DensityMatrix::from_diagonal(&[0.5, 0.3, 0.2]).unwrap();
        let channel = build_permutation_unitary(&[1, 2, 0]).unwrap();
        let out = apply_channel(&rho, &channel).unwrap();
        let expected = DensityMatrix::from_diagonal(&[0.2, 0.5, 0.3]).unwrap();
        assert!(out.matrix().max_abs_diff(expected.matrix()) <= 1e-12);
    }

    #[test]
    fn permutation_rejects_non_bijection() {
        assert!(matches!(
            build_permutation_unitary(&[0, 0, 2]),
            Err(Error::NotABijection { .. })
        ));
        assert!(matches!(
            build_permutation_unitary(&[0, 3]),
            Err(Error::NotABijection { .. })
        ));
    }

    #[test]
    fn single_operator_sample_is_monomial_unitary() {
        let channel = sample_incoherent_channel(4, 1, 42);
        let op = &channel.operators()[0];
        // completeness with one operator forces unit-modulus entries
        for j in 0..4 {
            let col_norms: Vec<f64> = (0..4).map(|i| op.get(i, j).norm()).collect();
            let nonzero: Vec<f64> = col_norms.into_iter().filter(|&x| x > 1e-12).collect();
            assert_eq!(nonzero.len(), 1);
            assert!((nonzero[0] - 1.0).abs() < 1e-12);
        }
        let product = op.adjoint().matmul(op);
        assert!(product.max_abs_diff(&ComplexMatrix::identity(4)) <= 1e-12);
    }

    #[test]
    fn sampled_channels_are_incoherent() {
        for seed in 0..20 {
            let channel = sample_incoherent_channel(5, 3, seed);
            assert!(is_incoherent_kraus(&channel, DEFAULT_INCOHERENCE_TOL));
        }
    }

    #[test]
    fn sampled_channel_preserves_diagonality() {
        for seed in 0..20 {
            let channel = sample_incoherent_channel(4, 2, seed);
            let rho = DensityMatrix::from_diagonal(&[0.4, 0.3, 0.2, 0.1]).unwrap();
            let out = apply_channel(&rho, &channel).unwrap();
            assert!(out.max_offdiagonal_modulus() <= 1e-10);
        }
    }

    #[test]
    fn rank_one_sample_is_pure() {
        let rho = sample_density_matrix(5, 1, 9);
        let spectrum = crate::linalg::eigh(rho.matrix()).unwrap();
        let largest = *spectrum.eigenvalues().last().unwrap();
        assert!((largest - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn full_rank_sample_is_valid() {
        let rho = sample_density_matrix(12, 12, 3);
        assert!(validate_density(rho.matrix(), HERMITICITY_TOL).is_ok());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_density_matrix(6, 4, 1234);
        let b = sample_density_matrix(6, 4, 1234);
        assert_eq!(a.matrix().entries(), b.matrix().entries());

        let c = sample_incoherent_channel(5, 3, 77);
        let d = sample_incoherent_channel(5, 3, 77);
        assert_eq!(c, d);

        let e = sample_pure_state(7, 55);
        let f = sample_pure_state(7, 55);
        assert_eq!(e, f);
    }

    #[test]
    fn incomplete_kraus_is_rejected() {
        let half = ComplexMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
        assert!(matches!(
            KrausChannel::new(vec![half]),
            Err(Error::IncompleteKraus { .. })
        ));
    }

    #[test]
    fn channel_json_round_trip() {
        let channel = sample_incoherent_channel(3, 2, 8);
        let json = serde_json::to_string(&channel).unwrap();
        assert!(json.starts_with("{\"dim\":3,\"operators\":["));
        let back: KrausChannel = serde_json::from_str(&json).unwrap();
        assert_eq!(channel, back);
    }
}
