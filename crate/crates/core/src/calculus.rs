//! States relative to a reference system.
//!
//! A [`ReferenceSystem`] owns a pure internal state `|ψ_R⟩`. The state of a
//! subsystem `S` relative to it is the partial trace `Tr_{R∖S} |ψ_R⟩⟨ψ_R|`.
//! When the reference system is isolated, the eigenstates of that reduced
//! operator are the possible internal states of `S`, and a joint probability
//! can be assigned to candidate choices on pairwise disjoint subsystems:
//!
//! ```text
//! P(S_1, j_1, …, S_n, j_n) = Tr[π_{S_1,j_1} ⋯ π_{S_n,j_n} ρ_{S_1+…+S_n}(R)]
//! ```
//!
//! Requests that mix overlapping subsystems (for example `P1+M1` together
//! with `M1`) are rejected with [`Error::NonDisjointSystems`]: no such joint
//! probability exists.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, DensityOperator, Spectrum, StateVector, SystemSet, DEGENERACY_GAP,
};

/// Eigenvalues at or below this are not possible internal states.
pub const CANDIDATE_THRESHOLD: f64 = 1e-12;

/// Tolerance for validating a caller-supplied candidate basis.
pub const BASIS_TOLERANCE: f64 = 1e-10;

/// Tolerance on table normalization.
pub const TABLE_TOLERANCE: f64 = 1e-10;

const PROBABILITY_SLACK: f64 = 1e-12;

/// A system whose pure internal state defines the states of its parts.
///
/// Whether the system is isolated is declared by whoever builds it; it
/// cannot be read off a state snapshot. Candidate bases for subsystems with
/// degenerate reduced states may be attached with
/// [`ReferenceSystem::with_candidate_basis`].
#[derive(Debug, Clone)]
pub struct ReferenceSystem {
    labels: SystemSet,
    internal_state: StateVector,
    isolated: bool,
    bases: BTreeMap<SystemSet, Vec<StateVector>>,
}

impl ReferenceSystem {
    /// A reference system that has never interacted with anything outside its labels.
    pub fn isolated(internal_state: StateVector) -> Self {
        Self::build(internal_state, true)
    }

    /// A reference system that is not interacting now but may have in the past.
    pub fn closed(internal_state: StateVector) -> Self {
        Self::build(internal_state, false)
    }

    fn build(internal_state: StateVector, isolated: bool) -> Self {
        Self {
            labels: internal_state.space().system_set(),
            internal_state,
            isolated,
            bases: BTreeMap::new(),
        }
    }

    pub fn labels(&self) -> &SystemSet {
        &self.labels
    }

    pub fn internal_state(&self) -> &StateVector {
        &self.internal_state
    }

    pub fn is_isolated(&self) -> bool {
        self.isolated
    }

    /// Fixes the candidate basis of `system`, in the given order.
    ///
    /// Each vector must be an eigenvector of `state_of(system, self)`, the set
    /// must be orthonormal, and the eigenvalues must sum to one (the basis
    /// spans the support). Vectors may list their labels in any order.
    pub fn with_candidate_basis(
        mut self,
        system: SystemSet,
        basis: Vec<StateVector>,
    ) -> Result<Self> {
        let rho = state_of(&system, &self)?;
        let order: Vec<&str> = rho.space().labels().collect();
        let invalid = |reason: String| Error::InvalidBasis {
            system: system.clone(),
            reason,
        };
        if basis.is_empty() {
            return Err(invalid("empty basis".into()));
        }
        let mut aligned = Vec::with_capacity(basis.len());
        for v in basis {
            if v.space().system_set() != system {
                return Err(invalid(format!("vector lives on {}", v.space())));
            }
            aligned.push(v.reordered(&order)?);
        }
        for (i, a) in aligned.iter().enumerate() {
            for (j, b) in aligned.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                let dot = a.amplitudes().dotc(b.amplitudes());
                if (dot - Complex64::new(target, 0.0)).norm() > BASIS_TOLERANCE {
                    return Err(invalid(format!("⟨v{i}|v{j}⟩ = {dot}")));
                }
            }
        }
        let mut total = 0.0;
        for (i, v) in aligned.iter().enumerate() {
            let image = rho.matrix() * v.amplitudes();
            let weight = v.amplitudes().dotc(&image).re;
            let residual = (image - v.amplitudes() * Complex64::new(weight, 0.0)).norm();
            if residual > BASIS_TOLERANCE {
                return Err(invalid(format!(
                    "v{i} is not an eigenvector (residual {residual:e})"
                )));
            }
            total += weight;
        }
        if (total - 1.0).abs() > BASIS_TOLERANCE {
            return Err(invalid(format!(
                "weights sum to {total}, basis misses the support"
            )));
        }
        self.bases.insert(system, aligned);
        Ok(self)
    }
}

fn check_member(system: &SystemSet, reference: &ReferenceSystem) -> Result<()> {
    if system.is_empty() {
        return Err(Error::EmptySystem);
    }
    match system.iter().find(|l| !reference.labels.contains(l)) {
        Some(missing) => Err(Error::UnknownLabel(missing.to_string())),
        None => Ok(()),
    }
}

/// `ρ_S(R) = Tr_{R∖S} |ψ_R⟩⟨ψ_R|`.
pub fn state_of(system: &SystemSet, reference: &ReferenceSystem) -> Result<DensityOperator> {
    check_member(system, reference)?;
    reference.internal_state.reduced(system)
}

/// Possible internal states of `system`: eigenpairs of `ρ_S(I)` with nonzero weight.
///
/// If a basis was attached with [`ReferenceSystem::with_candidate_basis`] it
/// is returned as-is, in its given order, with weights `⟨v|ρ_S(I)|v⟩`
/// (zero-weight members are kept so scenario indices stay fixed). Otherwise
/// the spectrum of `ρ_S(I)` is used, sorted by descending eigenvalue.
pub fn internal_state_candidates(
    system: &SystemSet,
    reference: &ReferenceSystem,
) -> Result<Spectrum> {
    if !reference.isolated {
        return Err(Error::NotIsolated);
    }
    let rho = state_of(system, reference)?;
    if let Some(basis) = reference.bases.get(system) {
        let pairs = basis
            .iter()
            .map(|v| Ok((rho.expectation(v)?, v.clone())))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Spectrum::from_ordered_pairs(pairs, DEGENERACY_GAP));
    }
    Ok(eig_hermitian(&rho)?.without_null(CANDIDATE_THRESHOLD))
}

/// A choice of candidate index for each of several pairwise disjoint systems.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateAssignment {
    entries: Vec<(SystemSet, usize)>,
}

impl CandidateAssignment {
    pub fn new(entries: Vec<(SystemSet, usize)>) -> Result<Self> {
        let systems: Vec<SystemSet> = entries.iter().map(|(s, _)| s.clone()).collect();
        ensure_disjoint(&systems)?;
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(SystemSet, usize)] {
        &self.entries
    }
}

/// Fails on the first pair of systems sharing a label.
pub fn ensure_disjoint(systems: &[SystemSet]) -> Result<()> {
    for (i, first) in systems.iter().enumerate() {
        if first.is_empty() {
            return Err(Error::EmptySystem);
        }
        for second in &systems[i + 1..] {
            let overlap = first.intersection(second);
            if !overlap.is_empty() {
                return Err(Error::NonDisjointSystems {
                    first: first.clone(),
                    second: second.clone(),
                    overlap,
                });
            }
        }
    }
    Ok(())
}

/// Candidate states of disjoint systems together with their joint reduced state.
///
/// The projectors `π_{S_i,j_i}` act on disjoint factors, so their product is
/// the rank-one projector onto `Φ = φ_{S_1,j_1} ⊗ ⋯ ⊗ φ_{S_n,j_n}` and
/// `Tr[π_1 ⋯ π_n ρ] = ⟨Φ|ρ|Φ⟩`.
struct JointEvaluator {
    rho: DensityOperator,
    candidates: Vec<Vec<StateVector>>,
}

impl JointEvaluator {
    fn new(systems: &[SystemSet], reference: &ReferenceSystem) -> Result<Self> {
        ensure_disjoint(systems)?;
        if !reference.isolated {
            return Err(Error::NotIsolated);
        }
        let union = systems
            .iter()
            .fold(SystemSet::default(), |acc, s| acc.union(s));
        let rho = state_of(&union, reference)?;
        let candidates = systems
            .iter()
            .map(|s| {
                Ok(internal_state_candidates(s, reference)?
                    .eigenvectors()
                    .cloned()
                    .collect())
            })
            .collect::<Result<Vec<Vec<_>>>>()?;
        Ok(Self { rho, candidates })
    }

    fn counts(&self) -> Vec<usize> {
        self.candidates.iter().map(Vec::len).collect()
    }

    fn product_state(&self, systems: &[SystemSet], indices: &[usize]) -> Result<StateVector> {
        let mut product: Option<StateVector> = None;
        for ((candidates, &index), system) in self.candidates.iter().zip(indices).zip(systems) {
            let phi = candidates
                .get(index)
                .ok_or_else(|| Error::CandidateOutOfRange {
                    system: system.clone(),
                    index,
                    count: candidates.len(),
                })?;
            product = Some(match product {
                None => phi.clone(),
                Some(acc) => acc.tensor(phi)?,
            });
        }
        product.ok_or(Error::EmptySystem)
    }

    fn probability(&self, systems: &[SystemSet], indices: &[usize]) -> Result<f64> {
        let phi = self.product_state(systems, indices)?;
        let value = self.rho.expectation(&phi)?;
        if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&value) {
            return Err(Error::ProbabilityOutOfRange { value });
        }
        Ok(value.clamp(0.0, 1.0))
    }
}

/// Joint probability that each system's internal state is its assigned candidate.
pub fn joint_probability(
    assignment: &CandidateAssignment,
    reference: &ReferenceSystem,
) -> Result<f64> {
    let (systems, indices): (Vec<SystemSet>, Vec<usize>) =
        assignment.entries.iter().cloned().unzip();
    JointEvaluator::new(&systems, reference)?.probability(&systems, &indices)
}

/// The full table of [`joint_probability`] over every candidate index tuple.
pub fn joint_distribution(
    systems: &[SystemSet],
    reference: &ReferenceSystem,
) -> Result<JointDistribution> {
    let evaluator = JointEvaluator::new(systems, reference)?;
    let counts = evaluator.counts();
    let cells: usize = counts.iter().product();
    let mut probabilities = Vec::with_capacity(cells);
    for flat in 0..cells {
        let indices = unflatten(flat, &counts);
        probabilities.push(evaluator.probability(systems, &indices)?);
    }
    JointDistribution::new(systems.iter().cloned().zip(counts).collect(), probabilities)
}

/// Draws one candidate index tuple from [`joint_distribution`].
pub fn sample_assignment(
    systems: &[SystemSet],
    reference: &ReferenceSystem,
    seed: u64,
) -> Result<Vec<usize>> {
    Ok(joint_distribution(systems, reference)?.sample_seeded(seed))
}

fn unflatten(mut flat: usize, counts: &[usize]) -> Vec<usize> {
    let mut indices = vec![0; counts.len()];
    for (slot, &count) in indices.iter_mut().zip(counts).rev() {
        *slot = flat % count;
        flat /= count;
    }
    indices
}

/// Dense probability table over candidate indices, row-major in axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    axes: Vec<(SystemSet, usize)>,
    probabilities: Vec<f64>,
}

impl JointDistribution {
    /// Entries must be `≥ -1e-12` and sum to one within [`TABLE_TOLERANCE`].
    pub fn new(axes: Vec<(SystemSet, usize)>, probabilities: Vec<f64>) -> Result<Self> {
        let cells: usize = axes.iter().map(|(_, n)| n).product();
        if probabilities.len() != cells {
            return Err(Error::ShapeMismatch {
                expected: cells,
                actual: probabilities.len(),
            });
        }
        if let Some(&value) = probabilities.iter().find(|p| **p < -PROBABILITY_SLACK) {
            return Err(Error::ProbabilityOutOfRange { value });
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > TABLE_TOLERANCE {
            return Err(Error::ProbabilityOutOfRange { value: total });
        }
        Ok(Self {
            axes,
            probabilities,
        })
    }

    pub fn axes(&self) -> &[(SystemSet, usize)] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|(_, n)| *n).collect()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn get(&self, indices: &[usize]) -> f64 {
        let shape = self.shape();
        let flat = indices
            .iter()
            .zip(&shape)
            .fold(0, |acc, (i, n)| acc * n + i);
        self.probabilities[flat]
    }

    /// `(indices, probability)` for every cell, in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let shape = self.shape();
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(flat, &p)| (unflatten(flat, &shape), p))
    }

    /// Sums out every axis not listed in `keep` (positions into [`Self::axes`]).
    pub fn marginal(&self, keep: &[usize]) -> JointDistribution {
        let shape = self.shape();
        let axes: Vec<(SystemSet, usize)> = keep.iter().map(|&k| self.axes[k].clone()).collect();
        let kept_shape: Vec<usize> = axes.iter().map(|(_, n)| *n).collect();
        let mut probabilities = vec![0.0; kept_shape.iter().product()];
        for (flat, &p) in self.probabilities.iter().enumerate() {
            let idx = unflatten(flat, &shape);
            let target = keep
                .iter()
                .zip(&kept_shape)
                .fold(0, |acc, (&k, n)| acc * n + idx[k]);
            probabilities[target] += p;
        }
        JointDistribution {
            axes,
            probabilities,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let index = WeightedIndex::new(&self.probabilities)
            .expect("validated table has positive total weight");
        unflatten(index.sample(rng), &self.shape())
    }

    /// `count` draws from one generator seeded with `seed`.
    pub fn sample_many(&self, seed: u64, count: usize) -> Vec<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let index = WeightedIndex::new(&self.probabilities)
            .expect("validated table has positive total weight");
        let shape = self.shape();
        (0..count)
            .map(|_| unflatten(index.sample(&mut rng), &shape))
            .collect()
    }

    pub fn sample_seeded(&self, seed: u64) -> Vec<usize> {
        self.sample(&mut ChaCha8Rng::seed_from_u64(seed))
    }
}
