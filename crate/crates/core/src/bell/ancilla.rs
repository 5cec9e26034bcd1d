//! Extra devices `A1`, `A2` that record the candidate index `l` of `P_i+M_i`.
//!
//! After the measurement the internal-state candidates of `P_i+M_i` are
//! `χ_l = Σ_j ⟨ξ(P_i,j)|φ_{P_i,l}⟩ |ξ(P_i,j)⟩|m_j⟩`. For the singlet the
//! reduced state of `P_i+M_i` is degenerate, so these are built from the
//! formula rather than read off an eigendecomposition. The recording
//! interaction `|χ_l⟩|a_0⟩ → |χ_l⟩|a_l⟩` leaves each `χ_l` unchanged.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dynamics::{
    evolve_experiment, measured_reference, overlap, pointer_swap, spin_eigenstates,
};
use super::{pointer_space, pointer_state, set, ExperimentConfig, Side, A1, A2, M1, M2, READY};
use crate::calculus::{joint_distribution, JointDistribution};
use crate::error::Result;
use crate::linalg::{Normalization, Operator, StateVector};

/// `χ_l` on `(P_i, M_i)`.
pub fn candidate_branch(side: Side, theta: f64, l: usize) -> StateVector {
    let (xi1, xi2) = spin_eigenstates(theta, side.particle());
    let mut amplitudes = nalgebra::DVector::<Complex64>::zeros(6);
    for (j, xi) in [xi1, xi2].iter().enumerate() {
        let branch = xi
            .tensor(&pointer_state(side.pointer(), j + 1))
            .expect("distinct labels");
        amplitudes += branch.amplitudes() * Complex64::new(overlap(side, theta, j, l), 0.0);
    }
    let space = branch_space(side);
    StateVector::new(space, amplitudes.as_slice().to_vec(), Normalization::Strict)
        .expect("χ_l has unit norm")
}

fn branch_space(side: Side) -> crate::linalg::SpaceRegistry {
    super::spin_space(side.particle())
        .concat(&pointer_space(side.pointer()))
        .expect("distinct labels")
}

/// `Σ_l |χ_l⟩⟨χ_l| ⊗ S_{0,l+1} + (1 - Σ_l |χ_l⟩⟨χ_l|) ⊗ 1` on `(P_i, M_i, A_i)`,
/// where `S_{0,l+1}` swaps the ancilla's ready state with outcome `l`.
pub fn ancilla_unitary(side: Side, theta: f64) -> Operator {
    let mut complement = DMatrix::<Complex64>::identity(6, 6);
    let mut matrix = DMatrix::<Complex64>::zeros(18, 18);
    for l in 0..2 {
        let chi = candidate_branch(side, theta, l);
        let proj = chi.amplitudes() * chi.amplitudes().adjoint();
        matrix += proj.kronecker(&pointer_swap(l + 1));
        complement -= proj;
    }
    matrix += complement.kronecker(&DMatrix::<Complex64>::identity(3, 3));
    let space = branch_space(side)
        .concat(&pointer_space(side.ancilla()))
        .expect("distinct labels");
    Operator::new(space, matrix).expect("18x18")
}

/// Final state on `(P1, M1, P2, M2, A1, A2)` with both ancilla records made.
pub fn ancilla_experiment(config: &ExperimentConfig) -> Result<StateVector> {
    let ready = pointer_state(A1, READY).tensor(&pointer_state(A2, READY))?;
    evolve_experiment(config)?
        .tensor(&ready)?
        .apply_local(&ancilla_unitary(Side::First, config.theta1))?
        .apply_local(&ancilla_unitary(Side::Second, config.theta2))
}

/// Joint probability over `(A1, A2, M1, M2)`, indexed `(l1, l2, j, k)`.
pub fn ancilla_joint(config: &ExperimentConfig) -> Result<JointDistribution> {
    let reference = measured_reference(ancilla_experiment(config)?)?;
    joint_distribution(
        &[set(&[A1]), set(&[A2]), set(&[M1]), set(&[M2])],
        &reference,
    )
}
