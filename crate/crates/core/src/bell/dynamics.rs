use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{
    entangled_pair_state, outcome_basis, pointer_space, pointer_state, set, spin_space,
    ExperimentConfig, Side, A1, A2, M1, M2, P1, P2, READY,
};
use crate::calculus::{state_of, ReferenceSystem};
use crate::error::Result;
use crate::linalg::{Normalization, Operator, StateVector};

/// `(ξ_1(θ), ξ_2(θ))` = `(cos(θ/2)|↑⟩ + sin(θ/2)|↓⟩, -sin(θ/2)|↑⟩ + cos(θ/2)|↓⟩)`.
pub fn spin_eigenstates(theta: f64, label: &str) -> (StateVector, StateVector) {
    let (s, c) = (theta / 2.0).sin_cos();
    let make = |amps: [f64; 2]| {
        StateVector::from_real(spin_space(label), &amps, Normalization::Rescale)
            .expect("rotation column is a unit vector")
    };
    (make([c, s]), make([-s, c]))
}

/// `⟨ξ_j(θ)|φ_{P_i,l}⟩`, real for axes in the x–z plane.
pub(crate) fn overlap(side: Side, theta: f64, j: usize, l: usize) -> f64 {
    let (s, c) = (theta / 2.0).sin_cos();
    let xi = if j == 0 { [c, s] } else { [-s, c] };
    xi[side.pair_component(l)]
}

/// Controlled pointer swap on `(particle, pointer)`:
/// `|ξ_j⟩|m_0⟩ ↔ |ξ_j⟩|m_j⟩`, other pointer states untouched.
pub fn measurement_unitary(theta: f64, particle: &str, pointer: &str) -> Operator {
    let (xi1, xi2) = spin_eigenstates(theta, particle);
    let mut matrix = DMatrix::<Complex64>::zeros(6, 6);
    for (j, xi) in [xi1, xi2].iter().enumerate() {
        let proj = xi.amplitudes() * xi.amplitudes().adjoint();
        matrix += proj.kronecker(&pointer_swap(j + 1));
    }
    let space = spin_space(particle)
        .concat(&pointer_space(pointer))
        .expect("distinct labels");
    Operator::new(space, matrix).expect("6x6")
}

/// Permutation exchanging pointer states `m_0` and `m_target`.
pub(crate) fn pointer_swap(target: usize) -> DMatrix<Complex64> {
    let mut swap = DMatrix::<Complex64>::identity(3, 3);
    swap.swap_rows(READY, target);
    swap
}

/// Final state on `(P1, M1, P2, M2)` after both local measurements.
pub fn evolve_experiment(config: &ExperimentConfig) -> Result<StateVector> {
    let ready = pointer_state(M1, READY).tensor(&pointer_state(M2, READY))?;
    let initial = entangled_pair_state(config)?
        .tensor(&ready)?
        .reordered(&[P1, M1, P2, M2])?;
    initial
        .apply_local(&measurement_unitary(config.theta1, P1, M1))?
        .apply_local(&measurement_unitary(config.theta2, P2, M2))
}

/// Single-particle `S_z` measurement `(α|↑⟩ + β|↓⟩)|m_0⟩ → α|↑⟩|m_↑⟩ + β|↓⟩|m_↓⟩` on `(P, M)`.
pub fn intro_measurement(alpha: Complex64, beta: Complex64) -> Result<StateVector> {
    let spin = StateVector::new(spin_space("P"), vec![alpha, beta], Normalization::Strict)?;
    spin.tensor(&pointer_state("M", READY))?
        .apply_local(&measurement_unitary(0.0, "P", "M"))
}

/// Isolated reference system over `state` with the outcome pointer states
/// fixed as candidate bases of every device present (`M1`, `M2`, `A1`, `A2`).
pub fn measured_reference(state: StateVector) -> Result<ReferenceSystem> {
    let labels = state.space().system_set();
    let mut reference = ReferenceSystem::isolated(state);
    for device in [M1, M2, A1, A2] {
        if labels.contains(device) {
            reference = reference.with_candidate_basis(set(&[device]), outcome_basis(device))?;
        }
    }
    Ok(reference)
}

/// `P(M_i, j)`: the outcome-pointer diagonal of `ρ_{M_i}` relative to the whole final state.
pub fn device_marginal(final_state: &StateVector, side: Side) -> Result<[f64; 2]> {
    let reference = ReferenceSystem::isolated(final_state.clone());
    let rho = state_of(&set(&[side.pointer()]), &reference)?;
    Ok([1, 2].map(|k| rho.matrix()[(k, k)].re))
}

/// `P(M_i, j) = Σ_l |c_l|² |⟨ξ(P_i,j)|φ_{P_i,l}⟩|²`.
pub fn device_marginal_closed_form(config: &ExperimentConfig, side: Side) -> [f64; 2] {
    let theta = config.theta(side);
    let c = config.coefficients();
    [0, 1].map(|j| {
        (0..2)
            .map(|l| c[l].norm_sqr() * overlap(side, theta, j, l).powi(2))
            .sum()
    })
}
