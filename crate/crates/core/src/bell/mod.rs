//! The two-particle spin scenario.
//!
//! Two spin-½ particles start in `Σ_l c_l |φ_{P1,l}⟩|φ_{P2,l}⟩` with
//! `c_1 = a`, `c_2 = -b`, `φ_{P1,·} = (↑, ↓)` and `φ_{P2,·} = (↓, ↑)`. Each
//! particle is measured along an axis in the x–z plane at angle `θ_i` from
//! z by a device with a three-state pointer (ready, outcome 1, outcome 2).
//!
//! Indices are zero-based throughout: outcome `j = 0` is the first
//! eigenstate `ξ_1(θ)` (valued `+1` in correlators), `j = 1` the second
//! (valued `-1`). The same holds for the candidate index `l`.
//!
//! Subsystem labels are fixed: [`P1`], [`M1`], [`P2`], [`M2`] and the
//! ancilla devices [`A1`], [`A2`].

mod ancilla;
mod chsh;
mod dynamics;
mod tables;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Normalization, SpaceRegistry, StateVector, SystemSet};

pub use ancilla::{ancilla_experiment, ancilla_joint, ancilla_unitary, candidate_branch};
pub use chsh::{chsh, correlator, ChshAngles, CorrelatorKind};
pub use dynamics::{
    device_marginal, device_marginal_closed_form, evolve_experiment, intro_measurement,
    measured_reference, measurement_unitary, spin_eigenstates,
};
pub use tables::{
    correlation_entangled, correlation_factorized, correlation_postulate_c, intuitive_joint,
    CorrelationKind, CorrelationTable, IntuitiveJoint,
};

pub const P1: &str = "P1";
pub const M1: &str = "M1";
pub const P2: &str = "P2";
pub const M2: &str = "M2";
pub const A1: &str = "A1";
pub const A2: &str = "A2";

/// Pointer basis index of the ready state; outcome `j` sits at `j + 1`.
pub const READY: usize = 0;

const COEFFICIENT_TOLERANCE: f64 = 1e-12;

/// One side of the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

impl Side {
    pub fn particle(self) -> &'static str {
        match self {
            Side::First => P1,
            Side::Second => P2,
        }
    }

    pub fn pointer(self) -> &'static str {
        match self {
            Side::First => M1,
            Side::Second => M2,
        }
    }

    pub fn ancilla(self) -> &'static str {
        match self {
            Side::First => A1,
            Side::Second => A2,
        }
    }

    /// z-basis index (0 = ↑, 1 = ↓) of the pair-state component `φ_{P_i,l}`.
    pub fn pair_component(self, l: usize) -> usize {
        match self {
            Side::First => l,
            Side::Second => 1 - l,
        }
    }
}

/// Coefficients of the initial pair state and the two measurement angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    a: Complex64,
    b: Complex64,
    pub theta1: f64,
    pub theta2: f64,
    pub ancilla: bool,
}

impl ExperimentConfig {
    /// Fails unless `|a|² + |b|² = 1` within `1e-12`.
    pub fn new(a: Complex64, b: Complex64, theta1: f64, theta2: f64) -> Result<Self> {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !norm.is_finite() || (norm * norm - 1.0).abs() > COEFFICIENT_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            a,
            b,
            theta1,
            theta2,
            ancilla: false,
        })
    }

    pub fn real(a: f64, b: f64, theta1: f64, theta2: f64) -> Result<Self> {
        Self::new(
            Complex64::new(a, 0.0),
            Complex64::new(b, 0.0),
            theta1,
            theta2,
        )
    }

    /// `a = b = 1/√2`: the singlet `(|↑↓⟩ - |↓↑⟩)/√2`.
    pub fn singlet(theta1: f64, theta2: f64) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::real(h, h, theta1, theta2).expect("singlet coefficients are normalized")
    }

    pub fn with_ancilla(mut self, ancilla: bool) -> Self {
        self.ancilla = ancilla;
        self
    }

    pub fn with_angles(mut self, theta1: f64, theta2: f64) -> Self {
        self.theta1 = theta1;
        self.theta2 = theta2;
        self
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// `(c_1, c_2) = (a, -b)`.
    pub fn coefficients(&self) -> [Complex64; 2] {
        [self.a, -self.b]
    }

    pub fn theta(&self, side: Side) -> f64 {
        match side {
            Side::First => self.theta1,
            Side::Second => self.theta2,
        }
    }

    /// Particles exchanged: `(a, b, θ1, θ2) → (-b, -a, θ2, θ1)`.
    ///
    /// Every correlation table of the result is the transpose of this one's.
    pub fn swapped(&self) -> Self {
        Self {
            a: -self.b,
            b: -self.a,
            theta1: self.theta2,
            theta2: self.theta1,
            ancilla: self.ancilla,
        }
    }
}

pub fn spin_space(label: &str) -> SpaceRegistry {
    SpaceRegistry::single(label, 2).expect("2-dim factor")
}

pub fn pointer_space(label: &str) -> SpaceRegistry {
    SpaceRegistry::single(label, 3).expect("3-dim factor")
}

/// Pointer state `m_0` (ready) or `m_{j+1}` (outcome `j`).
pub fn pointer_state(label: &str, index: usize) -> StateVector {
    StateVector::basis(pointer_space(label), index).expect("index below 3")
}

/// The outcome pointer states `(m_1, m_2)`.
pub fn outcome_basis(label: &str) -> Vec<StateVector> {
    vec![pointer_state(label, 1), pointer_state(label, 2)]
}

/// `(φ_{P_i,1}, φ_{P_i,2})` for the given side.
pub fn pair_basis(side: Side) -> [StateVector; 2] {
    let label = side.particle();
    [0, 1].map(|l| {
        StateVector::basis(spin_space(label), side.pair_component(l)).expect("index below 2")
    })
}

/// `Σ_l c_l |φ_{P1,l}⟩|φ_{P2,l}⟩` on `(P1, P2)`.
pub fn entangled_pair_state(config: &ExperimentConfig) -> Result<StateVector> {
    let space = spin_space(P1).concat(&spin_space(P2))?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 4];
    for (l, c) in config.coefficients().into_iter().enumerate() {
        let index = 2 * Side::First.pair_component(l) + Side::Second.pair_component(l);
        amplitudes[index] += c;
    }
    StateVector::new(space, amplitudes, Normalization::Strict)
}

pub(crate) fn set(labels: &[&str]) -> SystemSet {
    SystemSet::new(labels.iter().copied())
}
