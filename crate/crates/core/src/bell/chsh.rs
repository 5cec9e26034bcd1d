use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use super::{correlation_entangled, correlation_factorized, ExperimentConfig};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrelatorKind {
    Entangled,
    Factorized,
}

impl CorrelatorKind {
    pub fn name(self) -> &'static str {
        match self {
            CorrelatorKind::Entangled => "entangled",
            CorrelatorKind::Factorized => "factorized",
        }
    }
}

/// Settings `(α, α′)` on the first side and `(β, β′)` on the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshAngles {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
    pub beta_prime: f64,
}

impl ChshAngles {
    pub fn new(alpha: f64, alpha_prime: f64, beta: f64, beta_prime: f64) -> Self {
        Self {
            alpha,
            alpha_prime,
            beta,
            beta_prime,
        }
    }

    /// `(0, π/2, π/4, 3π/4)`, where the singlet reaches `|S| = 2√2`.
    pub fn standard() -> Self {
        Self::new(0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4)
    }

    /// `(0, 2t, t, 3t)`; `t = π/4` gives [`Self::standard`].
    pub fn family(t: f64) -> Self {
        Self::new(0.0, 2.0 * t, t, 3.0 * t)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha, self.alpha_prime, self.beta, self.beta_prime]
    }
}

/// `E(θ1, θ2) = Σ_{jk} (-1)^{j+k} P(j, k)` from the chosen table.
pub fn correlator(
    kind: CorrelatorKind,
    a: Complex64,
    b: Complex64,
    theta1: f64,
    theta2: f64,
) -> Result<f64> {
    let config = ExperimentConfig::new(a, b, theta1, theta2)?;
    let table = match kind {
        CorrelatorKind::Entangled => correlation_entangled(&config)?,
        CorrelatorKind::Factorized => correlation_factorized(&config)?,
    };
    Ok(table.correlator())
}

/// `S = E(α,β) - E(α,β′) + E(α′,β) + E(α′,β′)`.
pub fn chsh(kind: CorrelatorKind, angles: &ChshAngles, a: Complex64, b: Complex64) -> Result<f64> {
    let e = |t1, t2| correlator(kind, a, b, t1, t2);
    Ok(
        e(angles.alpha, angles.beta)? - e(angles.alpha, angles.beta_prime)?
            + e(angles.alpha_prime, angles.beta)?
            + e(angles.alpha_prime, angles.beta_prime)?,
    )
}
