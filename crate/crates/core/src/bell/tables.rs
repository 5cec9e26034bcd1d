use std::fmt;

use super::dynamics::{evolve_experiment, measured_reference, overlap};
use super::{ancilla_experiment, set, ExperimentConfig, Side, M1, M2};
use crate::calculus::{joint_distribution, TABLE_TOLERANCE};
use crate::error::{Error, Result};

/// Which route produced a correlation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrelationKind {
    /// `|Σ_l c_l ⟨ξ(P1,j)|φ_{P1,l}⟩⟨ξ(P2,k)|φ_{P2,l}⟩|²`
    Entangled,
    /// `Σ_l |c_l|² |⟨ξ(P1,j)|φ_{P1,l}⟩|² |⟨ξ(P2,k)|φ_{P2,l}⟩|²`
    Factorized,
    /// Joint probability of the device candidates on the evolved state.
    PostulateC,
    /// Frequencies from sampling.
    Empirical,
}

impl CorrelationKind {
    pub fn name(self) -> &'static str {
        match self {
            CorrelationKind::Entangled => "entangled",
            CorrelationKind::Factorized => "factorized",
            CorrelationKind::PostulateC => "postulate_c",
            CorrelationKind::Empirical => "empirical",
        }
    }
}

impl fmt::Display for CorrelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `P(M1, j, M2, k)` at fixed angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTable {
    pub settings: (f64, f64),
    pub table: [[f64; 2]; 2],
    pub kind: CorrelationKind,
}

impl CorrelationTable {
    pub fn new(settings: (f64, f64), table: [[f64; 2]; 2], kind: CorrelationKind) -> Result<Self> {
        let cells = table.iter().flatten();
        if let Some(&value) = cells.clone().find(|p| **p < -1e-12) {
            return Err(Error::ProbabilityOutOfRange { value });
        }
        let total: f64 = cells.sum();
        if (total - 1.0).abs() > TABLE_TOLERANCE {
            return Err(Error::ProbabilityOutOfRange { value: total });
        }
        Ok(Self {
            settings,
            table,
            kind,
        })
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.table[j][k]
    }

    pub fn total(&self) -> f64 {
        self.table.iter().flatten().sum()
    }

    /// `E = Σ_{jk} (-1)^{j+k} P(j, k)`.
    pub fn correlator(&self) -> f64 {
        self.table[0][0] - self.table[0][1] - self.table[1][0] + self.table[1][1]
    }

    /// `P(M1, j)`.
    pub fn first_marginal(&self) -> [f64; 2] {
        [0, 1].map(|j| self.table[j][0] + self.table[j][1])
    }

    /// `P(M2, k)`.
    pub fn second_marginal(&self) -> [f64; 2] {
        [0, 1].map(|k| self.table[0][k] + self.table[1][k])
    }

    pub fn transposed(&self) -> Self {
        Self {
            settings: (self.settings.1, self.settings.0),
            table: [
                [self.table[0][0], self.table[1][0]],
                [self.table[0][1], self.table[1][1]],
            ],
            kind: self.kind,
        }
    }

    /// Largest elementwise `|self - other|`.
    pub fn max_abs_diff(&self, other: &CorrelationTable) -> f64 {
        self.table
            .iter()
            .flatten()
            .zip(other.table.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn build(
    config: &ExperimentConfig,
    kind: CorrelationKind,
    cell: impl Fn(usize, usize) -> f64,
) -> Result<CorrelationTable> {
    let table = [0, 1].map(|j| [0, 1].map(|k| cell(j, k)));
    CorrelationTable::new((config.theta1, config.theta2), table, kind)
}

/// Outcome correlations of the entangled pair, in closed form.
pub fn correlation_entangled(config: &ExperimentConfig) -> Result<CorrelationTable> {
    let c = config.coefficients();
    build(config, CorrelationKind::Entangled, |j, k| {
        (0..2)
            .map(|l| {
                c[l] * overlap(Side::First, config.theta1, j, l)
                    * overlap(Side::Second, config.theta2, k, l)
            })
            .sum::<num_complex::Complex64>()
            .norm_sqr()
    })
}

/// Outcome correlations if each particle carried its candidate index into
/// the measurement independently.
pub fn correlation_factorized(config: &ExperimentConfig) -> Result<CorrelationTable> {
    let c = config.coefficients();
    build(config, CorrelationKind::Factorized, |j, k| {
        (0..2)
            .map(|l| {
                c[l].norm_sqr()
                    * overlap(Side::First, config.theta1, j, l).powi(2)
                    * overlap(Side::Second, config.theta2, k, l).powi(2)
            })
            .sum()
    })
}

/// Joint probability of the device candidates `({M1}, {M2})` on the evolved state.
///
/// With `config.ancilla` set the ancilla devices are attached first.
pub fn correlation_postulate_c(config: &ExperimentConfig) -> Result<CorrelationTable> {
    let state = if config.ancilla {
        ancilla_experiment(config)?
    } else {
        evolve_experiment(config)?
    };
    let reference = measured_reference(state)?;
    let dist = joint_distribution(&[set(&[M1]), set(&[M2])], &reference)?;
    build(config, CorrelationKind::PostulateC, |j, k| {
        dist.get(&[j, k])
    })
}

/// The four-index table
/// `|c_{l1}|² δ_{l1,l2} |⟨ξ(P1,j)|φ_{P1,l1}⟩|² |⟨ξ(P2,k)|φ_{P2,l2}⟩|²`,
/// indexed `(l1, l2, j, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntuitiveJoint {
    values: [f64; 16],
}

impl IntuitiveJoint {
    fn flat(l1: usize, l2: usize, j: usize, k: usize) -> usize {
        ((l1 * 2 + l2) * 2 + j) * 2 + k
    }

    pub fn get(&self, l1: usize, l2: usize, j: usize, k: usize) -> f64 {
        self.values[Self::flat(l1, l2, j, k)]
    }

    /// Row-major over `(l1, l2, j, k)`.
    pub fn values(&self) -> &[f64; 16] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Summed over `(l1, l2)`.
    pub fn outcome_marginal(&self) -> [[f64; 2]; 2] {
        [0, 1].map(|j| [0, 1].map(|k| (0..4).map(|l| self.get(l / 2, l % 2, j, k)).sum()))
    }

    /// Summed over `(j, k)`.
    pub fn candidate_marginal(&self) -> [[f64; 2]; 2] {
        [0, 1].map(|l1| [0, 1].map(|l2| (0..4).map(|o| self.get(l1, l2, o / 2, o % 2)).sum()))
    }
}

pub fn intuitive_joint(config: &ExperimentConfig) -> IntuitiveJoint {
    let c = config.coefficients();
    let mut values = [0.0; 16];
    for l1 in 0..2 {
        for l2 in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    values[IntuitiveJoint::flat(l1, l2, j, k)] = if l1 == l2 {
                        c[l1].norm_sqr()
                            * overlap(Side::First, config.theta1, j, l1).powi(2)
                            * overlap(Side::Second, config.theta2, k, l2).powi(2)
                    } else {
                        0.0
                    };
                }
            }
        }
    }
    IntuitiveJoint { values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn singlet_equal_angles_anticorrelate() {
        for k in 0..10 {
            let theta = 0.6 * k as f64 - 2.0;
            let t = correlation_entangled(&ExperimentConfig::singlet(theta, theta)).unwrap();
            assert_abs_diff_eq!(t.get(0, 0), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(t.get(1, 1), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(t.get(0, 1), 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(t.get(1, 0), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn singlet_correlators_match_analytic_forms() {
        for i in 0..24 {
            for k in 0..24 {
                let (t1, t2) = (i as f64 * PI / 12.0, k as f64 * PI / 12.0 - PI);
                let config = ExperimentConfig::singlet(t1, t2);
                let e = correlation_entangled(&config).unwrap().correlator();
                assert_abs_diff_eq!(e, -(t1 - t2).cos(), epsilon = 1e-14);
                let f = correlation_factorized(&config).unwrap().correlator();
                assert_abs_diff_eq!(f, -t1.cos() * t2.cos(), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn product_state_tables_coincide() {
        let config = ExperimentConfig::real(1.0, 0.0, 0.9, -0.4).unwrap();
        let e = correlation_entangled(&config).unwrap();
        let f = correlation_factorized(&config).unwrap();
        assert!(e.max_abs_diff(&f) < 1e-15);
        let m1 = e.first_marginal();
        let m2 = e.second_marginal();
        for j in 0..2 {
            for k in 0..2 {
                assert_abs_diff_eq!(e.get(j, k), m1[j] * m2[k], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn z_axis_tables_coincide() {
        let config = ExperimentConfig::real(0.6, 0.8, 0.0, 0.0).unwrap();
        let e = correlation_entangled(&config).unwrap();
        let f = correlation_factorized(&config).unwrap();
        assert!(e.max_abs_diff(&f) < 1e-15);
        // φ_{P2,1} = ↓, so candidate l = 0 shows up as outcomes (0, 1)
        assert_abs_diff_eq!(e.get(0, 1), 0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(e.get(1, 0), 0.64, epsilon = 1e-15);
    }

    #[test]
    fn factorized_marginals_are_device_marginals() {
        let config = ExperimentConfig::real(0.6, -0.8, 1.1, 2.3).unwrap();
        let f = correlation_factorized(&config).unwrap();
        let m1 = super::super::device_marginal_closed_form(&config, Side::First);
        let m2 = super::super::device_marginal_closed_form(&config, Side::Second);
        for j in 0..2 {
            assert_abs_diff_eq!(f.first_marginal()[j], m1[j], epsilon = 1e-12);
            assert_abs_diff_eq!(f.second_marginal()[j], m2[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn intuitive_table_structure() {
        let config = ExperimentConfig::real(0.6, 0.8, 0.4, FRAC_PI_2).unwrap();
        let t = intuitive_joint(&config);
        assert_abs_diff_eq!(t.total(), 1.0, epsilon = 1e-14);
        for j in 0..2 {
            for k in 0..2 {
                assert_eq!(t.get(0, 1, j, k), 0.0);
                assert_eq!(t.get(1, 0, j, k), 0.0);
            }
        }
        let cm = t.candidate_marginal();
        assert_abs_diff_eq!(cm[0][0], 0.36, epsilon = 1e-14);
        assert_abs_diff_eq!(cm[1][1], 0.64, epsilon = 1e-14);
        let f = correlation_factorized(&config).unwrap();
        let om = t.outcome_marginal();
        for j in 0..2 {
            for k in 0..2 {
                assert_abs_diff_eq!(om[j][k], f.get(j, k), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn table_validation() {
        assert!(CorrelationTable::new(
            (0.0, 0.0),
            [[0.5, 0.5], [0.5, 0.0]],
            CorrelationKind::Empirical
        )
        .is_err());
        assert!(CorrelationTable::new(
            (0.0, 0.0),
            [[1.5, -0.5], [0.0, 0.0]],
            CorrelationKind::Empirical
        )
        .is_err());
    }
}
