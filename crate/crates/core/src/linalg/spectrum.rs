use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::operator::{DensityOperator, DENSITY_TOLERANCE};
use super::state::{Normalization, StateVector};
use crate::error::{Error, Result};

/// Two eigenvalues closer than this are reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-9;

/// Eigenpairs of a density operator, sorted by descending eigenvalue.
///
/// Eigenvectors carry a canonical global phase (first largest-magnitude
/// amplitude real and positive). Within a cluster of eigenvalues closer than
/// [`DEGENERACY_GAP`] the vectors are ordered lexicographically, descending,
/// by their `(re, im)` amplitudes. That order is deterministic but the basis
/// itself is whatever the solver returned; callers that need a specific
/// basis inside a degenerate eigenspace must supply it themselves.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pairs: Vec<(f64, StateVector)>,
    degenerate: bool,
    gap_threshold: f64,
}

impl Spectrum {
    pub(crate) fn from_pairs(mut pairs: Vec<(f64, StateVector)>, gap_threshold: f64) -> Self {
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        // Sort each near-degenerate cluster by amplitudes.
        let mut start = 0;
        while start < pairs.len() {
            let mut end = start + 1;
            while end < pairs.len() && pairs[end - 1].0 - pairs[end].0 < gap_threshold {
                end += 1;
            }
            pairs[start..end].sort_by(|a, b| lexicographic_desc(&a.1, &b.1));
            start = end;
        }
        let degenerate = pairs.windows(2).any(|w| w[0].0 - w[1].0 < gap_threshold);
        Self {
            pairs,
            degenerate,
            gap_threshold,
        }
    }

    /// Keeps the given order; only the degeneracy flag is computed.
    pub(crate) fn from_ordered_pairs(pairs: Vec<(f64, StateVector)>, gap_threshold: f64) -> Self {
        let mut values: Vec<f64> = pairs.iter().map(|(v, _)| *v).collect();
        values.sort_by(|a, b| b.total_cmp(a));
        let degenerate = values.windows(2).any(|w| w[0] - w[1] < gap_threshold);
        Self {
            pairs,
            degenerate,
            gap_threshold,
        }
    }

    pub fn pairs(&self) -> &[(f64, StateVector)] {
        &self.pairs
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|(v, _)| *v).collect()
    }

    pub fn eigenvectors(&self) -> impl Iterator<Item = &StateVector> {
        self.pairs.iter().map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Whether two retained eigenvalues are closer than [`Self::gap_threshold`].
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn gap_threshold(&self) -> f64 {
        self.gap_threshold
    }

    /// Drops eigenpairs with eigenvalue at or below `threshold`, recomputing the degeneracy flag.
    pub fn without_null(self, threshold: f64) -> Self {
        let kept = self
            .pairs
            .into_iter()
            .filter(|(v, _)| *v > threshold)
            .collect();
        Self::from_pairs(kept, self.gap_threshold)
    }

    /// `Σ λ |v⟩⟨v|`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let dim = self.pairs.first().map_or(0, |(_, v)| v.dim());
        let mut out = DMatrix::zeros(dim, dim);
        for (value, v) in &self.pairs {
            let a = v.amplitudes();
            out += (a * a.adjoint()) * Complex64::new(*value, 0.0);
        }
        out
    }

    /// Largest entry of `|V^H V - 1|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, (_, a)) in self.pairs.iter().enumerate() {
            for (j, (_, b)) in self.pairs.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                let dot = a.amplitudes().dotc(b.amplitudes());
                worst = worst.max((dot - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

fn lexicographic_desc(a: &StateVector, b: &StateVector) -> Ordering {
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes().iter()) {
        let ord = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Full eigendecomposition of a density operator.
pub fn eig_hermitian(rho: &DensityOperator) -> Result<Spectrum> {
    let residual = rho.as_operator().hermiticity_residual();
    if residual > DENSITY_TOLERANCE {
        return Err(Error::NotHermitian { residual });
    }
    let eigen = rho.matrix().clone().symmetric_eigen();
    let pairs = eigen
        .eigenvalues
        .iter()
        .zip(eigen.eigenvectors.column_iter())
        .map(|(&value, column)| {
            let v = StateVector::from_dvector(
                rho.space().clone(),
                column.into_owned(),
                Normalization::Rescale,
            )?;
            Ok((value, v.with_canonical_phase()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum::from_pairs(pairs, DEGENERACY_GAP))
}
