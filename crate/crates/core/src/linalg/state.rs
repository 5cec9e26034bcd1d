use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::operator::{DensityOperator, Operator};
use super::space::{SpaceRegistry, Split, SystemSet};
use crate::error::{Error, Result};

/// Tolerance on `‖ψ‖ = 1`.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// What a constructor does with an input that is not unit-norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Reject anything further than [`NORM_TOLERANCE`] from unit norm.
    Strict,
    /// Rescale to unit norm. A zero vector is still rejected.
    Rescale,
}

/// A normalized pure state on a labeled tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: SpaceRegistry,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn new(
        space: SpaceRegistry,
        amplitudes: Vec<Complex64>,
        mode: Normalization,
    ) -> Result<Self> {
        Self::from_dvector(space, DVector::from_vec(amplitudes), mode)
    }

    pub fn from_real(
        space: SpaceRegistry,
        amplitudes: &[f64],
        mode: Normalization,
    ) -> Result<Self> {
        let amps = amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(space, amps, mode)
    }

    pub(crate) fn from_dvector(
        space: SpaceRegistry,
        mut amplitudes: DVector<Complex64>,
        mode: Normalization,
    ) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::ShapeMismatch {
                expected: space.dim(),
                actual: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        match mode {
            Normalization::Strict if (norm - 1.0).abs() > NORM_TOLERANCE => {
                return Err(Error::NotNormalized { norm })
            }
            Normalization::Strict => {}
            Normalization::Rescale => amplitudes.unscale_mut(norm),
        }
        Ok(Self { space, amplitudes })
    }

    /// Computational basis state with the given flat index.
    pub fn basis(space: SpaceRegistry, index: usize) -> Result<Self> {
        let dim = space.dim();
        if index >= dim {
            return Err(Error::ShapeMismatch {
                expected: dim,
                actual: index,
            });
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { space, amplitudes })
    }

    pub fn space(&self) -> &SpaceRegistry {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `|self⟩ ⊗ |other⟩` on the concatenated registry.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let space = self.space.concat(&other.space)?;
        let amplitudes = self.amplitudes.kronecker(&other.amplitudes);
        Ok(Self { space, amplitudes })
    }

    /// The same state with its factors laid out in `order`.
    pub fn reordered(&self, order: &[&str]) -> Result<StateVector> {
        let target = self.space.reordered(order)?;
        let split = Split::new(&self.space, &target)?;
        let amplitudes = DVector::from_iterator(
            target.dim(),
            (0..target.dim()).map(|i| self.amplitudes[split.full_index(i, 0)]),
        );
        Ok(Self {
            space: target,
            amplitudes,
        })
    }

    /// `⟨self|other⟩`. The two spaces must hold the same labels; layouts may differ.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if other.space == self.space {
            return Ok(self.amplitudes.dotc(&other.amplitudes));
        }
        let order: Vec<&str> = self.space.labels().collect();
        let aligned = other.reordered(&order)?;
        Ok(self.amplitudes.dotc(&aligned.amplitudes))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator::from_parts(self.space.clone(), m)
    }

    /// Reduced state on `keep`, computed directly from the amplitudes.
    ///
    /// Equivalent to `partial_trace(&self.density(), keep)` but costs
    /// `O(d_keep² · d_traced)` instead of building the full outer product.
    pub fn reduced(&self, keep: &SystemSet) -> Result<DensityOperator> {
        let sub = self.space.restrict(keep)?;
        let split = Split::new(&self.space, &sub)?;
        let (ds, dc) = (sub.dim(), split.complement.dim());
        let block = DMatrix::from_fn(ds, dc, |s, c| self.amplitudes[split.full_index(s, c)]);
        let rho = &block * block.adjoint();
        Ok(DensityOperator::from_parts(sub, rho))
    }

    /// Applies `op ⊗ 1` where `op` acts on a subset of this state's labels.
    ///
    /// The result is checked against the unit-norm tolerance, so `op` must be
    /// unitary (or at least norm-preserving on this input).
    pub fn apply_local(&self, op: &Operator) -> Result<StateVector> {
        let split = Split::new(&self.space, op.space())?;
        let (ds, dc) = (op.space().dim(), split.complement.dim());
        let block = DMatrix::from_fn(ds, dc, |s, c| self.amplitudes[split.full_index(s, c)]);
        let evolved = op.matrix() * block;
        let mut amplitudes = DVector::zeros(self.dim());
        for s in 0..ds {
            for c in 0..dc {
                amplitudes[split.full_index(s, c)] = evolved[(s, c)];
            }
        }
        Self::from_dvector(self.space.clone(), amplitudes, Normalization::Strict)
    }

    /// Multiplies by a global phase so the first largest-magnitude amplitude is real and positive.
    pub fn with_canonical_phase(&self) -> StateVector {
        let mut best = 0;
        let mut best_mag = -1.0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let mag = a.norm();
            if mag > best_mag + 1e-12 {
                best = i;
                best_mag = mag;
            }
        }
        let pivot = self.amplitudes[best];
        let phase = pivot.conj() / pivot.norm();
        Self {
            space: self.space.clone(),
            amplitudes: self.amplitudes.map(|a| a * phase),
        }
    }
}

/// `|a⟩ ⊗ |b⟩`; fails with [`Error::LabelCollision`] when the label sets overlap.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    a.tensor(b)
}
