use nalgebra::DMatrix;
use num_complex::Complex64;

use super::space::{SpaceRegistry, Split, SystemSet};
use super::state::StateVector;
use crate::error::{Error, Result};

/// Tolerance on Hermiticity, trace and positivity of density operators.
pub const DENSITY_TOLERANCE: f64 = 1e-12;

/// A square matrix acting on a labeled space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: SpaceRegistry,
    matrix: DMatrix<Complex64>,
}

impl Operator {
    pub fn new(space: SpaceRegistry, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::ShapeMismatch {
                expected: dim,
                actual: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: SpaceRegistry) -> Self {
        let dim = space.dim();
        Self {
            space,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn space(&self) -> &SpaceRegistry {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Largest entry of `|A - A^H|`.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    /// Product `self · other`; both must live on the same registry.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.space != other.space {
            return Err(Error::ShapeMismatch {
                expected: self.space.dim(),
                actual: other.space.dim(),
            });
        }
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// `self ⊗ other` on the concatenated registry.
    pub fn tensor(&self, other: &Operator) -> Result<Operator> {
        Ok(Self {
            space: self.space.concat(&other.space)?,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// `self ⊗ 1` laid out on `full`, whose labels must include this operator's labels.
    pub fn embed(&self, full: &SpaceRegistry) -> Result<Operator> {
        let split = Split::new(full, &self.space)?;
        let (ds, dc) = (self.space.dim(), split.complement.dim());
        let mut matrix = DMatrix::zeros(full.dim(), full.dim());
        for c in 0..dc {
            for r in 0..ds {
                let row = split.full_index(r, c);
                for k in 0..ds {
                    matrix[(row, split.full_index(k, c))] = self.matrix[(r, k)];
                }
            }
        }
        Ok(Self {
            space: full.clone(),
            matrix,
        })
    }
}

/// A Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    space: SpaceRegistry,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity, all within [`DENSITY_TOLERANCE`].
    pub fn new(space: SpaceRegistry, matrix: DMatrix<Complex64>) -> Result<Self> {
        let op = Operator::new(space, matrix)?;
        let residual = op.hermiticity_residual();
        if residual > DENSITY_TOLERANCE {
            return Err(Error::NotHermitian { residual });
        }
        let trace = op.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOLERANCE || trace.im.abs() > DENSITY_TOLERANCE {
            return Err(Error::NotDensity(format!("trace is {trace}")));
        }
        let min_eig = op
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -DENSITY_TOLERANCE {
            return Err(Error::NotDensity(format!(
                "eigenvalue {min_eig:e} is negative"
            )));
        }
        Ok(Self {
            space: op.space,
            matrix: op.matrix,
        })
    }

    /// Trusted constructor for operators produced by this crate (outer products, partial traces).
    pub(crate) fn from_parts(space: SpaceRegistry, matrix: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(matrix.nrows(), space.dim());
        Self { space, matrix }
    }

    pub fn space(&self) -> &SpaceRegistry {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn as_operator(&self) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: self.matrix.clone(),
        }
    }

    /// `⟨ψ|ρ|ψ⟩` for a state on the same labels (any layout).
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        let order: Vec<&str> = self.space.labels().collect();
        let psi = if psi.space() == &self.space {
            psi.clone()
        } else {
            psi.reordered(&order)?
        };
        let v = psi.amplitudes();
        Ok(v.dotc(&(&self.matrix * v)).re)
    }
}

/// Traces out every label of `rho` not in `keep`.
///
/// The result lives on the kept labels in `rho`'s registry order.
pub fn partial_trace(rho: &DensityOperator, keep: &SystemSet) -> Result<DensityOperator> {
    let sub = rho.space.restrict(keep)?;
    let split = Split::new(&rho.space, &sub)?;
    let (ds, dc) = (sub.dim(), split.complement.dim());
    let mut reduced = DMatrix::zeros(ds, ds);
    for r in 0..ds {
        for k in 0..ds {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..dc {
                acc += rho.matrix[(split.full_index(r, c), split.full_index(k, c))];
            }
            reduced[(r, k)] = acc;
        }
    }
    Ok(DensityOperator::from_parts(sub, reduced))
}

/// `|φ⟩⟨φ| ⊗ 1` on `full_space`.
pub fn projector(phi: &StateVector, full_space: &SpaceRegistry) -> Result<Operator> {
    let local = Operator {
        space: phi.space().clone(),
        matrix: phi.amplitudes() * phi.amplitudes().adjoint(),
    };
    local.embed(full_space)
}
