use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Largest composite dimension handled by the dense routines.
pub const MAX_DIMENSION: usize = 4096;

/// An unordered set of subsystem labels, e.g. `P1+M1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SystemSet(BTreeSet<String>);

impl SystemSet {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(labels.into_iter().map(Into::into).collect())
    }

    pub fn single(label: impl Into<String>) -> Self {
        Self::new([label])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn is_subset(&self, other: &SystemSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersection(&self, other: &SystemSet) -> SystemSet {
        Self(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn union(&self, other: &SystemSet) -> SystemSet {
        Self(self.0.union(&other.0).cloned().collect())
    }

    pub fn is_disjoint(&self, other: &SystemSet) -> bool {
        self.0.is_disjoint(&other.0)
    }
}

impl fmt::Display for SystemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("{}");
        }
        let joined: Vec<&str> = self.iter().collect();
        f.write_str(&joined.join("+"))
    }
}

impl<S: Into<String>> FromIterator<S> for SystemSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self::new(iter)
    }
}

/// Ordered list of labeled tensor factors.
///
/// The order fixes the index layout of every vector and matrix on the space:
/// row-major with the leftmost label varying slowest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceRegistry {
    entries: Vec<(String, usize)>,
}

impl SpaceRegistry {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let entries: Vec<(String, usize)> =
            entries.into_iter().map(|(l, d)| (l.into(), d)).collect();
        let mut seen = BTreeSet::new();
        let mut total: usize = 1;
        for (label, dim) in &entries {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
            if *dim == 0 {
                return Err(Error::ZeroDimension {
                    label: label.clone(),
                });
            }
            total = total.saturating_mul(*dim);
        }
        if total > MAX_DIMENSION {
            return Err(Error::DimensionTooLarge {
                dimension: total,
                limit: MAX_DIMENSION,
            });
        }
        Ok(Self { entries })
    }

    pub fn single(label: impl Into<String>, dimension: usize) -> Result<Self> {
        Self::new([(label, dimension)])
    }

    pub fn entries(&self) -> &[(String, usize)] {
        &self.entries
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(l, _)| l.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total dimension (product of factor dimensions).
    pub fn dim(&self) -> usize {
        self.entries.iter().map(|(_, d)| d).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.entries.iter().position(|(l, _)| l == label)
    }

    pub fn dimension_of(&self, label: &str) -> Option<usize> {
        self.position(label).map(|p| self.entries[p].1)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn system_set(&self) -> SystemSet {
        self.labels().collect()
    }

    /// Registry of `self` followed by `other`.
    pub fn concat(&self, other: &SpaceRegistry) -> Result<Self> {
        if let Some(label) = other.labels().find(|l| self.contains(l)) {
            return Err(Error::LabelCollision(label.to_string()));
        }
        Self::new(self.entries.iter().chain(&other.entries).cloned())
    }

    /// Sub-registry holding the labels of `keep`, in this registry's order.
    pub fn restrict(&self, keep: &SystemSet) -> Result<Self> {
        if let Some(missing) = keep.iter().find(|l| !self.contains(l)) {
            return Err(Error::UnknownLabel(missing.to_string()));
        }
        Ok(Self {
            entries: self
                .entries
                .iter()
                .filter(|(l, _)| keep.contains(l))
                .cloned()
                .collect(),
        })
    }

    /// The same factors listed in `order`, which must be a permutation of the labels.
    pub fn reordered(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                actual: order.len(),
            });
        }
        let entries = order
            .iter()
            .map(|l| {
                self.dimension_of(l)
                    .map(|d| (l.to_string(), d))
                    .ok_or_else(|| Error::UnknownLabel(l.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    /// Per-factor digits of a flat index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.len()];
        for (slot, (_, dim)) in digits.iter_mut().zip(&self.entries).rev() {
            *slot = index % dim;
            index /= dim;
        }
        digits
    }

    /// Flat index of per-factor digits.
    pub fn flat_index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.entries)
            .fold(0, |acc, (d, (_, dim))| acc * dim + d)
    }
}

impl fmt::Display for SpaceRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(l, d)| format!("{l}[{d}]"))
            .collect();
        f.write_str(&parts.join(" ⊗ "))
    }
}

/// Factorization of a space into a subsystem and its complement.
///
/// `compose[s * complement_dim + c]` is the flat index in the full space of
/// subsystem index `s` combined with complement index `c`.
#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub complement: SpaceRegistry,
    pub compose: Vec<usize>,
}

impl Split {
    /// `sub` may list its labels in any order; the complement keeps the full order.
    pub fn new(full: &SpaceRegistry, sub: &SpaceRegistry) -> Result<Self> {
        let mut sub_pos = Vec::with_capacity(sub.len());
        for (label, dim) in sub.entries() {
            let pos = full
                .position(label)
                .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
            if full.entries()[pos].1 != *dim {
                return Err(Error::ShapeMismatch {
                    expected: full.entries()[pos].1,
                    actual: *dim,
                });
            }
            sub_pos.push(pos);
        }
        let comp_pos: Vec<usize> = (0..full.len()).filter(|p| !sub_pos.contains(p)).collect();
        let complement = SpaceRegistry {
            entries: comp_pos
                .iter()
                .map(|&p| full.entries()[p].clone())
                .collect(),
        };
        let comp_dim = complement.dim();
        let mut compose = vec![0; full.dim()];
        let mut sub_digits = vec![0; sub_pos.len()];
        let mut comp_digits = vec![0; comp_pos.len()];
        for index in 0..full.dim() {
            let digits = full.digits(index);
            for (slot, &p) in sub_digits.iter_mut().zip(&sub_pos) {
                *slot = digits[p];
            }
            for (slot, &p) in comp_digits.iter_mut().zip(&comp_pos) {
                *slot = digits[p];
            }
            let s = sub.flat_index(&sub_digits);
            let c = complement.flat_index(&comp_digits);
            compose[s * comp_dim + c] = index;
        }
        Ok(Self {
            complement,
            compose,
        })
    }

    pub fn full_index(&self, sub: usize, complement: usize) -> usize {
        self.compose[sub * self.complement.dim() + complement]
    }
}
