//! State vectors and operators over the two-molecule product basis.
//!
//! Ordering: levels follow the declaration order of each [`MoleculeSpec`],
//! and molecule A is the slow index, so `|a b⟩` sits at `a * n_b + b`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::molecule::{Molecule, MoleculeSpec};

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelBasis {
    labels_a: Vec<String>,
    labels_b: Vec<String>,
}

impl LevelBasis {
    pub fn new(labels_a: Vec<String>, labels_b: Vec<String>) -> Self {
        LevelBasis { labels_a, labels_b }
    }

    pub fn from_molecules(a: &MoleculeSpec, b: &MoleculeSpec) -> Arc<Self> {
        Arc::new(LevelBasis::new(a.labels(), b.labels()))
    }

    pub fn dim(&self) -> usize {
        self.labels_a.len() * self.labels_b.len()
    }

    pub fn n_levels(&self, which: Molecule) -> usize {
        self.labels(which).len()
    }

    pub fn labels(&self, which: Molecule) -> &[String] {
        match which {
            Molecule::A => &self.labels_a,
            Molecule::B => &self.labels_b,
        }
    }

    pub fn level(&self, which: Molecule, label: &str) -> Result<usize> {
        self.labels(which)
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < self.labels_a.len() && b < self.labels_b.len());
        a * self.labels_b.len() + b
    }

    /// Inverse of [`LevelBasis::index`].
    pub fn split(&self, flat: usize) -> (usize, usize) {
        (flat / self.labels_b.len(), flat % self.labels_b.len())
    }

    pub fn index_of(&self, label_a: &str, label_b: &str) -> Result<usize> {
        Ok(self.index(self.level(Molecule::A, label_a)?, self.level(Molecule::B, label_b)?))
    }

    pub fn ket_name(&self, flat: usize) -> String {
        let (a, b) = self.split(flat);
        format!("|{}{}>", self.labels_a[a], self.labels_b[b])
    }
}

/// Complex amplitudes over a [`LevelBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterState {
    amplitudes: DVector<C64>,
    basis: Arc<LevelBasis>,
}

impl RegisterState {
    pub fn from_amplitudes(basis: Arc<LevelBasis>, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::BasisMismatch);
        }
        Ok(RegisterState { amplitudes, basis })
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn basis(&self) -> &Arc<LevelBasis> {
        &self.basis
    }

    pub fn amplitude(&self, label_a: &str, label_b: &str) -> Result<C64> {
        Ok(self.amplitudes[self.basis.index_of(label_a, label_b)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Population of `label` on one molecule, traced over the other.
    pub fn level_population(&self, which: Molecule, label: &str) -> Result<f64> {
        let k = self.basis.level(which, label)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let (a, b) = self.basis.split(*i);
                match which {
                    Molecule::A => a == k,
                    Molecule::B => b == k,
                }
            })
            .map(|(_, c)| c.norm_sqr())
            .sum())
    }

    pub(crate) fn same_basis(&self, other: &RegisterState) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }
}

impl fmt::Display for RegisterState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.amplitudes.iter().enumerate() {
            if c.norm_sqr() < 1e-24 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i){}", c.re, c.im, self.basis.ket_name(i))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Unit vector on `|label_a label_b⟩`.
pub fn product_state(basis: &Arc<LevelBasis>, label_a: &str, label_b: &str) -> Result<RegisterState> {
    let idx = basis.index_of(label_a, label_b)?;
    let mut amps = DVector::zeros(basis.dim());
    amps[idx] = C64::new(1.0, 0.0);
    RegisterState::from_amplitudes(basis.clone(), amps)
}

/// Normalized linear combination of states sharing a basis.
pub fn superpose(terms: &[(C64, &RegisterState)]) -> Result<RegisterState> {
    let (_, first) = terms.first().ok_or(Error::ZeroVector)?;
    let mut amps: DVector<C64> = DVector::zeros(first.basis.dim());
    for (c, s) in terms {
        if !first.same_basis(s) {
            return Err(Error::BasisMismatch);
        }
        amps.axpy(*c, &s.amplitudes, C64::new(1.0, 0.0));
    }
    let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 1e-12) {
        return Err(Error::ZeroVector);
    }
    amps.unscale_mut(norm);
    RegisterState::from_amplitudes(first.basis.clone(), amps)
}

/// `⟨a|b⟩`
pub fn overlap(a: &RegisterState, b: &RegisterState) -> Result<C64> {
    if !a.same_basis(b) {
        return Err(Error::BasisMismatch);
    }
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// Generator of the evolution, in rad/s: a Hermitian matrix plus an optional
/// diagonal decay part entering as `−i·decay`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    pub hermitian: DMatrix<C64>,
    /// Half the decay rate `Γ/2` of each basis state (non-negative).
    pub decay: Option<DVector<f64>>,
}

impl HermitianOperator {
    pub fn zeros(dim: usize) -> Self {
        HermitianOperator { hermitian: DMatrix::zeros(dim, dim), decay: None }
    }

    pub fn dim(&self) -> usize {
        self.hermitian.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.hermitian.iter().all(|c| *c == C64::new(0.0, 0.0))
            && self.decay.as_ref().is_none_or(|d| d.iter().all(|&g| g == 0.0))
    }

    pub fn has_decay(&self) -> bool {
        self.decay.as_ref().is_some_and(|d| d.iter().any(|&g| g > 0.0))
    }

    /// Largest `|H − H†|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let h = &self.hermitian;
        (h - h.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Checks `H = H†` to `tol` and that decay never amplifies.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.hermiticity_error() > tol {
            return Err(Error::param("operator is not Hermitian"));
        }
        if let Some(d) = &self.decay {
            if d.len() != self.dim() || d.iter().any(|&g| !(g >= 0.0)) {
                return Err(Error::param("decay part must be diagonal with non-positive imaginary part"));
            }
        }
        Ok(())
    }

    /// The full (possibly non-Hermitian) matrix `H − i·diag(decay)`.
    pub fn full_matrix(&self) -> DMatrix<C64> {
        let mut m = self.hermitian.clone();
        if let Some(d) = &self.decay {
            for (i, g) in d.iter().enumerate() {
                m[(i, i)] -= C64::new(0.0, *g);
            }
        }
        m
    }
}
