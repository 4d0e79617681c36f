//! Matrix polynomials `p = Σ_w a_w w` with `r×r` complex coefficients.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::word::{reduce, word_adjoint, Signature, Word};

pub type Coeff = DMatrix<Complex64>;

/// Entries at or below this magnitude count as zero when merging terms.
pub const ZERO_TOL: f64 = 1e-15;
/// Entrywise tolerance for the self-adjointness check.
pub const ADJOINT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial {
    signature: Signature,
    r: usize,
    terms: BTreeMap<Word, Coeff>,
}

impl MatrixPolynomial {
    pub fn new(signature: Signature, r: usize) -> Self {
        Self { signature, r, terms: BTreeMap::new() }
    }

    /// Builds a polynomial from `(word, coeff)` pairs, reducing words and merging like terms.
    pub fn from_terms<I>(signature: Signature, r: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, Coeff)>,
    {
        let mut p = Self::new(signature, r);
        for (w, a) in terms {
            p.add_term(w, a)?;
        }
        Ok(p)
    }

    pub fn add_term(&mut self, word: Word, coeff: Coeff) -> Result<()> {
        if coeff.nrows() != self.r || coeff.ncols() != self.r {
            return Err(Error::CoefficientShape {
                expected: self.r,
                rows: coeff.nrows(),
                cols: coeff.ncols(),
            });
        }
        word.validate(self.signature)?;
        let word = reduce(&word);
        let merged = match self.terms.remove(&word) {
            Some(prev) => prev + coeff,
            None => coeff,
        };
        if merged.iter().any(|z| z.norm() > ZERO_TOL) {
            self.terms.insert(word, merged);
        }
        Ok(())
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Coeff)> {
        self.terms.iter()
    }

    pub fn term(&self, w: &Word) -> Option<&Coeff> {
        self.terms.get(w)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Maximum reduced word length among the terms.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.first_adjoint_violation().is_none()
    }

    pub fn check_self_adjoint(&self) -> Result<()> {
        match self.first_adjoint_violation() {
            None => Ok(()),
            Some(w) => Err(Error::NotSelfAdjoint { word: w.to_string() }),
        }
    }

    fn first_adjoint_violation(&self) -> Option<&Word> {
        self.terms.iter().find_map(|(w, a)| {
            let partner = self.terms.get(&word_adjoint(w));
            let ok = match partner {
                Some(b) => a
                    .iter()
                    .zip(b.adjoint().iter())
                    .all(|(x, y)| (x - y).norm() <= ADJOINT_TOL),
                None => false,
            };
            (!ok).then_some(w)
        })
    }

    /// `(p + p*) / 2`.
    pub fn symmetrized(&self) -> Self {
        let adj = poly_adjoint(self);
        let mut out = Self::new(self.signature, self.r);
        for (w, a) in self.terms.iter().chain(adj.terms.iter()) {
            out.add_term(w.clone(), a.map(|z| z * 0.5))
                .expect("terms already validated");
        }
        out
    }

    pub fn negated(&self) -> Self {
        Self {
            signature: self.signature,
            r: self.r,
            terms: self.terms.iter().map(|(w, a)| (w.clone(), -a)).collect(),
        }
    }

    /// `p + diag(zeta)·1`, the shifted polynomial whose lifts carry the dual shift.
    pub fn with_diagonal_shift(&self, zeta: &[f64]) -> Result<Self> {
        if zeta.len() != self.r {
            return Err(Error::CoefficientShape { expected: self.r, rows: zeta.len(), cols: 1 });
        }
        let mut out = self.clone();
        let shift = Coeff::from_fn(self.r, self.r, |i, j| {
            if i == j {
                Complex64::new(zeta[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        out.add_term(Word::identity(), shift)?;
        Ok(out)
    }

    /// `Σ_w ‖a_w‖_op`, an upper bound on the operator norm of every lift.
    pub fn operator_norm_bound(&self) -> f64 {
        self.terms
            .values()
            .map(|a| a.clone().singular_values().max())
            .sum()
    }

    /// Term-by-term comparison with an entrywise tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.signature == other.signature
            && self.r == other.r
            && self.terms.len() == other.terms.len()
            && self.terms.iter().all(|(w, a)| match other.terms.get(w) {
                Some(b) => a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() <= tol),
                None => false,
            })
    }
}

/// `p* = Σ_w a_w* w*`.
pub fn poly_adjoint(p: &MatrixPolynomial) -> MatrixPolynomial {
    let terms = p
        .terms
        .iter()
        .map(|(w, a)| (word_adjoint(w), a.adjoint()))
        .collect();
    MatrixPolynomial { signature: p.signature, r: p.r, terms }
}

/// Real `r×r` matrix from row-major entries.
pub fn real_coeff(r: usize, entries: &[f64]) -> Coeff {
    assert_eq!(entries.len(), r * r);
    Coeff::from_fn(r, r, |i, j| Complex64::new(entries[i * r + j], 0.0))
}

/// Elementary matrix `E_{ij}` (0-based).
pub fn unit_coeff(r: usize, i: usize, j: usize) -> Coeff {
    let mut m = Coeff::zeros(r, r);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}
