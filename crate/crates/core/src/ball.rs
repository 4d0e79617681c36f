//! Balls in the free product `Z2^{*d} * Z^{*e}` and the truncated adjacency `A_F`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{BlockShape, SparseHermitianOperator};
use crate::poly::MatrixPolynomial;
use crate::word::{Signature, Word};

pub const DEFAULT_BALL_CAP: usize = 200_000;

/// Number of reduced words of length at most `f0`.
pub fn ball_size(sig: Signature, f0: usize) -> u128 {
    let l = sig.alphabet_size() as u128;
    let mut total: u128 = 1;
    let mut level: u128 = if f0 >= 1 { l } else { 0 };
    for _ in 1..=f0 {
        total = total.saturating_add(level);
        level = level.saturating_mul(l.saturating_sub(1));
    }
    total
}

/// Reduced words of length `≤ radius`, in length-lexicographic order.
#[derive(Clone, Debug)]
pub struct BallTruncation {
    pub signature: Signature,
    pub radius: usize,
    vertices: Vec<Word>,
    index: HashMap<Word, usize>,
}

impl BallTruncation {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Word] {
        &self.vertices
    }

    pub fn vertex(&self, k: usize) -> &Word {
        &self.vertices[k]
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn labels(&self) -> Vec<String> {
        self.vertices.iter().map(Word::to_string).collect()
    }
}

/// Breadth-first enumeration; level `ℓ` extends each level-`ℓ-1` word on the right.
pub fn enumerate_ball(sig: Signature, f0: usize, cap: usize) -> Result<BallTruncation> {
    let needed = ball_size(sig, f0);
    if needed > cap as u128 {
        return Err(Error::ResourceCap { what: "ball vertices", needed, cap: cap as u128 });
    }
    let letters = sig.letters();
    let mut vertices = vec![Word::identity()];
    let mut level_start = 0;
    for _ in 0..f0 {
        let level_end = vertices.len();
        for k in level_start..level_end {
            let last = vertices[k].letters().last().copied();
            for &l in &letters {
                if last == Some(l.inverse()) {
                    continue;
                }
                let mut letters_k = vertices[k].letters().to_vec();
                letters_k.push(l);
                vertices.push(Word::from_letters(letters_k));
            }
        }
        level_start = level_end;
    }
    debug_assert_eq!(vertices.len() as u128, needed);
    let index = vertices.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect();
    Ok(BallTruncation { signature: sig, radius: f0, vertices, index })
}

/// `A_∞` restricted to `F × F`, as an `|F| r × |F| r` extension.
#[derive(Clone, Debug)]
pub struct TruncatedAdjacency {
    pub ball: BallTruncation,
    pub r: usize,
    pub matrix: SparseHermitianOperator,
}

impl TruncatedAdjacency {
    pub fn blocks(&self) -> BlockShape {
        BlockShape { n: self.ball.len(), r: self.r }
    }

    pub fn dim(&self) -> usize {
        self.ball.len() * self.r
    }
}

/// Block `(reduce(w u), u)` receives `a_w` whenever `w u` stays in the ball.
pub fn build_truncated_adjacency(
    p: &MatrixPolynomial,
    ball: &BallTruncation,
) -> Result<TruncatedAdjacency> {
    if p.signature() != ball.signature {
        return Err(Error::SignatureMismatch { poly: p.signature(), other: ball.signature });
    }
    p.check_self_adjoint()?;
    let r = p.r();
    let zero = Complex64::new(0.0, 0.0);
    let mut triplets = Vec::new();
    for (ui, u) in ball.vertices().iter().enumerate() {
        for (w, a) in p.terms() {
            if let Some(vi) = ball.index_of(&w.mul(u)) {
                for pp in 0..r {
                    for q in 0..r {
                        if a[(pp, q)] != zero {
                            triplets.push((vi * r + pp, ui * r + q, a[(pp, q)]));
                        }
                    }
                }
            }
        }
    }
    let matrix = SparseHermitianOperator::from_triplets(ball.len() * r, triplets)
        .with_blocks(BlockShape { n: ball.len(), r });
    Ok(TruncatedAdjacency { ball: ball.clone(), r, matrix })
}

/// Convenience: enumerate the ball and build `A_F` in one call.
pub fn truncated_adjacency(p: &MatrixPolynomial, f0: usize, cap: usize) -> Result<TruncatedAdjacency> {
    let ball = enumerate_ball(p.signature(), f0, cap)?;
    build_truncated_adjacency(p, &ball)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::p_regular;

    #[test]
    fn small_ball_counts() {
        assert_eq!(enumerate_ball(Signature::new(3, 0), 0, 10).unwrap().len(), 1);
        assert_eq!(enumerate_ball(Signature::new(3, 0), 2, 100).unwrap().len(), 10);
        let b = enumerate_ball(Signature::new(0, 1), 1, 100).unwrap();
        assert_eq!(b.labels(), ["1", "Z1", "Z1*"]);
        assert_eq!(ball_size(Signature::new(1, 0), 5), 2);
        assert_eq!(ball_size(Signature::new(2, 2), 3), 1 + 6 + 30 + 150);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            enumerate_ball(Signature::new(0, 6), 6, DEFAULT_BALL_CAP),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn canonical_order_and_prefix_closure() {
        let b = enumerate_ball(Signature::new(1, 1), 3, 1000).unwrap();
        let mut sorted = b.vertices().to_vec();
        sorted.sort();
        assert_eq!(sorted, b.vertices());
        for w in b.vertices().iter().skip(1) {
            let prefix = Word::from_letters(w.letters()[..w.len() - 1].to_vec());
            assert!(b.index_of(&prefix).is_some());
            assert!(w.is_reduced());
        }
    }

    #[test]
    fn p3_ball_is_a_tree() {
        let a = truncated_adjacency(&p_regular(3), 3, 1000).unwrap();
        assert_eq!(a.dim(), 1 + 3 + 6 + 12);
        let deg: Vec<usize> = (0..a.dim()).map(|i| a.matrix.row(i).count()).collect();
        assert_eq!(deg[0], 3);
        assert!(deg[1..10].iter().all(|&d| d == 3));
        assert!(deg[10..].iter().all(|&d| d == 1));
        assert_eq!(a.matrix.nnz(), 2 * (a.dim() - 1));
    }
}
