//! Named polynomials.
//!
//! | name | signature | r | model |
//! |------|-----------|---|-------|
//! | `p<d>` (e.g. `p3`) | d, 0 | 1 | `Y1 + .. + Yd`, random d-regular graphs |
//! | `bipartite3` | 0, 3 | 2 | 3-regular bipartite graphs |
//! | `p333` | 0, 9 | 3 | 6-regular graphs, every vertex in 3 triangles |
//! | `p333-gauge` | 0, 6 | 3 | `p333` with `Z_{i,1}` fixed to the identity |
//! | `k23` | 0, 2 | 5 | lifts of `K_{2,3}`, spanning tree edges on the identity |
//! | `k23-edges` | 0, 6 | 5 | lifts of `K_{2,3}`, one `Z` per base edge |
//!
//! The gauge-fixed variants produce the same random graphs up to a signed
//! relabelling of each fibre, but have smaller balls in the infinite lift.

use std::path::Path;

use crate::dsl::parse_poly;
use crate::error::{Error, Result};
use crate::poly::{real_coeff, unit_coeff, Coeff, MatrixPolynomial};
use crate::word::{Letter, Signature, Word};

pub const BUILTIN_NAMES: &[&str] =
    &["p3", "bipartite3", "p333", "p333-gauge", "k23", "k23-edges"];

/// Looks up a named polynomial; `p<d>` works for any `d ≥ 1`.
pub fn builtin(name: &str) -> Result<MatrixPolynomial> {
    match name {
        "bipartite3" => Ok(bipartite3()),
        "p333" => Ok(p333()),
        "p333-gauge" => Ok(p333_gauge()),
        "k23" => Ok(k23()),
        "k23-edges" => Ok(k23_edges()),
        _ => match name.strip_prefix('p').map(str::parse::<usize>) {
            Some(Ok(d)) if d >= 1 => Ok(p_regular(d)),
            _ => Err(Error::UnknownBuiltin(name.to_string())),
        },
    }
}

/// Resolves `builtin:<name>` or reads a DSL file.
pub fn load_poly(source: &str) -> Result<MatrixPolynomial> {
    match source.strip_prefix("builtin:") {
        Some(name) => builtin(name),
        None => parse_poly(&std::fs::read_to_string(Path::new(source))?),
    }
}

fn one() -> Coeff {
    real_coeff(1, &[1.0])
}

fn single(l: Letter) -> Word {
    Word::from_letters(vec![l])
}

/// `Y1 + .. + Yd`.
pub fn p_regular(d: usize) -> MatrixPolynomial {
    let terms = (1..=d).map(|i| (single(Letter::y(i as u16)), one()));
    MatrixPolynomial::from_terms(Signature::new(d, 0), 1, terms).expect("valid builtin")
}

/// `E12 (Z1 + Z2 + Z3) + E21 (Z1* + Z2* + Z3*)`.
pub fn bipartite3() -> MatrixPolynomial {
    let terms = (1..=3u16).flat_map(|i| {
        [
            (single(Letter::z(i)), unit_coeff(2, 0, 1)),
            (single(Letter::z_star(i)), unit_coeff(2, 1, 0)),
        ]
    });
    MatrixPolynomial::from_terms(Signature::new(0, 3), 2, terms).expect("valid builtin")
}

/// Entry `(a, b)` is `Σ_i Z_{i,a} Z_{i,b}*` with `Z_{i,a}` stored as letter `3(i-1)+a`.
pub fn p333() -> MatrixPolynomial {
    let letter = |i: u16, a: u16| 3 * i + a + 1;
    let mut terms = Vec::new();
    for a in 0..3u16 {
        for b in 0..3u16 {
            if a == b {
                continue;
            }
            for i in 0..3u16 {
                let w = Word::from_letters(vec![
                    Letter::z(letter(i, a)),
                    Letter::z_star(letter(i, b)),
                ]);
                terms.push((w, unit_coeff(3, a as usize, b as usize)));
            }
        }
    }
    MatrixPolynomial::from_terms(Signature::new(0, 9), 3, terms).expect("valid builtin")
}

/// `p333` after substituting `Z_{i,1} = 1`; `Z_{i,2}`, `Z_{i,3}` become letters `2i-1`, `2i`.
pub fn p333_gauge() -> MatrixPolynomial {
    let z = |i: u16, a: u16| -> Vec<Letter> {
        if a == 0 {
            vec![]
        } else {
            vec![Letter::z(2 * i + a)]
        }
    };
    let mut terms = Vec::new();
    for a in 0..3u16 {
        for b in 0..3u16 {
            if a == b {
                continue;
            }
            for i in 0..3u16 {
                let mut letters = z(i, a);
                letters.extend(z(i, b).into_iter().map(Letter::inverse));
                terms.push((Word::from_letters(letters), unit_coeff(3, a as usize, b as usize)));
            }
        }
    }
    MatrixPolynomial::from_terms(Signature::new(0, 6), 3, terms).expect("valid builtin")
}

/// Base vertices 0, 1 have degree 3, vertices 2, 3, 4 have degree 2.
const K23_EDGES: [(usize, usize); 6] = [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)];

fn edge_pair(a: usize, b: usize, z: u16) -> [(Word, Coeff); 2] {
    [
        (single(Letter::z(z)), unit_coeff(5, a, b)),
        (single(Letter::z_star(z)), unit_coeff(5, b, a)),
    ]
}

/// Random lifts of `K_{2,3}` with one independent permutation per base edge.
pub fn k23_edges() -> MatrixPolynomial {
    let terms = K23_EDGES
        .iter()
        .enumerate()
        .flat_map(|(k, &(a, b))| edge_pair(a, b, k as u16 + 1));
    MatrixPolynomial::from_terms(Signature::new(0, 6), 5, terms).expect("valid builtin")
}

/// Random lifts of `K_{2,3}` with the spanning tree `{02, 03, 04, 12}` on the identity.
pub fn k23() -> MatrixPolynomial {
    let mut tree = Coeff::zeros(5, 5);
    for &(a, b) in &K23_EDGES[..4] {
        tree += unit_coeff(5, a, b) + unit_coeff(5, b, a);
    }
    let mut terms = vec![(Word::identity(), tree)];
    for (k, &(a, b)) in K23_EDGES[4..].iter().enumerate() {
        terms.extend(edge_pair(a, b, k as u16 + 1));
    }
    MatrixPolynomial::from_terms(Signature::new(0, 2), 5, terms).expect("valid builtin")
}

/// `c · 1` with `r = 1`.
pub fn scalar(c: f64) -> MatrixPolynomial {
    MatrixPolynomial::from_terms(Signature::new(0, 0), 1, [(Word::identity(), real_coeff(1, &[c]))])
        .expect("valid builtin")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_self_adjoint() {
        for name in BUILTIN_NAMES.iter().chain(&["p2", "p5"]) {
            let p = builtin(name).unwrap();
            assert!(p.is_self_adjoint(), "{name}");
        }
        assert!(builtin("p0").is_err());
        assert!(builtin("nope").is_err());
    }

    #[test]
    fn term_counts() {
        assert_eq!(builtin("p3").unwrap().num_terms(), 3);
        assert_eq!(bipartite3().num_terms(), 6);
        assert_eq!(p333().num_terms(), 18);
        assert_eq!(p333().degree(), 2);
        assert_eq!(p333_gauge().num_terms(), 18);
        assert_eq!(k23_edges().num_terms(), 12);
        assert_eq!(k23().num_terms(), 5);
    }

    #[test]
    fn p333_row_weights() {
        let p = p333();
        let mut row = [0.0; 3];
        for (_, a) in p.terms() {
            for i in 0..3 {
                for j in 0..3 {
                    row[i] += a[(i, j)].norm();
                }
            }
        }
        assert_eq!(row, [6.0; 3]);
    }
}
