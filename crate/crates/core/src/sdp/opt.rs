//! Exact `Opt(A) = (1/N) max_{x ∈ {±1}^N} x* A x` by Gray-code enumeration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::SparseHermitianOperator;

pub const MAX_BRUTEFORCE: usize = 24;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptSolution {
    pub value: f64,
    pub x: Vec<i8>,
}

/// Enumerates `x` with `x_0 = +1` (the objective is even in `x`), flipping one
/// coordinate per step and updating the local fields in `O(N)`.
pub fn opt_bruteforce(a: &SparseHermitianOperator) -> Result<OptSolution> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::EmptyInput("empty matrix"));
    }
    if n > MAX_BRUTEFORCE {
        return Err(Error::TooLarge { n, max: MAX_BRUTEFORCE });
    }
    let dense: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a.entry(i, j).re).collect())
        .collect();
    let mut x = vec![1i8; n];
    // field[i] = Σ_j A_ij x_j
    let mut field: Vec<f64> = (0..n).map(|i| dense[i].iter().sum()).collect();
    let mut value: f64 = field.iter().sum();
    let mut best = value;
    let mut best_x = x.clone();
    let steps: u64 = 1u64 << (n - 1);
    for t in 1..steps {
        // coordinate to flip: 1 + index of lowest set bit of t (keeps x_0 fixed)
        let k = t.trailing_zeros() as usize + 1;
        let xk = f64::from(x[k]);
        // x*Ax changes by -4 x_k (field_k - A_kk x_k)
        value += -4.0 * xk * (field[k] - dense[k][k] * xk);
        for i in 0..n {
            field[i] -= 2.0 * dense[i][k] * xk;
        }
        x[k] = -x[k];
        if value > best {
            best = value;
            best_x.copy_from_slice(&x);
        }
    }
    let exact: f64 = (0..n)
        .map(|i| (0..n).map(|j| dense[i][j] * f64::from(best_x[i] * best_x[j])).sum::<f64>())
        .sum();
    Ok(OptSolution { value: exact / n as f64, x: best_x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn edge(w: f64) -> SparseHermitianOperator {
        SparseHermitianOperator::from_triplets(2, vec![(0, 1, C::new(w, 0.0)), (1, 0, C::new(w, 0.0))])
    }

    #[test]
    fn tiny_cases() {
        let one = SparseHermitianOperator::from_triplets(1, vec![(0, 0, C::new(2.5, 0.0))]);
        assert_eq!(opt_bruteforce(&one).unwrap().value, 2.5);
        let cut = opt_bruteforce(&edge(-1.0)).unwrap();
        assert_eq!(cut.value, 1.0);
        assert_eq!(cut.x[0], -cut.x[1]);
    }

    #[test]
    fn matches_naive_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 7;
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                t.push((i, j, C::new(v, 0.0)));
                if i != j {
                    t.push((j, i, C::new(v, 0.0)));
                }
            }
        }
        let a = SparseHermitianOperator::from_triplets(n, t);
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..(1 << n) {
            let x: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let v: f64 = (0..n)
                .map(|i| (0..n).map(|j| a.entry(i, j).re * x[i] * x[j]).sum::<f64>())
                .sum();
            best = best.max(v);
        }
        assert!((opt_bruteforce(&a).unwrap().value - best / n as f64).abs() < 1e-12);
    }

    #[test]
    fn rejects_large() {
        let big = SparseHermitianOperator::from_triplets(25, vec![]);
        assert!(matches!(opt_bruteforce(&big), Err(Error::TooLarge { .. })));
    }
}
