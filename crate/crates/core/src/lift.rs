//! Random signed n-lifts and evaluation of polynomials on them.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{BlockShape, SparseHermitianOperator};
use crate::poly::MatrixPolynomial;
use crate::word::{Letter, LetterKind, Signature, Word};

/// A fixed-point-free involution with one sign per edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedMatching {
    partner: Vec<u32>,
    sign: Vec<i8>,
}

impl SignedMatching {
    /// `partner[partner[i]] == i`, `partner[i] != i` and `sign` symmetric on each edge.
    pub fn from_parts(partner: Vec<u32>, sign: Vec<i8>) -> Result<Self> {
        let n = partner.len();
        let ok = sign.len() == n
            && (0..n).all(|i| {
                let j = partner[i] as usize;
                j < n && j != i && partner[j] as usize == i && sign[i] == sign[j] && sign[i].abs() == 1
            });
        if ok {
            Ok(Self { partner, sign })
        } else {
            Err(Error::Validation("not a signed perfect matching".into()))
        }
    }

    fn sample(n: usize, rng: &mut ChaCha8Rng, signed: bool) -> Self {
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(rng);
        let mut partner = vec![0u32; n];
        let mut sign = vec![1i8; n];
        for pair in order.chunks_exact(2) {
            let (a, b) = (pair[0] as usize, pair[1] as usize);
            partner[a] = b as u32;
            partner[b] = a as u32;
            let s = if signed && rng.gen::<bool>() { -1 } else { 1 };
            sign[a] = s;
            sign[b] = s;
        }
        Self { partner, sign }
    }

    pub fn partner(&self, i: usize) -> usize {
        self.partner[i] as usize
    }

    pub fn sign(&self, i: usize) -> i8 {
        self.sign[i]
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }
}

/// `P|i⟩ = sign(i) |image(i)⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedPermutation {
    image: Vec<u32>,
    preimage: Vec<u32>,
    sign: Vec<i8>,
}

impl SignedPermutation {
    pub fn from_parts(image: Vec<u32>, sign: Vec<i8>) -> Result<Self> {
        let n = image.len();
        if sign.len() != n || sign.iter().any(|s| s.abs() != 1) {
            return Err(Error::Validation("signs must be ±1, one per vertex".into()));
        }
        let mut preimage = vec![u32::MAX; n];
        for (i, &j) in image.iter().enumerate() {
            let j = j as usize;
            if j >= n || preimage[j] != u32::MAX {
                return Err(Error::Validation("image is not a permutation".into()));
            }
            preimage[j] = i as u32;
        }
        Ok(Self { image, preimage, sign })
    }

    fn sample(n: usize, rng: &mut ChaCha8Rng, signed: bool) -> Self {
        let mut image: Vec<u32> = (0..n as u32).collect();
        image.shuffle(rng);
        let sign = (0..n)
            .map(|_| if signed && rng.gen::<bool>() { -1 } else { 1 })
            .collect();
        Self::from_parts(image, sign).expect("shuffle is a permutation")
    }

    pub fn image(&self, i: usize) -> usize {
        self.image[i] as usize
    }

    pub fn preimage(&self, j: usize) -> usize {
        self.preimage[j] as usize
    }

    pub fn sign(&self, i: usize) -> i8 {
        self.sign[i]
    }

    /// `P|i⟩`.
    pub fn forward(&self, i: usize) -> (usize, i8) {
        (self.image[i] as usize, self.sign[i])
    }

    /// `P*|j⟩`.
    pub fn backward(&self, j: usize) -> (usize, i8) {
        let i = self.preimage[j] as usize;
        (i, self.sign[i])
    }
}

/// Matchings `M_1..M_d` and permutations `P_1..P_e` on `[n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftInstance {
    pub signature: Signature,
    pub n: usize,
    pub seed: u64,
    pub signed: bool,
    pub matchings: Vec<SignedMatching>,
    pub permutations: Vec<SignedPermutation>,
}

/// Everything needed to regenerate a lift.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftRecord {
    pub version: u32,
    pub signature: Signature,
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_signed")]
    pub signed: bool,
}

fn default_signed() -> bool {
    true
}

pub const LIFT_RECORD_VERSION: u32 = 1;

fn stream_rng(seed: u64, object: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(object as u64);
    rng
}

/// Uniform signed matchings and permutations, each drawn from its own
/// RNG stream keyed by `(seed, object index)`.
pub fn sample_lift(signature: Signature, n: usize, seed: u64) -> Result<LiftInstance> {
    sample_lift_with(signature, n, seed, true)
}

/// Same as [`sample_lift`] with every sign `+1`. Diagnostics only.
pub fn sample_lift_unsigned(signature: Signature, n: usize, seed: u64) -> Result<LiftInstance> {
    sample_lift_with(signature, n, seed, false)
}

fn sample_lift_with(signature: Signature, n: usize, seed: u64, signed: bool) -> Result<LiftInstance> {
    if n < 2 {
        return Err(Error::LiftTooSmall(n));
    }
    if signature.d > 0 && n % 2 == 1 {
        return Err(Error::OddLiftSize { n });
    }
    if n > u32::MAX as usize {
        return Err(Error::LiftTooSmall(n));
    }
    let matchings = (0..signature.d)
        .map(|k| SignedMatching::sample(n, &mut stream_rng(seed, k), signed))
        .collect();
    let permutations = (0..signature.e)
        .map(|k| SignedPermutation::sample(n, &mut stream_rng(seed, signature.d + k), signed))
        .collect();
    Ok(LiftInstance { signature, n, seed, signed, matchings, permutations })
}

impl LiftInstance {
    /// Assembles a lift from explicit parts; `seed` is recorded but unused.
    pub fn from_parts(
        matchings: Vec<SignedMatching>,
        permutations: Vec<SignedPermutation>,
    ) -> Result<Self> {
        let n = matchings
            .first()
            .map(SignedMatching::len)
            .or_else(|| permutations.first().map(|p| p.image.len()))
            .ok_or(Error::EmptyInput("lift needs at least one matching or permutation"))?;
        if matchings.iter().any(|m| m.len() != n) || permutations.iter().any(|p| p.image.len() != n) {
            return Err(Error::Validation("all lift components must act on the same [n]".into()));
        }
        Ok(Self {
            signature: Signature::new(matchings.len(), permutations.len()),
            n,
            seed: 0,
            signed: true,
            matchings,
            permutations,
        })
    }

    pub fn record(&self) -> LiftRecord {
        LiftRecord {
            version: LIFT_RECORD_VERSION,
            signature: self.signature,
            n: self.n,
            seed: self.seed,
            signed: self.signed,
        }
    }

    pub fn from_record(rec: &LiftRecord) -> Result<Self> {
        if rec.version != LIFT_RECORD_VERSION {
            return Err(Error::Validation(format!("unsupported lift record version {}", rec.version)));
        }
        sample_lift_with(rec.signature, rec.n, rec.seed, rec.signed)
    }

    /// One letter applied to `|i⟩`.
    #[inline]
    pub fn apply_letter(&self, l: Letter, i: usize) -> (usize, i8) {
        let k = l.index as usize - 1;
        match l.kind {
            LetterKind::Y => {
                let m = &self.matchings[k];
                (m.partner(i), m.sign(i))
            }
            LetterKind::Z => self.permutations[k].forward(i),
            LetterKind::ZStar => self.permutations[k].backward(i),
        }
    }

    /// `L^w |i⟩ = s |j⟩`; letters act right to left.
    pub fn apply_word(&self, w: &Word, i: usize) -> (usize, i8) {
        let mut v = i;
        let mut s = 1i8;
        for &l in w.letters().iter().rev() {
            let (u, t) = self.apply_letter(l, v);
            v = u;
            s *= t;
        }
        (v, s)
    }
}

/// The extension `p(L) = Σ_w L^w ⊗ a_w`, an `nr × nr` Hermitian matrix.
pub fn evaluate(p: &MatrixPolynomial, lift: &LiftInstance) -> Result<SparseHermitianOperator> {
    if p.signature() != lift.signature {
        return Err(Error::SignatureMismatch { poly: p.signature(), other: lift.signature });
    }
    p.check_self_adjoint()?;
    let r = p.r();
    let n = lift.n;
    let mut triplets = Vec::new();
    for (w, a) in p.terms() {
        let entries: Vec<(usize, usize, Complex64)> = (0..r)
            .flat_map(|pp| (0..r).map(move |q| (pp, q)))
            .filter(|&(pp, q)| a[(pp, q)] != Complex64::new(0.0, 0.0))
            .map(|(pp, q)| (pp, q, a[(pp, q)]))
            .collect();
        for x in 0..n {
            let (y, s) = lift.apply_word(w, x);
            for &(pp, q, v) in &entries {
                triplets.push((y * r + pp, x * r + q, v * f64::from(s)));
            }
        }
    }
    Ok(SparseHermitianOperator::from_triplets(n * r, triplets).with_blocks(BlockShape { n, r }))
}

/// Vertices lying on a cycle of length at most `f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadVertexSet {
    pub members: Vec<usize>,
    pub f: usize,
    pub n: usize,
}

impl BadVertexSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn fraction(&self) -> f64 {
        self.members.len() as f64 / self.n as f64
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &i in &self.members {
            m[i] = true;
        }
        m
    }
}

/// All `i` with `L^w |i⟩ ∝ |i⟩` for some reduced `w`, `0 < |w| ≤ f`.
///
/// Depth-first enumeration of non-backtracking letter sequences from each vertex.
pub fn find_bad_vertices(lift: &LiftInstance, f: usize) -> BadVertexSet {
    let letters = lift.signature.letters();
    let inverse_code: Vec<usize> = letters
        .iter()
        .map(|l| l.inverse().code(lift.signature))
        .collect();
    let members: Vec<usize> = (0..lift.n)
        .into_par_iter()
        .filter(|&i| returns_within(lift, &letters, &inverse_code, i, f))
        .collect();
    let set = BadVertexSet { members, f, n: lift.n };
    if set.fraction() > 0.5 {
        log::warn!(
            "{} of {} vertices lie on cycles of length <= {}; the lift is too small for this radius",
            set.len(),
            lift.n,
            f
        );
    }
    set
}

fn returns_within(
    lift: &LiftInstance,
    letters: &[Letter],
    inverse_code: &[usize],
    start: usize,
    f: usize,
) -> bool {
    // Stack of (vertex, code of last letter applied, depth).
    let mut stack: Vec<(usize, usize, usize)> = Vec::with_capacity(letters.len() * f.max(1));
    for (c, &l) in letters.iter().enumerate() {
        if f >= 1 {
            stack.push((lift.apply_letter(l, start).0, c, 1));
        }
    }
    while let Some((v, last, depth)) = stack.pop() {
        if v == start {
            return true;
        }
        if depth == f {
            continue;
        }
        for (c, &l) in letters.iter().enumerate() {
            if c != inverse_code[last] {
                stack.push((lift.apply_letter(l, v).0, c, depth + 1));
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::{p333, p_regular, scalar};

    #[test]
    fn matchings_are_involutions() {
        let l = sample_lift(Signature::new(3, 0), 4, 7).unwrap();
        for m in &l.matchings {
            for i in 0..4 {
                assert_eq!(m.partner(m.partner(i)), i);
                assert_ne!(m.partner(i), i);
                assert_eq!(m.sign(i), m.sign(m.partner(i)));
            }
        }
    }

    #[test]
    fn permutations_are_unitary() {
        let l = sample_lift(Signature::new(0, 1), 5, 3).unwrap();
        let p = &l.permutations[0];
        for i in 0..5 {
            let (j, s) = p.forward(i);
            let (k, t) = p.backward(j);
            assert_eq!(k, i);
            assert_eq!(s * t, 1);
        }
    }

    #[test]
    fn deterministic_and_rejects_odd() {
        let sig = Signature::new(2, 2);
        assert_eq!(sample_lift(sig, 10, 42).unwrap(), sample_lift(sig, 10, 42).unwrap());
        assert_ne!(sample_lift(sig, 10, 42).unwrap(), sample_lift(sig, 10, 43).unwrap());
        assert!(matches!(sample_lift(sig, 9, 1), Err(Error::OddLiftSize { n: 9 })));
        assert!(sample_lift(Signature::new(0, 1), 9, 1).is_ok());
        let l = sample_lift(sig, 10, 42).unwrap();
        assert_eq!(LiftInstance::from_record(&l.record()).unwrap(), l);
    }

    #[test]
    fn z1_squared_on_three_cycle() {
        let p = SignedPermutation::from_parts(vec![1, 2, 0], vec![1, 1, 1]).unwrap();
        let l = LiftInstance::from_parts(vec![], vec![p]).unwrap();
        let w = Word::parse("Z1 Z1").unwrap();
        assert_eq!(l.apply_word(&w, 0), (2, 1));
        assert_eq!(l.apply_word(&Word::identity(), 1), (1, 1));
    }

    #[test]
    fn p3_on_forced_swaps() {
        let swap = |s: i8| SignedMatching::from_parts(vec![1, 0], vec![s, s]).unwrap();
        let l = LiftInstance::from_parts(vec![swap(1), swap(1), swap(-1)], vec![]).unwrap();
        let a = evaluate(&p_regular(3), &l).unwrap().to_dense();
        assert_eq!(a[(0, 1)].re, 1.0);
        assert_eq!(a[(1, 0)].re, 1.0);
        assert_eq!(a[(0, 0)].re, 0.0);
        let bad = find_bad_vertices(&l, 2);
        assert_eq!(bad.members, vec![0, 1]);
    }

    #[test]
    fn constant_polynomial_is_block_diagonal() {
        let s = scalar(2.5);
        let c = MatrixPolynomial::from_terms(
            Signature::new(1, 0),
            1,
            s.terms().map(|(w, a)| (w.clone(), a.clone())),
        )
        .unwrap();
        let l = sample_lift(Signature::new(1, 0), 6, 0).unwrap();
        let a = evaluate(&c, &l).unwrap();
        assert_eq!(a.nnz(), 6);
        assert!(a.diagonal().iter().all(|&x| x == 2.5));
    }

    #[test]
    fn p333_rows_bounded_by_six() {
        let p = p333();
        let l = sample_lift(p.signature(), 50, 11).unwrap();
        let a = evaluate(&p, &l).unwrap();
        assert!(a.is_hermitian());
        assert!(a.max_abs_row_sum() <= 6.0);
    }

    #[test]
    fn signature_mismatch() {
        let l = sample_lift(Signature::new(2, 0), 4, 0).unwrap();
        assert!(matches!(
            evaluate(&p_regular(3), &l),
            Err(Error::SignatureMismatch { .. })
        ));
    }
}
