//! Noncommutative words over involutions `Y_i` and invertible letters `Z_i`, `Z_i*`.
//!
//! A word is stored left to right, so `Z1 Y2` means the operator `Z1 · Y2`
//! (applied to a vector, `Y2` acts first). Words compare in length-lexicographic
//! order with letters ordered `Y1 < .. < Yd < Z1 < Z1* < .. < Ze < Ze*`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts of involution (`d`) and invertible (`e`) indeterminates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub d: usize,
    pub e: usize,
}

impl Signature {
    pub fn new(d: usize, e: usize) -> Self {
        Self { d, e }
    }

    /// Size of the alphabet, `d + 2e`.
    pub fn alphabet_size(&self) -> usize {
        self.d + 2 * self.e
    }

    /// All letters in canonical order.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.alphabet_size())
            .map(|code| Letter::from_code(*self, code))
            .collect()
    }

    pub fn contains(&self, letter: Letter) -> bool {
        match letter.kind {
            LetterKind::Y => letter.index >= 1 && letter.index as usize <= self.d,
            LetterKind::Z | LetterKind::ZStar => {
                letter.index >= 1 && letter.index as usize <= self.e
            }
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(d={}, e={})", self.d, self.e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LetterKind {
    Y,
    Z,
    ZStar,
}

/// One indeterminate. Indices are 1-based, as in the DSL.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub kind: LetterKind,
    pub index: u16,
}

impl Letter {
    pub fn y(index: u16) -> Self {
        Self { kind: LetterKind::Y, index }
    }

    pub fn z(index: u16) -> Self {
        Self { kind: LetterKind::Z, index }
    }

    pub fn z_star(index: u16) -> Self {
        Self { kind: LetterKind::ZStar, index }
    }

    /// The adjoint letter, which is also its inverse.
    pub fn inverse(self) -> Self {
        let kind = match self.kind {
            LetterKind::Y => LetterKind::Y,
            LetterKind::Z => LetterKind::ZStar,
            LetterKind::ZStar => LetterKind::Z,
        };
        Self { kind, index: self.index }
    }

    /// Position in the canonical alphabet of `sig` (0-based).
    pub fn code(self, sig: Signature) -> usize {
        let i = self.index as usize - 1;
        match self.kind {
            LetterKind::Y => i,
            LetterKind::Z => sig.d + 2 * i,
            LetterKind::ZStar => sig.d + 2 * i + 1,
        }
    }

    pub fn from_code(sig: Signature, code: usize) -> Self {
        if code < sig.d {
            Letter::y(code as u16 + 1)
        } else {
            let k = code - sig.d;
            let index = (k / 2) as u16 + 1;
            if k % 2 == 0 {
                Letter::z(index)
            } else {
                Letter::z_star(index)
            }
        }
    }

    fn sort_key(self) -> (u8, u16, u8) {
        match self.kind {
            LetterKind::Y => (0, self.index, 0),
            LetterKind::Z => (1, self.index, 0),
            LetterKind::ZStar => (1, self.index, 1),
        }
    }

    pub fn validate(self, sig: Signature) -> Result<()> {
        if sig.contains(self) {
            Ok(())
        } else {
            Err(Error::IndexOutOfSignature { letter: self.to_string(), signature: sig })
        }
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LetterKind::Y => write!(f, "Y{}", self.index),
            LetterKind::Z => write!(f, "Z{}", self.index),
            LetterKind::ZStar => write!(f, "Z{}*", self.index),
        }
    }
}

/// A finite sequence of letters; the empty word is the identity `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// No adjacent `Yi Yi`, `Zi Zi*` or `Zi* Zi`.
    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|p| p[1] != p[0].inverse())
    }

    /// Concatenation `self · other` followed by reduction.
    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.clone();
        for &l in &other.0 {
            out.push_reduced(l);
        }
        out
    }

    /// Appends a letter on the right, cancelling against the last letter.
    pub fn push_reduced(&mut self, letter: Letter) {
        if self.0.last() == Some(&letter.inverse()) {
            self.0.pop();
        } else {
            self.0.push(letter);
        }
    }

    pub fn validate(&self, sig: Signature) -> Result<()> {
        self.0.iter().try_for_each(|l| l.validate(sig))
    }

    /// Parses whitespace-separated letters, or `1` for the identity.
    pub fn parse(text: &str) -> std::result::Result<Word, String> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            letters.push(parse_letter(tok)?);
        }
        Ok(Word(letters))
    }
}

fn parse_letter(tok: &str) -> std::result::Result<Letter, String> {
    let (kind, rest) = if let Some(r) = tok.strip_prefix('Y') {
        (LetterKind::Y, r)
    } else if let Some(r) = tok.strip_prefix('Z') {
        match r.strip_suffix('*') {
            Some(inner) => (LetterKind::ZStar, inner),
            None => (LetterKind::Z, r),
        }
    } else {
        return Err(format!("unknown letter `{tok}`"));
    };
    let index: u16 = rest
        .parse()
        .map_err(|_| format!("bad letter index in `{tok}`"))?;
    if index == 0 {
        return Err(format!("letter indices start at 1, got `{tok}`"));
    }
    Ok(Letter { kind, index })
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Free reduction with a stack scan; the result is unique.
pub fn reduce(w: &Word) -> Word {
    let mut out = Word(Vec::with_capacity(w.len()));
    for &l in &w.0 {
        out.push_reduced(l);
    }
    out
}

/// Reduction scanning right to left. Agrees with [`reduce`] (confluence).
pub fn reduce_from_right(w: &Word) -> Word {
    let mut stack: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in w.0.iter().rev() {
        if stack.last() == Some(&l.inverse()) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    stack.reverse();
    Word(stack)
}

/// The adjointed reverse `w*`.
pub fn word_adjoint(w: &Word) -> Word {
    Word(w.0.iter().rev().map(|l| l.inverse()).collect())
}
