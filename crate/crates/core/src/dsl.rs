//! Text format for matrix polynomials.
//!
//! ```text
//! # p3
//! signature d=3 e=0 r=1
//! term word="Y1" coeff=[[1]]
//! term word="Y2" coeff=[[1]]
//! term word="Y3" coeff=[[1]]
//! ```
//!
//! Coefficients are row-major; entries are reals or `(re,im)` pairs.
//! `symmetrize=true` in the header accepts non-self-adjoint input and
//! returns `(p + p*) / 2`.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{Coeff, MatrixPolynomial};
use crate::word::{Signature, Word};

struct Header {
    signature: Signature,
    r: usize,
    symmetrize: bool,
}

/// Parses DSL text into a reduced, merged polynomial.
pub fn parse_poly(text: &str) -> Result<MatrixPolynomial> {
    let mut header: Option<Header> = None;
    let mut poly: Option<MatrixPolynomial> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let mut cur = Cursor::new(line, line_no);
        cur.skip_ws();
        let keyword = cur.ident();
        match keyword.as_str() {
            "signature" => {
                if header.is_some() {
                    return Err(cur.error("duplicate signature header"));
                }
                let h = parse_header(&mut cur)?;
                poly = Some(MatrixPolynomial::new(h.signature, h.r));
                header = Some(h);
            }
            "term" => {
                let p = match poly.as_mut() {
                    Some(p) => p,
                    None => return Err(cur.error("`term` before `signature` header")),
                };
                let (word, coeff) = parse_term(&mut cur)?;
                p.add_term(word, coeff)?;
            }
            "" => return Err(cur.error("expected `signature` or `term`")),
            other => return Err(cur.error(&format!("unknown keyword `{other}`"))),
        }
    }

    let header = header.ok_or(Error::Syntax {
        line: 1,
        column: 1,
        message: "missing `signature` header".into(),
    })?;
    let poly = poly.expect("set with header");
    if header.symmetrize {
        Ok(poly.symmetrized())
    } else {
        poly.check_self_adjoint()?;
        Ok(poly)
    }
}

fn parse_header(cur: &mut Cursor) -> Result<Header> {
    let (mut d, mut e, mut r, mut symmetrize) = (None, None, None, false);
    loop {
        cur.skip_ws();
        if cur.at_end() {
            break;
        }
        let col = cur.column();
        let key = cur.ident();
        cur.expect('=')?;
        let value = cur.bare_value();
        let parse_int = |v: &str| -> Result<usize> {
            v.parse().map_err(|_| Error::Syntax {
                line: cur.line,
                column: col,
                message: format!("expected a non-negative integer for `{key}`, got `{v}`"),
            })
        };
        match key.as_str() {
            "d" => d = Some(parse_int(&value)?),
            "e" => e = Some(parse_int(&value)?),
            "r" => r = Some(parse_int(&value)?),
            "symmetrize" => {
                symmetrize = match value.as_str() {
                    "true" => true,
                    "false" => false,
                    _ => return Err(cur.error_at(col, "symmetrize must be true or false")),
                }
            }
            _ => return Err(cur.error_at(col, &format!("unknown header field `{key}`"))),
        }
    }
    let missing = |name: &str| cur.error(&format!("header is missing `{name}=`"));
    let r = r.ok_or_else(|| missing("r"))?;
    if r == 0 {
        return Err(cur.error("r must be positive"));
    }
    Ok(Header {
        signature: Signature::new(d.ok_or_else(|| missing("d"))?, e.ok_or_else(|| missing("e"))?),
        r,
        symmetrize,
    })
}

fn parse_term(cur: &mut Cursor) -> Result<(Word, Coeff)> {
    let (mut word, mut coeff) = (None, None);
    loop {
        cur.skip_ws();
        if cur.at_end() {
            break;
        }
        let col = cur.column();
        let key = cur.ident();
        cur.expect('=')?;
        match key.as_str() {
            "word" => {
                let wcol = cur.column();
                let s = cur.quoted()?;
                word = Some(Word::parse(&s).map_err(|m| cur.error_at(wcol, &m))?);
            }
            "coeff" => coeff = Some(cur.matrix()?),
            _ => return Err(cur.error_at(col, &format!("unknown term field `{key}`"))),
        }
    }
    match (word, coeff) {
        (Some(w), Some(c)) => Ok((w, c)),
        (None, _) => Err(cur.error("term is missing `word=`")),
        (_, None) => Err(cur.error("term is missing `coeff=`")),
    }
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Self { chars: src.chars().collect(), pos: 0, line }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn bare_value(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if !c.is_whitespace()) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn error(&self, message: &str) -> Error {
        self.error_at(self.column(), message)
    }

    fn error_at(&self, column: usize, message: &str) -> Error {
        Error::Syntax { line: self.line, column, message: message.to_string() }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn quoted(&mut self) -> Result<String> {
        self.expect('"')?;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == '"' {
                let s = self.chars[start..self.pos].iter().collect();
                self.pos += 1;
                return Ok(s);
            }
            self.pos += 1;
        }
        Err(self.error_at(start, "unterminated string"))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || "+-.eE".contains(c)) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse()
            .map_err(|_| self.error_at(start + 1, &format!("expected a number, got `{s}`")))
    }

    fn entry(&mut self) -> Result<Complex64> {
        self.skip_ws();
        if self.peek() == Some('(') {
            self.pos += 1;
            let re = self.number()?;
            self.expect(',')?;
            let im = self.number()?;
            self.expect(')')?;
            Ok(Complex64::new(re, im))
        } else {
            Ok(Complex64::new(self.number()?, 0.0))
        }
    }

    fn matrix(&mut self) -> Result<Coeff> {
        let col = self.column();
        self.expect('[')?;
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        loop {
            self.expect('[')?;
            let mut row = vec![self.entry()?];
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.pos += 1;
                        row.push(self.entry()?);
                    }
                    Some(']') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected `,` or `]` in matrix row")),
                }
            }
            rows.push(row);
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.error("expected `,` or `]` after matrix row")),
            }
        }
        let ncols = rows[0].len();
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(self.error_at(col, "ragged matrix rows"));
        }
        Ok(Coeff::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
    }
}

/// Writes `p` in the DSL; `parse_poly(&serialize_poly(p))` reproduces `p` exactly.
pub fn serialize_poly(p: &MatrixPolynomial) -> String {
    let sig = p.signature();
    let mut out = format!("signature d={} e={} r={}\n", sig.d, sig.e, p.r());
    for (w, a) in p.terms() {
        let _ = writeln!(out, "term word=\"{}\" coeff={}", w, format_matrix(a));
    }
    out
}

fn format_matrix(a: &Coeff) -> String {
    let complex = a.iter().any(|z| z.im != 0.0);
    let rows: Vec<String> = (0..a.nrows())
        .map(|i| {
            let entries: Vec<String> = (0..a.ncols())
                .map(|j| {
                    let z = a[(i, j)];
                    if complex {
                        format!("({:?},{:?})", z.re, z.im)
                    } else {
                        format!("{:?}", z.re)
                    }
                })
                .collect();
            format!("[{}]", entries.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}
