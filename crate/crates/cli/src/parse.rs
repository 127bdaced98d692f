//! Expression language for elements of the quantum and free algebras.
//!
//! ```text
//! expr   := ('+'|'-')? term (('+'|'-') term)*
//! term   := coeff ('*' factor)* | factor ('*' factor)*
//! factor := VAR ('^' INT)?
//! VAR    := ('x'|'z') INT          quantum mode
//!         | 'z' INT                free mode, concatenation-ordered
//! coeff  := REAL | REAL 'i' | 'i' | '(' REAL (('+'|'-') REAL? 'i')? ')' | '(' REAL? 'i' ')'
//! ```
//!
//! Whitespace is insignificant. In quantum mode every product is normal
//! ordered as it is read.

use qanalytic::{Complex64, FreeElement, MultiIndex, QElement, QParameter, Word};
use thiserror::Error;

/// Coefficients below this fraction of the largest term contribution are
/// rounding residue from normal ordering and are dropped.
pub const CHOP_RELATIVE: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
#[error("{message} at position {position}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

fn err<T>(position: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        position,
        message: message.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Free,
    Quantum,
}

/// One parsed monomial term: coefficient and the factors in input order.
#[derive(Clone, Debug, PartialEq)]
struct Term {
    coeff: Complex64,
    /// `(letter, power)` pairs.
    factors: Vec<(usize, u32)>,
    position: usize,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    mode: Mode,
    n: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            err(self.pos, format!("expected '{}'", c as char))
        }
    }

    fn integer(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return err(start, "expected an integer");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse()
            .or_else(|_| err(start, "integer out of range"))
    }

    /// Unsigned decimal literal with optional fraction and exponent.
    fn real(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos > s
        };
        let mut any = digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            any |= digits(self);
        }
        if !any {
            self.pos = start;
            return err(start, "expected a number");
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = mark;
            }
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii")
            .parse()
            .or_else(|_| err(start, "malformed number"))
    }

    fn at_real(&mut self) -> bool {
        matches!(self.peek(), Some(b'0'..=b'9' | b'.'))
    }

    /// `REAL`, `REAL i`, `i` or a parenthesised complex literal.
    fn coeff(&mut self) -> Result<Complex64, ParseError> {
        if self.eat(b'(') {
            let value = self.paren_complex()?;
            self.expect(b')')?;
            return Ok(value);
        }
        if self.eat(b'i') {
            return Ok(Complex64::new(0.0, 1.0));
        }
        let a = self.real()?;
        if self.eat(b'i') {
            Ok(Complex64::new(0.0, a))
        } else {
            Ok(Complex64::new(a, 0.0))
        }
    }

    fn paren_complex(&mut self) -> Result<Complex64, ParseError> {
        let sign = |p: &mut Self| {
            if p.eat(b'-') {
                -1.0
            } else {
                p.eat(b'+');
                1.0
            }
        };
        let s1 = sign(self);
        if self.eat(b'i') {
            return Ok(Complex64::new(0.0, s1));
        }
        let a = s1 * self.real()?;
        if self.eat(b'i') {
            return Ok(Complex64::new(0.0, a));
        }
        match self.peek() {
            Some(b'+') | Some(b'-') => {
                let s2 = sign(self);
                let b = if self.at_real() { self.real()? } else { 1.0 };
                self.expect(b'i')?;
                Ok(Complex64::new(a, s2 * b))
            }
            _ => Ok(Complex64::new(a, 0.0)),
        }
    }

    fn factor(&mut self) -> Result<(usize, u32), ParseError> {
        let start = self.pos;
        let var = self.peek();
        match (var, self.mode) {
            (Some(b'z'), _) | (Some(b'x'), Mode::Quantum) => self.pos += 1,
            (Some(b'x'), Mode::Free) => return err(start, "free mode uses z variables"),
            _ => return err(start, "expected a variable"),
        }
        let idx_pos = self.pos;
        let j = self.integer()? as usize;
        if j == 0 || j > self.n {
            return err(idx_pos, format!("variable index {j} outside 1..={}", self.n));
        }
        let power = if self.eat(b'^') {
            self.skip_ws();
            let p = self.integer()?;
            u32::try_from(p).or_else(|_| err(self.pos, "exponent too large"))?
        } else {
            1
        };
        Ok((j, power))
    }

    fn term(&mut self, sign: f64) -> Result<Term, ParseError> {
        let position = self.pos;
        let starts_with_var = matches!(self.peek(), Some(b'x' | b'z'));
        let mut coeff = Complex64::new(sign, 0.0);
        let mut factors = Vec::new();
        if starts_with_var {
            factors.push(self.factor()?);
        } else {
            coeff *= self.coeff()?;
        }
        while self.eat(b'*') {
            factors.push(self.factor()?);
        }
        Ok(Term {
            coeff,
            factors,
            position,
        })
    }

    fn expr(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut terms = Vec::new();
        let mut sign = if self.eat(b'-') {
            -1.0
        } else {
            self.eat(b'+');
            1.0
        };
        loop {
            terms.push(self.term(sign)?);
            if self.eat(b'+') {
                sign = 1.0;
            } else if self.eat(b'-') {
                sign = -1.0;
            } else {
                break;
            }
        }
        if self.peek().is_some() {
            return err(self.pos, "unexpected input");
        }
        Ok(terms)
    }
}

fn parse_terms(text: &str, mode: Mode, n: usize) -> Result<Vec<Term>, ParseError> {
    Parser {
        src: text.as_bytes(),
        pos: 0,
        mode,
        n,
    }
    .expr()
}

fn degree_check(term: &Term, cap: usize) -> Result<(), ParseError> {
    let degree: u64 = term.factors.iter().map(|&(_, p)| p as u64).sum();
    if degree > cap as u64 {
        return err(
            term.position,
            format!("term of degree {degree} exceeds the cap {cap}"),
        );
    }
    Ok(())
}

/// Parses a free series; factors concatenate in input order.
pub fn parse_free(text: &str, n: usize, cap: usize) -> Result<FreeElement, ParseError> {
    let terms = parse_terms(text, Mode::Free, n)?;
    let mut out = FreeElement::zero(n, cap);
    for t in &terms {
        degree_check(t, cap)?;
        let letters: Vec<usize> = t
            .factors
            .iter()
            .flat_map(|&(j, p)| std::iter::repeat_n(j, p as usize))
            .collect();
        let w = FreeElement::word(n, cap, Word::new(&letters), t.coeff).expect("checked");
        out = out.add(&w).expect("same shape");
    }
    Ok(out)
}

/// Parses an element of the quantum algebra, normal ordering each product.
pub fn parse_quantum(text: &str, n: usize, q: QParameter, cap: usize) -> Result<QElement, ParseError> {
    let terms = parse_terms(text, Mode::Quantum, n)?;
    let mut out = QElement::zero(n, q, cap);
    let mut scale: f64 = 0.0;
    for t in &terms {
        degree_check(t, cap)?;
        let mut product = QElement::one(n, q, cap).scale(t.coeff);
        for &(j, p) in &t.factors {
            let factor = QElement::monomial(n, q, cap, MultiIndex::unit(n, j), Complex64::new(1.0, 0.0))
                .expect("checked")
                .pow(p)
                .expect("degree checked");
            product = product.multiply(&factor).expect("same shape");
        }
        scale = product.terms().map(|(_, c)| c.norm()).fold(scale, f64::max);
        out = out.add(&product).expect("same shape");
    }
    let kept: Vec<(MultiIndex, Complex64)> = out
        .terms()
        .filter(|(_, c)| c.norm() > CHOP_RELATIVE * scale)
        .map(|(k, c)| (k.clone(), *c))
        .collect();
    Ok(QElement::from_terms(n, q, cap, kept).expect("valid terms"))
}

fn format_coeff(c: Complex64) -> String {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    format!("({}{}{}i)", c.re, sign, c.im.abs())
}

/// Prints in the input grammar; `parse_free` reads it back exactly.
pub fn print_free(a: &FreeElement) -> String {
    if a.is_zero() {
        return "0".into();
    }
    a.terms()
        .map(|(w, c)| {
            let mut s = format_coeff(*c);
            for l in w.letters() {
                s.push_str(&format!("*z{l}"));
            }
            s
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Prints normal-ordered monomials; `parse_quantum` reads it back exactly.
pub fn print_quantum(a: &QElement) -> String {
    if a.is_zero() {
        return "0".into();
    }
    a.terms()
        .map(|(k, c)| {
            let mut s = format_coeff(*c);
            for (j, &e) in k.entries().iter().enumerate() {
                match e {
                    0 => {}
                    1 => s.push_str(&format!("*x{}", j + 1)),
                    _ => s.push_str(&format!("*x{}^{e}", j + 1)),
                }
            }
            s
        })
        .collect::<Vec<_>>()
        .join(" + ")
}
