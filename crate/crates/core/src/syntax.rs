//! Text form of elements.
//!
//! ```text
//! element := ['-'] term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*      right side of '/' is a scalar
//! factor  := atom ['^' nat]
//! atom    := 'x[' element (',' element)* ']' | 't' nat | 'd' nat | 'th'
//!          | number | '(' element ')'
//! ```
//!
//! The entries of `x[...]` must evaluate to scalars. Products are evaluated
//! left to right.

use thiserror::Error;

use crate::algebra::{Monomial, Sig, WeylElement};
use crate::gamma::fmt_vector;
use crate::numberfield::{FieldElement, NumberField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unknown axis {name}")]
    UnknownAxis { name: String },
    #[error("x{vector} is not in Gamma")]
    AlphaNotInGamma { vector: String },
}

fn parse_err(position: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError::Parse {
        position,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(u64),
    Th,
    T(usize),
    D(usize),
    XOpen,
    Open,
    Close,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    let digits = |from: usize| {
        let mut e = from;
        while e < bytes.len() && bytes[e].is_ascii_digit() {
            e += 1;
        }
        e
    };
    while k < bytes.len() {
        let c = bytes[k];
        let start = k;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                k += 1;
                continue;
            }
            b'0'..=b'9' => {
                let e = digits(k);
                let n = text[k..e]
                    .parse::<u64>()
                    .map_err(|_| parse_err(k, "number too large"))?;
                out.push((start, Tok::Num(n)));
                k = e;
                continue;
            }
            b't' if bytes.get(k + 1) == Some(&b'h') => {
                out.push((start, Tok::Th));
                k += 2;
                continue;
            }
            b't' | b'd' => {
                let e = digits(k + 1);
                if e == k + 1 {
                    return Err(parse_err(k + 1, "expected axis number"));
                }
                let n = text[k + 1..e]
                    .parse::<usize>()
                    .map_err(|_| parse_err(k + 1, "axis number too large"))?;
                out.push((start, if c == b't' { Tok::T(n) } else { Tok::D(n) }));
                k = e;
                continue;
            }
            b'x' => {
                if bytes.get(k + 1) != Some(&b'[') {
                    return Err(parse_err(k + 1, "expected '[' after x"));
                }
                out.push((start, Tok::XOpen));
                k += 2;
                continue;
            }
            _ => {}
        }
        let tok = match c {
            b'(' => Tok::Open,
            b')' => Tok::Close,
            b']' => Tok::RBracket,
            b',' => Tok::Comma,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            _ => {
                let ch = text[k..].chars().next().unwrap();
                return Err(parse_err(k, format!("unexpected character '{ch}'")));
            }
        };
        out.push((start, tok));
        k += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    sig: &'a Sig,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(parse_err(self.offset(), format!("expected {what}")))
        }
    }

    fn element(&mut self) -> Result<WeylElement, SyntaxError> {
        let negate = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut acc = self.term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<WeylElement, SyntaxError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.offset();
                    let d = self.factor()?;
                    let c = d
                        .as_scalar()
                        .ok_or_else(|| parse_err(at, "divisor must be a scalar"))?;
                    let inv = c.inv().map_err(|_| parse_err(at, "division by zero"))?;
                    acc = acc.scale(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<WeylElement, SyntaxError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let at = self.offset();
            match self.peek() {
                Some(&Tok::Num(n)) => {
                    self.pos += 1;
                    let e = u32::try_from(n).map_err(|_| parse_err(at, "exponent too large"))?;
                    Ok(base.pow(e))
                }
                _ => Err(parse_err(at, "expected exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<WeylElement, SyntaxError> {
        let sig = self.sig;
        let at = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(parse_err(at, "unexpected end of input"));
        };
        self.pos += 1;
        match tok {
            Tok::Num(n) => {
                let v = i64::try_from(n).map_err(|_| parse_err(at, "number too large"))?;
                Ok(WeylElement::from_i64(sig, v))
            }
            Tok::Th => Ok(WeylElement::scalar(sig, sig.field().theta())),
            Tok::T(k) => WeylElement::t(sig, k).map_err(|_| SyntaxError::UnknownAxis {
                name: format!("t{k}"),
            }),
            Tok::D(k) => WeylElement::d(sig, k).map_err(|_| SyntaxError::UnknownAxis {
                name: format!("d{k}"),
            }),
            Tok::Open => {
                let inner = self.element()?;
                self.expect(Tok::Close, "')'")?;
                Ok(inner)
            }
            Tok::XOpen => {
                let mut coords = Vec::new();
                loop {
                    let eat = self.offset();
                    let e = self.element()?;
                    coords.push(
                        e.as_scalar()
                            .ok_or_else(|| parse_err(eat, "x[...] entries must be scalars"))?,
                    );
                    match self.peek() {
                        Some(Tok::Comma) => self.pos += 1,
                        _ => break,
                    }
                }
                self.expect(Tok::RBracket, "']'")?;
                if coords.len() != sig.gamma().dim() {
                    return Err(parse_err(
                        at,
                        format!("x[...] needs {} entries", sig.gamma().dim()),
                    ));
                }
                let alpha = sig
                    .gamma()
                    .member(&coords)
                    .map_err(|_| SyntaxError::AlphaNotInGamma {
                        vector: fmt_vector(&coords),
                    })?;
                Ok(WeylElement::x(sig, alpha))
            }
            _ => Err(parse_err(at, "unexpected token")),
        }
    }
}

/// Parses an element of the algebra described by `sig`.
pub fn parse_element(sig: &Sig, text: &str) -> Result<WeylElement, SyntaxError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        sig,
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = p.element()?;
    if p.pos != p.toks.len() {
        return Err(parse_err(p.offset(), "unexpected trailing input"));
    }
    Ok(e)
}

/// Parses a scalar such as `1/2 + 3*th`.
pub fn parse_field_element(field: &NumberField, text: &str) -> Result<FieldElement, SyntaxError> {
    use crate::algebra::Signature;
    use crate::gamma::GammaGroup;
    let sig = Signature::new(1, 0, 0, GammaGroup::trivial(field)).expect("valid scalar signature");
    let e = parse_element(&sig, text)?;
    e.as_scalar()
        .ok_or_else(|| parse_err(0, "expected a scalar"))
}

fn push_power(out: &mut String, name: &str, e: u32) {
    if !out.is_empty() {
        out.push('*');
    }
    out.push_str(name);
    if e > 1 {
        out.push('^');
        out.push_str(&e.to_string());
    }
}

fn monomial_body(sig: &Sig, m: &Monomial, dname: &str) -> String {
    let mut out = String::new();
    if !m.alpha.is_zero() {
        let coords: Vec<String> = sig
            .gamma()
            .embed(&m.alpha)
            .iter()
            .map(ToString::to_string)
            .collect();
        out.push_str(&format!("x[{}]", coords.join(",")));
    }
    for (p, &e) in m.i.entries().iter().enumerate() {
        if e > 0 {
            push_power(&mut out, &format!("t{}", p + 1), e);
        }
    }
    for (p, &e) in m.mu.entries().iter().enumerate() {
        if e > 0 {
            push_power(&mut out, &format!("{dname}{}", p + 1), e);
        }
    }
    out
}

pub(crate) fn format_element_with(u: &WeylElement, dname: &str) -> String {
    if u.is_zero() {
        return "0".to_string();
    }
    let sig = u.signature();
    let mut out = String::new();
    for (m, c) in u.terms().rev() {
        let body = monomial_body(sig, m, dname);
        let neg = c.leading_sign_negative();
        let mag = if neg { -c } else { c.clone() };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let coeff = if mag.is_monomial_in_theta() {
            mag.to_string()
        } else {
            format!("({mag})")
        };
        if body.is_empty() {
            out.push_str(&coeff);
        } else if mag.is_one() {
            out.push_str(&body);
        } else {
            out.push_str(&coeff);
            out.push('*');
            out.push_str(&body);
        }
    }
    out
}

/// Canonical text: terms in descending monomial order, `x[...]` first,
/// then `t`, then `d` factors.
pub fn format_element(u: &WeylElement) -> String {
    format_element_with(u, "d")
}
