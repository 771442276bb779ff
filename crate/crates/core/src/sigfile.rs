//! Signature files: `key = value` lines, `#` starts a comment.
//!
//! ```text
//! l1 = 1
//! l2 = 1
//! l3 = 0
//! minpoly = [0, 1]
//! gen = [2]
//! ```
//!
//! `minpoly` lists rational coefficients from the constant term up; each
//! `gen` line is one generator of `Gamma`, entries are field literals.

use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

use crate::algebra::{Sig, Signature, WeylError};
use crate::gamma::{GammaError, GammaGroup};
use crate::numberfield::{fmt_rational, FieldElement, FieldError, NumberField};
use crate::syntax::parse_field_element;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SigFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing key '{0}'")]
    MissingKey(&'static str),
    #[error("invalid field: {0}")]
    Field(#[from] FieldError),
    #[error("invalid Gamma: {0}")]
    Gamma(#[from] GammaError),
    #[error("invalid signature: {0}")]
    Weyl(#[from] WeylError),
}

impl SigFileError {
    /// Whether the text parsed but describes no valid algebra.
    pub fn is_invalid_signature(&self) -> bool {
        matches!(self, SigFileError::Field(_) | SigFileError::Gamma(_) | SigFileError::Weyl(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureFile {
    pub l1: usize,
    pub l2: usize,
    pub l3: usize,
    pub minpoly: Vec<BigRational>,
    /// Generators as printed field literals.
    pub generators: Vec<Vec<String>>,
}

fn syntax(line: usize, message: impl Into<String>) -> SigFileError {
    SigFileError::Syntax {
        line,
        message: message.into(),
    }
}

fn bracket_list(line: usize, value: &str) -> Result<Vec<String>, SigFileError> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| syntax(line, "expected a bracketed list"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    Ok(inner.split(',').map(|s| s.trim().to_string()).collect())
}

fn parse_rational(line: usize, s: &str) -> Result<BigRational, SigFileError> {
    let bad = || syntax(line, format!("bad rational '{s}'"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = n.parse().map_err(|_| bad())?;
    let d: num_bigint::BigInt = d.parse().map_err(|_| bad())?;
    if d == num_bigint::BigInt::from(0) {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

impl SignatureFile {
    pub fn parse(text: &str) -> Result<Self, SigFileError> {
        let (mut l1, mut l2, mut l3, mut minpoly) = (None, None, None, None);
        let mut generators = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| syntax(line, "expected 'key = value'"))?;
            let (key, value) = (key.trim(), value.trim());
            let natural = || {
                value
                    .parse::<usize>()
                    .map_err(|_| syntax(line, format!("'{key}' must be a natural number")))
            };
            let slot = match key {
                "l1" => &mut l1,
                "l2" => &mut l2,
                "l3" => &mut l3,
                "minpoly" => {
                    if minpoly.is_some() {
                        return Err(syntax(line, "duplicate key 'minpoly'"));
                    }
                    let coeffs = bracket_list(line, value)?
                        .iter()
                        .map(|s| parse_rational(line, s))
                        .collect::<Result<Vec<_>, _>>()?;
                    minpoly = Some(coeffs);
                    continue;
                }
                "gen" => {
                    generators.push(bracket_list(line, value)?);
                    continue;
                }
                other => return Err(syntax(line, format!("unknown key '{other}'"))),
            };
            if slot.is_some() {
                return Err(syntax(line, format!("duplicate key '{key}'")));
            }
            *slot = Some(natural()?);
        }
        Ok(SignatureFile {
            l1: l1.ok_or(SigFileError::MissingKey("l1"))?,
            l2: l2.ok_or(SigFileError::MissingKey("l2"))?,
            l3: l3.ok_or(SigFileError::MissingKey("l3"))?,
            minpoly: minpoly.ok_or(SigFileError::MissingKey("minpoly"))?,
            generators,
        })
    }

    /// Builds the field, `Gamma` and the signature.
    pub fn to_signature(&self) -> Result<Sig, SigFileError> {
        let field = NumberField::new(self.minpoly.clone())?;
        let n = self.l2 + self.l3;
        let gens = self
            .generators
            .iter()
            .enumerate()
            .map(|(k, g)| {
                g.iter()
                    .map(|s| {
                        parse_field_element(&field, s).map_err(|e| SigFileError::Syntax {
                            line: 0,
                            message: format!("generator {}: {e}", k + 1),
                        })
                    })
                    .collect::<Result<Vec<FieldElement>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let gamma = GammaGroup::new(&field, n, &gens)?;
        Ok(Signature::new(self.l1, self.l2, self.l3, gamma)?)
    }

    /// The file describing `sig`, with the canonical basis as generators.
    pub fn from_signature(sig: &Signature) -> Self {
        SignatureFile {
            l1: sig.l1(),
            l2: sig.l2(),
            l3: sig.l3(),
            minpoly: sig.field().minpoly().to_vec(),
            generators: sig
                .gamma()
                .basis()
                .iter()
                .map(|b| b.iter().map(ToString::to_string).collect())
                .collect(),
        }
    }
}

impl fmt::Display for SignatureFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "l1 = {}", self.l1)?;
        writeln!(f, "l2 = {}", self.l2)?;
        writeln!(f, "l3 = {}", self.l3)?;
        let mp: Vec<String> = self.minpoly.iter().map(fmt_rational).collect();
        writeln!(f, "minpoly = [{}]", mp.join(", "))?;
        for g in &self.generators {
            writeln!(f, "gen = [{}]", g.join(", "))?;
        }
        Ok(())
    }
}

/// Reads a signature straight from text.
pub fn load_signature(text: &str) -> Result<Sig, SigFileError> {
    SignatureFile::parse(text)?.to_signature()
}
