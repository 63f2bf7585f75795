//! Expression grammar.
//!
//! ```text
//! expr   ::= ["+"|"-"] term (("+"|"-") term)*
//! term   ::= factor (["*"] factor)*
//! factor ::= int ["/" int] | var ["^" int] | symbol ["_" var+]
//! ```
//!
//! A term holds exactly one symbol, except that a lone `0` is allowed.
//! Derivative suffixes are split greedily into the longest variable names.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::expr::{Deriv, LinExpr, MultiIndex, Namespace, Poly, Registry};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String, Option<(String, usize)>),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rsplit('\n')
        .next()
        .map(|l| l.chars().count())
        .unwrap_or(0)
        + 1;
    (line, column)
}

fn err(src: &str, offset: usize, msg: impl Into<String>) -> Error {
    let (line, column) = position(src, offset);
    Error::Parse {
        line,
        column,
        msg: msg.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let mut toks = Vec::new();
    let b = src.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1
            }
            b'0'..=b'9' => {
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = src[start..i].parse().expect("digits");
                toks.push((Tok::Num(n), start));
            }
            c if c.is_ascii_alphabetic() => {
                while i < b.len() && b[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let name = src[start..i].to_string();
                let mut suffix = None;
                if i < b.len() && b[i] == b'_' {
                    i += 1;
                    let s = i;
                    while i < b.len() && b[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                    if s == i {
                        return Err(err(src, s, "empty derivative suffix"));
                    }
                    suffix = Some((src[s..i].to_string(), s));
                }
                toks.push((Tok::Ident(name, suffix), start));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap();
                return Err(err(src, i, format!("unexpected character `{ch}`")));
            }
        }
    }
    Ok(toks)
}

/// Split `suffix` into variables, always taking the longest name that fits.
pub fn split_suffix(reg: &Registry, suffix: &str) -> std::result::Result<Vec<usize>, usize> {
    let mut out = Vec::new();
    let mut rest = suffix;
    while !rest.is_empty() {
        let best = reg
            .var_names()
            .iter()
            .enumerate()
            .filter(|(_, n)| rest.starts_with(n.as_str()))
            .max_by_key(|(_, n)| n.len());
        match best {
            Some((v, n)) => {
                out.push(v);
                rest = &rest[n.len()..];
            }
            None => return Err(suffix.len() - rest.len()),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    reg: &'a Registry,
    ns: Namespace,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|t| t.1)
            .unwrap_or(self.src.len())
    }

    fn int(&mut self, what: &str) -> Result<BigInt> {
        match self.toks.get(self.pos) {
            Some((Tok::Num(n), _)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => Err(err(self.src, self.offset(), format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<LinExpr> {
        let mut out = LinExpr::zero(self.ns);
        if self.toks.is_empty() {
            return Err(err(self.src, 0, "empty expression"));
        }
        let mut first = true;
        while self.pos < self.toks.len() {
            let neg = match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    false
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    true
                }
                _ if first => false,
                _ => return Err(err(self.src, self.offset(), "expected `+` or `-`")),
            };
            first = false;
            let t = self.term()?;
            out = if neg { &out - &t } else { &out + &t };
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<LinExpr> {
        let start = self.offset();
        let mut coef = Poly::one();
        let mut symbol: Option<Deriv> = None;
        let mut any = false;
        loop {
            match self.peek() {
                None | Some(Tok::Plus) | Some(Tok::Minus) if any => break,
                Some(Tok::Star) if any => {
                    self.pos += 1;
                    if !matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Ident(..))) {
                        return Err(err(self.src, self.offset(), "expected a factor after `*`"));
                    }
                    continue;
                }
                _ => {}
            }
            let at = self.offset();
            match self.toks.get(self.pos).cloned() {
                Some((Tok::Num(n), _)) => {
                    self.pos += 1;
                    let mut q = BigRational::from_integer(n);
                    if self.peek() == Some(&Tok::Slash) {
                        self.pos += 1;
                        let d = self.int("a denominator")?;
                        if d.is_zero() {
                            return Err(err(self.src, at, "division by zero"));
                        }
                        q /= BigRational::from_integer(d);
                    }
                    coef = coef.scale(&q);
                }
                Some((Tok::Ident(name, suffix), _)) => {
                    self.pos += 1;
                    if let Some(v) = self.reg.var(&name) {
                        if suffix.is_some() {
                            return Err(err(
                                self.src,
                                at,
                                format!("variable `{name}` cannot carry a derivative"),
                            ));
                        }
                        let mut k = 1u32;
                        if self.peek() == Some(&Tok::Caret) {
                            self.pos += 1;
                            let e_at = self.offset();
                            let e = self.int("an exponent")?;
                            k = u32::try_from(e)
                                .map_err(|_| err(self.src, e_at, "exponent out of range"))?;
                        }
                        coef = &coef * &Poly::var_power(v, k);
                    } else {
                        let Some(sym) = self.reg.symbol(self.ns, &name) else {
                            return Err(err(self.src, at, format!("unknown name `{name}`")));
                        };
                        if symbol.is_some() {
                            return Err(err(self.src, at, "more than one unknown in a term"));
                        }
                        if self.peek() == Some(&Tok::Caret) {
                            return Err(err(self.src, self.offset(), "unknowns occur linearly"));
                        }
                        let idx = match suffix {
                            None => MultiIndex::zero(),
                            Some((s, s_at)) => {
                                let vars = split_suffix(self.reg, &s).map_err(|k| {
                                    err(self.src, s_at + k, "unknown variable in derivative suffix")
                                })?;
                                if let Some(&v) =
                                    vars.iter().find(|&&v| !self.reg.depends(self.ns, sym, v))
                                {
                                    return Err(err(
                                        self.src,
                                        s_at,
                                        format!(
                                            "`{name}` does not depend on {}",
                                            self.reg.var_name(v)
                                        ),
                                    ));
                                }
                                MultiIndex::from_vars(&vars)
                            }
                        };
                        symbol = Some(Deriv::new(sym, idx));
                    }
                }
                Some((Tok::Caret, _)) => {
                    return Err(err(self.src, at, "exponent without a variable"))
                }
                Some((Tok::Slash, _)) => {
                    return Err(err(self.src, at, "`/` must follow an integer"))
                }
                _ => return Err(err(self.src, at, "expected a factor")),
            }
            any = true;
        }
        match symbol {
            Some(d) => Ok(LinExpr::term(self.ns, d, coef)),
            None if coef.is_zero() => Ok(LinExpr::zero(self.ns)),
            None => Err(err(self.src, start, "term without an unknown")),
        }
    }
}

/// Parse a linear expression over the symbols of namespace `ns`.
pub fn parse_expr(reg: &Registry, ns: Namespace, src: &str) -> Result<LinExpr> {
    let toks = lex(src)?;
    let mut p = Parser {
        src,
        reg,
        ns,
        toks,
        pos: 0,
    };
    p.expr()
}
