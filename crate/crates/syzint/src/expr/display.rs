use num_rational::BigRational;
use num_traits::{One, Signed};

use super::linexpr::LinExpr;
use super::multiindex::{Monomial, MultiIndex};
use super::poly::Poly;
use super::registry::Registry;

fn fmt_rat(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn fmt_monomial(reg: &Registry, m: &Monomial) -> Vec<String> {
    m.iter()
        .map(|(v, k)| {
            if k == 1 {
                reg.var_name(v).to_string()
            } else {
                format!("{}^{}", reg.var_name(v), k)
            }
        })
        .collect()
}

/// Derivative suffix, e.g. `xyz` or `x3x3y2`. Empty for order zero.
pub fn fmt_suffix(reg: &Registry, idx: &MultiIndex) -> String {
    idx.expanded().iter().map(|&v| reg.var_name(v)).collect()
}

/// Append `sign coef*factors` to `out`, `first` controls a leading `+`.
fn push_term(out: &mut String, c: &BigRational, mut factors: Vec<String>, first: bool) {
    let neg = c.is_negative();
    let a = c.abs();
    if first {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    if !a.is_one() || factors.is_empty() {
        factors.insert(0, fmt_rat(&a));
    }
    out.push_str(&factors.join("*"));
}

pub fn fmt_poly(reg: &Registry, p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        push_term(&mut out, c, fmt_monomial(reg, m), i == 0);
    }
    out
}

/// Flat sum of `rational*monomial*symbol_suffix` terms, in a form the
/// expression parser reads back.
pub fn fmt_linexpr(reg: &Registry, e: &LinExpr) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let mut keys: Vec<_> = e.terms().collect();
    keys.sort_by(|a, b| a.0.sym.cmp(&b.0.sym).then(b.0.idx.cmp(&a.0.idx)));
    let mut out = String::new();
    let mut first = true;
    for (d, p) in keys {
        let mut sym = reg.symbol_name(e.namespace(), d.sym).to_string();
        if !d.idx.is_zero() {
            sym.push('_');
            sym.push_str(&fmt_suffix(reg, &d.idx));
        }
        for (m, c) in p.terms().rev() {
            let mut f = fmt_monomial(reg, m);
            f.push(sym.clone());
            push_term(&mut out, c, f, first);
            first = false;
        }
    }
    out
}
