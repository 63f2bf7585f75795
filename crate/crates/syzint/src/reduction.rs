//! Rankings, differential reduction and history tracking.
//!
//! Every equation carries a history: an expression in equation labels which,
//! once the labels are replaced by their values, gives back the equation.
//! When reduction ends in a zero value the history is a syzygy.

use std::cell::OnceCell;
use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::calculus::derivative_by;
use crate::expr::{Deriv, LinExpr, MultiIndex, Namespace, Poly, Registry};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RankingKind {
    /// Total order first, ties broken reverse lexicographically.
    #[default]
    TotalDegree,
    Lex,
}

/// Total order on derivatives `(symbol, J)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    pub kind: RankingKind,
    /// Variables from most to least significant.
    pub precedence: Vec<usize>,
}

impl Ranking {
    pub fn new(kind: RankingKind, precedence: Vec<usize>) -> Self {
        Ranking { kind, precedence }
    }

    /// Default precedence of the registry: x, y, z, t first.
    pub fn for_registry(kind: RankingKind, reg: &Registry) -> Self {
        Self::new(kind, reg.default_precedence())
    }

    pub fn cmp(&self, a: &Deriv, b: &Deriv) -> Ordering {
        let by_index = match self.kind {
            RankingKind::TotalDegree => a.idx.total().cmp(&b.idx.total()).then_with(|| {
                for &v in self.precedence.iter().rev() {
                    let (x, y) = (a.idx.get(v), b.idx.get(v));
                    if x != y {
                        return y.cmp(&x);
                    }
                }
                Ordering::Equal
            }),
            RankingKind::Lex => {
                let mut o = Ordering::Equal;
                for &v in &self.precedence {
                    o = a.idx.get(v).cmp(&b.idx.get(v));
                    if o != Ordering::Equal {
                        break;
                    }
                }
                o
            }
        };
        by_index.then_with(|| b.sym.cmp(&a.sym))
    }

    /// Rank-maximal derivative with its coefficient.
    pub fn leading(&self, e: &LinExpr) -> Option<(Deriv, Poly)> {
        e.terms()
            .max_by(|a, b| self.cmp(a.0, b.0))
            .map(|(d, p)| (d.clone(), p.clone()))
    }

    /// Terms sorted from highest to lowest rank.
    pub fn sorted<'a>(&self, e: &'a LinExpr) -> Vec<(&'a Deriv, &'a Poly)> {
        let mut v: Vec<_> = e.terms().collect();
        v.sort_by(|a, b| self.cmp(b.0, a.0));
        v
    }
}

/// An equation `0 = value` with its history over base labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub value: LinExpr,
    pub history: LinExpr,
}

impl Equation {
    pub fn new(value: LinExpr, history: LinExpr) -> Self {
        Equation { value, history }
    }

    /// An equation standing for itself under `label`.
    pub fn base(label: usize, value: LinExpr) -> Self {
        Equation {
            value,
            history: LinExpr::symbol(Namespace::EquationLabels, label),
        }
    }

    /// Value without a tracked history.
    pub fn untracked(value: LinExpr) -> Self {
        Equation {
            value,
            history: LinExpr::zero(Namespace::EquationLabels),
        }
    }

    pub fn derive(&self, reg: &Registry, idx: &MultiIndex) -> Equation {
        Equation {
            value: derivative_by(reg, &self.value, idx),
            history: derivative_by(reg, &self.history, idx),
        }
    }

    pub fn scale(&self, p: &Poly) -> Equation {
        Equation {
            value: self.value.scale(p),
            history: self.history.scale(p),
        }
    }

    pub fn sub(&self, other: &Equation) -> Equation {
        Equation {
            value: &self.value - &other.value,
            history: &self.history - &other.history,
        }
    }
}

pub fn leading_derivative(eq: &Equation, r: &Ranking) -> Result<(Deriv, Poly)> {
    r.leading(&eq.value)
        .ok_or_else(|| Error::Reduction("zero equation has no leading derivative".into()))
}

/// Replace every label `e_k` in `history` by `lookup(k)` and expand.
pub fn evaluate_history(
    reg: &Registry,
    history: &LinExpr,
    lookup: &dyn Fn(usize) -> LinExpr,
) -> LinExpr {
    let mut out = LinExpr::zero(Namespace::Functions);
    for (d, p) in history.terms() {
        let v = derivative_by(reg, &lookup(d.sym), &d.idx);
        out.add_scaled(&v, p);
    }
    out
}

/// Prolong `a` and `b` to the lcm of their leading derivatives and cancel.
pub fn cross_differentiate(
    reg: &Registry,
    a: &Equation,
    b: &Equation,
    r: &Ranking,
) -> Result<Equation> {
    let (da, ca) = leading_derivative(a, r)?;
    let (db, cb) = leading_derivative(b, r)?;
    if da.sym != db.sym {
        return Err(Error::Reduction(
            "leading derivatives belong to different functions".into(),
        ));
    }
    let l = da.idx.lcm(&db.idx);
    let pa = a.derive(reg, &l.checked_sub(&da.idx).expect("lcm is a multiple"));
    let pb = b.derive(reg, &l.checked_sub(&db.idx).expect("lcm is a multiple"));
    Ok(match (ca.constant_value(), cb.constant_value()) {
        (Some(x), Some(y)) if x == y => pa.sub(&pb),
        _ => pa.scale(&cb).sub(&pb.scale(&ca)),
    })
}

/// Highest-ranked term of `a` that is a derivative of `lead`.
fn reducible_term(a: &LinExpr, lead: &Deriv, r: &Ranking) -> Option<(Deriv, Poly)> {
    r.sorted(a)
        .into_iter()
        .find(|(d, _)| d.sym == lead.sym && lead.idx.divides(&d.idx))
        .map(|(d, p)| (d.clone(), p.clone()))
}

/// Eliminate the highest derivative of `b`'s leading term occurring in `a`.
///
/// A constant leading coefficient of `b` is divided out. Otherwise `a` is
/// multiplied by it first so no division is needed.
pub fn reduce(reg: &Registry, a: &Equation, b: &Equation, r: &Ranking) -> Result<Equation> {
    let (lead, lc) = leading_derivative(b, r)?;
    let (d, p) = reducible_term(&a.value, &lead, r)
        .ok_or_else(|| Error::Reduction("no reducible term".into()))?;
    let shift = d.idx.checked_sub(&lead.idx).expect("divides");
    let pb = b.derive(reg, &shift);
    Ok(match lc.constant_value() {
        Some(c) => {
            debug_assert!(!c.is_zero());
            a.sub(&pb.scale(&p.scale(&c.recip())))
        }
        None => a.scale(&lc).sub(&pb.scale(&p)),
    })
}

/// Reduce `a` as far as possible by `basis`, highest terms first.
pub fn normal_form(reg: &Registry, a: &Equation, basis: &[&Equation], r: &Ranking) -> Equation {
    let leads: Vec<(Deriv, &Equation)> = basis
        .iter()
        .filter_map(|b| r.leading(&b.value).map(|(d, _)| (d, *b)))
        .collect();
    let mut cur = a.clone();
    // every step removes the current top reducible derivative, and the
    // ranking is a well-order, so this terminates
    loop {
        let mut step = None;
        'terms: for (d, _) in r.sorted(&cur.value) {
            for (lead, b) in &leads {
                if lead.sym == d.sym && lead.idx.divides(&d.idx) {
                    step = Some(*b);
                    break 'terms;
                }
            }
        }
        match step {
            Some(b) => cur = reduce(reg, &cur, b, r).expect("a reducible term exists"),
            None => return cur,
        }
    }
}

/// Autoreduce `values` and add reduced cross-derivatives for up to `rounds`
/// rounds. Not a full completion, but enough that normal forms of members of
/// the generated ideal usually come out zero.
pub fn complete_basis(
    reg: &Registry,
    values: &[LinExpr],
    r: &Ranking,
    rounds: usize,
) -> Vec<Equation> {
    const MAX_SIZE: usize = 48;
    let mut b: Vec<Equation> = values
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| Equation::untracked(v.clone()))
        .collect();
    for round in 0..=rounds {
        for _ in 0..32 {
            let mut changed = false;
            let mut i = 0;
            while i < b.len() {
                let others: Vec<&Equation> = b
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|p| p.1)
                    .collect();
                let nf = normal_form(reg, &b[i], &others, r);
                if nf.value.is_zero() {
                    b.remove(i);
                    changed = true;
                    continue;
                }
                if nf.value != b[i].value {
                    b[i] = Equation::untracked(strip_monomial(&nf.value).0);
                    changed = true;
                }
                i += 1;
            }
            if !changed {
                break;
            }
        }
        if round == rounds {
            break;
        }
        let refs: Vec<&Equation> = b.iter().collect();
        let mut fresh = Vec::new();
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                let Ok(c) = cross_differentiate(reg, &b[i], &b[j], r) else {
                    continue;
                };
                let nf = normal_form(reg, &c, &refs, r);
                if !nf.value.is_zero() {
                    fresh.push(Equation::untracked(strip_monomial(&nf.value).0));
                }
            }
        }
        if fresh.is_empty() || b.len() + fresh.len() > MAX_SIZE {
            break;
        }
        b.extend(fresh);
    }
    b
}

/// All multi-indices over `vars` of total order at most `n`.
fn indices_up_to(vars: &[usize], n: u32) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::zero()];
    for &v in vars {
        let mut next = Vec::new();
        for m in &out {
            for k in 0..=n - m.total() {
                next.push(m.add_var(v, k));
            }
        }
        out = next;
    }
    out
}

type Row = BTreeMap<(Deriv, MultiIndex), BigRational>;

fn to_row(e: &LinExpr) -> Row {
    let mut row = Row::new();
    for (d, p) in e.terms() {
        for (m, c) in p.terms() {
            row.insert((d.clone(), m.clone()), c.clone());
        }
    }
    row
}

/// Reduce `row` against the echelon rows; returns what is left.
fn eliminate(pivots: &BTreeMap<(Deriv, MultiIndex), Row>, mut row: Row) -> Row {
    while let Some((k, c)) = row.iter().next_back().map(|(k, c)| (k.clone(), c.clone())) {
        let Some(p) = pivots.get(&k) else { break };
        let f = &c / &p[&k];
        for (pk, pc) in p {
            let e = row.entry(pk.clone()).or_insert_with(BigRational::zero);
            *e -= &f * pc;
            if e.is_zero() {
                row.remove(pk);
            }
        }
    }
    row
}

/// Whether `target` is a rational linear combination of `m D^a g` for `g` in
/// `gens`, monomials `m` of degree at most `max_degree` and derivatives up to
/// total order `max_order`. Exact linear algebra on a bounded prolongation.
pub fn prolonged_span_contains(
    reg: &Registry,
    target: &LinExpr,
    gens: &[LinExpr],
    max_order: u32,
    max_degree: u32,
) -> bool {
    if target.is_zero() {
        return true;
    }
    let vars: Vec<usize> = (0..reg.num_vars()).collect();
    let monomials = indices_up_to(&vars, max_degree);
    let mut pivots: BTreeMap<(Deriv, MultiIndex), Row> = BTreeMap::new();
    for g in gens.iter().filter(|g| !g.is_zero()) {
        let og = g.order();
        if og > max_order {
            continue;
        }
        for a in indices_up_to(&vars, max_order - og) {
            let dg = derivative_by(reg, g, &a);
            for m in &monomials {
                let row = eliminate(
                    &pivots,
                    to_row(&dg.scale(&Poly::monomial(m.clone(), crate::expr::rat(1, 1)))),
                );
                if let Some(k) = row.keys().next_back().cloned() {
                    pivots.insert(k, row);
                }
            }
        }
    }
    eliminate(&pivots, to_row(target)).is_empty()
}

const SMALL_PROLONGATION: usize = 20_000;

fn binomial(n: u64, k: u64) -> u64 {
    (0..k)
        .try_fold(1u64, |acc, i| Some(acc.checked_mul(n - i)? / (i + 1)))
        .unwrap_or(u64::MAX)
}

/// Number of rows [`prolonged_span_contains`] would build.
fn prolongation_rows(reg: &Registry, gens: &[LinExpr], max_order: u32, max_degree: u32) -> usize {
    let n = reg.num_vars() as u64;
    let monomials = binomial(n + max_degree as u64, n);
    gens.iter()
        .filter(|g| !g.is_zero() && g.order() <= max_order)
        .map(|g| binomial(n + (max_order - g.order()) as u64, n).saturating_mul(monomials))
        .fold(0u64, u64::saturating_add) as usize
}

/// Equations to reduce by, with a partly completed basis built on first use
/// and shared between queries.
pub struct Modulus<'a> {
    reg: &'a Registry,
    values: Vec<LinExpr>,
    ranking: &'a Ranking,
    basis: OnceCell<Vec<Equation>>,
}

impl<'a> Modulus<'a> {
    pub fn new(reg: &'a Registry, values: &[LinExpr], ranking: &'a Ranking) -> Self {
        Modulus {
            reg,
            values: values.to_vec(),
            ranking,
            basis: OnceCell::new(),
        }
    }

    fn normal_form_by(&self, v: &LinExpr, basis: &[Equation]) -> LinExpr {
        let refs: Vec<&Equation> = basis.iter().collect();
        normal_form(
            self.reg,
            &Equation::untracked(v.clone()),
            &refs,
            self.ranking,
        )
        .value
    }

    /// What is left of `v`; zero when `v` lies in what the equations
    /// generate. Tries a proportional match, a normal form by the equations
    /// themselves, linear algebra on a bounded prolongation and a normal form
    /// against the completed basis, the expensive one last.
    pub fn residual(&self, v: &LinExpr) -> LinExpr {
        if v.is_zero() || self.values.iter().any(|b| v.ratio_to(b).is_some()) {
            return LinExpr::zero(v.namespace());
        }
        let plain: Vec<Equation> = self
            .values
            .iter()
            .map(|e| Equation::untracked(e.clone()))
            .collect();
        if self.normal_form_by(v, &plain).is_zero() {
            return LinExpr::zero(v.namespace());
        }
        let degree = v
            .terms()
            .flat_map(|(_, p)| p.terms().map(|(m, _)| m.total()))
            .max()
            .unwrap_or(0);
        let order = v.order() + 1;
        // small prolongations are cheap next to the completion
        let small = prolongation_rows(self.reg, &self.values, order, degree) <= SMALL_PROLONGATION;
        let spans = || prolonged_span_contains(self.reg, v, &self.values, order, degree);
        if small && spans() {
            return LinExpr::zero(v.namespace());
        }
        let basis = self
            .basis
            .get_or_init(|| complete_basis(self.reg, &self.values, self.ranking, 2));
        let nf = self.normal_form_by(v, basis);
        if nf.is_zero() || (!small && spans()) {
            return LinExpr::zero(v.namespace());
        }
        nf
    }
}

/// [`Modulus::residual`] for a single query.
pub fn residual_modulo(reg: &Registry, v: &LinExpr, values: &[LinExpr], r: &Ranking) -> LinExpr {
    Modulus::new(reg, values, r).residual(v)
}

/// Divide out the largest monomial factor common to all coefficients.
/// Returns the factor, which is trivial when nothing was removed.
pub fn strip_monomial(e: &LinExpr) -> (LinExpr, MultiIndex) {
    let g = e
        .terms()
        .filter_map(|(_, p)| p.monomial_gcd())
        .reduce(|a, b| MultiIndex::from_pairs(a.iter().map(|(v, k)| (v, k.min(b.get(v))))))
        .unwrap_or_else(MultiIndex::zero);
    if g.is_zero() {
        return (e.clone(), g);
    }
    let mut out = LinExpr::zero(e.namespace());
    for (d, p) in e.terms() {
        out.add_term(d.clone(), p.divide_monomial(&g).expect("common factor"));
    }
    (out, g)
}

/// A zero value with a nonzero history is a syzygy.
pub fn harvest_syzygy(eq: &Equation) -> Option<LinExpr> {
    if eq.value.is_zero() && !eq.history.is_zero() {
        Some(eq.history.clone())
    } else {
        None
    }
}
