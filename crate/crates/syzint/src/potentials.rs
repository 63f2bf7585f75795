//! Potentials of conserved currents: `P^i = D_j Q^{ij}` with antisymmetric
//! `Q`, and the curl analog `P^{ij} = D_k Q^{ijk}`.

use std::collections::BTreeMap;

use crate::calculus::total_derivative;
use crate::expr::{fmt_linexpr, Deriv, LinExpr, Namespace, Origin, Registry};
use crate::{Error, Result};

const F: Namespace = Namespace::Functions;

/// Bound on rounds of the three phases; each round normally finishes the job.
const MAX_ROUNDS: usize = 64;

/// A new equation `0 = d_j f^b - a f_J` created when a residual term cannot
/// be integrated directly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxEquation {
    pub value: LinExpr,
    pub func: usize,
    /// Index of the current component the term was taken from: `[i]` for
    /// divergences, `[i, j]` for curls.
    pub row: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PotentialResult {
    pub vars: Vec<usize>,
    /// `Q^{ij}` for `i < j`.
    pub q: BTreeMap<(usize, usize), LinExpr>,
    pub equations: Vec<AuxEquation>,
    pub functions: Vec<usize>,
}

impl PotentialResult {
    pub fn get(&self, i: usize, j: usize) -> LinExpr {
        if i < j {
            self.q
                .get(&(i, j))
                .cloned()
                .unwrap_or_else(|| LinExpr::zero(F))
        } else if i > j {
            self.q
                .get(&(j, i))
                .map(|e| -e)
                .unwrap_or_else(|| LinExpr::zero(F))
        } else {
            LinExpr::zero(F)
        }
    }

    /// `P^i - D_j Q^{ij} + sum of row-i auxiliary equations`, which is zero
    /// for a correct result.
    pub fn residual(&self, reg: &Registry, p: &BTreeMap<usize, LinExpr>, i: usize) -> LinExpr {
        let mut r = p.get(&i).cloned().unwrap_or_else(|| LinExpr::zero(F));
        for &j in &self.vars {
            if j != i {
                r = &r - &total_derivative(reg, &self.get(i, j), j);
            }
        }
        for e in self.equations.iter().filter(|e| e.row == [i]) {
            r = &r + &e.value;
        }
        r
    }
}

fn add_q(q: &mut BTreeMap<(usize, usize), LinExpr>, i: usize, j: usize, piece: &LinExpr) {
    if i < j {
        let e = q.entry((i, j)).or_insert_with(|| LinExpr::zero(F));
        *e = &*e + piece;
    } else {
        let e = q.entry((j, i)).or_insert_with(|| LinExpr::zero(F));
        *e = &*e - piece;
    }
}

/// Highest term of `e` carrying a `v`-derivative, by `v`-order.
fn pick_with_derivative(e: &LinExpr, v: usize) -> Option<(Deriv, crate::Poly)> {
    e.terms()
        .filter(|(d, _)| d.idx.get(v) > 0)
        .max_by(|a, b| a.0.idx.get(v).cmp(&b.0.idx.get(v)).then(a.0.cmp(b.0)))
        .map(|(d, p)| (d.clone(), p.clone()))
}

/// Move `piece` into `Q^{ij}`, keeping `P^k - D_l Q^{kl}` unchanged.
fn transfer(
    reg: &Registry,
    cur: &mut BTreeMap<usize, LinExpr>,
    q: &mut BTreeMap<(usize, usize), LinExpr>,
    i: usize,
    j: usize,
    piece: &LinExpr,
) {
    let pi = &cur[&i] - &total_derivative(reg, piece, j);
    cur.insert(i, pi);
    let pj = &cur[&j] + &total_derivative(reg, piece, i);
    cur.insert(j, pj);
    add_q(q, i, j, piece);
}

/// Antisymmetric potentials of a conserved current over `vars`.
///
/// Phase one moves `x^j`-derivatives out of `P^i` for `j > i`, phase two does
/// the same for `j < i`, phase three integrates what is left through the
/// explicit coefficient or, failing that, through a new function of all
/// variables but `x^i`. The phases repeat until every component is zero.
pub fn divint(
    reg: &mut Registry,
    p: &BTreeMap<usize, LinExpr>,
    vars: &[usize],
) -> Result<PotentialResult> {
    let mut vars = vars.to_vec();
    vars.sort_unstable();
    vars.dedup();
    if let Some(k) = p.keys().find(|k| !vars.contains(k)) {
        return Err(Error::Potential(format!(
            "component for variable {k} outside the divergence"
        )));
    }
    let mut cur: BTreeMap<usize, LinExpr> = vars
        .iter()
        .map(|&v| (v, p.get(&v).cloned().unwrap_or_else(|| LinExpr::zero(F))))
        .collect();
    let mut div = LinExpr::zero(F);
    for (&v, c) in &cur {
        div = &div + &total_derivative(reg, c, v);
    }
    if !div.is_zero() {
        return Err(Error::NotConserved(fmt_linexpr(reg, &div)));
    }

    let n = vars.len();
    let mut q = BTreeMap::new();
    let mut equations = Vec::new();
    let mut functions = Vec::new();
    for _ in 0..MAX_ROUNDS {
        if cur.values().all(|c| c.is_zero()) {
            q.retain(|_, e: &mut LinExpr| !e.is_zero());
            return Ok(PotentialResult {
                vars,
                q,
                equations,
                functions,
            });
        }
        for a in 0..n {
            for b in a + 1..n {
                let (i, j) = (vars[a], vars[b]);
                while let Some((d, c)) = pick_with_derivative(&cur[&i], j) {
                    let piece = LinExpr::term(F, Deriv::new(d.sym, d.idx.sub_var(j).unwrap()), c);
                    transfer(reg, &mut cur, &mut q, i, j, &piece);
                }
            }
        }
        for b in 1..n {
            for a in 0..b {
                let (i, j) = (vars[b], vars[a]);
                while let Some((d, c)) = pick_with_derivative(&cur[&i], j) {
                    let piece = LinExpr::term(F, Deriv::new(d.sym, d.idx.sub_var(j).unwrap()), c);
                    transfer(reg, &mut cur, &mut q, i, j, &piece);
                }
            }
        }
        for a in 0..n {
            let i = vars[a];
            let cyclic: Vec<usize> = (1..n).map(|s| vars[(a + s) % n]).collect();
            loop {
                let top = cur[&i]
                    .terms()
                    .next_back()
                    .map(|(d, c)| (d.clone(), c.clone()));
                let Some((d, c)) = top else { break };
                if let Some(&j) = cyclic.iter().find(|&&j| !reg.depends(F, d.sym, j)) {
                    let piece = LinExpr::term(F, d, c.antiderivative(j));
                    transfer(reg, &mut cur, &mut q, i, j, &piece);
                    continue;
                }
                let Some(&j) = cyclic.first() else {
                    return Err(Error::Potential(
                        "a single variable has no potential".into(),
                    ));
                };
                if reg.depends(F, d.sym, i) || c.depends_on(i) {
                    let t = LinExpr::term(F, d, c);
                    return Err(Error::Potential(format!(
                        "term {} depends on {} and on every other variable of the divergence",
                        fmt_linexpr(reg, &t),
                        reg.var_name(i)
                    )));
                }
                let deps: Vec<usize> = (0..reg.num_vars()).filter(|&v| v != i).collect();
                let beta = reg.fresh_function("c", &deps, Origin::DivintAuxiliary);
                let t = LinExpr::term(F, d, c);
                let mut value = LinExpr::term(
                    F,
                    Deriv::new(beta, crate::MultiIndex::single(j)),
                    crate::Poly::one(),
                );
                value = &value - &t;
                equations.push(AuxEquation {
                    value,
                    func: beta,
                    row: vec![i],
                });
                functions.push(beta);
                let pi = &cur[&i] - &t;
                cur.insert(i, pi);
                add_q(&mut q, i, j, &LinExpr::symbol(F, beta));
            }
        }
    }
    Err(Error::Potential("no convergence".into()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurlPotentialResult {
    pub vars: Vec<usize>,
    /// `Q^{ijk}` for `i < j < k`.
    pub q: BTreeMap<(usize, usize, usize), LinExpr>,
    pub equations: Vec<AuxEquation>,
    pub functions: Vec<usize>,
}

/// Sign of the permutation sorting `t`, with the sorted triple.
pub fn sort_triple(t: [usize; 3]) -> (i64, [usize; 3]) {
    let mut s = t;
    let mut sign = 1;
    for a in 0..3 {
        for b in 0..2 - a {
            if s[b] > s[b + 1] {
                s.swap(b, b + 1);
                sign = -sign;
            }
        }
    }
    (sign, s)
}

impl CurlPotentialResult {
    pub fn get(&self, i: usize, j: usize, k: usize) -> LinExpr {
        let (sign, [a, b, c]) = sort_triple([i, j, k]);
        if a == b || b == c {
            return LinExpr::zero(F);
        }
        match self.q.get(&(a, b, c)) {
            Some(e) if sign > 0 => e.clone(),
            Some(e) => -e,
            None => LinExpr::zero(F),
        }
    }
}

fn pair(p2: &BTreeMap<(usize, usize), LinExpr>, i: usize, j: usize) -> LinExpr {
    if i < j {
        p2.get(&(i, j)).cloned().unwrap_or_else(|| LinExpr::zero(F))
    } else {
        p2.get(&(j, i))
            .map(|e| -e)
            .unwrap_or_else(|| LinExpr::zero(F))
    }
}

/// Totally antisymmetric `Q^{ijk}` with `P^{ij} = D_k Q^{ijk}`.
///
/// Rows are taken in order. Row `i` subtracts the potentials already fixed by
/// earlier rows and integrates the rest over the later variables.
pub fn curlint(
    reg: &mut Registry,
    p2: &BTreeMap<(usize, usize), LinExpr>,
    vars: &[usize],
) -> Result<CurlPotentialResult> {
    let mut vars = vars.to_vec();
    vars.sort_unstable();
    vars.dedup();
    let mut out = CurlPotentialResult {
        vars: vars.clone(),
        q: BTreeMap::new(),
        equations: Vec::new(),
        functions: Vec::new(),
    };
    for a in 0..vars.len() {
        let i = vars[a];
        let later = &vars[a + 1..];
        if later.len() < 2 {
            break;
        }
        let mut v = BTreeMap::new();
        for &j in later {
            let mut vj = pair(p2, i, j);
            for &k in &vars[..a] {
                vj = &vj - &total_derivative(reg, &out.get(i, j, k), k);
            }
            v.insert(j, vj);
        }
        let res = divint(reg, &v, later)?;
        for ((j, k), e) in res.q {
            out.q.insert((i, j, k), e);
        }
        for mut e in res.equations {
            e.row.insert(0, i);
            out.equations.push(e);
        }
        out.functions.extend(res.functions);
    }
    for (a, &i) in vars.iter().enumerate() {
        for &j in &vars[a + 1..] {
            let mut r = pair(p2, i, j);
            for &k in &vars {
                r = &r - &total_derivative(reg, &out.get(i, j, k), k);
            }
            for e in out.equations.iter().filter(|e| e.row == [i, j]) {
                r = &r + &e.value;
            }
            if !r.is_zero() {
                return Err(Error::Potential(format!(
                    "rows disagree, P^{}{} leaves {}",
                    reg.var_name(i),
                    reg.var_name(j),
                    fmt_linexpr(reg, &r)
                )));
            }
        }
    }
    out.q.retain(|_, e| !e.is_zero());
    Ok(out)
}
