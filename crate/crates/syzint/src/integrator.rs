//! One syzygy based integration step.
//!
//! A syzygy `0 = D_i P^i(e)` is expanded in the unknowns, its potentials are
//! computed, and `Q^{ij}` minus a function of integration becomes a new
//! equation. Comparing both forms of `P^i` gives new syzygies, and an old
//! equation that now occurs algebraically in one of them is dropped.

use std::collections::{BTreeMap, BTreeSet};

use crate::calculus::{CurlForm, DivergenceForm};
use crate::expr::{Deriv, LinExpr, MultiIndex, Namespace, Origin, Poly};
use crate::potentials::{curlint, divint, sort_triple, AuxEquation};
use crate::system::System;
use crate::Result;

const F: Namespace = Namespace::Functions;
const L: Namespace = Namespace::EquationLabels;

#[derive(Clone, Debug)]
pub struct IntegrationStepReport {
    pub used_syzygies: Vec<LinExpr>,
    pub divergence: Option<DivergenceForm>,
    pub curl: Option<CurlForm>,
    /// Labels of the integrated equations followed by auxiliary ones.
    pub new_equations: Vec<usize>,
    pub new_functions: Vec<usize>,
    pub new_syzygies: Vec<LinExpr>,
    pub deleted: Vec<usize>,
    pub useful: bool,
    pub reason: String,
}

/// `P^i` with every label replaced by its value.
pub fn substitute_current(sys: &System, df: &DivergenceForm) -> Result<BTreeMap<usize, LinExpr>> {
    df.components
        .iter()
        .map(|(&v, c)| Ok((v, sys.substitute_labels(c)?)))
        .collect()
}

/// Functions solvable algebraically from `values`: at order zero with a
/// coefficient of plus or minus one, depending on every variable of the
/// equation.
pub fn solvable_functions(
    sys: &System,
    values: &[LinExpr],
    exclude: &BTreeSet<usize>,
) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for v in values {
        let vars = v.variables(&sys.reg);
        for (d, p) in v.terms() {
            let once = v.terms().filter(|(e, _)| e.sym == d.sym).count() == 1;
            if !d.idx.is_zero() || !once || exclude.contains(&d.sym) {
                continue;
            }
            let unit = p
                .constant_value()
                .map(|c| c.numer().magnitude() == c.denom().magnitude())
                .unwrap_or(false);
            let deps = sys.reg.deps(F, d.sym);
            if unit && vars.is_subset(&deps) {
                out.insert(d.sym);
            }
        }
    }
    out
}

/// Two-component steps always pay off. Otherwise the step must solve for
/// more functions than the `C(n,3)` new functions it introduces.
pub fn assess_usefulness(
    sys: &System,
    nvars: usize,
    new_values: &[LinExpr],
    new_funcs: &BTreeSet<usize>,
) -> (bool, String) {
    if nvars == 2 {
        return (true, "two-component divergence".into());
    }
    let solvable = solvable_functions(sys, new_values, new_funcs).len();
    let introduced = binomial(nvars, 3);
    (
        solvable > introduced,
        format!("{solvable} solvable functions against {introduced} new"),
    )
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Sign making the highest-ranked term of an older function positive.
fn orientation(sys: &System, q: &LinExpr, funcs_before: usize) -> i64 {
    let old = q.restrict(|d| d.sym < funcs_before);
    match sys.ranking.leading(&old) {
        Some((_, p)) if p.leading_sign() < 0 => -1,
        _ => 1,
    }
}

fn signed(e: &LinExpr, s: i64) -> LinExpr {
    if s < 0 {
        -e
    } else {
        e.clone()
    }
}

/// Solve pending syzygies for older labels and delete those equations.
fn remove_redundant(
    sys: &mut System,
    pending: Vec<LinExpr>,
    labels_before: usize,
) -> Result<(Vec<LinExpr>, Vec<usize>)> {
    let mut pending = pending;
    let mut deleted = Vec::new();
    for k in 0..pending.len() {
        let s = pending[k].clone();
        let hit = sys
            .algebraic_labels(&s)
            .into_iter()
            .find(|&l| l < labels_before);
        let Some(l) = hit else { continue };
        sys.delete(l, s.clone());
        let c = s
            .coefficient(&Deriv::plain(l))
            .and_then(|p| p.constant_value())
            .unwrap();
        let expr = s.restrict(|d| d.sym != l).scale_q(&(-c.recip()));
        for t in pending.iter_mut() {
            *t = crate::system::replace_label(&sys.reg, t, l, &expr);
        }
        deleted.push(l);
    }
    let mut kept = Vec::new();
    for s in pending {
        if sys.add_syzygy(s.clone())? {
            kept.push(s);
        }
    }
    Ok((kept, deleted))
}

fn add_aux(sys: &mut System, aux: &[AuxEquation]) -> Vec<(usize, Vec<usize>)> {
    aux.iter()
        .map(|a| (sys.add_base(a.value.clone()), a.row.clone()))
        .collect()
}

fn remove_used(sys: &mut System, used: &[LinExpr]) {
    for u in used {
        if let Some(pos) = sys.syzygies.iter().position(|s| s.same_up_to_sign(u)) {
            let s = sys.syzygies.remove(pos);
            sys.archive.push(s);
        }
    }
}

/// Integrate the divergence form `df` of `syzygy`.
pub fn integrate_step(
    sys: &mut System,
    syzygy: &LinExpr,
    df: &DivergenceForm,
) -> Result<IntegrationStepReport> {
    let funcs_before = sys.reg.num_funcs();
    let labels_before = sys.reg.num_labels();
    let p = substitute_current(sys, df)?;
    let res = divint(&mut sys.reg, &p, &df.vars)?;
    let vars = res.vars.clone();
    let n = vars.len();
    let nvars = sys.reg.num_vars();

    // values of the new equations and their orientation, per pair
    let mut eqs: BTreeMap<(usize, usize), (LinExpr, i64)> = BTreeMap::new();
    let mut new_functions: Vec<usize> = res.functions.clone();
    if n == 2 {
        let (i, j) = (vars[0], vars[1]);
        let q = res.get(i, j);
        let s = orientation(sys, &q, funcs_before);
        let complement: Vec<usize> = (0..nvars).filter(|v| !vars.contains(v)).collect();
        let r = sys
            .reg
            .fresh_function("c", &complement, Origin::Integration);
        new_functions.push(r);
        let value = &signed(&q, s) - &LinExpr::symbol(F, r);
        eqs.insert((i, j), (value, s));
    } else {
        let all: Vec<usize> = (0..nvars).collect();
        let mut rfun = BTreeMap::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let f = sys.reg.fresh_function("c", &all, Origin::Integration);
                    new_functions.push(f);
                    rfun.insert((vars[a], vars[b], vars[c]), f);
                }
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                let (i, j) = (vars[a], vars[b]);
                let q = res.get(i, j);
                let s = orientation(sys, &q, funcs_before);
                let mut value = q;
                for &k in vars.iter().filter(|&&k| k != i && k != j) {
                    let (eps, t) = sort_triple([i, j, k]);
                    let f = rfun[&(t[0], t[1], t[2])];
                    value.add_term(Deriv::new(f, MultiIndex::single(k)), Poly::int(eps));
                }
                eqs.insert((i, j), (signed(&value, s), s));
            }
        }
    }

    let new_values: Vec<LinExpr> = eqs.values().map(|(v, _)| v.clone()).collect();
    let nf: BTreeSet<usize> = new_functions.iter().copied().collect();
    let (useful, reason) = assess_usefulness(sys, n, &new_values, &nf);

    let mut labels = BTreeMap::new();
    let mut new_equations = Vec::new();
    for (&pair, (v, s)) in &eqs {
        let l = sys.add_base(v.clone());
        labels.insert(pair, (l, *s));
        new_equations.push(l);
    }
    let aux = add_aux(sys, &res.equations);
    new_equations.extend(aux.iter().map(|a| a.0));

    // P^i(e) - D_j Q^{ij}(e) + aux rows, with Q^{ij} = s e_ij up to terms
    // whose divergence vanishes
    let mut rows = Vec::new();
    for &i in &vars {
        let mut row = df.components[&i].clone();
        for &j in vars.iter().filter(|&&j| j != i) {
            let (l, s) = labels[&(i.min(j), i.max(j))];
            let sigma = if i < j { s } else { -s };
            let e = LinExpr::term(L, Deriv::new(l, MultiIndex::single(j)), Poly::int(sigma));
            row = &row - &e;
        }
        for (l, r) in &aux {
            if *r == [i] {
                row = &row + &LinExpr::symbol(L, *l);
            }
        }
        rows.push(row);
    }
    remove_used(sys, std::slice::from_ref(syzygy));
    let (new_syzygies, deleted) = remove_redundant(sys, rows, labels_before)?;
    Ok(IntegrationStepReport {
        used_syzygies: vec![syzygy.clone()],
        divergence: Some(df.clone()),
        curl: None,
        new_equations,
        new_functions,
        new_syzygies,
        deleted,
        useful,
        reason,
    })
}

/// Integrate a vanishing curl built from `syzygies`.
pub fn curl_integrate_step(
    sys: &mut System,
    syzygies: &[LinExpr],
    cf: &CurlForm,
) -> Result<IntegrationStepReport> {
    let funcs_before = sys.reg.num_funcs();
    let labels_before = sys.reg.num_labels();
    let mut p2 = BTreeMap::new();
    for (&pair, c) in &cf.components {
        p2.insert(pair, sys.substitute_labels(c)?);
    }
    let res = curlint(&mut sys.reg, &p2, &cf.vars)?;
    let vars = res.vars.clone();
    let n = vars.len();
    let nvars = sys.reg.num_vars();
    let mut new_functions = res.functions.clone();

    let mut eqs: BTreeMap<(usize, usize, usize), (LinExpr, i64)> = BTreeMap::new();
    let triples: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).flat_map(move |b| (b + 1..n).map(move |c| (a, b, c))))
        .map(|(a, b, c)| (vars[a], vars[b], vars[c]))
        .collect();
    if n == 3 {
        let t = triples[0];
        let q = res.get(t.0, t.1, t.2);
        let s = orientation(sys, &q, funcs_before);
        let complement: Vec<usize> = (0..nvars).filter(|v| !vars.contains(v)).collect();
        let r = sys
            .reg
            .fresh_function("c", &complement, Origin::Integration);
        new_functions.push(r);
        eqs.insert(t, (&signed(&q, s) - &LinExpr::symbol(F, r), s));
    } else {
        let all: Vec<usize> = (0..nvars).collect();
        let mut rfun = BTreeMap::new();
        for quad in crate::calculus::subsets(n, 4) {
            let key: Vec<usize> = quad.iter().map(|&a| vars[a]).collect();
            let f = sys.reg.fresh_function("c", &all, Origin::Integration);
            new_functions.push(f);
            rfun.insert(key, f);
        }
        for &(i, j, k) in &triples {
            let q = res.get(i, j, k);
            let s = orientation(sys, &q, funcs_before);
            let mut value = q;
            for &l in vars.iter().filter(|&&l| l != i && l != j && l != k) {
                let (eps, key) = sort4([i, j, k, l]);
                value.add_term(
                    Deriv::new(rfun[&key], MultiIndex::single(l)),
                    Poly::int(eps),
                );
            }
            eqs.insert((i, j, k), (signed(&value, s), s));
        }
    }
    let mut labels = BTreeMap::new();
    let mut new_equations = Vec::new();
    for (&t, (v, s)) in &eqs {
        let l = sys.add_base(v.clone());
        labels.insert(t, (l, *s));
        new_equations.push(l);
    }
    let aux = add_aux(sys, &res.equations);
    new_equations.extend(aux.iter().map(|a| a.0));

    let mut rows = Vec::new();
    for (&(i, j), c) in &cf.components {
        let mut row = c.clone();
        for &k in vars.iter().filter(|&&k| k != i && k != j) {
            let (eps, t) = sort_triple([i, j, k]);
            let (l, s) = labels[&(t[0], t[1], t[2])];
            row =
                &row - &LinExpr::term(L, Deriv::new(l, MultiIndex::single(k)), Poly::int(eps * s));
        }
        for (l, r) in &aux {
            if *r == [i, j] {
                row = &row + &LinExpr::symbol(L, *l);
            }
        }
        rows.push(row);
    }
    remove_used(sys, syzygies);
    let (new_syzygies, deleted) = remove_redundant(sys, rows, labels_before)?;
    Ok(IntegrationStepReport {
        used_syzygies: syzygies.to_vec(),
        divergence: None,
        curl: Some(cf.clone()),
        new_equations,
        new_functions,
        new_syzygies,
        deleted,
        useful: true,
        reason: "vanishing curl".into(),
    })
}

/// Sign of the permutation sorting four distinct indices.
fn sort4(t: [usize; 4]) -> (i64, Vec<usize>) {
    let mut s = t;
    let mut sign = 1;
    for a in 0..4 {
        for b in 0..3 - a {
            if s[b] > s[b + 1] {
                s.swap(b, b + 1);
                sign = -sign;
            }
        }
    }
    (sign, s.to_vec())
}
