//! Total derivatives, peeling of exact parts and divergence/curl detection.

use std::collections::BTreeMap;

use crate::expr::{Deriv, LinExpr, MultiIndex, Poly, Registry};

/// `D_v E` by the derivation law on every term.
pub fn total_derivative(reg: &Registry, e: &LinExpr, v: usize) -> LinExpr {
    let ns = e.namespace();
    let mut out = LinExpr::zero(ns);
    for (d, p) in e.terms() {
        out.add_term(d.clone(), p.derivative(v));
        if reg.depends(ns, d.sym, v) {
            out.add_term(Deriv::new(d.sym, d.idx.add_var(v, 1)), p.clone());
        }
    }
    out
}

/// `D^J E` for a multi-index `J`.
pub fn derivative_by(reg: &Registry, e: &LinExpr, idx: &MultiIndex) -> LinExpr {
    let mut out = e.clone();
    for v in idx.expanded() {
        out = total_derivative(reg, &out, v);
    }
    out
}

/// Split `E = D_v S + R` where `R` has no term that can be peeled in `v`.
///
/// Terms are taken highest `v`-order first. A term `p f_J` with `J(v) >= 1`
/// contributes `p f_{J-v}` to `S` and leaves `-(d_v p) f_{J-v}` behind; a term
/// whose symbol does not depend on `v` is integrated through its coefficient.
pub fn peel_derivative(reg: &Registry, e: &LinExpr, v: usize) -> (LinExpr, LinExpr) {
    let ns = e.namespace();
    let mut work = e.clone();
    let mut s = LinExpr::zero(ns);
    let mut r = LinExpr::zero(ns);
    loop {
        let pick = work
            .terms()
            .max_by(|a, b| a.0.idx.get(v).cmp(&b.0.idx.get(v)).then(a.0.cmp(b.0)))
            .map(|(d, p)| (d.clone(), p.clone()));
        let Some((d, p)) = pick else { break };
        if let Some(lower) = d.idx.sub_var(v) {
            let piece = LinExpr::term(ns, Deriv::new(d.sym, lower), p);
            work = &work - &total_derivative(reg, &piece, v);
            s = &s + &piece;
        } else if !reg.depends(ns, d.sym, v) {
            let piece = LinExpr::term(ns, d.clone(), p.antiderivative(v));
            work.remove_term(&d);
            s = &s + &piece;
        } else {
            work.remove_term(&d);
            r.add_term(d, p);
        }
    }
    (s, r)
}

/// Peel successively over `vars`, last variable first.
///
/// Returns the component per variable and the final remainder.
pub fn peel_over(
    reg: &Registry,
    e: &LinExpr,
    vars: &[usize],
) -> (BTreeMap<usize, LinExpr>, LinExpr) {
    let mut comps = BTreeMap::new();
    let mut rest = e.clone();
    for &v in vars.iter().rev() {
        let (s, r) = peel_derivative(reg, &rest, v);
        comps.insert(v, s);
        rest = r;
    }
    (comps, rest)
}

/// A syzygy written as `0 = D_i P^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceForm {
    pub vars: Vec<usize>,
    pub components: BTreeMap<usize, LinExpr>,
}

impl DivergenceForm {
    /// `sum_i D_i P^i`.
    pub fn divergence(&self, reg: &Registry) -> LinExpr {
        let ns = self
            .components
            .values()
            .next()
            .map(|c| c.namespace())
            .unwrap_or(crate::Namespace::EquationLabels);
        let mut out = LinExpr::zero(ns);
        for (&v, c) in &self.components {
            out = &out + &total_derivative(reg, c, v);
        }
        out
    }
}

/// Divergence form over exactly `vars`, if peeling leaves nothing and every
/// component is nonzero.
pub fn divergence_decompose(reg: &Registry, e: &LinExpr, vars: &[usize]) -> Option<DivergenceForm> {
    if vars.is_empty() || e.is_zero() {
        return None;
    }
    let (comps, rest) = peel_over(reg, e, vars);
    if !rest.is_zero() || comps.values().any(|c| c.is_zero()) {
        return None;
    }
    debug_assert!((&DivergenceForm {
        vars: vars.to_vec(),
        components: comps.clone()
    }
    .divergence(reg)
        - e)
        .is_zero());
    Some(DivergenceForm {
        vars: vars.to_vec(),
        components: comps,
    })
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// First divergence form of `e` over subsets of at least two variables,
/// smallest subsets first.
pub fn find_divergence(
    reg: &Registry,
    e: &LinExpr,
    max_size: Option<usize>,
) -> Option<DivergenceForm> {
    let n = reg.num_vars();
    let top = max_size.unwrap_or(n).min(n);
    for k in 2..=top {
        for vars in subsets(n, k) {
            if let Some(df) = divergence_decompose(reg, e, &vars) {
                return Some(df);
            }
        }
    }
    None
}

/// Syzygies written as `0 = D_j P^{ij}` with antisymmetric `P`.
/// Only `i < j` is stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurlForm {
    pub vars: Vec<usize>,
    pub components: BTreeMap<(usize, usize), LinExpr>,
}

impl CurlForm {
    /// `P^{ij}` with the antisymmetric extension.
    pub fn get(&self, i: usize, j: usize) -> Option<LinExpr> {
        if i < j {
            self.components.get(&(i, j)).cloned()
        } else {
            self.components.get(&(j, i)).map(|c| -c)
        }
    }
}

/// `syzygies[k]` belongs to first index `vars[k]`.
pub fn curl_decompose(reg: &Registry, syzygies: &[LinExpr], vars: &[usize]) -> Option<CurlForm> {
    if syzygies.is_empty() || syzygies.len() != vars.len() || vars.len() < 3 {
        return None;
    }
    let mut rows = BTreeMap::new();
    for (k, &i) in vars.iter().enumerate() {
        let others: Vec<usize> = vars.iter().copied().filter(|&v| v != i).collect();
        let (comps, rest) = peel_over(reg, &syzygies[k], &others);
        if !rest.is_zero() {
            return None;
        }
        rows.insert(i, comps);
    }
    let mut components = BTreeMap::new();
    for (a, &i) in vars.iter().enumerate() {
        for &j in &vars[a + 1..] {
            let pij = &rows[&i][&j];
            let pji = &rows[&j][&i];
            if *pij != -pji {
                return None;
            }
            components.insert(
                (i.min(j), i.max(j)),
                if i < j { pij.clone() } else { pji.clone() },
            );
        }
    }
    if components.values().all(|c| c.is_zero()) {
        return None;
    }
    Some(CurlForm {
        vars: vars.to_vec(),
        components,
    })
}

/// Search a curl among `syzygies` over all variables of the registry,
/// assigning distinct syzygies to the rows.
pub fn find_curl(reg: &Registry, syzygies: &[LinExpr]) -> Option<(CurlForm, Vec<usize>)> {
    let n = reg.num_vars();
    if n < 3 || syzygies.len() < n {
        return None;
    }
    let vars: Vec<usize> = (0..n).collect();
    let candidates: Vec<Vec<usize>> = vars
        .iter()
        .map(|&i| {
            let others: Vec<usize> = vars.iter().copied().filter(|&v| v != i).collect();
            (0..syzygies.len())
                .filter(|&s| peel_over(reg, &syzygies[s], &others).1.is_zero())
                .collect()
        })
        .collect();
    fn assign(
        row: usize,
        cands: &[Vec<usize>],
        used: &mut Vec<usize>,
        reg: &Registry,
        syz: &[LinExpr],
        vars: &[usize],
    ) -> Option<CurlForm> {
        if row == cands.len() {
            let picked: Vec<LinExpr> = used.iter().map(|&s| syz[s].clone()).collect();
            return curl_decompose(reg, &picked, vars);
        }
        for &s in &cands[row] {
            if used.contains(&s) {
                continue;
            }
            used.push(s);
            if let Some(cf) = assign(row + 1, cands, used, reg, syz, vars) {
                return Some(cf);
            }
            used.pop();
        }
        None
    }
    let mut used = Vec::new();
    assign(0, &candidates, &mut used, reg, syzygies, &vars).map(|cf| (cf, used))
}

/// Coefficient-only helper: `p * sym_J` as an expression.
pub fn term(ns: crate::Namespace, sym: usize, idx: MultiIndex, p: Poly) -> LinExpr {
    LinExpr::term(ns, Deriv::new(sym, idx), p)
}
