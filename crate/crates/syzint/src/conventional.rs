//! Integration of single exact equations, separation and substitution.

use std::collections::{BTreeMap, BTreeSet};

use crate::calculus::{peel_derivative, total_derivative};
use crate::expr::{Deriv, LinExpr, MultiIndex, Namespace, Origin, Poly, Registry};
use crate::system::{substitute_in, System};
use crate::{Error, Result};

const F: Namespace = Namespace::Functions;
const L: Namespace = Namespace::EquationLabels;

/// General solution of `0 = f_J`: a sum of `x_i^k g(...)` with each new `g`
/// free of `x_i`, for `k` below the order of `J` in `x_i`.
pub fn monomial_integrate(
    reg: &mut Registry,
    value: &LinExpr,
) -> Result<(usize, LinExpr, Vec<usize>)> {
    let mut it = value.terms();
    let (Some((d, p)), None) = (it.next(), it.next()) else {
        return Err(Error::Precondition("expected a single derivative".into()));
    };
    if p.constant_value().is_none() || d.idx.is_zero() {
        return Err(Error::Precondition(
            "expected a pure derivative with constant coefficient".into(),
        ));
    }
    let f = d.sym;
    let deps = reg.func(f).deps.clone();
    let mut expr = LinExpr::zero(F);
    let mut new = Vec::new();
    let orders: Vec<(usize, u32)> = d.idx.iter().collect();
    for &(v, m) in orders.iter().rev() {
        let gdeps: Vec<usize> = deps.iter().copied().filter(|&u| u != v).collect();
        for k in 0..m {
            let g = reg.fresh_function("g", &gdeps, Origin::Integration);
            expr.add_term(Deriv::plain(g), Poly::var_power(v, k));
            new.push(g);
        }
    }
    Ok((f, expr, new))
}

/// Can `value` be integrated in `v`, renaming blocking functions as needed?
pub fn integrable_in(reg: &Registry, value: &LinExpr, v: usize) -> bool {
    let vars = value.variables(reg);
    if !vars.contains(&v) {
        return false;
    }
    let (s, r) = peel_derivative(reg, value, v);
    // without a function of every variable under the derivative the
    // integration only renames functions
    if !s
        .terms()
        .any(|(d, _)| reg.deps(F, d.sym).is_superset(&vars))
    {
        return false;
    }
    let ok = r.terms().all(|(d, p)| {
        let n = blocking_deps(reg, d, p, v);
        n.is_subset(&vars) && n.len() < vars.len()
    });
    ok
}

/// Dependencies of the function replacing a blocking term `p c_J`: those
/// of `c` for a rename, plus the variables of `p` for a definition.
fn blocking_deps(reg: &Registry, d: &Deriv, p: &Poly, v: usize) -> BTreeSet<usize> {
    let mut need = reg.deps(F, d.sym);
    if p.depends_on(v) {
        need.extend(p.vars());
    }
    need
}

/// Variables in which `value` is integrable.
pub fn integration_variables(reg: &Registry, value: &LinExpr) -> Vec<usize> {
    value
        .variables(reg)
        .into_iter()
        .filter(|&v| integrable_in(reg, value, v))
        .collect()
}

#[derive(Clone, Debug)]
pub struct ExactIntegration {
    pub label: usize,
    pub integrated: usize,
    /// `(old, new)` with `old = new_v`.
    pub renames: Vec<(usize, usize)>,
    /// Equations defining new functions through `d_v = p c_J`.
    pub definitions: Vec<usize>,
    pub new_function: usize,
}

/// Integrate equation `label` once in `v`.
///
/// A blocking term `p c_J` with `c` depending on `v` is handled by renaming
/// `c = d_v` when `p` is free of `v`, and otherwise by a new `d` with the
/// equation `0 = d_v - p c_J`. One function of integration free of `v` is
/// subtracted from the result.
pub fn exact_integrate_wrt(sys: &mut System, label: usize, v: usize) -> Result<ExactIntegration> {
    let vars = sys.value(label).variables(&sys.reg);
    if !vars.contains(&v) {
        return Err(Error::Integration(format!(
            "equation does not involve {}",
            sys.reg.var_name(v)
        )));
    }
    let mut work = sys.value(label).clone();
    let mut renames = Vec::new();
    let mut definitions = Vec::new();
    let s = loop {
        let (s, r) = peel_derivative(&sys.reg, &work, v);
        let Some((d, p)) = r.terms().next().map(|(d, p)| (d.clone(), p.clone())) else {
            break s;
        };
        let c = d.sym;
        let need = blocking_deps(&sys.reg, &d, &p, v);
        if !need.is_subset(&vars) || need.len() >= vars.len() {
            return Err(Error::Integration(format!(
                "{} blocks integration in {}",
                sys.reg.func(c).name,
                sys.reg.var_name(v)
            )));
        }
        let deps: Vec<usize> = need.into_iter().collect();
        let nd = sys.reg.fresh_function("d", &deps, Origin::Integration);
        let dv = LinExpr::term(F, Deriv::new(nd, MultiIndex::single(v)), Poly::one());
        if !p.depends_on(v) {
            sys.substitute_function(c, dv.clone());
            work = substitute_in(&sys.reg, &work, c, &dv);
            renames.push((c, nd));
        } else {
            let def = &dv - &LinExpr::term(F, d, p);
            work = &work + &def;
            definitions.push(sys.add_base(def));
        }
    };
    let rest: Vec<usize> = vars.iter().copied().filter(|&u| u != v).collect();
    let n = sys.reg.fresh_function("d", &rest, Origin::Integration);
    let value = &s - &LinExpr::symbol(F, n);
    let integrated = sys.add_base(value);
    let mut relation = LinExpr::term(
        L,
        Deriv::new(integrated, MultiIndex::single(v)),
        Poly::one(),
    );
    for &l in &definitions {
        relation = &relation - &LinExpr::symbol(L, l);
    }
    let check = &sys.evaluate(&relation) - sys.value(label);
    if !check.is_zero() {
        return Err(Error::Integration(format!(
            "integral check leaves {}",
            sys.show(&check)
        )));
    }
    sys.supersede(label, &relation);
    Ok(ExactIntegration {
        label,
        integrated,
        renames,
        definitions,
        new_function: n,
    })
}

/// Split by powers of `v`, highest power first. No function may depend on `v`.
pub fn direct_separate(reg: &Registry, value: &LinExpr, v: usize) -> Result<Vec<(u32, LinExpr)>> {
    if let Some((d, _)) = value.terms().find(|(d, _)| reg.depends(F, d.sym, v)) {
        return Err(Error::Precondition(format!(
            "{} depends on {}",
            reg.func(d.sym).name,
            reg.var_name(v)
        )));
    }
    let mut parts: BTreeMap<u32, LinExpr> = BTreeMap::new();
    for (d, p) in value.terms() {
        for (k, c) in p.split_powers(v) {
            parts
                .entry(k)
                .or_insert_with(|| LinExpr::zero(F))
                .add_term(d.clone(), c);
        }
    }
    Ok(parts
        .into_iter()
        .rev()
        .filter(|(_, e)| !e.is_zero())
        .collect())
}

/// A variable occurring only explicitly, giving at least two pieces.
pub fn separation_variable(reg: &Registry, value: &LinExpr) -> Option<usize> {
    let coeff_vars: BTreeSet<usize> = value.terms().flat_map(|(_, p)| p.vars()).collect();
    coeff_vars.into_iter().find(|&v| {
        value.terms().all(|(d, _)| !reg.depends(F, d.sym, v))
            && direct_separate(reg, value, v)
                .map(|p| p.len() > 1)
                .unwrap_or(false)
    })
}

/// Result of splitting off the part of an equation that holds the only
/// functions depending on some variable.
#[derive(Clone, Debug)]
pub struct IndirectSeparation {
    pub v: usize,
    pub w: Option<usize>,
    /// `(power of w, A_k - h_k)`.
    pub pieces: Vec<(u32, LinExpr)>,
    pub remainder: LinExpr,
    pub new_functions: Vec<usize>,
}

/// Restricted separation for equations without a function of all their
/// variables.
///
/// If the terms with functions of `v` are `K` and everything else is a
/// polynomial of degree `m` in `v`, then `D_v^(m+1) K = 0`, so each `w`-power
/// part `A_k` of `K` is `sum_j v^j h_kj` with new functions `h_kj` of its
/// variables other than `v`. The remainder then separates directly in `v`.
pub fn indirect_separate(reg: &mut Registry, value: &LinExpr) -> Option<IndirectSeparation> {
    let vars = value.variables(reg);
    if value
        .symbols()
        .iter()
        .any(|&f| reg.deps(F, f).is_superset(&vars))
    {
        return None;
    }
    for &v in &vars {
        let k = value.restrict(|d| reg.depends(F, d.sym, v));
        let rest = value.restrict(|d| !reg.depends(F, d.sym, v));
        if k.is_zero() || rest.is_zero() {
            continue;
        }
        let m = rest.terms().map(|(_, p)| p.degree_in(v)).max().unwrap_or(0);
        let w = vars.iter().copied().find(|&w| {
            w != v
                && k.terms().all(|(d, _)| !reg.depends(F, d.sym, w))
                && k.terms().any(|(_, p)| p.depends_on(w))
        });
        let parts: Vec<(u32, LinExpr)> = match w {
            Some(w) => direct_separate(reg, &k, w).ok()?,
            None => vec![(0, k.clone())],
        };
        let mut pieces = Vec::new();
        let mut new_functions = Vec::new();
        let mut remainder = value.clone();
        for (pow, a) in parts {
            let deps: Vec<usize> = a.variables(reg).into_iter().filter(|&u| u != v).collect();
            let mut piece = a;
            for j in 0..=m {
                let h = reg.fresh_function("h", &deps, Origin::Integration);
                new_functions.push(h);
                piece.add_term(Deriv::plain(h), -Poly::var_power(v, j));
            }
            let weight = w.map(|w| Poly::var_power(w, pow)).unwrap_or_else(Poly::one);
            remainder = &remainder - &piece.scale(&weight);
            pieces.push((pow, piece));
        }
        return Some(IndirectSeparation {
            v,
            w,
            pieces,
            remainder,
            new_functions,
        });
    }
    None
}

/// `f = expr` from `value` if `f` occurs only undifferentiated with a
/// constant coefficient and depends on every variable of the equation.
pub fn solve_for(reg: &Registry, value: &LinExpr, f: usize) -> Option<LinExpr> {
    let terms: Vec<_> = value.terms().filter(|(d, _)| d.sym == f).collect();
    let [(d, p)] = terms.as_slice() else {
        return None;
    };
    if !d.idx.is_zero() {
        return None;
    }
    let c = p.constant_value()?;
    if !value.variables(reg).is_subset(&reg.deps(F, f)) {
        return None;
    }
    let rest = value.restrict(|d| d.sym != f);
    Some(rest.scale_q(&(-c.recip())))
}

/// Substitute `f` defined by equation `label` into the whole system.
pub fn substitute_function(sys: &mut System, label: usize, f: usize) -> Result<LinExpr> {
    let expr = solve_for(&sys.reg, sys.value(label), f)
        .ok_or_else(|| Error::Precondition(format!("cannot solve for {}", sys.reg.func(f).name)))?;
    sys.substitute_function(f, expr.clone());
    sys.mark_solved(label);
    Ok(expr)
}

/// `sum_{i<j} m_i m_j` over the orders of `J`.
pub fn redundancy_estimate(j: &MultiIndex) -> u64 {
    let m: Vec<u64> = j.iter().map(|(_, k)| k as u64).collect();
    let mut total = 0;
    for a in 0..m.len() {
        for b in a + 1..m.len() {
            total += m[a] * m[b];
        }
    }
    total
}

/// Functions of integration `g` with a partner `h` such that every term
/// `p g_J` in the solution of the input functions sits next to `h`
/// (undifferentiated, constant coefficient) and `h` depends on all
/// variables of `p g_J`. Then `g` can be absorbed into `h` by name.
pub fn absorbable_functions(sys: &System) -> Vec<(usize, usize)> {
    let reg = &sys.reg;
    // g -> hosts still possible
    let mut hosts: BTreeMap<usize, Option<BTreeSet<usize>>> = BTreeMap::new();
    for s in &sys.solution {
        if reg.func(s.func).origin != Origin::Original {
            continue;
        }
        let here: BTreeSet<usize> = s
            .expr
            .terms()
            .filter(|(d, p)| d.idx.is_zero() && p.constant_value().is_some())
            .map(|(d, _)| d.sym)
            .collect();
        for (d, p) in s.expr.terms() {
            let g = d.sym;
            if reg.func(g).origin == Origin::Original {
                continue;
            }
            for (m, _) in p.terms() {
                let mut need = reg.deps(F, g);
                need.extend(m.vars());
                let ok: BTreeSet<usize> = here
                    .iter()
                    .copied()
                    .filter(|&h| h != g && need.is_subset(&reg.deps(F, h)))
                    .collect();
                let e = hosts.entry(g).or_insert(None);
                *e = Some(match e.take() {
                    None => ok,
                    Some(prev) => prev.intersection(&ok).copied().collect(),
                });
            }
        }
    }
    hosts
        .into_iter()
        .filter_map(|(g, h)| Some((g, *h?.iter().next()?)))
        .collect()
}

/// `D_v` of an equation value, used when checking integrals.
pub fn differentiate(reg: &Registry, value: &LinExpr, v: usize) -> LinExpr {
    total_derivative(reg, value, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{Ranking, RankingKind};

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::from_vars(v)
    }

    #[test]
    fn redundancy_counts() {
        assert_eq!(redundancy_estimate(&mi(&[1, 2, 2])), 2);
        // x3 x3 y2 y3 with variables x1 x2 x3 y1 y2 y3 = 0..6
        assert_eq!(redundancy_estimate(&mi(&[2, 2, 4, 5])), 5);
        // orders 1,1,3,1,2; the double sum is 24, the figure of 21 sometimes
        // quoted for this derivative does not follow from the formula
        assert_eq!(redundancy_estimate(&mi(&[0, 1, 2, 2, 2, 3, 4, 4])), 24);
    }

    #[test]
    fn monomial_integration_of_yzz() {
        let mut reg = Registry::with_vars(&["x", "y", "z"]);
        let f = reg.add_function("f", &[0, 1, 2], Origin::Original).unwrap();
        let e = LinExpr::term(F, Deriv::new(f, mi(&[1, 2, 2])), Poly::one());
        let (g, expr, new) = monomial_integrate(&mut reg, &e).unwrap();
        assert_eq!(g, f);
        assert_eq!(new.len(), 3);
        assert_eq!(crate::expr::fmt_linexpr(&reg, &expr), "g1 + z*g2 + g3");
        let deps: Vec<_> = new.iter().map(|&n| reg.func(n).deps.clone()).collect();
        assert_eq!(deps, [vec![0, 1], vec![0, 1], vec![0, 2]]);
        assert!(monomial_integrate(&mut reg, &(&e + &LinExpr::symbol(F, f))).is_err());
    }

    #[test]
    fn monomial_integration_of_constant_in_one_variable() {
        let mut reg = Registry::with_vars(&["x"]);
        let f = reg.add_function("f", &[0], Origin::Original).unwrap();
        let e = LinExpr::term(F, Deriv::new(f, mi(&[0])), Poly::one());
        let (_, expr, new) = monomial_integrate(&mut reg, &e).unwrap();
        assert_eq!(expr, LinExpr::symbol(F, new[0]));
        assert!(reg.func(new[0]).deps.is_empty());
    }

    #[test]
    fn separation_by_powers() {
        let mut reg = Registry::with_vars(&["x", "y"]);
        let g = reg.add_function("g", &[1], Origin::Original).unwrap();
        let e = LinExpr::term(F, Deriv::plain(g), Poly::var_power(0, 2));
        let parts = direct_separate(&reg, &e, 0).unwrap();
        assert_eq!(parts, vec![(2, LinExpr::symbol(F, g))]);
        assert!(direct_separate(&reg, &e, 1).is_err());
        assert_eq!(
            direct_separate(&reg, &LinExpr::symbol(F, g), 0)
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn integration_through_definition() {
        // 0 = f_y + y c(y) with f(x, y)
        let mut reg = Registry::with_vars(&["x", "y"]);
        let f = reg.add_function("f", &[0, 1], Origin::Original).unwrap();
        let c = reg.add_function("c", &[1], Origin::Original).unwrap();
        let r = Ranking::for_registry(RankingKind::TotalDegree, &reg);
        let mut sys = System::new(reg, r);
        let mut v = LinExpr::term(F, Deriv::new(f, mi(&[1])), Poly::one());
        v.add_term(Deriv::plain(c), Poly::var(1));
        let e = sys.add_input(None, v.clone()).unwrap();
        let res = exact_integrate_wrt(&mut sys, e, 1).unwrap();
        assert!(res.renames.is_empty());
        assert_eq!(res.definitions.len(), 1);
        // D_y(result) + y c vanishes modulo d_y = y c
        let lhs = differentiate(&sys.reg, sys.value(res.integrated), 1);
        let def = sys.value(res.definitions[0]).clone();
        assert_eq!(&lhs - &def, v);
    }
}
