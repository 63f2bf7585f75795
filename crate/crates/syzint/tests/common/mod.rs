#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use syzint::calculus::total_derivative;
use syzint::driver::{parse_expr, solve, SolutionReport, SolveOptions, SystemFile};
use syzint::expr::{
    fmt_linexpr, rat, Deriv, LinExpr, MultiIndex, Namespace, Origin, Poly, Registry,
};
use syzint::reduction::{Modulus, Ranking, RankingKind};
use syzint::system::substitute_in;

pub const F: Namespace = Namespace::Functions;
pub const L: Namespace = Namespace::EquationLabels;

pub const INTRO: &str = include_str!("../../../../systems/intro.json");
pub const EXPLICIT_X: &str = include_str!("../../../../systems/explicit_x.json");
pub const USELESS: &str = include_str!("../../../../systems/useless.json");
pub const PARTLY_USEFUL: &str = include_str!("../../../../systems/partly_useful.json");
pub const USEFUL: &str = include_str!("../../../../systems/useful.json");
pub const CURL: &str = include_str!("../../../../systems/curl.json");
pub const CONSERVATION: &str = include_str!("../../../../systems/conservation.json");
pub const C4: &str = include_str!("../../../../systems/c4.json");

pub const EXAMPLES: [(&str, &str); 8] = [
    ("intro", INTRO),
    ("explicit_x", EXPLICIT_X),
    ("useless", USELESS),
    ("partly_useful", PARTLY_USEFUL),
    ("useful", USEFUL),
    ("curl", CURL),
    ("conservation", CONSERVATION),
    ("c4", C4),
];

pub fn file(src: &str) -> SystemFile {
    SystemFile::from_json(src).expect("example file parses")
}

/// Signed terms of a printed expression, order-insensitive.
pub fn terms(s: &str) -> Vec<String> {
    let mut out: Vec<String> = s
        .replace(" - ", " + -")
        .split(" + ")
        .map(|t| t.trim().to_string())
        .collect();
    out.sort();
    out
}

pub fn same_up_to_sign(a: &LinExpr, b: &LinExpr) -> bool {
    a == b || *a == -b
}

/// Rewrite `e` from `src` into `dst`, renaming functions through `map`
/// (`name -> (new name, sign)`); unmapped names are kept.
pub fn translate(
    src: &Registry,
    e: &LinExpr,
    map: &BTreeMap<&str, (&str, i64)>,
    dst: &Registry,
) -> LinExpr {
    let mut out = LinExpr::zero(e.namespace());
    for (d, p) in e.terms() {
        let name = src.func(d.sym).name.as_str();
        let (to, sign) = map.get(name).copied().unwrap_or((name, 1));
        let sym = dst
            .function(to)
            .unwrap_or_else(|| panic!("no function {to}"));
        out.add_term(Deriv::new(sym, d.idx.clone()), p.scale(&rat(sign, 1)));
    }
    out
}

/// Check a report against the file it came from, using only the printed
/// report: substitute the solution into every input equation and reduce by
/// the remaining equations.
pub fn report_checks_out(file: &SystemFile, report: &SolutionReport) -> Result<(), String> {
    let mut reg = file.registry().map_err(|e| e.to_string())?;
    for f in &report.new_functions {
        let deps: Vec<usize> = f
            .deps
            .iter()
            .map(|d| reg.var(d).expect("known variable"))
            .collect();
        reg.add_function(&f.name, &deps, Origin::Integration)
            .map_err(|e| e.to_string())?;
    }
    let parse = |s: &str| parse_expr(&reg, F, s).map_err(|e| format!("{s}: {e}"));
    let mut solution = Vec::new();
    for s in &report.substitutions {
        let f = reg.function(&s.function).ok_or("unknown function")?;
        solution.push((f, parse(&s.expression)?));
    }
    let remaining: Vec<LinExpr> = report
        .remaining
        .iter()
        .map(|r| parse(&r.expression))
        .collect::<Result<_, _>>()?;
    let ranking = Ranking::for_registry(RankingKind::TotalDegree, &reg);
    let modulus = Modulus::new(&reg, &remaining, &ranking);
    for (n, eq) in file.equations.iter().enumerate() {
        let mut v = parse(eq.expr())?;
        // substitutions are stored in final form, one pass suffices
        for (f, e) in &solution {
            v = substitute_in(&reg, &v, *f, e);
        }
        let r = modulus.residual(&v);
        if !r.is_zero() {
            return Err(format!(
                "equation {} leaves {}",
                n + 1,
                fmt_linexpr(&reg, &r)
            ));
        }
    }
    Ok(())
}

pub fn solve_file(src: &str, strategy: Option<&str>) -> SolutionReport {
    let opts = SolveOptions {
        strategy: strategy.map(|s| s.parse().unwrap()),
        ..SolveOptions::default()
    };
    solve(&file(src), &opts).expect("solver runs").0
}

/// Registry over `x, y, z` with `f, g` of all variables and `h(x,y)`, `k(z)`.
pub fn random_registry() -> Registry {
    let mut reg = Registry::with_vars(&["x", "y", "z"]);
    reg.add_function("f", &[0, 1, 2], Origin::Original).unwrap();
    reg.add_function("g", &[0, 1, 2], Origin::Original).unwrap();
    reg.add_function("h", &[0, 1], Origin::Original).unwrap();
    reg.add_function("k", &[2], Origin::Original).unwrap();
    reg
}

fn poly_strategy(max_deg: u32) -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0..=max_deg, 0..=max_deg, 0..=max_deg), -3i64..=3), 1..3).prop_map(
        |ts| {
            let mut p = Poly::zero();
            for ((a, b, c), k) in ts {
                let m = MultiIndex::from_pairs([(0, a), (1, b), (2, c)]);
                p = &p + &Poly::monomial(m, rat(k, 1));
            }
            p
        },
    )
}

/// Random linear expression in the functions of `syms`, derivatives up to
/// order two in each variable the function depends on.
pub fn expr_strategy(
    syms: Vec<(usize, Vec<usize>)>,
    max_terms: usize,
    max_deg: u32,
) -> impl Strategy<Value = LinExpr> {
    let n = syms.len();
    prop::collection::vec(
        (0..n, (0u32..3, 0u32..3, 0u32..3), poly_strategy(max_deg)),
        1..=max_terms,
    )
    .prop_map(move |ts| {
        let mut e = LinExpr::zero(F);
        for (s, (a, b, c), p) in ts {
            let (sym, deps) = &syms[s];
            let idx = MultiIndex::from_pairs(
                [(0, a), (1, b), (2, c)]
                    .into_iter()
                    .filter(|(v, _)| deps.contains(v)),
            );
            e.add_term(Deriv::new(*sym, idx), p);
        }
        e
    })
}

/// `P^i = D_j Q^{ij}` for a random antisymmetric `Q` over `x, y, z`.
pub fn current_from(reg: &Registry, q: &[LinExpr; 3]) -> BTreeMap<usize, LinExpr> {
    // q = [Q^{xy}, Q^{xz}, Q^{yz}]
    let get = |i: usize, j: usize| -> LinExpr {
        let (a, b, s) = if i < j { (i, j, 1) } else { (j, i, -1) };
        let e = match (a, b) {
            (0, 1) => &q[0],
            (0, 2) => &q[1],
            _ => &q[2],
        };
        if s > 0 {
            e.clone()
        } else {
            -e
        }
    };
    let mut p = BTreeMap::new();
    for i in 0..3 {
        let mut c = LinExpr::zero(F);
        for j in (0..3).filter(|&j| j != i) {
            c = &c + &total_derivative(reg, &get(i, j), j);
        }
        p.insert(i, c);
    }
    p
}

/// Check one DivInt round trip on a current built from potentials.
pub fn divint_roundtrip(q: &[LinExpr; 3]) -> Result<(), String> {
    let mut reg = random_registry();
    let p = current_from(&reg, q);
    let res = syzint::potentials::divint(&mut reg, &p, &[0, 1, 2]).map_err(|e| e.to_string())?;
    for i in 0..3 {
        let r = res.residual(&reg, &p, i);
        if !r.is_zero() {
            return Err(format!("residual {i}: {}", fmt_linexpr(&reg, &r)));
        }
    }
    if !res.equations.is_empty() || !res.functions.is_empty() {
        return Err(format!(
            "{} new equations, {} new functions",
            res.equations.len(),
            res.functions.len()
        ));
    }
    Ok(())
}

pub fn commutes(reg: &Registry, e: &LinExpr, u: usize, v: usize) -> bool {
    let uv = total_derivative(reg, &total_derivative(reg, e, u), v);
    let vu = total_derivative(reg, &total_derivative(reg, e, v), u);
    uv == vu
}

/// Small random system file in `f(x,y)` with constant coefficients.
pub fn random_system_strategy() -> impl Strategy<Value = SystemFile> {
    let term = (0usize..3, 0usize..3, -2i64..=2).prop_filter("nonzero", |t| t.2 != 0);
    let eq = prop::collection::vec(term, 1..4);
    prop::collection::vec(eq, 1..3).prop_map(|eqs| {
        let equations = eqs
            .into_iter()
            .map(|ts| {
                let mut src = String::new();
                for (a, b, k) in ts {
                    let suffix = "x".repeat(a) + &"y".repeat(b);
                    let d = if suffix.is_empty() {
                        "f".to_string()
                    } else {
                        format!("f_{suffix}")
                    };
                    let sign = if k < 0 { " - " } else { " + " };
                    src.push_str(&format!("{sign}{}*{d}", k.abs()));
                }
                syzint::driver::EquationDecl::Plain(
                    src.trim_start_matches(" + ").trim().to_string(),
                )
            })
            .collect();
        SystemFile {
            variables: vec!["x".into(), "y".into()],
            functions: vec![syzint::driver::FunctionDecl {
                name: "f".into(),
                deps: vec!["x".into(), "y".into()],
            }],
            equations,
            options: Default::default(),
        }
    })
}
