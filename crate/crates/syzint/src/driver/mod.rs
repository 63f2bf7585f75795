//! Strategy loop: try the actions of a strategy in order, apply the first
//! that makes progress, repeat.

pub mod file;
pub mod parse;
pub mod report;
pub mod strategy;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

pub use file::{EquationDecl, FunctionDecl, Options, SystemFile};
pub use parse::parse_expr;
pub use report::{SolutionReport, SolveStatus};
pub use strategy::{Action, Strategy};

use crate::calculus::{divergence_decompose, find_curl, subsets};
use crate::conventional::{
    absorbable_functions, direct_separate, exact_integrate_wrt, indirect_separate,
    integration_variables, monomial_integrate, redundancy_estimate, separation_variable, solve_for,
};
use crate::expr::{fmt_linexpr, Deriv, LinExpr, Namespace, Origin, Poly};
use crate::integrator::{curl_integrate_step, integrate_step, IntegrationStepReport};
use crate::reduction::{
    cross_differentiate, harvest_syzygy, normal_form, strip_monomial, Equation, RankingKind,
};
use crate::system::{Status, System};
use crate::{Error, Result};

const L: Namespace = Namespace::EquationLabels;

#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub step: usize,
    pub action: Action,
    pub detail: String,
    /// Active equations after the step.
    pub equations: Vec<report::LabeledEquation>,
    pub syzygies: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    /// Overrides the strategy of the file.
    pub strategy: Option<Strategy>,
    pub ranking: Option<RankingKind>,
    pub max_steps: Option<usize>,
    pub max_divergence_subset: Option<usize>,
}

pub const DEFAULT_MAX_STEPS: usize = 200;

pub struct Solver {
    pub sys: System,
    pub strategy: Strategy,
    pub trace: Vec<TraceEntry>,
    max_steps: usize,
    max_subset: Option<usize>,
    tried_pairs: BTreeSet<(String, String)>,
    rejected: BTreeSet<String>,
    /// Labels made by indirect separation, not separated that way again.
    ise_pieces: BTreeSet<usize>,
    counters: BTreeMap<String, u64>,
    syzygies_used: Vec<String>,
    steps: usize,
}

impl Solver {
    pub fn new(sys: System, strategy: Strategy) -> Solver {
        Solver {
            sys,
            strategy,
            trace: Vec::new(),
            max_steps: DEFAULT_MAX_STEPS,
            max_subset: None,
            tried_pairs: BTreeSet::new(),
            rejected: BTreeSet::new(),
            ise_pieces: BTreeSet::new(),
            counters: BTreeMap::new(),
            syzygies_used: Vec::new(),
            steps: 0,
        }
    }

    pub fn from_file(file: &SystemFile, opts: &SolveOptions) -> Result<Solver> {
        let sys = file.build(opts.ranking)?;
        let strategy = match (&opts.strategy, &file.options.strategy) {
            (Some(s), _) => s.clone(),
            (None, Some(s)) => s.parse()?,
            (None, None) => Strategy::syzygy(),
        };
        let mut s = Solver::new(sys, strategy);
        s.max_steps = opts.max_steps.unwrap_or(DEFAULT_MAX_STEPS);
        s.max_subset = opts
            .max_divergence_subset
            .or(file.options.max_divergence_subset);
        Ok(s)
    }

    fn show(&self, e: &LinExpr) -> String {
        fmt_linexpr(&self.sys.reg, e)
    }

    fn name(&self, l: usize) -> String {
        self.sys.reg.label_name(l).to_string()
    }

    fn count(&mut self, key: &str, n: u64) {
        *self.counters.entry(key.to_string()).or_default() += n;
    }

    /// Apply the first action that makes progress.
    pub fn step(&mut self) -> Result<Option<Action>> {
        for a in self.strategy.0.clone() {
            if let Some(detail) = self.apply(a)? {
                self.sys.drop_trivial();
                self.steps += 1;
                self.count(a.name(), 1);
                let equations = self
                    .sys
                    .active()
                    .into_iter()
                    .map(|l| report::LabeledEquation {
                        label: self.name(l),
                        expression: self.show(self.sys.value(l)),
                    })
                    .collect();
                let syzygies = self.sys.syzygies.iter().map(|s| self.show(s)).collect();
                self.trace.push(TraceEntry {
                    step: self.steps,
                    action: a,
                    detail,
                    equations,
                    syzygies,
                });
                return Ok(Some(a));
            }
        }
        Ok(None)
    }

    pub fn run(&mut self) -> Result<SolutionReport> {
        self.sys.drop_trivial();
        let status = loop {
            if self.sys.active().is_empty() {
                break SolveStatus::Solved;
            }
            if self.steps >= self.max_steps {
                break SolveStatus::Incomplete;
            }
            if self.step()?.is_none() {
                break SolveStatus::Converged;
            }
        };
        Ok(self.report(status))
    }

    pub fn report(&self, status: SolveStatus) -> SolutionReport {
        report::build(
            &self.sys,
            status,
            self.strategy.to_string(),
            self.steps,
            &self.syzygies_used,
            self.counters.clone(),
            absorbable_functions(&self.sys),
        )
    }

    pub fn apply(&mut self, a: Action) -> Result<Option<String>> {
        match a {
            Action::Separate => self.separate(),
            Action::Substitute => Ok(self.substitute()),
            Action::SingleIntegrate => self.integrate_one(true),
            Action::Eliminate => self.eliminate(),
            Action::DeleteRedundant => Ok(self.delete_redundant()),
            Action::SyzygyIntegrate => self.syzygy_integrate(),
            Action::ConventionalIntegrate => self.conventional_integrate(),
            Action::ReducePair => self.reduce_pair(),
            Action::AnyIntegrate => self.integrate_one(false),
        }
    }

    fn separate(&mut self) -> Result<Option<String>> {
        for l in self.sys.active() {
            let value = self.sys.value(l).clone();
            let Some(v) = separation_variable(&self.sys.reg, &value) else {
                continue;
            };
            let parts = direct_separate(&self.sys.reg, &value, v)?;
            let mut rel = LinExpr::zero(L);
            let mut names = Vec::new();
            for (k, piece) in parts {
                let nl = self.sys.add_base(piece);
                rel.add_term(Deriv::plain(nl), Poly::var_power(v, k));
                names.push(format!(
                    "{} = {}",
                    self.name(nl),
                    self.show(self.sys.value(nl))
                ));
            }
            self.sys.supersede(l, &rel);
            return Ok(Some(format!(
                "{} separated in powers of {}: {}",
                self.name(l),
                self.sys.reg.var_name(v),
                names.join("; ")
            )));
        }
        for l in self.sys.active() {
            if self.ise_pieces.contains(&l) {
                continue;
            }
            let value = self.sys.value(l).clone();
            let Some(ise) = indirect_separate(&mut self.sys.reg, &value) else {
                continue;
            };
            let mut rel = LinExpr::zero(L);
            let mut names = Vec::new();
            for (k, piece) in &ise.pieces {
                let nl = self.sys.add_base(piece.clone());
                self.ise_pieces.insert(nl);
                let w = ise
                    .w
                    .map(|w| Poly::var_power(w, *k))
                    .unwrap_or_else(Poly::one);
                rel.add_term(Deriv::plain(nl), w);
                names.push(format!("{} = {}", self.name(nl), self.show(piece)));
            }
            let rest = self.sys.add_base(ise.remainder.clone());
            rel.add_term(Deriv::plain(rest), Poly::one());
            names.push(format!(
                "{} = {}",
                self.name(rest),
                self.show(&ise.remainder)
            ));
            if self.sys.evaluate(&rel) != value {
                return Err(Error::Precondition(
                    "indirect separation does not recombine".into(),
                ));
            }
            self.sys.supersede(l, &rel);
            self.count("new_functions", ise.new_functions.len() as u64);
            return Ok(Some(format!(
                "{} split on functions of {}: {}",
                self.name(l),
                self.sys.reg.var_name(ise.v),
                names.join("; ")
            )));
        }
        Ok(None)
    }

    fn substitute(&mut self) -> Option<String> {
        let mut best: Option<((u32, usize), usize, usize, LinExpr)> = None;
        for l in self.sys.active() {
            let value = self.sys.value(l);
            for f in value.symbols() {
                if let Some(expr) = solve_for(&self.sys.reg, value, f) {
                    let key = (expr.order(), expr.len());
                    if best.as_ref().is_none_or(|b| key < b.0) {
                        best = Some((key, l, f, expr));
                    }
                }
            }
        }
        let (_, l, f, expr) = best?;
        let detail = format!(
            "{} = {} from {}",
            self.sys.reg.func(f).name,
            self.show(&expr),
            self.name(l)
        );
        self.sys.substitute_function(f, expr);
        self.sys.mark_solved(l);
        Some(detail)
    }

    fn integrate_one(&mut self, single: bool) -> Result<Option<String>> {
        for l in self.sys.active() {
            let vs = integration_variables(&self.sys.reg, self.sys.value(l));
            if vs.is_empty() || (single && vs.len() != 1) {
                continue;
            }
            let v = vs[0];
            let res = exact_integrate_wrt(&mut self.sys, l, v)?;
            self.count(
                "new_functions",
                1 + (res.renames.len() + res.definitions.len()) as u64,
            );
            let renames: Vec<String> = res
                .renames
                .iter()
                .map(|&(c, d)| {
                    format!(
                        "{} = {}_{}",
                        self.sys.reg.func(c).name,
                        self.sys.reg.func(d).name,
                        self.sys.reg.var_name(v)
                    )
                })
                .collect();
            let mut detail = format!(
                "{} integrated in {}: {} = {}",
                self.name(l),
                self.sys.reg.var_name(v),
                self.name(res.integrated),
                self.show(self.sys.value(res.integrated))
            );
            if !renames.is_empty() {
                detail.push_str(&format!(" with {}", renames.join(", ")));
            }
            for d in &res.definitions {
                detail.push_str(&format!(
                    "; {} = {}",
                    self.name(*d),
                    self.show(self.sys.value(*d))
                ));
            }
            return Ok(Some(detail));
        }
        Ok(None)
    }

    fn conventional_integrate(&mut self) -> Result<Option<String>> {
        for l in self.sys.active() {
            let value = self.sys.value(l).clone();
            let Some((d, p)) = value.terms().next() else {
                continue;
            };
            if value.len() != 1 || d.idx.is_zero() || p.constant_value().is_none() {
                continue;
            }
            let idx = d.idx.clone();
            let (f, expr, new) = monomial_integrate(&mut self.sys.reg, &value)?;
            self.count("new_functions", new.len() as u64);
            self.count("redundancy_estimate", redundancy_estimate(&idx));
            let detail = format!(
                "{} integrated: {} = {}",
                self.name(l),
                self.sys.reg.func(f).name,
                self.show(&expr)
            );
            self.sys.substitute_function(f, expr);
            self.sys.mark_solved(l);
            return Ok(Some(detail));
        }
        Ok(None)
    }

    fn delete_redundant(&mut self) -> Option<String> {
        let active = self.sys.active();
        for (n, &a) in active.iter().enumerate() {
            for &b in &active[n + 1..] {
                let Some(q) = self.sys.value(b).ratio_to(self.sys.value(a)) else {
                    continue;
                };
                let mut s = LinExpr::symbol(L, b);
                s.add_term(Deriv::plain(a), Poly::constant(-q));
                let detail = format!("{} deleted as a multiple of {}", self.name(b), self.name(a));
                self.sys.delete(b, s);
                return Some(detail);
            }
        }
        let r = &self.sys.ranking;
        for s in self.sys.syzygies.clone() {
            let candidates = self.sys.algebraic_labels(&s);
            let lead = |l: usize| r.leading(self.sys.value(l)).map(|x| x.0);
            let pick = candidates
                .iter()
                .copied()
                .reduce(|a, b| match (lead(a), lead(b)) {
                    (Some(x), Some(y)) if r.cmp(&y, &x).is_gt() => b,
                    _ => a,
                });
            let Some(l) = pick else { continue };
            let detail = format!("{} deleted by syzygy 0 = {}", self.name(l), self.show(&s));
            self.sys.delete(l, s);
            return Some(detail);
        }
        None
    }

    fn note_integration(&mut self, rep: &IntegrationStepReport) -> String {
        for u in &rep.used_syzygies {
            let s = self.show(u);
            self.syzygies_used.push(s);
        }
        self.count("new_functions", rep.new_functions.len() as u64);
        let eqs: Vec<String> = rep
            .new_equations
            .iter()
            .map(|&l| format!("{} = {}", self.name(l), self.show(self.sys.value(l))))
            .collect();
        let mut detail = format!("new {}", eqs.join("; "));
        if !rep.deleted.is_empty() {
            let d: Vec<String> = rep.deleted.iter().map(|&l| self.name(l)).collect();
            detail.push_str(&format!("; deleted {}", d.join(", ")));
        }
        detail.push_str(&format!("; {}", rep.reason));
        detail
    }

    fn syzygy_integrate(&mut self) -> Result<Option<String>> {
        let nv = self.sys.reg.num_vars();
        let syzygies = self.sys.syzygies.clone();
        if syzygies.len() >= 3 {
            if let Some((cf, used)) = find_curl(&self.sys.reg, &syzygies) {
                let used: Vec<LinExpr> = used.iter().map(|&k| syzygies[k].clone()).collect();
                let key = format!(
                    "curl {:?}",
                    used.iter().map(|s| self.show(s)).collect::<Vec<_>>()
                );
                if !self.rejected.contains(&key) {
                    let mut trial = self.sys.clone();
                    match curl_integrate_step(&mut trial, &used, &cf) {
                        Ok(rep) if rep.useful && keeps_order(&self.sys, &used, &rep, &trial) => {
                            self.sys = trial;
                            let d = self.note_integration(&rep);
                            return Ok(Some(format!(
                                "curl of {} syzygies integrated: {d}",
                                used.len()
                            )));
                        }
                        _ => {
                            self.rejected.insert(key);
                        }
                    }
                }
            }
        }
        let cap = self.max_subset.unwrap_or(nv).min(nv);
        for size in 2..=cap {
            for s in &syzygies {
                let base = self.show(s);
                for sub in subsets(nv, size) {
                    let key = format!("{base} over {sub:?}");
                    if self.rejected.contains(&key) {
                        continue;
                    }
                    let Some(df) = divergence_decompose(&self.sys.reg, s, &sub) else {
                        continue;
                    };
                    let mut trial = self.sys.clone();
                    match integrate_step(&mut trial, s, &df) {
                        Ok(rep)
                            if rep.useful
                                && keeps_order(
                                    &self.sys,
                                    std::slice::from_ref(s),
                                    &rep,
                                    &trial,
                                ) =>
                        {
                            self.sys = trial;
                            let names: Vec<String> = sub
                                .iter()
                                .map(|&v| self.sys.reg.var_name(v).to_string())
                                .collect();
                            let d = self.note_integration(&rep);
                            return Ok(Some(format!(
                                "syzygy 0 = {base} integrated over {{{}}}: {d}",
                                names.join(",")
                            )));
                        }
                        _ => {
                            self.rejected.insert(key);
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    fn reduce_pair(&mut self) -> Result<Option<String>> {
        let active = self.sys.active();
        let r = self.sys.ranking.clone();
        for (ia, &a) in active.iter().enumerate() {
            for &b in &active[ia + 1..] {
                let (ea, eb) = (self.sys.record(a).eq.clone(), self.sys.record(b).eq.clone());
                let (Some((da, _)), Some((db, _))) = (r.leading(&ea.value), r.leading(&eb.value))
                else {
                    continue;
                };
                if da.sym != db.sym {
                    continue;
                }
                let key = (self.show(&ea.value), self.show(&eb.value));
                if !self.tried_pairs.insert(key) {
                    continue;
                }
                let c = cross_differentiate(&self.sys.reg, &ea, &eb, &r)?;
                let basis = self.sys.active_equations();
                let nf = normal_form(&self.sys.reg, &c, &basis, &r);
                if nf.value.is_zero() {
                    if let Some(s) = harvest_syzygy(&nf) {
                        let shown = self.show(&s);
                        if self.sys.add_syzygy(s)? {
                            self.count("syzygies_found", 1);
                            return Ok(Some(format!(
                                "{} and {} give syzygy 0 = {shown}",
                                self.name(a),
                                self.name(b)
                            )));
                        }
                    }
                } else {
                    // a common factor x^k is divided out, the result then
                    // stands for itself
                    let (value, m) = strip_monomial(&nf.value);
                    let shown = self.show(&value);
                    let l = if m.is_zero() {
                        self.sys.add_derived(nf)
                    } else {
                        self.sys.add_base(value)
                    };
                    return Ok(Some(format!(
                        "{} and {} give {} = {shown}",
                        self.name(a),
                        self.name(b),
                        self.name(l)
                    )));
                }
            }
        }
        Ok(None)
    }

    /// Reduce one active equation by the others.
    fn eliminate(&mut self) -> Result<Option<String>> {
        let r = self.sys.ranking.clone();
        for l in self.sys.active() {
            let rec = self.sys.record(l).clone();
            let others: Vec<Equation> = self
                .sys
                .records
                .iter()
                .filter(|o| o.status == Status::Active && o.label != l)
                .map(|o| o.eq.clone())
                .collect();
            let refs: Vec<&Equation> = others.iter().collect();
            let nf = normal_form(&self.sys.reg, &rec.eq, &refs, &r);
            if nf.value == rec.eq.value {
                continue;
            }
            if !rec.base {
                self.sys
                    .records
                    .iter_mut()
                    .find(|o| o.label == l)
                    .unwrap()
                    .eq = nf;
                return Ok(Some(format!(
                    "{} reduced to {}",
                    self.name(l),
                    self.show(&self.sys.value(l).clone())
                )));
            }
            // nf.history = c*l + rest with rest free of l
            let c = nf
                .history
                .coefficient(&Deriv::plain(l))
                .and_then(|p| p.constant_value());
            let rest = nf.history.restrict(|d| d.sym != l);
            let Some(c) = c.filter(|_| !rest.contains_symbol(l)) else {
                continue;
            };
            if nf.value.is_zero() {
                let detail = format!("{} reduces to zero", self.name(l));
                self.sys.delete(l, nf.history.clone());
                return Ok(Some(detail));
            }
            let shown = self.show(&nf.value);
            let nl = self.sys.add_base(nf.value.clone());
            let expr = (&LinExpr::symbol(L, nl) - &rest).scale_q(&c.recip());
            self.sys.supersede(l, &expr);
            return Ok(Some(format!(
                "{} reduced to {} = {shown}",
                self.name(l),
                self.name(nl)
            )));
        }
        Ok(None)
    }
}

/// Solve a system file and return the report with the step trace.
/// An integration may not raise the order in the old functions: the new
/// equations stay within the order of the equations they delete or, if none
/// is deleted, of the equations in the syzygies.
fn keeps_order(
    before: &System,
    used: &[LinExpr],
    rep: &IntegrationStepReport,
    after: &System,
) -> bool {
    let funcs = before.reg.num_funcs();
    let order = |e: &LinExpr| e.restrict(|d| d.sym < funcs).order();
    let new = rep
        .new_equations
        .iter()
        .map(|&l| order(after.value(l)))
        .max()
        .unwrap_or(0);
    let bound = if rep.deleted.is_empty() {
        used.iter()
            .flat_map(|s| s.symbols())
            .map(|l| order(before.value(l)))
            .max()
    } else {
        rep.deleted.iter().map(|&l| order(before.value(l))).min()
    };
    // a rescaled copy of a deleted equation in the input functions is no progress
    let input = |e: &LinExpr| e.restrict(|d| after.reg.func(d.sym).origin == Origin::Original);
    let renamed = rep.new_equations.iter().any(|&n| {
        let a = input(after.value(n));
        rep.deleted
            .iter()
            .any(|&l| a.ratio_to(&input(before.value(l))).is_some())
    });
    !renamed && bound.is_some_and(|b| new <= b)
}

pub fn solve(file: &SystemFile, opts: &SolveOptions) -> Result<(SolutionReport, Vec<TraceEntry>)> {
    let mut s = Solver::from_file(file, opts)?;
    let report = s.run()?;
    Ok((report, s.trace))
}
