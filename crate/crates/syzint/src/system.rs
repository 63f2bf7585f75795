//! The equation store: values, histories, syzygies and the solution so far.

use serde::Serialize;

use crate::calculus::derivative_by;
use crate::expr::{fmt_linexpr, LinExpr, Namespace, Registry};
use crate::reduction::{evaluate_history, Equation, Modulus, Ranking};
use crate::{Error, Result};

const L: Namespace = Namespace::EquationLabels;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Active,
    /// Implied by the other equations through a syzygy.
    Deleted,
    /// Replaced by its integral or by separated pieces.
    Superseded,
    /// Used as the definition of a substituted function.
    Solved,
}

#[derive(Clone, Debug)]
pub struct Record {
    pub label: usize,
    pub eq: Equation,
    pub status: Status,
    /// Base equations stand for themselves in histories.
    pub base: bool,
}

/// `func = expr`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    pub func: usize,
    pub expr: LinExpr,
}

#[derive(Clone, Debug)]
pub struct System {
    pub reg: Registry,
    pub ranking: Ranking,
    pub records: Vec<Record>,
    pub syzygies: Vec<LinExpr>,
    /// Syzygies consumed by integration or used to delete an equation.
    pub archive: Vec<LinExpr>,
    pub solution: Vec<Substitution>,
    /// Input equations as given, for the final check.
    pub originals: Vec<LinExpr>,
}

/// Replace `f` by `expr` in `e`, expanding derivatives.
pub fn substitute_in(reg: &Registry, e: &LinExpr, f: usize, expr: &LinExpr) -> LinExpr {
    if !e.contains_symbol(f) {
        return e.clone();
    }
    let mut out = e.restrict(|d| d.sym != f);
    for (d, p) in e.terms().filter(|(d, _)| d.sym == f) {
        out.add_scaled(&derivative_by(reg, expr, &d.idx), p);
    }
    out
}

/// Replace label `l` by `expr` (both over labels).
pub fn replace_label(reg: &Registry, e: &LinExpr, l: usize, expr: &LinExpr) -> LinExpr {
    substitute_in(reg, e, l, expr)
}

impl System {
    pub fn new(reg: Registry, ranking: Ranking) -> Self {
        System {
            reg,
            ranking,
            records: Vec::new(),
            syzygies: Vec::new(),
            archive: Vec::new(),
            solution: Vec::new(),
            originals: Vec::new(),
        }
    }

    fn push(&mut self, label: usize, eq: Equation, base: bool) -> usize {
        self.records.push(Record {
            label,
            eq,
            status: Status::Active,
            base,
        });
        label
    }

    /// An input equation, optionally named.
    pub fn add_input(&mut self, name: Option<&str>, value: LinExpr) -> Result<usize> {
        if value.namespace() != Namespace::Functions {
            return Err(Error::NamespaceMismatch);
        }
        let label = match name {
            Some(n) => self.reg.add_label(n)?,
            None => self.reg.fresh_label(),
        };
        self.originals.push(value.clone());
        Ok(self.push(label, Equation::base(label, value), true))
    }

    /// A new equation that stands for itself in histories.
    pub fn add_base(&mut self, value: LinExpr) -> usize {
        let label = self.reg.fresh_label();
        self.push(label, Equation::base(label, value), true)
    }

    /// A consequence of other equations, carrying its history.
    pub fn add_derived(&mut self, eq: Equation) -> usize {
        let label = self.reg.fresh_label();
        self.push(label, eq, false)
    }

    pub fn record(&self, label: usize) -> &Record {
        self.records
            .iter()
            .find(|r| r.label == label)
            .expect("label belongs to the system")
    }

    fn record_mut(&mut self, label: usize) -> &mut Record {
        self.records
            .iter_mut()
            .find(|r| r.label == label)
            .expect("label belongs to the system")
    }

    pub fn value(&self, label: usize) -> &LinExpr {
        &self.record(label).eq.value
    }

    pub fn status(&self, label: usize) -> Status {
        self.record(label).status
    }

    pub fn is_active(&self, label: usize) -> bool {
        self.records
            .iter()
            .any(|r| r.label == label && r.status == Status::Active)
    }

    /// Labels of active equations in creation order.
    pub fn active(&self) -> Vec<usize> {
        self.records
            .iter()
            .filter(|r| r.status == Status::Active)
            .map(|r| r.label)
            .collect()
    }

    pub fn active_equations(&self) -> Vec<&Equation> {
        self.records
            .iter()
            .filter(|r| r.status == Status::Active)
            .map(|r| &r.eq)
            .collect()
    }

    /// Expand a label expression with the current values, whatever their status.
    pub fn evaluate(&self, e: &LinExpr) -> LinExpr {
        let lookup = |k: usize| self.value(k).clone();
        evaluate_history(&self.reg, e, &lookup)
    }

    /// Like [`System::evaluate`] but only active labels may occur.
    pub fn substitute_labels(&self, e: &LinExpr) -> Result<LinExpr> {
        if let Some(l) = e.symbols().into_iter().find(|&l| !self.is_active(l)) {
            return Err(Error::DeletedLabel(self.reg.label_name(l).to_string()));
        }
        Ok(self.evaluate(e))
    }

    pub fn show(&self, e: &LinExpr) -> String {
        fmt_linexpr(&self.reg, e)
    }

    /// Store a syzygy unless it is zero or already known up to sign.
    pub fn add_syzygy(&mut self, s: LinExpr) -> Result<bool> {
        if s.is_zero() {
            return Ok(false);
        }
        let check = self.evaluate(&s);
        if !check.is_zero() {
            return Err(Error::Reduction(format!(
                "identity {} does not vanish, leaves {}",
                self.show(&s),
                self.show(&check)
            )));
        }
        if self.syzygies.iter().any(|t| t.same_up_to_sign(&s)) {
            return Ok(false);
        }
        self.syzygies.push(s);
        Ok(true)
    }

    /// Rewrite label `l` as `expr` in syzygies and histories.
    pub fn replace_label(&mut self, l: usize, expr: &LinExpr) {
        let reg = &self.reg;
        let mut kept: Vec<LinExpr> = Vec::new();
        for s in self.syzygies.drain(..) {
            let t = replace_label(reg, &s, l, expr);
            if !t.is_zero() && !kept.iter().any(|k| k.same_up_to_sign(&t)) {
                kept.push(t);
            }
        }
        self.syzygies = kept;
        for r in &mut self.records {
            if r.eq.history.contains_symbol(l) && !(r.base && r.label == l) {
                r.eq.history = replace_label(reg, &r.eq.history, l, expr);
            }
        }
    }

    /// Active labels occurring in `s` only undifferentiated with a constant
    /// coefficient, so that `s` can be solved for them.
    pub fn algebraic_labels(&self, s: &LinExpr) -> Vec<usize> {
        s.terms()
            .filter(|(d, p)| {
                d.idx.is_zero()
                    && p.constant_value().is_some()
                    && self.is_active(d.sym)
                    && s.terms().filter(|(e, _)| e.sym == d.sym).count() == 1
            })
            .map(|(d, _)| d.sym)
            .collect()
    }

    /// Delete an equation implied by `syzygy`, which is solved for it.
    pub fn delete(&mut self, l: usize, syzygy: LinExpr) {
        let c = syzygy
            .coefficient(&crate::Deriv::plain(l))
            .and_then(|p| p.constant_value())
            .expect("label occurs with a constant coefficient");
        let rest = syzygy.restrict(|d| d.sym != l);
        debug_assert_eq!(rest.len() + 1, syzygy.len(), "label occurs once");
        let expr = rest.scale_q(&(-c.recip()));
        self.replace_label(l, &expr);
        self.record_mut(l).status = Status::Deleted;
        self.archive.push(syzygy);
    }

    /// `l` is replaced by `expr`, an expression in newer labels.
    pub fn supersede(&mut self, l: usize, expr: &LinExpr) {
        self.replace_label(l, expr);
        self.record_mut(l).status = Status::Superseded;
    }

    /// Substitute `f = expr` everywhere and record it.
    pub fn substitute_function(&mut self, f: usize, expr: LinExpr) {
        let reg = &self.reg;
        for r in &mut self.records {
            r.eq.value = substitute_in(reg, &r.eq.value, f, &expr);
        }
        for s in &mut self.solution {
            s.expr = substitute_in(reg, &s.expr, f, &expr);
        }
        self.solution.push(Substitution { func: f, expr });
    }

    /// Equation `l` became the definition of a substituted function.
    pub fn mark_solved(&mut self, l: usize) {
        debug_assert!(self.value(l).is_zero());
        self.replace_label(l, &LinExpr::zero(L));
        self.record_mut(l).status = Status::Solved;
    }

    /// Active equations with a zero value carry no information.
    pub fn drop_trivial(&mut self) -> Vec<usize> {
        let zero: Vec<usize> = self
            .records
            .iter()
            .filter(|r| r.status == Status::Active && r.eq.value.is_zero())
            .map(|r| r.label)
            .collect();
        for &l in &zero {
            self.mark_solved(l);
        }
        zero
    }

    /// Every history expands to its value.
    pub fn histories_consistent(&self) -> bool {
        self.records
            .iter()
            .all(|r| self.evaluate(&r.eq.history) == r.eq.value)
    }

    /// Original equations with the solution substituted, reduced by the
    /// remaining equations. All zero when the solution is right.
    pub fn oracle_residuals(&self) -> Vec<LinExpr> {
        let values: Vec<LinExpr> = self
            .active_equations()
            .into_iter()
            .map(|e| e.value.clone())
            .collect();
        let modulus = Modulus::new(&self.reg, &values, &self.ranking);
        self.originals
            .iter()
            .map(|o| {
                let mut v = o.clone();
                for s in &self.solution {
                    v = substitute_in(&self.reg, &v, s.func, &s.expr);
                }
                modulus.residual(&v)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::term;
    use crate::expr::{MultiIndex, Origin, Poly};
    use crate::reduction::RankingKind;

    const F: Namespace = Namespace::Functions;

    #[test]
    fn substitution_reaches_every_value() {
        let mut reg = Registry::with_vars(&["x", "y"]);
        let f = reg.add_function("f", &[0, 1], Origin::Original).unwrap();
        let g = reg.add_function("g", &[1], Origin::Integration).unwrap();
        let r = Ranking::for_registry(RankingKind::TotalDegree, &reg);
        let mut sys = System::new(reg, r);
        let e1 = sys
            .add_input(
                Some("e1"),
                term(F, f, MultiIndex::from_vars(&[0, 0]), Poly::one()),
            )
            .unwrap();
        // f = x g
        sys.substitute_function(f, term(F, g, MultiIndex::zero(), Poly::var(0)));
        assert!(sys.value(e1).is_zero());
        sys.mark_solved(e1);
        assert!(sys.active().is_empty());
        assert!(sys.oracle_residuals().iter().all(|r| r.is_zero()));
        assert!(sys.histories_consistent());
    }

    #[test]
    fn bogus_syzygy_is_rejected() {
        let mut reg = Registry::with_vars(&["x"]);
        let f = reg.add_function("f", &[0], Origin::Original).unwrap();
        let r = Ranking::for_registry(RankingKind::TotalDegree, &reg);
        let mut sys = System::new(reg, r);
        let e = sys.add_input(None, LinExpr::symbol(F, f)).unwrap();
        assert!(sys.add_syzygy(LinExpr::symbol(L, e)).is_err());
        assert!(!sys.add_syzygy(LinExpr::zero(L)).unwrap());
    }
}
