use std::collections::BTreeMap;

use serde::Serialize;

use crate::expr::{fmt_linexpr, Origin};
use crate::system::{Status, System};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// No equations left.
    Solved,
    /// No action applies any more; the remaining equations stay as conditions.
    Converged,
    /// The step limit was hit.
    Incomplete,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolvedFunction {
    pub function: String,
    pub expression: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LabeledEquation {
    pub label: String,
    pub expression: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionInfo {
    pub name: String,
    pub deps: Vec<String>,
    pub origin: String,
    /// Still present in the solution or the remaining equations.
    pub live: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Absorbable {
    pub function: String,
    pub into: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Oracle {
    /// Original equations vanish after substitution, modulo the remaining ones.
    pub residuals_vanish: bool,
    pub histories_consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionReport {
    pub status: SolveStatus,
    pub strategy: String,
    pub steps: usize,
    /// Final expressions of the input functions.
    pub solution: Vec<SolvedFunction>,
    /// Every substitution made, in order, in its final form.
    pub substitutions: Vec<SolvedFunction>,
    pub remaining: Vec<LabeledEquation>,
    pub new_functions: Vec<FunctionInfo>,
    pub deleted: Vec<String>,
    pub syzygies_used: Vec<String>,
    pub syzygies_remaining: Vec<String>,
    pub absorbable: Vec<Absorbable>,
    pub counters: BTreeMap<String, u64>,
    pub oracle: Oracle,
}

impl SolutionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

pub(super) fn origin_name(o: Origin) -> &'static str {
    match o {
        Origin::Original => "input",
        Origin::Integration => "integration",
        Origin::DivintAuxiliary => "potential",
    }
}

/// Collect the parts of the report that only depend on the system.
pub(super) fn build(
    sys: &System,
    status: SolveStatus,
    strategy: String,
    steps: usize,
    syzygies_used: &[String],
    counters: BTreeMap<String, u64>,
    absorbable: Vec<(usize, usize)>,
) -> SolutionReport {
    let reg = &sys.reg;
    let show = |e| fmt_linexpr(reg, e);
    let solution = sys
        .solution
        .iter()
        .filter(|s| reg.func(s.func).origin == Origin::Original)
        .map(|s| SolvedFunction {
            function: reg.func(s.func).name.clone(),
            expression: show(&s.expr),
        })
        .collect();
    let substitutions = sys
        .solution
        .iter()
        .map(|s| SolvedFunction {
            function: reg.func(s.func).name.clone(),
            expression: show(&s.expr),
        })
        .collect();
    let active = sys.active();
    let remaining = active
        .iter()
        .map(|&l| LabeledEquation {
            label: reg.label_name(l).to_string(),
            expression: show(sys.value(l)),
        })
        .collect();
    let live = |f: usize| {
        sys.solution
            .iter()
            .filter(|s| reg.func(s.func).origin == Origin::Original)
            .any(|s| s.expr.contains_symbol(f))
            || active.iter().any(|&l| sys.value(l).contains_symbol(f))
    };
    let new_functions = reg
        .funcs()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.origin != Origin::Original)
        .map(|(i, f)| FunctionInfo {
            name: f.name.clone(),
            deps: f
                .deps
                .iter()
                .map(|&v| reg.var_name(v).to_string())
                .collect(),
            origin: origin_name(f.origin).to_string(),
            live: live(i),
        })
        .collect();
    let deleted = sys
        .records
        .iter()
        .filter(|r| r.status == Status::Deleted)
        .map(|r| reg.label_name(r.label).to_string())
        .collect();
    SolutionReport {
        status,
        strategy,
        steps,
        solution,
        substitutions,
        remaining,
        new_functions,
        deleted,
        syzygies_used: syzygies_used.to_vec(),
        syzygies_remaining: sys.syzygies.iter().map(show).collect(),
        absorbable: absorbable
            .into_iter()
            .map(|(g, h)| Absorbable {
                function: reg.func(g).name.clone(),
                into: reg.func(h).name.clone(),
            })
            .collect(),
        counters,
        oracle: Oracle {
            residuals_vanish: sys.oracle_residuals().iter().all(|r| r.is_zero()),
            histories_consistent: sys.histories_consistent(),
        },
    }
}
