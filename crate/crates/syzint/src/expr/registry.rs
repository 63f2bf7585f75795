use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::linexpr::Namespace;
use crate::Error;

/// Where an unknown function came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Original,
    Integration,
    DivintAuxiliary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuncSymbol {
    pub name: String,
    /// Sorted variable indices.
    pub deps: Vec<usize>,
    pub origin: Origin,
}

impl FuncSymbol {
    pub fn depends_on(&self, v: usize) -> bool {
        self.deps.binary_search(&v).is_ok()
    }
}

/// Session-wide names for variables, unknown functions and equation labels.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    vars: Vec<String>,
    funcs: Vec<FuncSymbol>,
    labels: Vec<String>,
    counters: HashMap<String, usize>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry with the given variables and no functions.
    pub fn with_vars(names: &[&str]) -> Self {
        let mut r = Self::new();
        for n in names {
            r.add_var(n).expect("distinct variable names");
        }
        r
    }

    fn name_taken(&self, name: &str) -> bool {
        self.vars.iter().any(|v| v == name)
            || self.funcs.iter().any(|f| f.name == name)
            || self.labels.iter().any(|l| l == name)
    }

    fn check_name(&self, name: &str) -> Result<(), Error> {
        let mut chars = name.chars();
        let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric());
        if !ok {
            return Err(Error::Registry(format!("invalid name `{name}`")));
        }
        if self.name_taken(name) {
            return Err(Error::Registry(format!("name `{name}` already in use")));
        }
        Ok(())
    }

    pub fn add_var(&mut self, name: &str) -> Result<usize, Error> {
        self.check_name(name)?;
        self.vars.push(name.to_string());
        Ok(self.vars.len() - 1)
    }

    pub fn add_function(
        &mut self,
        name: &str,
        deps: &[usize],
        origin: Origin,
    ) -> Result<usize, Error> {
        self.check_name(name)?;
        let mut deps = deps.to_vec();
        deps.sort_unstable();
        deps.dedup();
        if let Some(&bad) = deps.iter().find(|&&d| d >= self.vars.len()) {
            return Err(Error::Registry(format!("unknown variable index {bad}")));
        }
        self.funcs.push(FuncSymbol {
            name: name.to_string(),
            deps,
            origin,
        });
        Ok(self.funcs.len() - 1)
    }

    fn fresh_name(&mut self, prefix: &str) -> String {
        loop {
            let n = self.counters.entry(prefix.to_string()).or_insert(0);
            *n += 1;
            let name = format!("{prefix}{n}");
            if !self.name_taken(&name) {
                return name;
            }
        }
    }

    /// New function named `prefix1`, `prefix2`, ... skipping names in use.
    pub fn fresh_function(&mut self, prefix: &str, deps: &[usize], origin: Origin) -> usize {
        let name = self.fresh_name(prefix);
        self.add_function(&name, deps, origin)
            .expect("fresh names are valid and unused")
    }

    pub fn add_label(&mut self, name: &str) -> Result<usize, Error> {
        self.check_name(name)?;
        self.labels.push(name.to_string());
        Ok(self.labels.len() - 1)
    }

    pub fn fresh_label(&mut self) -> usize {
        let name = self.fresh_name("e");
        self.add_label(&name)
            .expect("fresh names are valid and unused")
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_funcs(&self) -> usize {
        self.funcs.len()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn var_name(&self, v: usize) -> &str {
        &self.vars[v]
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn func(&self, i: usize) -> &FuncSymbol {
        &self.funcs[i]
    }

    pub fn funcs(&self) -> &[FuncSymbol] {
        &self.funcs
    }

    pub fn function(&self, name: &str) -> Option<usize> {
        self.funcs.iter().position(|f| f.name == name)
    }

    pub fn label_name(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn label(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    /// Name of a symbol in either namespace.
    pub fn symbol_name(&self, ns: Namespace, sym: usize) -> &str {
        match ns {
            Namespace::Functions => &self.funcs[sym].name,
            Namespace::EquationLabels => &self.labels[sym],
        }
    }

    pub fn symbol(&self, ns: Namespace, name: &str) -> Option<usize> {
        match ns {
            Namespace::Functions => self.function(name),
            Namespace::EquationLabels => self.label(name),
        }
    }

    /// Equation labels stand for expressions in all variables.
    pub fn depends(&self, ns: Namespace, sym: usize, v: usize) -> bool {
        match ns {
            Namespace::Functions => self.funcs[sym].depends_on(v),
            Namespace::EquationLabels => true,
        }
    }

    pub fn deps(&self, ns: Namespace, sym: usize) -> BTreeSet<usize> {
        match ns {
            Namespace::Functions => self.funcs[sym].deps.iter().copied().collect(),
            Namespace::EquationLabels => (0..self.vars.len()).collect(),
        }
    }

    /// Variable precedence used by the default ranking: x, y, z, t first,
    /// then the remaining variables in registry order.
    pub fn default_precedence(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for name in ["x", "y", "z", "t"] {
            if let Some(v) = self.var(name) {
                out.push(v);
            }
        }
        for v in 0..self.vars.len() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }
}
