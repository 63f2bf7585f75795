//! JSON system files.

use serde::{Deserialize, Serialize};

use super::parse::parse_expr;
use crate::expr::{fmt_linexpr, Namespace, Origin, Registry};
use crate::reduction::{Ranking, RankingKind};
use crate::system::System;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDecl {
    pub name: String,
    pub deps: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EquationDecl {
    Plain(String),
    Labeled { label: String, expr: String },
}

impl EquationDecl {
    pub fn expr(&self) -> &str {
        match self {
            EquationDecl::Plain(e) => e,
            EquationDecl::Labeled { expr, .. } => expr,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            EquationDecl::Plain(_) => None,
            EquationDecl::Labeled { label, .. } => Some(label),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_divergence_subset: Option<usize>,
}

impl Options {
    fn is_default(&self) -> bool {
        *self == Options::default()
    }
}

/// `0 = expr` for every listed equation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub variables: Vec<String>,
    pub functions: Vec<FunctionDecl>,
    pub equations: Vec<EquationDecl>,
    #[serde(default, skip_serializing_if = "Options::is_default")]
    pub options: Options,
}

pub fn parse_ranking(s: &str) -> Result<RankingKind> {
    match s {
        "total" | "total_degree" => Ok(RankingKind::TotalDegree),
        "lex" => Ok(RankingKind::Lex),
        _ => Err(Error::Input(format!("unknown ranking `{s}`"))),
    }
}

impl SystemFile {
    pub fn from_json(s: &str) -> Result<SystemFile> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn registry(&self) -> Result<Registry> {
        let mut reg = Registry::new();
        for v in &self.variables {
            reg.add_var(v)?;
        }
        for f in &self.functions {
            let deps = f
                .deps
                .iter()
                .map(|d| {
                    reg.var(d)
                        .ok_or_else(|| Error::Input(format!("{}: unknown variable `{d}`", f.name)))
                })
                .collect::<Result<Vec<_>>>()?;
            reg.add_function(&f.name, &deps, Origin::Original)?;
        }
        Ok(reg)
    }

    /// The equation store, with the ranking named in the options unless
    /// `ranking` overrides it.
    pub fn build(&self, ranking: Option<RankingKind>) -> Result<System> {
        let reg = self.registry()?;
        let kind = match (ranking, &self.options.ranking) {
            (Some(k), _) => k,
            (None, Some(s)) => parse_ranking(s)?,
            (None, None) => RankingKind::default(),
        };
        let values = self
            .equations
            .iter()
            .enumerate()
            .map(|(n, e)| {
                parse_expr(&reg, Namespace::Functions, e.expr()).map_err(|err| match err {
                    Error::Parse { line, column, msg } => Error::Parse {
                        line,
                        column,
                        msg: format!("equation {}: {msg}", n + 1),
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let ranking = Ranking::for_registry(kind, &reg);
        let mut sys = System::new(reg, ranking);
        for (e, v) in self.equations.iter().zip(values) {
            sys.add_input(e.label(), v)?;
        }
        Ok(sys)
    }

    /// Same system with every expression in printed form.
    pub fn canonical(&self) -> Result<SystemFile> {
        let sys = self.build(None)?;
        let equations = self
            .equations
            .iter()
            .zip(&sys.originals)
            .map(|(e, v)| {
                let expr = fmt_linexpr(&sys.reg, v);
                match e.label() {
                    Some(l) => EquationDecl::Labeled {
                        label: l.to_string(),
                        expr,
                    },
                    None => EquationDecl::Plain(expr),
                }
            })
            .collect();
        Ok(SystemFile {
            equations,
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INTRO: &str = r#"{
        "variables": ["x", "y", "z"],
        "functions": [{"name": "f", "deps": ["x", "y", "z"]}],
        "equations": [{"label": "e1", "expr": "f_zyz"}, "f_z + f_xx"]
    }"#;

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let file = SystemFile::from_json(INTRO).unwrap();
        let c = file.canonical().unwrap();
        assert_eq!(c.equations[0].expr(), "f_yzz");
        assert_eq!(c.equations[1].expr(), "f_xx + f_z");
        let again = SystemFile::from_json(&c.to_json()).unwrap();
        assert_eq!(again.canonical().unwrap(), c);
    }

    #[test]
    fn errors_name_the_equation() {
        let mut file = SystemFile::from_json(INTRO).unwrap();
        file.equations.push(EquationDecl::Plain("f_x^2".into()));
        let msg = file.build(None).unwrap_err().to_string();
        assert!(msg.contains("equation 3"), "{msg}");
        assert!(SystemFile::from_json(r#"{"variables": []}"#).is_err());
    }
}
