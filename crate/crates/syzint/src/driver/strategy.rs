use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Separate,
    Substitute,
    SingleIntegrate,
    Eliminate,
    DeleteRedundant,
    SyzygyIntegrate,
    ConventionalIntegrate,
    ReducePair,
    AnyIntegrate,
}

impl Action {
    pub const ALL: [Action; 9] = [
        Action::Separate,
        Action::Substitute,
        Action::SingleIntegrate,
        Action::Eliminate,
        Action::DeleteRedundant,
        Action::SyzygyIntegrate,
        Action::ConventionalIntegrate,
        Action::ReducePair,
        Action::AnyIntegrate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Action::Separate => "separate",
            Action::Substitute => "substitute",
            Action::SingleIntegrate => "single_integrate",
            Action::Eliminate => "eliminate",
            Action::DeleteRedundant => "delete_redundant",
            Action::SyzygyIntegrate => "syzygy_integrate",
            Action::ConventionalIntegrate => "conventional_integrate",
            Action::ReducePair => "reduce_pair",
            Action::AnyIntegrate => "any_integrate",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Action::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown action `{s}`")))
    }
}

/// Actions tried in order; the first that applies wins each step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy(pub Vec<Action>);

impl Strategy {
    /// Syzygy integration first, conventional integration as a last resort.
    pub fn syzygy() -> Strategy {
        use Action::*;
        Strategy(vec![
            Separate,
            Substitute,
            DeleteRedundant,
            SyzygyIntegrate,
            ReducePair,
            SingleIntegrate,
            ConventionalIntegrate,
        ])
    }

    pub fn conventional() -> Strategy {
        use Action::*;
        Strategy(vec![
            Separate,
            SingleIntegrate,
            Substitute,
            ConventionalIntegrate,
            AnyIntegrate,
        ])
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// `syzygy`, `conventional` or a comma separated list of actions.
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "syzygy" => return Ok(Strategy::syzygy()),
            "conventional" => return Ok(Strategy::conventional()),
            _ => {}
        }
        let actions = s
            .split(',')
            .map(|a| a.trim())
            .filter(|a| !a.is_empty())
            .map(Action::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        if actions.is_empty() {
            return Err(Error::Input("empty strategy".into()));
        }
        Ok(Strategy(actions))
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.0.iter().map(|a| a.name()).collect();
        f.write_str(&names.join(","))
    }
}
