//! The golden scenario corpus and the oracle sweep run by `verify`.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::error::IoError;
use crate::io::{load_scenario, parse_scenario};
use crate::model::Scenario;
use crate::run::{run, Command};

macro_rules! golden {
    ($($name:literal),* $(,)?) => {
        /// Shipped scenario files, embedded at build time.
        pub const GOLDEN: &[(&str, &str)] = &[$(($name, include_str!(concat!("../scenarios/", $name)))),*];
    };
}

golden!(
    "c_positive_at_zero.json",
    "cheap_quadcost.json",
    "control_problem.json",
    "deep_game.json",
    "indifferent_game.json",
    "integrated_ai.json",
    "linear_cubic.json",
    "research_game.json",
    "small_grid_log.json",
    "sqrt_technology.json",
    "sqrt_technology_corner.json",
    "three_humans.json",
    "three_humans_ai.json",
    "three_humans_capped_ai.json",
    "uniform_quadcost.json",
);

pub fn golden(name: &str) -> Option<Scenario> {
    GOLDEN.iter().find(|(n, _)| *n == name).map(|(n, text)| parse_scenario(text, n, &[]).expect("golden scenario is valid"))
}

pub fn golden_all() -> Result<Vec<(String, Scenario)>, IoError> {
    GOLDEN.iter().map(|(n, text)| Ok((n.to_string(), parse_scenario(text, n, &[])?))).collect()
}

/// Every `*.json` scenario in a directory, by file name.
pub fn load_dir(dir: impl AsRef<Path>) -> Result<Vec<(String, Scenario)>, IoError> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|source| IoError::Read { path: dir.to_path_buf(), source })?;
    let mut paths: Vec<_> = entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "json")).collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| Ok((p.file_name().unwrap_or_default().to_string_lossy().into_owned(), load_scenario(&p)?)))
        .collect()
}

/// Commands a scenario carries enough data for.
pub fn applicable(s: &Scenario) -> Vec<Command> {
    let mut out = vec![Command::Equilibrium];
    if s.technology.is_some() {
        out.push(Command::Tech);
    }
    if s.power_cost.is_some() {
        out.extend([Command::Power, Command::Path]);
    }
    if s.ai.is_some() && s.control.is_some() {
        out.push(Command::Control);
    }
    if s.game.is_some() {
        out.push(Command::Game);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub scenario: String,
    pub command: Command,
    pub passed: bool,
    /// Failed oracle checks, or the solver error.
    pub detail: String,
}

/// Runs every applicable solver and compares it with its oracle. An
/// infeasible result is not a failure; disagreement with the oracle is.
pub fn verify_scenario(name: &str, s: &Scenario) -> Vec<Check> {
    applicable(s)
        .into_iter()
        .map(|command| {
            let (passed, detail) = match run(command, s) {
                Ok(out) => {
                    let failed: Vec<&str> = out.certification.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k.as_str()).collect();
                    (failed.is_empty(), failed.join(", "))
                }
                Err(e) => (false, e.to_string()),
            };
            Check { scenario: name.to_string(), command, passed, detail }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FunctionDescriptor;

    #[test]
    fn every_golden_file_loads() {
        assert_eq!(golden_all().unwrap().len(), GOLDEN.len());
    }

    #[test]
    fn uniform_quadcost_fixture() {
        let s = golden("uniform_quadcost.json").unwrap();
        assert_eq!(s.endowment, FunctionDescriptor::constant(1.0));
        assert_eq!(s.power_cost, Some(FunctionDescriptor::quadratic(1.0)));
    }

    #[test]
    fn corpus_passes_its_oracles() {
        for (name, s) in golden_all().unwrap() {
            for c in verify_scenario(&name, &s) {
                assert!(c.passed, "{name} {}: {}", c.command, c.detail);
            }
        }
    }
}
