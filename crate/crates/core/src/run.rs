//! Runs one solver on a scenario together with its oracle checks.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::control::{
    build_activation_game, check_control_problem, solve_backward_induction, verify_prop3, ControlProblemReport, InitialAgent,
    Prop3Report, StrategyProfile,
};
use crate::equilibrium::{check_prop1, solve_jungle_equilibrium, EquilibriumResult, Holder, Prop1Check};
use crate::error::SolveError;
use crate::io::Cell;
use crate::model::{FunctionDescriptor, Scenario};
use crate::optimize::{
    optimize_power, optimize_technology, simulate_accumulation_path, PathResult, PowerOptions, PowerSolution, TechnologySolution,
};
use crate::oracle;

/// Slack allowed when a solver is compared against a grid oracle.
const ORACLE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Equilibrium,
    Tech,
    Power,
    Path,
    Control,
    Game,
}

impl Command {
    pub const ALL: [Command; 6] = [Command::Equilibrium, Command::Tech, Command::Power, Command::Path, Command::Control, Command::Game];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::Tech => "tech",
            Command::Power => "power",
            Command::Path => "path",
            Command::Control => "control",
            Command::Game => "game",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandResult {
    Equilibrium { equilibrium: EquilibriumResult, prop1: Prop1Check },
    Tech(TechnologySolution),
    Power(PowerSolution),
    Path(PathResult),
    Control(ControlProblemReport),
    Game { profile: StrategyProfile, prop3: Prop3Report },
}

impl CommandResult {
    /// Values for the summary CSV columns this result fills.
    pub fn summary(&self) -> Vec<(&'static str, Cell)> {
        match self {
            CommandResult::Equilibrium { prop1, .. } => vec![
                ("prop1_premises", Cell::Bool(prop1.premises_hold)),
                ("prop1_conclusion", Cell::Bool(prop1.conclusion_holds)),
                ("ai_holding", Cell::Real(prop1.ai_holding)),
            ],
            CommandResult::Tech(t) => vec![("theta_star", Cell::Real(t.theta_star)), ("tech_net", Cell::Real(t.net))],
            CommandResult::Power(p) => vec![
                ("y_star", Cell::Real(p.y_star)),
                ("net_resources", Cell::Real(p.net_resources)),
                ("condition_verdict", Cell::Tag(p.condition_verdict.to_string())),
            ],
            CommandResult::Path(p) => {
                let mut cells = vec![("path_feasible", Cell::Bool(p.feasible))];
                if let Some(k) = p.first_failure {
                    cells.push(("path_first_failure", Cell::Int(k)));
                }
                cells
            }
            CommandResult::Control(c) => vec![("control_problem", Cell::Bool(c.control_problem))],
            CommandResult::Game { prop3, .. } => vec![("prop3_holds", Cell::Bool(prop3.holds))],
        }
    }

    /// The solver reports an infeasibility or a violated property.
    pub fn is_violation(&self) -> bool {
        match self {
            CommandResult::Equilibrium { equilibrium, prop1 } => !equilibrium.certified || !prop1.consistent(),
            CommandResult::Path(p) => !p.feasible,
            CommandResult::Game { profile, prop3 } => !prop3.holds || !profile.equilibrium,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub result: CommandResult,
    pub certification: BTreeMap<String, bool>,
}

impl RunOutcome {
    pub fn certified(&self) -> bool {
        self.certification.values().all(|&ok| ok)
    }

    /// Exit status of the command: infeasible, violated or uncertified.
    pub fn failed(&self) -> bool {
        self.result.is_violation() || !self.certified()
    }
}

fn ai_utility(s: &Scenario) -> FunctionDescriptor {
    s.ai.as_ref().map_or_else(|| FunctionDescriptor::linear(1.0), |ai| ai.utility.clone())
}

fn power(s: &Scenario) -> Result<RunOutcome, SolveError> {
    let f = &s.endowment;
    let c = s.require_power_cost()?;
    let opts = PowerOptions { root_tol: s.root_tol(), ..PowerOptions::default() };
    let sol = optimize_power(f, c, &ai_utility(s), opts)?;
    let mut cert = BTreeMap::new();
    if !sol.satiated {
        let (_, best) = oracle::power_argmax(f, c, oracle::GRID_POINTS);
        let agrees = if sol.acquires_power { sol.net_resources >= best - ORACLE_SLACK } else { best < ORACLE_SLACK };
        cert.insert("grid_oracle".into(), agrees);
        if sol.condition_verdict.any() {
            cert.insert("full_power".into(), sol.y_star >= 1.0 - 1.0 / (opts.grid_points - 1) as f64);
        }
    }
    Ok(RunOutcome { result: CommandResult::Power(sol), certification: cert })
}

/// Runs `command` on a validated scenario.
pub fn run(command: Command, s: &Scenario) -> Result<RunOutcome, SolveError> {
    let tol = s.root_tol();
    let mut cert = BTreeMap::new();
    let result = match command {
        Command::Equilibrium => {
            let eq = solve_jungle_equilibrium(s)?;
            let prop1 = check_prop1(s);
            cert.insert("no_improving_seizure".into(), oracle::improving_seizure(s, &eq.allocation).is_none());
            cert.insert("feasible".into(), eq.allocation.is_feasible(s.total_resources()));
            if s.ai.is_some() {
                cert.insert("ai_holding".into(), (eq.allocation.get(Holder::Ai) - prop1.ai_holding).abs() <= tol);
            }
            CommandResult::Equilibrium { equilibrium: eq, prop1 }
        }
        Command::Tech => {
            let r = s.require_technology()?;
            let total = s.total_resources();
            let sol = optimize_technology(r, total, tol)?;
            let (_, best) = oracle::technology_argmax(r, total, oracle::GRID_POINTS);
            cert.insert("grid_oracle".into(), sol.net >= best - ORACLE_SLACK);
            CommandResult::Tech(sol)
        }
        Command::Power => return power(s),
        Command::Path => {
            let c = s.require_power_cost()?;
            let (dy, kappa) = (s.tolerances.dy, s.kappa()?);
            let p = simulate_accumulation_path(&s.endowment, c, s.path.y_target, dy, kappa, tol)?;
            let expected = oracle::path_first_failure(&s.endowment, c, s.path.y_target, dy, kappa, tol);
            cert.insert("step_oracle".into(), expected == p.first_failure);
            CommandResult::Path(p)
        }
        Command::Control => {
            let ai = s.require_ai()?;
            let settings = s.control.as_ref().ok_or(SolveError::MissingField("control"))?;
            let utility = settings.initial_utility.clone().unwrap_or_else(|| s.human_utility.clone());
            let report = check_control_problem(&InitialAgent::human(settings.initial_strength, utility), ai, s);
            let all = report.cond_interests_differ && report.cond_resources_exceed && report.cond_power_exceeds;
            cert.insert("conjunction".into(), report.control_problem == all);
            CommandResult::Control(report)
        }
        Command::Game if s.integrated_ai => return power(s),
        Command::Game => {
            let settings = s.game.as_ref().ok_or(SolveError::MissingField("game"))?;
            let g = build_activation_game(settings.payoffs, settings.depth)?;
            let profile = solve_backward_induction(&g);
            let prop3 = verify_prop3(&[settings.payoffs], settings.depth)?;
            if g.len() <= 12 {
                let best = oracle::enumerate_game(&g).best;
                let agrees = best.is_some_and(|b| b.active == profile.active && b.payoffs == profile.payoffs);
                cert.insert("enumeration".into(), agrees);
            }
            CommandResult::Game { profile, prop3 }
        }
    };
    Ok(RunOutcome { result, certification: cert })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::PayoffParams;
    use crate::model::GameSettings;

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.as_str().parse::<Command>().unwrap(), c);
        }
        assert!("sweep".parse::<Command>().is_err());
    }

    #[test]
    fn power_run_is_certified() {
        let mut s = Scenario::new(FunctionDescriptor::constant(1.0));
        s.power_cost = Some(FunctionDescriptor::quadratic(1.0));
        let out = run(Command::Power, &s).unwrap();
        assert!(out.certified() && !out.failed());
        match out.result {
            CommandResult::Power(p) => assert!((p.y_star - 0.5).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_sections_are_named() {
        let s = Scenario::new(FunctionDescriptor::constant(1.0));
        assert_eq!(run(Command::Power, &s).unwrap_err(), SolveError::MissingField("power_cost"));
        assert_eq!(run(Command::Game, &s).unwrap_err(), SolveError::MissingField("game"));
    }

    #[test]
    fn integrated_ai_game_is_a_power_problem() {
        let mut s = Scenario::new(FunctionDescriptor::constant(1.0));
        s.power_cost = Some(FunctionDescriptor::quadratic(0.25));
        s.game = Some(GameSettings { depth: 2, payoffs: PayoffParams::default() });
        s.integrated_ai = true;
        assert!(matches!(run(Command::Game, &s).unwrap().result, CommandResult::Power(p) if p.y_star == 1.0));
    }
}
