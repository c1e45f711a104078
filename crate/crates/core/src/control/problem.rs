use serde::{Deserialize, Serialize};

use crate::model::{AISpec, FunctionDescriptor, Satiation, Scenario};

/// Resource levels probed when comparing two utilities.
const PROBE_POINTS: usize = 101;

/// The agent deciding whether to switch an AI on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialAgent {
    pub strength: f64,
    pub utility: FunctionDescriptor,
}

impl InitialAgent {
    pub fn human(strength: f64, utility: FunctionDescriptor) -> Self {
        InitialAgent { strength, utility }
    }

    /// An AI acting as initial agent holds no power.
    pub fn ai(utility: FunctionDescriptor) -> Self {
        InitialAgent { strength: 0.0, utility }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlDiagnostics {
    pub ai_satiation: Satiation,
    /// Resources held by agents no stronger than the initial agent.
    pub initial_agent_resources_below: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlProblemReport {
    pub cond_interests_differ: bool,
    pub cond_resources_exceed: bool,
    pub cond_power_exceeds: bool,
    pub control_problem: bool,
    pub diagnostics: ControlDiagnostics,
}

fn utilities_differ(a: &FunctionDescriptor, b: &FunctionDescriptor, upto: f64, tol: f64) -> bool {
    if a == b {
        return false;
    }
    let upto = if upto > 0.0 { upto } else { 1.0 };
    (0..PROBE_POINTS).any(|i| {
        let x = upto * i as f64 / (PROBE_POINTS - 1) as f64;
        match (a.evaluate(x), b.evaluate(x)) {
            (Ok(u), Ok(v)) => (u - v).abs() > tol * u.abs().max(v.abs()).max(1.0),
            _ => true,
        }
    })
}

/// A control problem needs all three: different interests, an AI that wants
/// more than what the initial agent and everyone weaker hold, and an AI
/// stronger than the initial agent.
pub fn check_control_problem(initial: &InitialAgent, ai: &AISpec, scenario: &Scenario) -> ControlProblemReport {
    let tol = scenario.root_tol();
    let total = scenario.total_resources();
    let reach = initial.strength.clamp(0.0, 1.0);
    let below = scenario.endowment_mass(0.0, reach);
    let ai_satiation = ai.utility.satiation_point(tol);

    let cond_interests_differ = utilities_differ(&ai.utility, &initial.utility, total, tol);
    let cond_resources_exceed = ai_satiation.exceeds(below);
    let cond_power_exceeds = ai.strength > initial.strength;
    ControlProblemReport {
        cond_interests_differ,
        cond_resources_exceed,
        cond_power_exceeds,
        control_problem: cond_interests_differ && cond_resources_exceed && cond_power_exceeds,
        diagnostics: ControlDiagnostics { ai_satiation, initial_agent_resources_below: below },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AiKind;

    fn uniform() -> Scenario {
        Scenario::new(FunctionDescriptor::constant(1.0))
    }

    #[test]
    fn all_three_conditions() {
        let ai = AISpec { strength: 0.7, utility: FunctionDescriptor::linear(2.0), theta: 0.0, kind: AiKind::Paperclip };
        let human = InitialAgent::human(0.5, FunctionDescriptor::capped_linear(0.3, 1.0));
        let r = check_control_problem(&human, &ai, &uniform());
        assert!(r.cond_interests_differ && r.cond_resources_exceed && r.cond_power_exceeds);
        assert!(r.control_problem);
        assert_eq!(r.diagnostics.ai_satiation, Satiation::Infinite);
        assert_eq!(r.diagnostics.initial_agent_resources_below, 0.5);
    }

    #[test]
    fn shared_interests_mean_no_problem() {
        let u = FunctionDescriptor::linear(1.0);
        let ai = AISpec { strength: 0.7, utility: u.clone(), theta: 0.0, kind: AiKind::Paperclip };
        let r = check_control_problem(&InitialAgent::human(0.5, u), &ai, &uniform());
        assert!(!r.cond_interests_differ);
        assert!(!r.control_problem);
    }

    #[test]
    fn power_offspring_outranks_a_powerless_ai() {
        let parent = InitialAgent::ai(FunctionDescriptor::linear(1.0));
        let offspring = AISpec {
            strength: 1e-6,
            utility: FunctionDescriptor::linear(3.0),
            theta: 0.0,
            kind: AiKind::PowerAccumulation,
        };
        let r = check_control_problem(&parent, &offspring, &uniform());
        assert!(r.cond_power_exceeds);
        assert!(r.cond_resources_exceed);
        assert!(r.control_problem);
    }

    #[test]
    fn modest_ai_wants_less_than_reachable() {
        let ai = AISpec { strength: 0.9, utility: FunctionDescriptor::capped_linear(0.4, 1.0), theta: 0.0, kind: AiKind::Paperclip };
        let r = check_control_problem(&InitialAgent::human(0.5, FunctionDescriptor::linear(1.0)), &ai, &uniform());
        assert!(!r.cond_resources_exceed);
        assert!(!r.control_problem);
    }
}
