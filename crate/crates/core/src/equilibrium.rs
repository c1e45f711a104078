//! Jungle equilibrium: allocation by power order.
//!
//! Agents act from strongest to weakest. Each one seizes resources from the
//! free pool and then from strictly weaker agents (weakest first) until it is
//! satiated or nothing weaker is left. Appropriation is costless and agents
//! never pool strength.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::SolveError;
use crate::model::{FunctionDescriptor, Satiation, Scenario};

/// Relative tolerance on `Σ holdings = X`.
pub const FEASIBILITY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Holder {
    /// Resources held by nobody; weaker than every agent.
    Pool,
    Human(u32),
    Ai,
}

impl fmt::Display for Holder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Holder::Pool => f.write_str("pool"),
            Holder::Human(id) => write!(f, "human:{id}"),
            Holder::Ai => f.write_str("ai"),
        }
    }
}

impl FromStr for Holder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pool" => Ok(Holder::Pool),
            "ai" => Ok(Holder::Ai),
            _ => s
                .strip_prefix("human:")
                .and_then(|id| id.parse().ok())
                .map(Holder::Human)
                .ok_or_else(|| format!("unknown holder `{s}`")),
        }
    }
}

impl Serialize for Holder {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Holder {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Holding {
    pub holder: Holder,
    /// `None` for the free pool.
    pub strength: Option<f64>,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transfer {
    pub taker: Holder,
    pub victim: Holder,
    pub amount: f64,
    /// Share of the victim's holding taken, in `(0, 1]`.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Allocation {
    /// Ascending strength, free pool first.
    pub holdings: Vec<Holding>,
    pub appropriations: Vec<Transfer>,
}

impl Allocation {
    pub fn total(&self) -> f64 {
        self.holdings.iter().map(|h| h.amount).sum()
    }

    pub fn get(&self, holder: Holder) -> f64 {
        self.holdings.iter().find(|h| h.holder == holder).map_or(0.0, |h| h.amount)
    }

    /// `(strength, amount)` for every agent, ascending strength.
    pub fn by_strength(&self) -> Vec<(f64, f64)> {
        self.holdings.iter().filter_map(|h| h.strength.map(|s| (s, h.amount))).collect()
    }

    pub fn is_feasible(&self, total: f64) -> bool {
        self.holdings.iter().all(|h| h.amount >= 0.0)
            && (self.total() - total).abs() <= FEASIBILITY_RTOL * total.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub allocation: Allocation,
    pub satiated: Vec<Holder>,
    pub iterations: usize,
    /// No profitable deviation exists.
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deviation {
    pub agent: Holder,
    pub victim: Holder,
}

struct Participant<'a> {
    holder: Holder,
    strength: f64,
    utility: Option<&'a FunctionDescriptor>,
    holding: f64,
}

/// Pool plus every agent, ascending strength. Utilities are borrowed from
/// the scenario or from `humans`.
fn participants<'a>(
    s: &'a Scenario,
    humans: &'a [crate::model::AgentSpec],
) -> Result<Vec<Participant<'a>>, SolveError> {
    let mut out = Vec::with_capacity(humans.len() + 2);
    out.push(Participant { holder: Holder::Pool, strength: f64::NEG_INFINITY, utility: None, holding: s.free_pool });
    for h in humans {
        out.push(Participant {
            holder: Holder::Human(h.id),
            strength: h.strength,
            utility: Some(&h.utility),
            holding: h.endowment,
        });
    }
    if let Some(ai) = &s.ai {
        if humans.iter().any(|h| h.strength == ai.strength) {
            return Err(SolveError::StrengthTie { strength: ai.strength });
        }
        out.push(Participant { holder: Holder::Ai, strength: ai.strength, utility: Some(&ai.utility), holding: 0.0 });
    }
    out.sort_by(|a, b| a.strength.total_cmp(&b.strength));
    Ok(out)
}

fn unmet_demand(utility: &FunctionDescriptor, holding: f64, tol: f64) -> f64 {
    match utility.satiation_point(tol) {
        Satiation::Finite(cap) => cap - holding,
        Satiation::Infinite => f64::INFINITY,
    }
}

pub fn solve_jungle_equilibrium(s: &Scenario) -> Result<EquilibriumResult, SolveError> {
    let tol = s.root_tol();
    let humans = s.humans();
    let mut agents = participants(s, &humans)?;
    let mut appropriations = Vec::new();
    let mut satiated = Vec::new();

    for idx in (1..agents.len()).rev() {
        let utility = agents[idx].utility.expect("agents carry utilities");
        let mut demand = unmet_demand(utility, agents[idx].holding, tol);
        for victim in 0..idx {
            if demand <= tol {
                break;
            }
            let available = agents[victim].holding;
            if available <= 0.0 {
                continue;
            }
            let take = demand.min(available);
            let fraction = if take >= available { 1.0 } else { take / available };
            agents[victim].holding = if take >= available { 0.0 } else { available - take };
            agents[idx].holding += take;
            demand -= take;
            appropriations.push(Transfer {
                taker: agents[idx].holder,
                victim: agents[victim].holder,
                amount: take,
                fraction,
            });
        }
        if demand <= tol {
            satiated.push(agents[idx].holder);
        }
    }

    let allocation = Allocation {
        holdings: agents
            .iter()
            .map(|p| Holding {
                holder: p.holder,
                strength: p.strength.is_finite().then_some(p.strength),
                amount: p.holding,
            })
            .collect(),
        appropriations,
    };
    let iterations = allocation.appropriations.len();
    let certified = find_profitable_deviation(s, &allocation)?.is_none();
    Ok(EquilibriumResult { allocation, satiated, iterations, certified })
}

/// First agent, by descending strength, that would gain from seizing part of
/// a strictly weaker holding; the reported victim is the weakest one holding
/// anything.
pub fn find_profitable_deviation(s: &Scenario, a: &Allocation) -> Result<Option<Deviation>, SolveError> {
    let tol = s.root_tol();
    let humans = s.humans();
    let mut agents = participants(s, &humans)?;
    let held: HashMap<Holder, f64> = a.holdings.iter().map(|h| (h.holder, h.amount)).collect();
    for p in agents.iter_mut() {
        p.holding = held.get(&p.holder).copied().unwrap_or(0.0);
    }
    for idx in (1..agents.len()).rev() {
        let utility = agents[idx].utility.expect("agents carry utilities");
        if unmet_demand(utility, agents[idx].holding, tol) <= tol {
            continue;
        }
        if let Some(v) = agents[..idx].iter().find(|v| v.holding > tol && v.strength < agents[idx].strength) {
            return Ok(Some(Deviation { agent: agents[idx].holder, victim: v.holder }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Check {
    /// The AI is stronger than every human.
    pub stronger_than_all: bool,
    /// `π_A'(X) > root_tol`.
    pub wants_more_at_total: bool,
    pub premises_hold: bool,
    /// The equilibrium hands the AI all of `X`.
    pub conclusion_holds: bool,
    pub ai_holding: f64,
    pub total: f64,
}

impl Prop1Check {
    /// Premises imply the conclusion.
    pub fn consistent(&self) -> bool {
        !self.premises_hold || self.conclusion_holds
    }
}

/// Evaluates both sides of the full-appropriation result on one scenario.
pub fn check_prop1(s: &Scenario) -> Prop1Check {
    let total = s.total_resources();
    let Some(ai) = &s.ai else {
        return Prop1Check {
            stronger_than_all: false,
            wants_more_at_total: false,
            premises_hold: false,
            conclusion_holds: false,
            ai_holding: 0.0,
            total,
        };
    };
    let max_human = s.humans().iter().map(|h| h.strength).fold(f64::NEG_INFINITY, f64::max);
    let stronger_than_all = ai.strength > max_human;
    let wants_more_at_total = ai.utility.derivative(total).map(|d| d.value > s.root_tol()).unwrap_or(false);
    let ai_holding = solve_jungle_equilibrium(s).map(|r| r.allocation.get(Holder::Ai)).unwrap_or(0.0);
    let conclusion_holds = (ai_holding - total).abs() <= FEASIBILITY_RTOL * total.abs().max(1.0);
    Prop1Check {
        stronger_than_all,
        wants_more_at_total,
        premises_hold: stronger_than_all && wants_more_at_total,
        conclusion_holds,
        ai_holding,
        total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AISpec, AgentSpec, AiKind};

    fn capped(cap: f64) -> FunctionDescriptor {
        FunctionDescriptor::capped_linear(cap, 1.0)
    }

    fn three_humans() -> Scenario {
        let mut s = Scenario::new(FunctionDescriptor::constant(1.0));
        s.agents = Some(
            [(0.2, 2.0), (0.5, 0.5), (0.8, 1.5)]
                .iter()
                .enumerate()
                .map(|(i, &(strength, cap))| AgentSpec { id: i as u32, strength, endowment: 1.0, utility: capped(cap) })
                .collect(),
        );
        s
    }

    fn with_ai(mut s: Scenario, strength: f64, utility: FunctionDescriptor) -> Scenario {
        s.ai = Some(AISpec { strength, utility, theta: 0.0, kind: AiKind::Paperclip });
        s
    }

    #[test]
    fn strongest_takes_from_weakest_until_satiated() {
        let r = solve_jungle_equilibrium(&three_humans()).unwrap();
        assert_eq!(r.allocation.by_strength(), vec![(0.2, 0.5), (0.5, 1.0), (0.8, 1.5)]);
        assert!(r.certified);
        assert_eq!(r.allocation.appropriations.len(), 1);
        let t = &r.allocation.appropriations[0];
        assert_eq!((t.taker, t.victim, t.amount, t.fraction), (Holder::Human(2), Holder::Human(0), 0.5, 0.5));
    }

    #[test]
    fn unsatiable_ai_takes_everything() {
        let s = with_ai(three_humans(), 2.0, FunctionDescriptor::linear(1.0));
        let r = solve_jungle_equilibrium(&s).unwrap();
        assert_eq!(r.allocation.get(Holder::Ai), 3.0);
        assert!(r.allocation.by_strength()[..3].iter().all(|&(_, x)| x == 0.0));
        assert!(r.certified);
    }

    #[test]
    fn satiated_ai_leaves_the_rest_to_humans() {
        let s = with_ai(three_humans(), 2.0, capped(1.0));
        let r = solve_jungle_equilibrium(&s).unwrap();
        assert_eq!(r.allocation.get(Holder::Ai), 1.0);
        // AI empties the weakest; 0.8 then tops up to 1.5 from 0.5
        assert_eq!(r.allocation.by_strength(), vec![(0.2, 0.0), (0.5, 0.5), (0.8, 1.5), (2.0, 1.0)]);
        assert!(r.certified);
        assert!(r.allocation.is_feasible(3.0));
    }

    #[test]
    fn endowment_allocation_has_a_deviation() {
        let s = three_humans();
        let humans = s.humans();
        let endowed = Allocation {
            holdings: std::iter::once(Holding { holder: Holder::Pool, strength: None, amount: 0.0 })
                .chain(humans.iter().map(|h| Holding {
                    holder: Holder::Human(h.id),
                    strength: Some(h.strength),
                    amount: h.endowment,
                }))
                .collect(),
            appropriations: vec![],
        };
        let d = find_profitable_deviation(&s, &endowed).unwrap();
        assert_eq!(d, Some(Deviation { agent: Holder::Human(2), victim: Holder::Human(0) }));
    }

    #[test]
    fn satiated_endowments_have_no_deviation() {
        let mut s = three_humans();
        for a in s.agents.as_mut().unwrap() {
            a.utility = capped(0.5);
        }
        let r = solve_jungle_equilibrium(&s).unwrap();
        assert!(r.allocation.appropriations.is_empty());
        assert_eq!(find_profitable_deviation(&s, &r.allocation).unwrap(), None);
    }

    #[test]
    fn free_pool_is_claimed_first() {
        let mut s = three_humans();
        s.free_pool = 0.25;
        let r = solve_jungle_equilibrium(&s).unwrap();
        let first = &r.allocation.appropriations[0];
        assert_eq!((first.taker, first.victim, first.amount), (Holder::Human(2), Holder::Pool, 0.25));
        assert!(r.allocation.is_feasible(3.25));
        assert!(r.certified);
    }

    #[test]
    fn strength_tie_is_rejected() {
        let s = with_ai(three_humans(), 0.5, FunctionDescriptor::linear(1.0));
        assert_eq!(solve_jungle_equilibrium(&s).unwrap_err(), SolveError::StrengthTie { strength: 0.5 });
    }

    #[test]
    fn prop1_examples() {
        let c = check_prop1(&with_ai(three_humans(), 2.0, FunctionDescriptor::linear(1.0)));
        assert!(c.premises_hold && c.conclusion_holds);

        let weak = check_prop1(&with_ai(three_humans(), 0.5, FunctionDescriptor::linear(1.0)));
        assert!(!weak.premises_hold);
        assert!(!weak.stronger_than_all);

        let sated = check_prop1(&with_ai(three_humans(), 2.0, capped(1.5)));
        assert!(sated.stronger_than_all && !sated.wants_more_at_total && !sated.premises_hold);
        assert!(!sated.conclusion_holds);
    }

    #[test]
    fn holder_round_trips_as_string() {
        for h in [Holder::Pool, Holder::Ai, Holder::Human(17)] {
            let json = serde_json::to_string(&h).unwrap();
            assert_eq!(serde_json::from_str::<Holder>(&json).unwrap(), h);
        }
        assert!("human:x".parse::<Holder>().is_err());
    }
}
