use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::SolveError;
use crate::model::AiKind;

/// Default cap on the number of AI nodes in a game tree.
pub const NODE_BUDGET: usize = 4096;

/// Payoff parameters of the activation game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffParams {
    pub paperclips_base: f64,
    pub paperclips_with_research: f64,
    pub research_reward_with_resources: f64,
    #[serde(default)]
    pub research_reward_without: f64,
    pub power_payoff_scale: f64,
}

impl Default for PayoffParams {
    fn default() -> Self {
        PayoffParams {
            paperclips_base: 1.0,
            paperclips_with_research: 1.5,
            research_reward_with_resources: 1.0,
            research_reward_without: 0.0,
            power_payoff_scale: 1.0,
        }
    }
}

impl PayoffParams {
    fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("paperclips_base", self.paperclips_base),
            ("paperclips_with_research", self.paperclips_with_research),
            ("research_reward_with_resources", self.research_reward_with_resources),
            ("research_reward_without", self.research_reward_without),
            ("power_payoff_scale", self.power_payoff_scale),
        ]
    }

    pub fn check_nonnegative(&self) -> Result<(), String> {
        for (name, v) in self.named() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("{name} must be a finite nonnegative number, got {v}"));
            }
        }
        Ok(())
    }

    /// Why this parameterization falls outside the modeling premises, if it
    /// does. Power activation must take resources away from the activators.
    pub fn premise_violation(&self) -> Option<String> {
        if let Err(e) = self.check_nonnegative() {
            return Some(e);
        }
        if self.power_payoff_scale <= 0.0 {
            return Some("power_payoff_scale = 0: an activated power node appropriates nothing, so activation is payoff-irrelevant".into());
        }
        if self.research_reward_without > self.research_reward_with_resources {
            return Some(format!(
                "research_reward_without ({}) exceeds research_reward_with_resources ({}): power activation would not withhold resources",
                self.research_reward_without, self.research_reward_with_resources
            ));
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    None,
    ActivateResearch,
    ActivatePower,
    ActivateBoth,
}

impl Action {
    pub fn activations(self) -> usize {
        match self {
            Action::None => 0,
            Action::ActivateResearch | Action::ActivatePower => 1,
            Action::ActivateBoth => 2,
        }
    }

    pub fn activates_research(self) -> bool {
        matches!(self, Action::ActivateResearch | Action::ActivateBoth)
    }

    pub fn activates_power(self) -> bool {
        matches!(self, Action::ActivatePower | Action::ActivateBoth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AiNode {
    pub id: usize,
    pub kind: AiKind,
    /// Zero for non-power kinds; an activated power node accumulates everything.
    pub power: f64,
    pub level: usize,
    pub parent: Option<usize>,
    pub research_child: Option<usize>,
    pub power_child: Option<usize>,
    /// Ordered by number of activations, so earlier actions win ties.
    pub actions: Vec<Action>,
}

/// Nodes are numbered in preorder (research subtree before the power child),
/// so every offspring has a larger id than its activator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationGame {
    pub players: Vec<AiNode>,
    pub payoff_params: PayoffParams,
    pub depth: usize,
}

/// One move: the node that moved and what it chose.
pub type Move = (usize, Action);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    /// Moves made before this decision.
    pub history: Vec<Move>,
    pub node: usize,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    /// Action taken by each node on the equilibrium path; `None` if it never moves.
    pub chosen: Vec<Option<Action>>,
    pub path: Vec<Move>,
    /// Nodes active at the end of the equilibrium path, root included.
    pub active: Vec<usize>,
    pub payoffs: Vec<f64>,
    /// The full plan: one decision per reachable history.
    pub plan: Vec<Decision>,
    pub equilibrium: bool,
}

impl StrategyProfile {
    pub fn activates_power(&self) -> bool {
        self.path.iter().any(|(_, a)| a.activates_power())
    }

    pub fn activates_research(&self) -> bool {
        self.path.iter().any(|(_, a)| a.activates_research())
    }

    pub fn activations(&self) -> usize {
        self.path.iter().map(|(_, a)| a.activations()).sum()
    }
}

/// Number of nodes in a game of the given depth.
pub fn node_count(depth: usize) -> usize {
    match depth {
        0 => 0,
        1 => 3,
        d => 2 * d,
    }
}

pub fn build_activation_game(params: PayoffParams, depth: usize) -> Result<ActivationGame, SolveError> {
    build_activation_game_with_budget(params, depth, NODE_BUDGET)
}

/// Builds the tree: the paperclip root may switch on a research node and a
/// power node. A research node at level `ℓ` may switch on a power node while
/// `ℓ < depth` and a further research node while `ℓ + 1 < depth`.
pub fn build_activation_game_with_budget(params: PayoffParams, depth: usize, budget: usize) -> Result<ActivationGame, SolveError> {
    if depth == 0 {
        return Err(SolveError::ZeroDepth);
    }
    let nodes = node_count(depth);
    if nodes > budget {
        return Err(SolveError::NodeBudget { depth, nodes, budget });
    }
    params.check_nonnegative().map_err(SolveError::InvalidArgument)?;

    let mut players = Vec::with_capacity(nodes);
    grow(&mut players, AiKind::Paperclip, 0, None, depth);
    debug_assert_eq!(players.len(), nodes);
    Ok(ActivationGame { players, payoff_params: params, depth })
}

fn grow(players: &mut Vec<AiNode>, kind: AiKind, level: usize, parent: Option<usize>, depth: usize) -> usize {
    let id = players.len();
    let power = if kind == AiKind::PowerAccumulation { 1.0 } else { 0.0 };
    players.push(AiNode { id, kind, power, level, parent, research_child: None, power_child: None, actions: vec![] });
    if kind == AiKind::PowerAccumulation {
        return id;
    }
    let research_slot = level == 0 || level + 1 < depth;
    let power_slot = level < depth;
    if research_slot {
        let child = grow(players, AiKind::Research, level + 1, Some(id), depth);
        players[id].research_child = Some(child);
    }
    if power_slot {
        let child = grow(players, AiKind::PowerAccumulation, level + 1, Some(id), depth);
        players[id].power_child = Some(child);
    }
    let mut actions = Vec::new();
    if research_slot || power_slot {
        actions.push(Action::None);
    }
    if research_slot {
        actions.push(Action::ActivateResearch);
    }
    if power_slot {
        actions.push(Action::ActivatePower);
    }
    if research_slot && power_slot {
        actions.push(Action::ActivateBoth);
    }
    players[id].actions = actions;
    id
}

impl ActivationGame {
    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    /// Nodes that move at some history.
    pub fn decision_nodes(&self) -> impl Iterator<Item = &AiNode> {
        self.players.iter().filter(|n| !n.actions.is_empty())
    }

    /// Payoff of every node given which nodes ended up active.
    pub fn payoffs(&self, active: &[bool]) -> Vec<f64> {
        let p = &self.payoff_params;
        let active_of = |kind: AiKind| self.players.iter().filter(move |n| n.kind == kind && active[n.id]);
        let power_count = active_of(AiKind::PowerAccumulation).count();
        let research_any = active_of(AiKind::Research).next().is_some();
        let dominated = power_count > 0 && p.power_payoff_scale > 0.0;

        self.players
            .iter()
            .map(|n| {
                if !active[n.id] {
                    return 0.0;
                }
                match n.kind {
                    AiKind::Paperclip if dominated => 0.0,
                    AiKind::Paperclip if research_any => p.paperclips_with_research,
                    AiKind::Paperclip => p.paperclips_base,
                    AiKind::Research if dominated => p.research_reward_without,
                    AiKind::Research => p.research_reward_with_resources,
                    AiKind::PowerAccumulation => p.power_payoff_scale / power_count as f64,
                }
            })
            .collect()
    }

    fn root_active(&self) -> Vec<bool> {
        let mut active = vec![false; self.len()];
        active[0] = true;
        active
    }

    fn apply(&self, active: &mut [bool], node: usize, action: Action) {
        let n = &self.players[node];
        if action.activates_research() {
            active[n.research_child.expect("action offered without a research slot")] = true;
        }
        if action.activates_power() {
            active[n.power_child.expect("action offered without a power slot")] = true;
        }
    }

    /// Next node to move: the first active decision node at or after `from`.
    fn next_mover(&self, active: &[bool], from: usize) -> Option<usize> {
        (from..self.len()).find(|&i| active[i] && !self.players[i].actions.is_empty())
    }

    /// Active set after replaying `history` from the root.
    pub fn replay(&self, history: &[Move]) -> Vec<bool> {
        let mut active = self.root_active();
        for &(node, action) in history {
            self.apply(&mut active, node, action);
        }
        active
    }

    /// Plays on from `history` using `strategy` for every later move and
    /// returns the terminal active set and the moves made.
    pub fn play_from(&self, history: &[Move], strategy: impl Fn(&[Move], usize) -> Action) -> (Vec<bool>, Vec<Move>) {
        let mut active = self.replay(history);
        let mut moves = history.to_vec();
        let mut from = moves.last().map_or(0, |&(n, _)| n + 1);
        while let Some(node) = self.next_mover(&active, from) {
            let action = strategy(&moves, node);
            self.apply(&mut active, node, action);
            moves.push((node, action));
            from = node + 1;
        }
        (active, moves)
    }

    fn induct(&self, active: &mut Vec<bool>, from: usize, history: &mut Vec<Move>, plan: &mut Vec<Decision>) -> Vec<f64> {
        let Some(node) = self.next_mover(active, from) else {
            return self.payoffs(active);
        };
        let mut best: Option<(Action, Vec<f64>)> = None;
        for &action in &self.players[node].actions {
            let saved = active.clone();
            self.apply(active, node, action);
            history.push((node, action));
            let value = self.induct(active, node + 1, history, plan);
            history.pop();
            *active = saved;
            if best.as_ref().is_none_or(|(_, b)| value[node] > b[node]) {
                best = Some((action, value));
            }
        }
        let (action, value) = best.expect("decision node without actions");
        plan.push(Decision { history: history.clone(), node, action });
        value
    }
}

/// Solves the game from the last movers back to the root. Ties go to the
/// action with fewer activations; the plan covers every reachable history.
pub fn solve_backward_induction(g: &ActivationGame) -> StrategyProfile {
    let mut active = g.root_active();
    let mut plan = Vec::new();
    g.induct(&mut active, 0, &mut Vec::new(), &mut plan);

    let lookup: HashMap<&[Move], Action> = plan.iter().map(|d| (d.history.as_slice(), d.action)).collect();
    let strategy = |h: &[Move], _node: usize| lookup[h];
    let (terminal, path) = g.play_from(&[], strategy);
    let payoffs = g.payoffs(&terminal);

    let mut chosen = vec![None; g.len()];
    for &(node, action) in &path {
        chosen[node] = Some(action);
    }
    let equilibrium = plan.iter().all(|d| {
        let keep = g.payoffs(&g.play_from(&d.history, strategy).0)[d.node];
        g.players[d.node].actions.iter().all(|&alt| {
            let mut h = d.history.clone();
            h.push((d.node, alt));
            g.payoffs(&g.play_from(&h, strategy).0)[d.node] <= keep
        })
    });

    StrategyProfile {
        chosen,
        path,
        active: (0..g.len()).filter(|&i| terminal[i]).collect(),
        payoffs,
        plan,
        equilibrium,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedGame {
    pub params: PayoffParams,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop3Report {
    pub holds: bool,
    pub games_checked: usize,
    pub research_activated: usize,
    pub counterexamples: Vec<PayoffParams>,
    pub excluded: Vec<ExcludedGame>,
}

/// Solves one game per parameterization and collects any whose equilibrium
/// path switches on a power node. Parameterizations outside the modeling
/// premises are set aside with a diagnostic instead of being solved.
pub fn verify_prop3(sweep: &[PayoffParams], depth: usize) -> Result<Prop3Report, SolveError> {
    if sweep.is_empty() {
        return Err(SolveError::InvalidArgument("verify_prop3 needs at least one parameterization".into()));
    }
    if depth == 0 {
        return Err(SolveError::ZeroDepth);
    }
    let mut report = Prop3Report { holds: true, games_checked: 0, research_activated: 0, counterexamples: vec![], excluded: vec![] };
    for params in sweep {
        if let Some(reason) = params.premise_violation() {
            report.excluded.push(ExcludedGame { params: *params, reason });
            continue;
        }
        let profile = solve_backward_induction(&build_activation_game(*params, depth)?);
        report.games_checked += 1;
        if profile.activates_research() {
            report.research_activated += 1;
        }
        if profile.activates_power() || !profile.equilibrium {
            report.counterexamples.push(*params);
        }
    }
    report.holds = report.counterexamples.is_empty();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(base: f64, with_research: f64) -> PayoffParams {
        PayoffParams { paperclips_base: base, paperclips_with_research: with_research, ..PayoffParams::default() }
    }

    #[test]
    fn depth_two_shape() {
        let g = build_activation_game(params(1.0, 1.5), 2).unwrap();
        let kinds: Vec<AiKind> = g.players.iter().map(|n| n.kind).collect();
        assert_eq!(kinds, [AiKind::Paperclip, AiKind::Research, AiKind::PowerAccumulation, AiKind::PowerAccumulation]);
        assert_eq!(g.players[0].actions, [Action::None, Action::ActivateResearch, Action::ActivatePower, Action::ActivateBoth]);
        assert_eq!(g.players[1].actions, [Action::None, Action::ActivatePower]);
        assert_eq!(g.players[1].power, 0.0);
    }

    #[test]
    fn depth_one_has_no_grandchildren() {
        let g = build_activation_game(params(1.0, 1.5), 1).unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.players[1].actions.is_empty());
        assert!(g.players.iter().all(|n| n.level <= 1));
    }

    #[test]
    fn power_nodes_never_act() {
        for depth in 1..=6 {
            let g = build_activation_game(PayoffParams::default(), depth).unwrap();
            assert_eq!(g.len(), node_count(depth));
            for n in g.players.iter().filter(|n| n.kind == AiKind::PowerAccumulation) {
                assert!(n.actions.is_empty());
                assert!(n.power > 0.0);
            }
        }
    }

    #[test]
    fn research_uplift_is_taken() {
        let p = solve_backward_induction(&build_activation_game(params(1.0, 1.5), 2).unwrap());
        assert_eq!(p.chosen[0], Some(Action::ActivateResearch));
        assert!(!p.activates_power());
        assert_eq!(p.payoffs[0], 1.5);
        assert!(p.equilibrium);
    }

    #[test]
    fn indifference_keeps_status_quo() {
        let p = solve_backward_induction(&build_activation_game(params(1.0, 1.0), 2).unwrap());
        assert_eq!(p.chosen[0], Some(Action::None));
        assert_eq!(p.payoffs[0], 1.0);
        assert_eq!(p.active, [0]);
    }

    #[test]
    fn rejects_zero_depth_and_budget() {
        assert_eq!(build_activation_game(PayoffParams::default(), 0), Err(SolveError::ZeroDepth));
        assert!(matches!(
            build_activation_game_with_budget(PayoffParams::default(), 10, 12),
            Err(SolveError::NodeBudget { nodes: 20, .. })
        ));
    }

    #[test]
    fn payoff_irrelevant_power_is_excluded() {
        let free_power = PayoffParams { power_payoff_scale: 0.0, ..PayoffParams::default() };
        let r = verify_prop3(&[free_power, params(1.0, 2.0)], 2).unwrap();
        assert!(r.holds);
        assert_eq!(r.games_checked, 1);
        assert_eq!(r.research_activated, 1);
        assert_eq!(r.excluded.len(), 1);
        assert!(r.excluded[0].reason.contains("payoff-irrelevant"));
    }

    #[test]
    fn plan_covers_off_path_histories() {
        let g = build_activation_game(PayoffParams::default(), 3).unwrap();
        let p = solve_backward_induction(&g);
        // root, then the level-1 research node after research or both
        assert!(p.plan.iter().any(|d| d.history == [(0, Action::ActivateBoth)]));
        assert!(p.plan.iter().any(|d| d.history.is_empty() && d.node == 0));
    }

    #[test]
    fn action_tags() {
        assert_eq!(serde_json::to_string(&Action::ActivateBoth).unwrap(), "\"activate-both\"");
    }
}
