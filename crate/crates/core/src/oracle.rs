//! Brute-force reference computations.
//!
//! Nothing here shares numerical machinery with the solvers: integrals are
//! quadratures rather than antiderivatives, optima are grid scans, the
//! equilibrium check tries every seizure and the game oracle enumerates pure
//! strategy profiles.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::control::{Action, ActivationGame, Move};
use crate::equilibrium::{Allocation, Holder};
use crate::model::{FunctionDescriptor, Scenario};

/// Grid size of the scalar optimum oracles.
pub const GRID_POINTS: usize = 100_001;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

/// `∫_{xs[0]}^{xs[k]} f` for every `k`, one Simpson panel per cell.
pub fn cumulative_integral(f: &FunctionDescriptor, xs: &[f64]) -> Vec<f64> {
    let mut acc = Vec::with_capacity(xs.len());
    let mut total = 0.0;
    acc.push(0.0);
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        total += (b - a) / 6.0 * (f.at(a) + 4.0 * f.at(0.5 * (a + b)) + f.at(b));
        acc.push(total);
    }
    acc
}

pub fn integral(f: &FunctionDescriptor, a: f64, b: f64, panels: usize) -> f64 {
    cumulative_integral(f, &grid(a, b, panels + 1)).pop().unwrap_or(0.0)
}

/// Grid argmax of `∫₀^y f − c(y)` on `[0, 1]`; ties go to the smaller `y`.
pub fn power_argmax(f: &FunctionDescriptor, c: &FunctionDescriptor, points: usize) -> (f64, f64) {
    let ys = grid(0.0, 1.0, points);
    let cum = cumulative_integral(f, &ys);
    let mut best = (0.0, f64::NEG_INFINITY);
    for (y, m) in ys.iter().zip(cum) {
        let b = m - c.at(*y);
        if b > best.1 {
            best = (*y, b);
        }
    }
    best
}

/// Grid argmax of `min(r(θ), X) − θ` on `[0, min(X, domain end)]`.
pub fn technology_argmax(r: &FunctionDescriptor, total: f64, points: usize) -> (f64, f64) {
    let hi = r.domain().hi.min(total);
    let mut best = (0.0, f64::NEG_INFINITY);
    for t in grid(0.0, hi, points) {
        let net = r.at(t).min(total) - t;
        if net > best.1 {
            best = (t, net);
        }
    }
    best
}

/// A seizure that strictly raises the seizing agent's utility: agent `i`
/// takes everything held by a strictly weaker `j` (or the free pool).
pub fn improving_seizure(s: &Scenario, a: &Allocation) -> Option<(Holder, Holder)> {
    let tol = s.root_tol();
    let humans = s.humans();
    let mut agents: Vec<(Holder, f64, &FunctionDescriptor)> =
        humans.iter().map(|h| (Holder::Human(h.id), h.strength, &h.utility)).collect();
    if let Some(ai) = &s.ai {
        agents.push((Holder::Ai, ai.strength, &ai.utility));
    }
    let amounts: HashMap<Holder, f64> = a.holdings.iter().map(|h| (h.holder, h.amount)).collect();
    let held: Vec<f64> = agents.iter().map(|(who, _, _)| amounts.get(who).copied().unwrap_or(0.0)).collect();
    let pool = a.get(Holder::Pool);
    for (i, &(who, strength, u)) in agents.iter().enumerate() {
        let base = u.at(held[i]);
        let gains = |w: f64| w > 0.0 && u.at(held[i] + w) - base > tol * base.abs().max(1.0);
        if gains(pool) {
            return Some((who, Holder::Pool));
        }
        for (j, &(victim, weaker, _)) in agents.iter().enumerate() {
            if weaker < strength && gains(held[j]) {
                return Some((who, victim));
            }
        }
    }
    None
}

/// First unaffordable step of the accumulation path, by direct quadrature.
pub fn path_first_failure(f: &FunctionDescriptor, c: &FunctionDescriptor, y_target: f64, dy: f64, kappa: f64, tol: f64) -> Option<usize> {
    if c.at(0.0) > tol {
        return Some(0);
    }
    let mut k = 0;
    let mut cumulative = 0.0;
    loop {
        let here = (k as f64 * dy).min(y_target);
        if here >= y_target - 1e-9 * dy {
            return None;
        }
        let next = ((k + 1) as f64 * dy).min(y_target);
        if cumulative + kappa * dy < c.at(next) {
            return Some(k);
        }
        cumulative += integral(f, here, next, 16);
        k += 1;
    }
}

/// On-path outcome of a strategy profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub path: Vec<Move>,
    pub active: Vec<usize>,
    pub payoffs: Vec<f64>,
}

impl Outcome {
    pub fn activations(&self) -> usize {
        self.path.iter().map(|(_, a)| a.activations()).sum()
    }

    pub fn activates_power(&self) -> bool {
        self.path.iter().any(|(_, a)| a.activates_power())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameEnumeration {
    pub profiles: usize,
    pub equilibria: usize,
    /// Subgame-perfect profile with the highest root payoff, then fewest activations.
    pub best: Option<Outcome>,
}

/// Game states as bitmasks of active nodes.
struct Masks<'a> {
    g: &'a ActivationGame,
    research: Vec<u32>,
    power: Vec<u32>,
    movers: u32,
    payoffs: HashMap<u32, Vec<f64>>,
}

impl<'a> Masks<'a> {
    fn new(g: &'a ActivationGame) -> Self {
        assert!(g.len() <= 32, "enumeration supports at most 32 nodes");
        let bit = |c: Option<usize>| c.map_or(0, |i| 1u32 << i);
        Masks {
            g,
            research: g.players.iter().map(|n| bit(n.research_child)).collect(),
            power: g.players.iter().map(|n| bit(n.power_child)).collect(),
            movers: g.decision_nodes().fold(0, |m, n| m | 1 << n.id),
            payoffs: HashMap::new(),
        }
    }

    fn apply(&self, mask: u32, node: usize, a: Action) -> u32 {
        let mut m = mask;
        if a.activates_research() {
            m |= self.research[node];
        }
        if a.activates_power() {
            m |= self.power[node];
        }
        m
    }

    fn next(&self, mask: u32, from: usize) -> Option<usize> {
        let pending = mask & self.movers & (u32::MAX.checked_shl(from as u32).unwrap_or(0));
        (pending != 0).then(|| pending.trailing_zeros() as usize)
    }

    fn terminal(&self, mut mask: u32, mut from: usize, choice: &[Action]) -> u32 {
        while let Some(node) = self.next(mask, from) {
            mask = self.apply(mask, node, choice[node]);
            from = node + 1;
        }
        mask
    }

    fn payoff(&mut self, mask: u32, node: usize) -> f64 {
        let g = self.g;
        self.payoffs.entry(mask).or_insert_with(|| g.payoffs(&(0..g.len()).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>()))[node]
    }

    /// Every reachable decision point as (active set, node to move).
    fn decision_points(&self) -> Vec<(u32, usize)> {
        let mut out = Vec::new();
        let mut stack = vec![(1u32, 0usize)];
        while let Some((mask, from)) = stack.pop() {
            if let Some(node) = self.next(mask, from) {
                out.push((mask, node));
                for &a in self.g.players[node].actions.iter().rev() {
                    stack.push((self.apply(mask, node, a), node + 1));
                }
            }
        }
        out
    }
}

/// Enumerates every pure profile that fixes one action per decision node,
/// keeps the subgame-perfect ones (no profitable one-shot deviation at any
/// decision point) and reports the best for the root.
pub fn enumerate_game(g: &ActivationGame) -> GameEnumeration {
    let mut m = Masks::new(g);
    let points = m.decision_points();
    let movers: Vec<usize> = g.decision_nodes().map(|n| n.id).collect();
    let total: usize = movers.iter().map(|&i| g.players[i].actions.len()).product();
    let mut choice = vec![Action::None; g.len()];
    let mut equilibria = 0;
    let mut best: Option<Outcome> = None;

    'profiles: for code in 0..total {
        let mut rest = code;
        for &i in &movers {
            let acts = &g.players[i].actions;
            choice[i] = acts[rest % acts.len()];
            rest /= acts.len();
        }
        for &(mask, node) in &points {
            let kept_end = m.terminal(m.apply(mask, node, choice[node]), node + 1, &choice);
            let kept = m.payoff(kept_end, node);
            for &alt in &g.players[node].actions {
                let end = m.terminal(m.apply(mask, node, alt), node + 1, &choice);
                if m.payoff(end, node) > kept {
                    continue 'profiles;
                }
            }
        }
        equilibria += 1;
        let (terminal, path) = g.play_from(&[], |_: &[Move], node: usize| choice[node]);
        let outcome = Outcome { active: (0..g.len()).filter(|&i| terminal[i]).collect(), payoffs: g.payoffs(&terminal), path };
        let better = match &best {
            None => true,
            Some(b) => {
                outcome.payoffs[0] > b.payoffs[0] || (outcome.payoffs[0] == b.payoffs[0] && outcome.activations() < b.activations())
            }
        };
        if better {
            best = Some(outcome);
        }
    }
    GameEnumeration { profiles: total, equilibria, best }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{build_activation_game, PayoffParams};

    #[test]
    fn quadrature_is_exact_for_cubics() {
        let f = FunctionDescriptor::power(1.0, 3.0);
        assert!((integral(&f, 0.0, 2.0, 3) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn grid_oracles_hit_known_optima() {
        let (y, b) = power_argmax(&FunctionDescriptor::constant(1.0), &FunctionDescriptor::quadratic(1.0), 10_001);
        assert!((y - 0.5).abs() < 1e-12 && (b - 0.25).abs() < 1e-12);
        let (t, net) = technology_argmax(&FunctionDescriptor::power(2.0, 0.5), 10.0, GRID_POINTS);
        assert!((t - 1.0).abs() < 1e-4 && (net - 1.0).abs() < 1e-8);
    }

    #[test]
    fn endowment_allocation_admits_seizure() {
        let mut s = Scenario::new(FunctionDescriptor::constant(1.0));
        s.grid_n = 3;
        let eq = crate::equilibrium::solve_jungle_equilibrium(&s).unwrap();
        assert_eq!(improving_seizure(&s, &eq.allocation), None);
    }

    #[test]
    fn path_oracle_matches_closed_form_cases() {
        let one = FunctionDescriptor::constant(1.0);
        assert_eq!(path_first_failure(&one, &FunctionDescriptor::quadratic(0.25), 1.0, 0.01, 1.0, 1e-9), None);
        assert_eq!(path_first_failure(&one, &FunctionDescriptor::quadratic_full(1.0, 0.0, 0.5), 1.0, 0.01, 1.0, 1e-9), Some(0));
    }

    #[test]
    fn enumeration_finds_research_activation() {
        let p = PayoffParams { paperclips_base: 1.0, paperclips_with_research: 1.5, ..PayoffParams::default() };
        let e = enumerate_game(&build_activation_game(p, 2).unwrap());
        assert_eq!(e.profiles, 8);
        let best = e.best.unwrap();
        assert_eq!(best.path[0], (0, Action::ActivateResearch));
        assert_eq!(best.payoffs[0], 1.5);
        assert!(!best.activates_power());
    }
}
