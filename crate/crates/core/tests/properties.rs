use proptest::prelude::*;

use junglesim::control::{build_activation_game, check_control_problem, solve_backward_induction, Action, InitialAgent, PayoffParams};
use junglesim::equilibrium::{find_profitable_deviation, solve_jungle_equilibrium, Holder};
use junglesim::io::{digest, parse_scenario};
use junglesim::model::{AISpec, AgentSpec, AiKind, Family, FunctionDescriptor, Scenario};
use junglesim::optimize::simulate_accumulation_path;
use junglesim::oracle;

fn smooth_descriptor() -> impl Strategy<Value = FunctionDescriptor> {
    prop_oneof![
        (0.1..3.0f64, 0.0..2.0f64).prop_map(|(a, b)| FunctionDescriptor::affine(a, b)),
        (0.1..3.0f64, 0.3..3.0f64).prop_map(|(a, b)| FunctionDescriptor::power(a, b)),
        (0.1..3.0f64, -1.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b, c)| FunctionDescriptor::quadratic_full(a, b, c)),
        (0.1..3.0f64, -1.0..1.0f64).prop_map(|(a, b)| FunctionDescriptor::new(Family::Exponential, vec![a, b]).unwrap()),
        (0.1..3.0f64, 0.1..5.0f64).prop_map(|(a, b)| FunctionDescriptor::log(a, b).unwrap()),
    ]
}

fn utility() -> impl Strategy<Value = FunctionDescriptor> {
    prop_oneof![
        (0.1..3.0f64).prop_map(FunctionDescriptor::linear),
        (0.1..3.0f64, 0.1..2.0f64).prop_map(|(cap, slope)| FunctionDescriptor::capped_linear(cap, slope)),
        (0.1..3.0f64, 0.1..5.0f64).prop_map(|(a, b)| FunctionDescriptor::log(a, b).unwrap()),
    ]
}

fn agents(max: usize) -> impl Strategy<Value = Vec<AgentSpec>> {
    prop::collection::vec((0.0..2.0f64, utility()), 1..=max).prop_map(|v| {
        let n = v.len();
        v.into_iter()
            .enumerate()
            .map(|(i, (endowment, utility))| AgentSpec { id: i as u32, strength: (i + 1) as f64 / (n + 1) as f64, endowment, utility })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivative_matches_central_difference(fd in smooth_descriptor(), x in 0.05..0.95f64) {
        let h = 1e-6;
        let numeric = (fd.evaluate(x + h).unwrap() - fd.evaluate(x - h).unwrap()) / (2.0 * h);
        let exact = fd.derivative(x).unwrap().value;
        prop_assert!((numeric - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{fd}: {numeric} vs {exact}");
    }

    #[test]
    fn integral_is_additive(fd in smooth_descriptor(), a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64) {
        let mut p = [a, b, c];
        p.sort_by(f64::total_cmp);
        let [a, b, c] = p;
        let whole = fd.definite_integral(a, c).unwrap();
        let split = fd.definite_integral(a, b).unwrap() + fd.definite_integral(b, c).unwrap();
        prop_assert!((whole - split).abs() <= 1e-12 * whole.abs().max(1.0));
    }

    #[test]
    fn integral_matches_quadrature(fd in smooth_descriptor(), b in 0.05..2.0f64) {
        // away from 0, where x^b with b < 1 has an unbounded slope
        let exact = fd.definite_integral(0.05, b).unwrap();
        let quad = oracle::integral(&fd, 0.05, b, 400);
        prop_assert!((exact - quad).abs() <= 1e-9 * exact.abs().max(1.0), "{fd}: {exact} vs {quad}");
    }

    #[test]
    fn equilibrium_ignores_listing_order(list in agents(8), rot in 0usize..8, pool in 0.0..1.0f64) {
        let mut s = Scenario::new(FunctionDescriptor::constant(1.0));
        s.free_pool = pool;
        s.agents = Some(list.clone());
        let mut shuffled = list.clone();
        shuffled.rotate_left(rot % list.len());
        shuffled.reverse();
        let mut t = s.clone();
        t.agents = Some(shuffled);
        let a = solve_jungle_equilibrium(&s).unwrap();
        let b = solve_jungle_equilibrium(&t).unwrap();
        for h in &list {
            prop_assert_eq!(a.allocation.get(Holder::Human(h.id)), b.allocation.get(Holder::Human(h.id)));
        }
    }

    #[test]
    fn equilibrium_is_feasible_and_stable(list in agents(12), ai in prop::option::of((0.0..2.0f64, utility())), pool in 0.0..1.0f64) {
        let mut s = Scenario::new(FunctionDescriptor::constant(1.0));
        s.free_pool = pool;
        s.agents = Some(list);
        if let Some((strength, utility)) = ai {
            prop_assume!(s.agents.as_ref().unwrap().iter().all(|h| h.strength != strength));
            s.ai = Some(AISpec { strength, utility, theta: 0.0, kind: AiKind::Paperclip });
        }
        let eq = solve_jungle_equilibrium(&s).unwrap();
        prop_assert!(eq.allocation.is_feasible(s.total_resources()));
        prop_assert!(eq.allocation.holdings.iter().all(|h| h.amount >= 0.0));
        prop_assert_eq!(find_profitable_deviation(&s, &eq.allocation).unwrap(), None);
        prop_assert_eq!(oracle::improving_seizure(&s, &eq.allocation), None);
    }

    #[test]
    fn more_slack_never_breaks_a_path(a in 0.1..3.0f64, k1 in 0.0..2.0f64, extra in 0.0..2.0f64, dy in prop::sample::select(vec![0.01, 0.05, 0.1, 0.25])) {
        let f = FunctionDescriptor::constant(1.0);
        let c = FunctionDescriptor::quadratic(a);
        let low = simulate_accumulation_path(&f, &c, 1.0, dy, k1, 1e-9).unwrap();
        let high = simulate_accumulation_path(&f, &c, 1.0, dy, k1 + extra, 1e-9).unwrap();
        prop_assert!(!low.feasible || high.feasible);
        if let (Some(l), Some(h)) = (low.first_failure, high.first_failure) {
            prop_assert!(h >= l);
        }
    }

    #[test]
    fn stronger_ai_keeps_the_control_problem(s0 in 0.0..1.0f64, s_a in 0.0..2.0f64, bump in 0.0..1.0f64, ai_u in utility(), human_u in utility()) {
        let scenario = Scenario::new(FunctionDescriptor::constant(1.0));
        let initial = InitialAgent::human(s0, human_u);
        let weak = AISpec { strength: s_a, utility: ai_u, theta: 0.0, kind: AiKind::Paperclip };
        let strong = AISpec { strength: s_a + bump, ..weak.clone() };
        let before = check_control_problem(&initial, &weak, &scenario);
        let after = check_control_problem(&initial, &strong, &scenario);
        prop_assert!(!before.control_problem || after.control_problem);
    }

    #[test]
    fn research_uplift_is_always_taken(
        base in 0.0..5.0f64,
        uplift in 1e-6..5.0f64,
        with in 0.0..5.0f64,
        without_frac in 0.0..1.0f64,
        scale in 1e-6..10.0f64,
        depth in 1usize..=6,
    ) {
        let p = PayoffParams {
            paperclips_base: base,
            paperclips_with_research: base + uplift,
            research_reward_with_resources: with,
            research_reward_without: with * without_frac,
            power_payoff_scale: scale,
        };
        let profile = solve_backward_induction(&build_activation_game(p, depth).unwrap());
        prop_assert!(profile.activates_research());
        prop_assert!(!profile.activates_power());
        prop_assert_eq!(profile.chosen[0], Some(Action::ActivateResearch));
        prop_assert!(profile.equilibrium);
    }

    #[test]
    fn scenario_round_trips_and_digest_is_stable(grid in 2usize..50, pool in 0.0..3.0f64, fd in utility()) {
        let mut s = Scenario::new(FunctionDescriptor::constant(1.0));
        s.grid_n = grid;
        s.tolerances.dy = 1.0 / (grid - 1) as f64;
        s.free_pool = pool;
        s.human_utility = FunctionDescriptor::linear(1.0);
        s.technology = None;
        s.power_cost = Some(FunctionDescriptor::quadratic(1.0));
        s.ai = Some(AISpec::activated(fd, AiKind::Research));
        let text = serde_json::to_string(&s).unwrap();
        let back = parse_scenario(&text, "prop", &[]);
        prop_assume!(back.is_ok());
        let back = back.unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(digest(&back), digest(&s));
    }
}
