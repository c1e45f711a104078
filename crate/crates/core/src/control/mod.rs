mod game;
mod problem;

pub use game::{
    build_activation_game, build_activation_game_with_budget, node_count, solve_backward_induction, verify_prop3, Action,
    ActivationGame, AiNode, Decision, ExcludedGame, Move, PayoffParams, Prop3Report, StrategyProfile, NODE_BUDGET,
};
pub use problem::{check_control_problem, ControlDiagnostics, ControlProblemReport, InitialAgent};
