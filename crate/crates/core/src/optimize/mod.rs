//! Investment problems of a single AI: extraction technology, appropriation
//! power, and the step-by-step path to that power.

mod path;
mod power;
mod technology;

pub use path::{simulate_accumulation_path, PathFailure, PathResult, PathStep};
pub use power::{
    check_prop2_conditions, net_resources, optimize_power, PowerOptions, PowerSolution, Prop2Verdict, CURVE_POINTS,
    DEFAULT_GRID,
};
pub use technology::{optimize_technology, TechnologySolution};
