//! Function families, economy scenarios and their validation.

mod function;
mod scenario;
mod validate;

pub use function::{simpson, Domain, Family, FunctionDescriptor, Satiation, Slope};
pub use scenario::{
    AISpec, AgentSpec, AiKind, ControlSettings, GameSettings, PathSettings, Scenario, Tolerances, SCHEMA_VERSION,
};
pub use validate::{check_endowment, check_power_cost, check_technology, validate_scenario, Role, Violation, SHAPE_GRID};
