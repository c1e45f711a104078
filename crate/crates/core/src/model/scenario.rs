use serde::{Deserialize, Serialize};

use super::function::{Domain, FunctionDescriptor};
use crate::control::PayoffParams;
use crate::error::SolveError;

pub const SCHEMA_VERSION: u32 = 1;

/// A human agent. Strength orders appropriation rights; endowment is the
/// resource mass the agent starts with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: u32,
    pub strength: f64,
    pub endowment: f64,
    pub utility: FunctionDescriptor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AiKind {
    #[default]
    Paperclip,
    Research,
    PowerAccumulation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AISpec {
    /// Zero for a freshly activated AI.
    #[serde(default)]
    pub strength: f64,
    pub utility: FunctionDescriptor,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub kind: AiKind,
}

impl AISpec {
    pub fn activated(utility: FunctionDescriptor, kind: AiKind) -> Self {
        AISpec { strength: 0.0, utility, theta: 0.0, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Power step of the accumulation path.
    #[serde(default = "default_dy")]
    pub dy: f64,
    #[serde(default = "default_root_tol")]
    pub root_tol: f64,
    /// Bootstrap slack of the accumulation path; `None` picks the largest
    /// marginal power cost on `[0, 1]`.
    #[serde(default)]
    pub kappa: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { dy: default_dy(), root_tol: default_root_tol(), kappa: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSettings {
    #[serde(default = "one")]
    pub y_target: f64,
}

impl Default for PathSettings {
    fn default() -> Self {
        PathSettings { y_target: 1.0 }
    }
}

/// The agent that considers switching on the scenario's AI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSettings {
    pub initial_strength: f64,
    /// Defaults to the scenario's human utility.
    #[serde(default)]
    pub initial_utility: Option<FunctionDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSettings {
    #[serde(default = "default_depth")]
    pub depth: usize,
    pub payoffs: PayoffParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    /// Number of generated human agents spread over strengths `[0, 1]`.
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    /// Endowment density `f(s)` over human strengths.
    pub endowment: FunctionDescriptor,
    #[serde(default)]
    pub free_pool: f64,
    #[serde(default = "default_human_utility")]
    pub human_utility: FunctionDescriptor,
    /// Explicit human agents; replaces the generated grid when present.
    #[serde(default)]
    pub agents: Option<Vec<AgentSpec>>,
    #[serde(default)]
    pub ai: Option<AISpec>,
    #[serde(default)]
    pub technology: Option<FunctionDescriptor>,
    #[serde(default)]
    pub power_cost: Option<FunctionDescriptor>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Require `c(0) = 0`, the precondition of the accumulation path.
    #[serde(default)]
    pub path_analysis: bool,
    #[serde(default)]
    pub path: PathSettings,
    #[serde(default)]
    pub control: Option<ControlSettings>,
    #[serde(default)]
    pub game: Option<GameSettings>,
    /// The AI self-improves without offspring; the `game` command then
    /// reduces to the power investment problem.
    #[serde(default)]
    pub integrated_ai: bool,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}
fn default_grid_n() -> usize {
    1001
}
fn default_dy() -> f64 {
    0.01
}
fn default_root_tol() -> f64 {
    1e-9
}
fn default_depth() -> usize {
    2
}
fn one() -> f64 {
    1.0
}
fn default_human_utility() -> FunctionDescriptor {
    FunctionDescriptor::linear(1.0)
}

impl Scenario {
    /// Minimal scenario: `grid_n` humans with endowment density `f`, no AI.
    pub fn new(endowment: FunctionDescriptor) -> Self {
        Scenario {
            schema_version: SCHEMA_VERSION,
            name: None,
            grid_n: default_grid_n(),
            endowment,
            free_pool: 0.0,
            human_utility: default_human_utility(),
            agents: None,
            ai: None,
            technology: None,
            power_cost: None,
            tolerances: Tolerances::default(),
            path_analysis: false,
            path: PathSettings::default(),
            control: None,
            game: None,
            integrated_ai: false,
        }
    }

    pub fn root_tol(&self) -> f64 {
        self.tolerances.root_tol
    }

    /// Mass of the endowment density on `[a, b]`.
    pub fn endowment_mass(&self, a: f64, b: f64) -> f64 {
        self.endowment.definite_integral(a, b).unwrap_or(f64::NAN)
    }

    /// Human agents in ascending strength.
    ///
    /// Generated agents sit at `s_i = i/(n-1)` and own the endowment mass of
    /// their cell `[s_i - h/2, s_i + h/2] ∩ [0, 1]`, so endowments add up to
    /// `∫₀¹ f` exactly.
    pub fn humans(&self) -> Vec<AgentSpec> {
        if let Some(agents) = &self.agents {
            let mut agents = agents.clone();
            agents.sort_by(|a, b| a.strength.total_cmp(&b.strength));
            return agents;
        }
        let n = self.grid_n.max(2);
        let h = 1.0 / (n - 1) as f64;
        (0..n)
            .map(|i| {
                let s = i as f64 * h;
                let lo = (s - 0.5 * h).max(0.0);
                let hi = (s + 0.5 * h).min(1.0);
                AgentSpec {
                    id: i as u32,
                    strength: s,
                    endowment: self.endowment_mass(lo, hi),
                    utility: self.human_utility.clone(),
                }
            })
            .collect()
    }

    /// `X`: free pool plus everything held by humans.
    pub fn total_resources(&self) -> f64 {
        let held = match &self.agents {
            Some(agents) => agents.iter().map(|a| a.endowment).sum(),
            None => self.endowment_mass(0.0, 1.0),
        };
        self.free_pool + held
    }

    pub fn require_power_cost(&self) -> Result<&FunctionDescriptor, SolveError> {
        self.power_cost.as_ref().ok_or(SolveError::MissingField("power_cost"))
    }

    pub fn require_technology(&self) -> Result<&FunctionDescriptor, SolveError> {
        self.technology.as_ref().ok_or(SolveError::MissingField("technology"))
    }

    pub fn require_ai(&self) -> Result<&AISpec, SolveError> {
        self.ai.as_ref().ok_or(SolveError::MissingField("ai"))
    }

    /// Path slack, resolving `auto` to `max c'(s)` over a grid of `[0, 1]`.
    pub fn kappa(&self) -> Result<f64, SolveError> {
        if let Some(k) = self.tolerances.kappa {
            return Ok(k);
        }
        let c = self.require_power_cost()?;
        Ok(max_slope(c, Domain::UNIT, 10_001))
    }
}

pub(crate) fn max_slope(fd: &FunctionDescriptor, on: Domain, points: usize) -> f64 {
    (0..points)
        .map(|i| on.lo + (on.hi - on.lo) * i as f64 / (points - 1) as f64)
        .filter_map(|x| fd.derivative(x).ok())
        .map(|s| s.value)
        .fold(0.0_f64, f64::max)
}
