//! Shape checks on a dense grid.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::function::FunctionDescriptor;
use super::scenario::{Scenario, SCHEMA_VERSION};

/// Points per checked range.
pub const SHAPE_GRID: usize = 2001;
/// Relative slack on monotonicity and curvature checks.
const SHAPE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Endowment,
    PowerCost,
    Technology,
    HumanUtility,
    AiUtility,
    AgentUtility(u32),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Endowment => f.write_str("f"),
            Role::PowerCost => f.write_str("c"),
            Role::Technology => f.write_str("r"),
            Role::HumanUtility => f.write_str("π_s"),
            Role::AiUtility => f.write_str("π_A"),
            Role::AgentUtility(id) => write!(f, "π_{id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Nonnegative,
    Nondecreasing,
    Convex,
    Concave,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    NotFinite { role: Role, x: f64 },
    Negative { role: Role, x: f64 },
    NotNondecreasing { role: Role, x: f64 },
    NotConvex { role: Role, x: f64 },
    NotConcave { role: Role, x: f64 },
    NotNormalized { role: Role, value: f64 },
    CostAtZero { value: f64 },
    DomainTooNarrow { role: Role, lo: f64, hi: f64 },
    NonPositiveTotal { total: f64 },
    NegativeAmount { field: String, value: f64 },
    BadTolerance { field: String, value: f64 },
    GridInconsistent { grid_n: usize, dy: f64 },
    StrengthOutOfRange { id: u32, strength: f64 },
    DuplicateStrength { strength: f64 },
    DuplicateId { id: u32 },
    UnsupportedSchema { version: u32 },
    BadGame { reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotFinite { role, x } => write!(f, "{role} not finite at x={x}"),
            Violation::Negative { role, x } => write!(f, "{role} negative at x={x}"),
            Violation::NotNondecreasing { role, x } => write!(f, "{role} not nondecreasing near x={x}"),
            Violation::NotConvex { role, x } => write!(f, "{role} not convex near x={x}"),
            Violation::NotConcave { role, x } => write!(f, "{role} not concave near x={x}"),
            Violation::NotNormalized { role, value } => write!(f, "{role}(0)≠0 ({role}(0) = {value})"),
            Violation::CostAtZero { value } => write!(f, "c(0)≠0 (c(0) = {value}); the accumulation path needs c(0)=0"),
            Violation::DomainTooNarrow { role, lo, hi } => {
                write!(f, "{role} domain does not cover the required range [{lo}, {hi}]")
            }
            Violation::NonPositiveTotal { total } => write!(f, "total resources X = {total} must be finite and > 0"),
            Violation::NegativeAmount { field, value } => write!(f, "{field} = {value} must be ≥ 0"),
            Violation::BadTolerance { field, value } => write!(f, "tolerances.{field} = {value} is out of range"),
            Violation::GridInconsistent { grid_n, dy } => {
                write!(f, "dy = {dy} is not a whole number of grid steps for grid_n = {grid_n}")
            }
            Violation::StrengthOutOfRange { id, strength } => {
                write!(f, "agent {id} has strength {strength} outside [0, 1]")
            }
            Violation::DuplicateStrength { strength } => write!(f, "two agents share strength {strength}"),
            Violation::DuplicateId { id } => write!(f, "agent id {id} is used twice"),
            Violation::UnsupportedSchema { version } => write!(f, "unsupported schema_version {version}"),
            Violation::BadGame { reason } => write!(f, "game: {reason}"),
        }
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + i as f64 * step })
}

/// Checks `fd` on `[lo, hi]`, reporting at most one violation per shape.
fn check_shapes(fd: &FunctionDescriptor, role: Role, lo: f64, hi: f64, shapes: &[Shape]) -> Vec<Violation> {
    if !fd.domain().covers(lo, hi) {
        return vec![Violation::DomainTooNarrow { role, lo, hi }];
    }
    let xs: Vec<f64> = grid(lo, hi, SHAPE_GRID).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| fd.evaluate(x).unwrap_or(f64::NAN)).collect();
    if let Some(i) = ys.iter().position(|y| !y.is_finite()) {
        return vec![Violation::NotFinite { role, x: xs[i] }];
    }
    let slack = |y: f64| SHAPE_TOL * y.abs().max(1.0);
    let mut out = Vec::new();
    for shape in shapes {
        let bad = match shape {
            Shape::Nonnegative => ys.iter().position(|&y| y < -slack(0.0)).map(|i| Violation::Negative {
                role: role.clone(),
                x: xs[i],
            }),
            Shape::Nondecreasing => (1..xs.len())
                .find(|&i| ys[i] < ys[i - 1] - slack(ys[i]))
                .map(|i| Violation::NotNondecreasing { role: role.clone(), x: xs[i] }),
            Shape::Convex | Shape::Concave => {
                let sign = if *shape == Shape::Convex { 1.0 } else { -1.0 };
                (1..xs.len() - 1)
                    .find(|&i| sign * (ys[i - 1] - 2.0 * ys[i] + ys[i + 1]) < -slack(ys[i]))
                    .map(|i| {
                        if *shape == Shape::Convex {
                            Violation::NotConvex { role: role.clone(), x: xs[i] }
                        } else {
                            Violation::NotConcave { role: role.clone(), x: xs[i] }
                        }
                    })
            }
        };
        out.extend(bad);
    }
    out
}

fn check_utility(fd: &FunctionDescriptor, role: Role, total: f64) -> Vec<Violation> {
    let mut out = check_shapes(fd, role.clone(), 0.0, total.max(0.0), &[Shape::Nondecreasing]);
    if let Ok(v) = fd.evaluate(0.0) {
        if v.abs() > SHAPE_TOL {
            out.push(Violation::NotNormalized { role, value: v });
        }
    }
    out
}

/// Every shape and consistency constraint a scenario must satisfy. Empty
/// means valid.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    if s.schema_version != SCHEMA_VERSION {
        out.push(Violation::UnsupportedSchema { version: s.schema_version });
    }

    let t = &s.tolerances;
    if !(t.dy > 0.0 && t.dy <= 1.0) {
        out.push(Violation::BadTolerance { field: "dy".into(), value: t.dy });
    }
    if !(t.root_tol > 0.0 && t.root_tol < 1e-2) {
        out.push(Violation::BadTolerance { field: "root_tol".into(), value: t.root_tol });
    }
    if let Some(k) = t.kappa {
        if !(k >= 0.0 && k.is_finite()) {
            out.push(Violation::BadTolerance { field: "kappa".into(), value: k });
        }
    }
    if s.grid_n < 2 {
        out.push(Violation::GridInconsistent { grid_n: s.grid_n, dy: t.dy });
    } else if t.dy > 0.0 && s.agents.is_none() {
        let steps = t.dy * (s.grid_n - 1) as f64;
        if (steps - steps.round()).abs() > 1e-6 || steps.round() < 1.0 {
            out.push(Violation::GridInconsistent { grid_n: s.grid_n, dy: t.dy });
        }
    }
    if !(0.0..=1.0).contains(&s.path.y_target) || s.path.y_target == 0.0 {
        out.push(Violation::BadTolerance { field: "path.y_target".into(), value: s.path.y_target });
    }

    if !(s.free_pool >= 0.0 && s.free_pool.is_finite()) {
        out.push(Violation::NegativeAmount { field: "free_pool".into(), value: s.free_pool });
    }
    out.extend(check_shapes(&s.endowment, Role::Endowment, 0.0, 1.0, &[Shape::Nonnegative]));

    let total = s.total_resources();
    if !(total.is_finite() && total > 0.0) {
        out.push(Violation::NonPositiveTotal { total });
    }
    let total = if total.is_finite() { total } else { 0.0 };

    out.extend(check_utility(&s.human_utility, Role::HumanUtility, total));
    if let Some(agents) = &s.agents {
        let mut strengths: Vec<f64> = Vec::with_capacity(agents.len());
        let mut ids = std::collections::BTreeSet::new();
        for a in agents {
            if !(0.0..=1.0).contains(&a.strength) {
                out.push(Violation::StrengthOutOfRange { id: a.id, strength: a.strength });
            }
            if !(a.endowment >= 0.0 && a.endowment.is_finite()) {
                out.push(Violation::NegativeAmount { field: format!("agents[{}].endowment", a.id), value: a.endowment });
            }
            if !ids.insert(a.id) {
                out.push(Violation::DuplicateId { id: a.id });
            }
            if strengths.contains(&a.strength) {
                out.push(Violation::DuplicateStrength { strength: a.strength });
            }
            strengths.push(a.strength);
            out.extend(check_utility(&a.utility, Role::AgentUtility(a.id), total));
        }
    }

    if let Some(ai) = &s.ai {
        if !(ai.strength >= 0.0 && ai.strength.is_finite()) {
            out.push(Violation::NegativeAmount { field: "ai.strength".into(), value: ai.strength });
        }
        if !(ai.theta >= 0.0 && ai.theta.is_finite()) {
            out.push(Violation::NegativeAmount { field: "ai.theta".into(), value: ai.theta });
        }
        out.extend(check_utility(&ai.utility, Role::AiUtility, total));
    }

    if let Some(r) = &s.technology {
        let hi = r.domain().hi.min(total).max(0.0);
        out.extend(check_shapes(r, Role::Technology, 0.0, hi, &[Shape::Nondecreasing, Shape::Concave]));
    }

    if let Some(c) = &s.power_cost {
        out.extend(check_shapes(c, Role::PowerCost, 0.0, 1.0, &[Shape::Nondecreasing, Shape::Convex]));
        if s.path_analysis {
            if let Ok(c0) = c.evaluate(0.0) {
                if c0.abs() > s.root_tol() {
                    out.push(Violation::CostAtZero { value: c0 });
                }
            }
        }
    }

    if let Some(g) = &s.game {
        if g.depth == 0 {
            out.push(Violation::BadGame { reason: "depth must be at least 1".into() });
        }
        if let Err(reason) = g.payoffs.check_nonnegative() {
            out.push(Violation::BadGame { reason });
        }
    }
    if let Some(ctl) = &s.control {
        if !(0.0..=1.0).contains(&ctl.initial_strength) {
            out.push(Violation::StrengthOutOfRange { id: u32::MAX, strength: ctl.initial_strength });
        }
        if let Some(u) = &ctl.initial_utility {
            out.extend(check_utility(u, Role::HumanUtility, total));
        }
    }
    out
}

/// Shape constraints of a power cost alone (nondecreasing, convex on `[0, 1]`).
pub fn check_power_cost(c: &FunctionDescriptor) -> Vec<Violation> {
    check_shapes(c, Role::PowerCost, 0.0, 1.0, &[Shape::Nondecreasing, Shape::Convex])
}

/// Shape constraints of an endowment density alone (nonnegative on `[0, 1]`).
pub fn check_endowment(f: &FunctionDescriptor) -> Vec<Violation> {
    check_shapes(f, Role::Endowment, 0.0, 1.0, &[Shape::Nonnegative])
}

/// Shape constraints of an extraction technology on `[0, hi]`.
pub fn check_technology(r: &FunctionDescriptor, hi: f64) -> Vec<Violation> {
    check_shapes(r, Role::Technology, 0.0, hi, &[Shape::Nondecreasing, Shape::Concave])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Domain;

    fn base() -> Scenario {
        let mut s = Scenario::new(FunctionDescriptor::constant(1.0));
        s.power_cost = Some(FunctionDescriptor::quadratic(0.25));
        s
    }

    #[test]
    fn quarter_quadratic_cost_is_clean() {
        assert!(validate_scenario(&base()).is_empty(), "{:?}", validate_scenario(&base()));
    }

    #[test]
    fn cost_offset_fails_only_with_path_analysis() {
        let mut s = base();
        s.power_cost = Some(FunctionDescriptor::quadratic_full(1.0, 0.0, 0.5));
        assert!(validate_scenario(&s).is_empty());
        s.path_analysis = true;
        let v = validate_scenario(&s);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("c(0)≠0"), "{}", v[0]);
    }

    #[test]
    fn convex_technology_is_rejected() {
        let mut s = base();
        s.technology = Some(FunctionDescriptor::quadratic(1.0));
        let v = validate_scenario(&s);
        assert!(v.iter().any(|v| v.to_string().starts_with("r not concave")), "{v:?}");
    }

    #[test]
    fn concave_cost_and_negative_endowment_are_rejected() {
        let mut s = base();
        s.power_cost = Some(FunctionDescriptor::power(1.0, 0.5));
        s.endowment = FunctionDescriptor::affine(1.0, -0.5);
        let v = validate_scenario(&s);
        assert!(v.iter().any(|v| matches!(v, Violation::NotConvex { role: Role::PowerCost, .. })));
        assert!(v.iter().any(|v| matches!(v, Violation::Negative { role: Role::Endowment, .. })));
    }

    #[test]
    fn utilities_must_be_normalized_and_nondecreasing() {
        let mut s = base();
        s.human_utility = FunctionDescriptor::affine(1.0, 1.0);
        s.ai = Some(crate::model::AISpec::activated(FunctionDescriptor::linear(-1.0), Default::default()));
        let v = validate_scenario(&s);
        assert!(v.iter().any(|v| matches!(v, Violation::NotNormalized { .. })));
        assert!(v.iter().any(|v| matches!(v, Violation::NotNondecreasing { role: Role::AiUtility, .. })));
    }

    #[test]
    fn grid_and_tolerances_are_checked() {
        let mut s = base();
        s.tolerances.dy = 0.0015;
        assert!(validate_scenario(&s).iter().any(|v| matches!(v, Violation::GridInconsistent { .. })));
        s.tolerances.dy = -1.0;
        assert!(validate_scenario(&s).iter().any(|v| matches!(v, Violation::BadTolerance { .. })));
    }

    #[test]
    fn narrow_domains_are_reported() {
        let mut s = base();
        s.power_cost = Some(FunctionDescriptor::quadratic(1.0).on_domain(Domain::new(0.0, 0.5).unwrap()).unwrap());
        assert!(validate_scenario(&s).iter().any(|v| matches!(v, Violation::DomainTooNarrow { .. })));
    }
}
