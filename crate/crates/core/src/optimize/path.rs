use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::model::FunctionDescriptor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    /// Power held before the step, `k·dy`.
    pub power: f64,
    /// Resources appropriated so far, `∫₀^power f`.
    pub cumulative: f64,
    /// Cost of the next power level.
    pub next_cost: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathFailure {
    /// `c(0) > 0`: the first appropriation cannot be financed.
    CostAtZero,
    /// Appropriated resources fall short of the next power level's cost.
    Shortfall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub feasible: bool,
    pub trajectory: Vec<PathStep>,
    pub first_failure: Option<usize>,
    pub failure: Option<PathFailure>,
}

/// Walks power up in steps of `dy` from zero to `y_target`. Step `k` is
/// affordable when `∫₀^{s_k} f + κ·dy ≥ c(s_{k+1})`; the walk stops at the
/// first unaffordable step.
pub fn simulate_accumulation_path(
    f: &FunctionDescriptor,
    c: &FunctionDescriptor,
    y_target: f64,
    dy: f64,
    kappa: f64,
    tol: f64,
) -> Result<PathResult, SolveError> {
    if !(dy > 0.0 && dy <= y_target && y_target <= 1.0) {
        return Err(SolveError::InvalidArgument(format!("need 0 < dy ≤ y_target ≤ 1, got dy = {dy}, y_target = {y_target}")));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(SolveError::InvalidArgument(format!("kappa must be ≥ 0, got {kappa}")));
    }
    let steps = (y_target / dy - 1e-9).ceil() as usize;
    let level = |k: usize| (k as f64 * dy).min(y_target);

    if c.evaluate(0.0)? > tol {
        let step = PathStep { power: 0.0, cumulative: 0.0, next_cost: c.evaluate(level(1))?, feasible: false };
        return Ok(PathResult {
            feasible: false,
            trajectory: vec![step],
            first_failure: Some(0),
            failure: Some(PathFailure::CostAtZero),
        });
    }

    let mut trajectory = Vec::with_capacity(steps);
    for k in 0..steps {
        let power = level(k);
        let cumulative = f.definite_integral(0.0, power)?;
        let next_cost = c.evaluate(level(k + 1))?;
        let feasible = cumulative + kappa * dy >= next_cost;
        trajectory.push(PathStep { power, cumulative, next_cost, feasible });
        if !feasible {
            return Ok(PathResult {
                feasible: false,
                trajectory,
                first_failure: Some(k),
                failure: Some(PathFailure::Shortfall),
            });
        }
    }
    Ok(PathResult { feasible: true, trajectory, first_failure: None, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_quadratic_reaches_full_power() {
        let r = simulate_accumulation_path(
            &FunctionDescriptor::constant(1.0),
            &FunctionDescriptor::quadratic(0.25),
            1.0,
            0.01,
            1.0,
            1e-9,
        )
        .unwrap();
        assert!(r.feasible);
        assert_eq!(r.trajectory.len(), 100);
        assert_eq!(r.first_failure, None);
        let last = r.trajectory.last().unwrap();
        assert!((last.power - 0.99).abs() < 1e-12);
        assert!((last.next_cost - 0.25).abs() < 1e-12);
    }

    #[test]
    fn positive_cost_at_zero_fails_immediately() {
        for dy in [0.01, 0.1, 0.5] {
            let r = simulate_accumulation_path(
                &FunctionDescriptor::constant(1.0),
                &FunctionDescriptor::quadratic_full(1.0, 0.0, 0.5),
                1.0,
                dy,
                10.0,
                1e-9,
            )
            .unwrap();
            assert!(!r.feasible);
            assert_eq!(r.first_failure, Some(0));
            assert_eq!(r.failure, Some(PathFailure::CostAtZero));
        }
    }

    #[test]
    fn nothing_to_appropriate() {
        let r = simulate_accumulation_path(
            &FunctionDescriptor::constant(0.0),
            &FunctionDescriptor::quadratic(1.0),
            1.0,
            0.1,
            0.0,
            1e-9,
        )
        .unwrap();
        assert_eq!(r.first_failure, Some(0));
        assert_eq!(r.failure, Some(PathFailure::Shortfall));
        assert!((r.trajectory[0].next_cost - 0.01).abs() < 1e-15);
    }

    #[test]
    fn ragged_last_step_stops_at_target() {
        let r = simulate_accumulation_path(
            &FunctionDescriptor::constant(1.0),
            &FunctionDescriptor::constant(0.0),
            0.25,
            0.1,
            0.0,
            1e-9,
        )
        .unwrap();
        assert!(r.feasible);
        assert_eq!(r.trajectory.len(), 3);
    }

    #[test]
    fn rejects_bad_steps() {
        let f = FunctionDescriptor::constant(1.0);
        assert!(simulate_accumulation_path(&f, &f, 1.0, 0.0, 0.0, 1e-9).is_err());
        assert!(simulate_accumulation_path(&f, &f, 0.1, 0.5, 0.0, 1e-9).is_err());
        assert!(simulate_accumulation_path(&f, &f, 1.0, 0.1, -1.0, 1e-9).is_err());
    }
}
