use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::SolveError;
use crate::model::{FunctionDescriptor, Satiation};

/// Grid used for the power objective and for the sufficient-condition scan.
pub const DEFAULT_GRID: usize = 10_001;
/// Samples of `B(y)` kept in a [`PowerSolution`].
pub const CURVE_POINTS: usize = 101;
const GOLDEN_STEPS: usize = 120;

/// Which sufficient condition for a full-power choice holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Prop2Verdict {
    /// `B` concave with a positive slope at full power.
    #[serde(rename = "prop2-i")]
    Concave,
    /// Marginal endowment exceeds marginal cost everywhere.
    #[serde(rename = "prop2-ii")]
    Dominant,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "none")]
    Neither,
}

impl Prop2Verdict {
    pub fn any(self) -> bool {
        self != Prop2Verdict::Neither
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Prop2Verdict::Concave => "prop2-i",
            Prop2Verdict::Dominant => "prop2-ii",
            Prop2Verdict::Both => "both",
            Prop2Verdict::Neither => "none",
        }
    }
}

impl fmt::Display for Prop2Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSolution {
    pub y_star: f64,
    /// `∫₀^{y*} f − c(y*)`, or 0 when power is not worth acquiring.
    pub net_resources: f64,
    /// `(y, B(y))` samples over `[0, 1]`.
    pub objective_curve: Vec<(f64, f64)>,
    pub condition_verdict: Prop2Verdict,
    /// `y* = 1` within `root_tol`.
    pub boundary: bool,
    /// False when `B(y) < 0` for every `y`.
    pub acquires_power: bool,
    /// The AI's utility saturates before `max B`; `y*` is the least power reaching it.
    pub satiated: bool,
    /// `|f(y*) − c'(y*)|` at a smooth interior optimum.
    pub foc_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct PowerOptions {
    pub grid_points: usize,
    pub curve_points: usize,
    pub root_tol: f64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions { grid_points: DEFAULT_GRID, curve_points: CURVE_POINTS, root_tol: 1e-9 }
    }
}

/// Net resources `B(y) = ∫₀^y f − c(y)` from targeting power `y`.
pub fn net_resources(f: &FunctionDescriptor, c: &FunctionDescriptor, y: f64) -> f64 {
    f.definite_integral(0.0, y).unwrap_or(f64::NAN) - c.evaluate(y).unwrap_or(f64::NAN)
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| if i + 1 == n { 1.0 } else { i as f64 / (n - 1) as f64 })
}

/// Golden-section search for the maximum of `g` on `[a, b]`.
fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const RESP: f64 = 0.381_966_011_250_105_1;
    let mut x1 = a + RESP * (b - a);
    let mut x2 = b - RESP * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..GOLDEN_STEPS {
        if g1 >= g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = a + RESP * (b - a);
            g1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = b - RESP * (b - a);
            g2 = g(x2);
        }
    }
    if g1 >= g2 {
        (x1, g1)
    } else {
        (x2, g2)
    }
}

/// Chooses the power level maximizing `π_A(B(y))` on `[0, 1]`.
///
/// `π_A` is nondecreasing, so this is the argmax of `B` found on a dense grid
/// and polished by golden-section search around the best node. Exact ties go
/// to the smaller `y`. If `π_A` saturates below `max B`, the least `y`
/// reaching the satiation level is returned.
pub fn optimize_power(
    f: &FunctionDescriptor,
    c: &FunctionDescriptor,
    pi_a: &FunctionDescriptor,
    opts: PowerOptions,
) -> Result<PowerSolution, SolveError> {
    f.evaluate(1.0)?;
    c.evaluate(0.0)?;
    c.evaluate(1.0)?;
    let b = |y: f64| net_resources(f, c, y);
    let ys: Vec<f64> = grid(opts.grid_points).collect();
    let bs: Vec<f64> = ys.iter().map(|&y| b(y)).collect();

    let mut best = 0;
    for i in 1..bs.len() {
        if bs[i] > bs[best] {
            best = i;
        }
    }
    let (mut y_star, mut b_star) = (ys[best], bs[best]);
    let lo = ys[best.saturating_sub(1)];
    let hi = ys[(best + 1).min(ys.len() - 1)];
    let (y_ref, b_ref) = golden_max(b, lo, hi);
    if b_ref > b_star {
        (y_star, b_star) = (y_ref, b_ref);
    }

    let condition_verdict = check_prop2_conditions(f, c, opts.grid_points, opts.root_tol);
    let objective_curve = grid(opts.curve_points).map(|y| (y, b(y))).collect();

    if b_star < 0.0 {
        return Ok(PowerSolution {
            y_star: 0.0,
            net_resources: 0.0,
            objective_curve,
            condition_verdict,
            boundary: false,
            acquires_power: false,
            satiated: false,
            foc_residual: None,
        });
    }

    let mut satiated = false;
    if let Satiation::Finite(level) = pi_a.satiation_point(opts.root_tol) {
        if b_star > level {
            satiated = true;
            let first = bs.iter().position(|&v| v >= level).unwrap_or(best);
            y_star = if first == 0 {
                0.0
            } else {
                let (mut l, mut h) = (ys[first - 1], ys[first]);
                for _ in 0..100 {
                    let m = 0.5 * (l + h);
                    if b(m) >= level {
                        h = m;
                    } else {
                        l = m;
                    }
                }
                h
            };
            b_star = b(y_star);
        }
    }

    let tol = opts.root_tol;
    let interior = y_star > tol && y_star < 1.0 - tol && !satiated;
    let foc_residual = if interior {
        match (f.evaluate(y_star), c.derivative(y_star), f.derivative(y_star)) {
            (Ok(fy), Ok(dc), Ok(df)) if !dc.kink && !df.kink => Some((fy - dc.value).abs()),
            _ => None,
        }
    } else {
        None
    };

    Ok(PowerSolution {
        y_star,
        net_resources: b_star,
        objective_curve,
        condition_verdict,
        boundary: (y_star - 1.0).abs() < tol,
        acquires_power: true,
        satiated,
        foc_residual,
    })
}

/// Scans `[0, 1]` for the two sufficient conditions of a full-power choice:
///
/// * concave objective with positive end slope: `f'(s) ≤ c''(s)` for all `s`
///   and `f(1) > c'(1)`;
/// * dominant marginal benefit: `f(s) > c'(s)` for all `s`.
///
/// Strict inequalities need a margin of `tol`; the weak one tolerates `tol`.
pub fn check_prop2_conditions(f: &FunctionDescriptor, c: &FunctionDescriptor, points: usize, tol: f64) -> Prop2Verdict {
    let slope = |g: &FunctionDescriptor, s: f64| g.derivative(s).map(|d| d.value).unwrap_or(f64::NAN);
    let value = |g: &FunctionDescriptor, s: f64| g.evaluate(s).unwrap_or(f64::NAN);
    let curvature = |g: &FunctionDescriptor, s: f64| g.second_derivative(s).unwrap_or(f64::NAN);

    let end_slope_positive = value(f, 1.0) - slope(c, 1.0) > tol;
    let concave = end_slope_positive && grid(points).all(|s| slope(f, s) - curvature(c, s) <= tol);
    let dominant = grid(points).all(|s| value(f, s) - slope(c, s) > tol);
    match (concave, dominant) {
        (true, true) => Prop2Verdict::Both,
        (true, false) => Prop2Verdict::Concave,
        (false, true) => Prop2Verdict::Dominant,
        (false, false) => Prop2Verdict::Neither,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(f: FunctionDescriptor, c: FunctionDescriptor) -> PowerSolution {
        optimize_power(&f, &c, &FunctionDescriptor::linear(1.0), PowerOptions::default()).unwrap()
    }

    #[test]
    fn interior_optimum_uniform_quadratic() {
        let s = solve(FunctionDescriptor::constant(1.0), FunctionDescriptor::quadratic(1.0));
        assert!((s.y_star - 0.5).abs() < 1e-9, "{}", s.y_star);
        assert!((s.net_resources - 0.25).abs() < 1e-12);
        assert_eq!(s.condition_verdict, Prop2Verdict::Neither);
        assert!(!s.boundary);
        assert!(s.foc_residual.unwrap() < 1e-6);
    }

    #[test]
    fn full_power_with_cheap_cost() {
        let s = solve(FunctionDescriptor::constant(1.0), FunctionDescriptor::quadratic(0.25));
        assert_eq!(s.y_star, 1.0);
        assert!((s.net_resources - 0.75).abs() < 1e-12);
        assert!(s.boundary);
        assert_eq!(s.condition_verdict, Prop2Verdict::Both);
    }

    #[test]
    fn interior_optimum_linear_endowment_cubic_cost() {
        let s = solve(FunctionDescriptor::linear(2.0), FunctionDescriptor::power(1.0, 3.0));
        assert!((s.y_star - 2.0 / 3.0).abs() < 1e-8, "{}", s.y_star);
        assert!((s.net_resources - 4.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn zero_cost_satisfies_both_conditions() {
        let v = check_prop2_conditions(&FunctionDescriptor::constant(1.0), &FunctionDescriptor::constant(0.0), DEFAULT_GRID, 1e-9);
        assert_eq!(v, Prop2Verdict::Both);
    }

    #[test]
    fn never_worth_acquiring() {
        let s = solve(FunctionDescriptor::constant(0.1), FunctionDescriptor::quadratic_full(1.0, 0.0, 0.5));
        assert!(!s.acquires_power);
        assert_eq!((s.y_star, s.net_resources), (0.0, 0.0));
    }

    #[test]
    fn satiated_ai_stops_early() {
        let f = FunctionDescriptor::constant(1.0);
        let c = FunctionDescriptor::quadratic(0.25);
        let s = optimize_power(&f, &c, &FunctionDescriptor::capped_linear(0.36, 1.0), PowerOptions::default()).unwrap();
        // y − y²/4 = 0.36 at y = 2 − 2·√0.64 = 0.4
        assert!(s.satiated);
        assert!((s.y_star - 0.4).abs() < 1e-12, "{}", s.y_star);
        assert!((s.net_resources - 0.36).abs() < 1e-12);
    }

    #[test]
    fn verdict_tags_serialize_as_contract() {
        assert_eq!(serde_json::to_string(&Prop2Verdict::Concave).unwrap(), "\"prop2-i\"");
        assert_eq!(serde_json::to_string(&Prop2Verdict::Neither).unwrap(), "\"none\"");
    }
}
