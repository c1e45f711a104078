use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::model::FunctionDescriptor;

const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechnologySolution {
    pub theta_star: f64,
    /// `min(r(θ*), X)`.
    pub extracted: f64,
    /// `extracted − θ*`.
    pub net: f64,
    /// Extraction would exceed `X`; θ* was pulled back to the least θ with `r(θ) = X`.
    pub corner: bool,
    /// `r'(0) < 1`: investment never pays.
    pub degenerate: bool,
}

/// Smallest point of `[lo, hi]` where the nonincreasing predicate flips to
/// true, assuming `done(hi)` holds and `done(lo)` does not.
fn bisect(mut lo: f64, mut hi: f64, done: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if done(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Maximizes `min(r(θ), X) − θ` over `θ ∈ [0, min(X, domain end)]`.
///
/// For concave `r` the interior optimum solves `r'(θ) = 1`; flat stretches of
/// the slope resolve to the smallest maximizer. If the optimum extracts more
/// than `X`, the least θ with `r(θ) = X` is returned instead.
pub fn optimize_technology(r: &FunctionDescriptor, total: f64, tol: f64) -> Result<TechnologySolution, SolveError> {
    if !(total > 0.0 && total.is_finite()) {
        return Err(SolveError::InvalidArgument(format!("total resources must be positive, got {total}")));
    }
    let lo = r.domain().lo.max(0.0);
    let hi = r.domain().hi.min(total).max(lo);
    let slope = |theta: f64| r.derivative(theta).map(|s| s.value).unwrap_or(f64::NAN);
    let excess = |theta: f64| slope(theta) - 1.0;

    let degenerate = slope(lo) < 1.0 - tol;
    let mut theta = if excess(lo) <= 0.0 {
        lo
    } else if excess(hi) > 0.0 {
        hi
    } else {
        bisect(lo, hi, |t| excess(t) <= 0.0)
    };

    let mut corner = false;
    if r.evaluate(theta)? > total {
        corner = true;
        theta = if r.evaluate(lo)? >= total { lo } else { bisect(lo, theta, |t| r.at(t) >= total) };
    }
    let extracted = r.evaluate(theta)?.min(total);
    Ok(TechnologySolution { theta_star: theta, extracted, net: extracted - theta, corner, degenerate })
}
