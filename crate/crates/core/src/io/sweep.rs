use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};

use super::load::{check, load_scenario, normalized_document, scenario_from_value, set_path};
use crate::error::IoError;
use crate::model::{Domain, Family, FunctionDescriptor, Scenario};

/// Default cap on the number of scenarios one sweep may expand to.
pub const SWEEP_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseScenario {
    File(PathBuf),
    Inline(Box<Scenario>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    /// Inclusive when it falls on the step grid.
    pub stop: f64,
    pub step: f64,
}

/// Random function descriptors: each parameter drawn uniformly from its range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Draw {
    pub family: Family,
    pub param_ranges: Vec<[f64; 2]>,
    pub count: usize,
    #[serde(default)]
    pub domain: Option<Domain>,
}

/// One sweep dimension. Exactly one of `values`, `range` or `draw` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draw: Option<Draw>,
}

impl Axis {
    pub fn values(path: impl Into<String>, values: Vec<Value>) -> Self {
        Axis { path: path.into(), values: Some(values), range: None, draw: None }
    }

    pub fn range(path: impl Into<String>, start: f64, stop: f64, step: f64) -> Self {
        Axis { path: path.into(), values: None, range: Some(Range { start, stop, step }), draw: None }
    }

    pub fn draw(path: impl Into<String>, draw: Draw) -> Self {
        Axis { path: path.into(), values: None, range: None, draw: Some(draw) }
    }

    fn bad(&self, reason: impl Into<String>) -> IoError {
        IoError::BadAxis { path: self.path.clone(), reason: reason.into() }
    }

    fn len(&self) -> Result<usize, IoError> {
        match (&self.values, &self.range, &self.draw) {
            (Some(v), None, None) => Ok(v.len()),
            (None, Some(r), None) => {
                if !(r.step > 0.0 && r.stop >= r.start && r.start.is_finite() && r.stop.is_finite()) {
                    return Err(self.bad(format!("need step > 0 and stop ≥ start, got {r:?}")));
                }
                let n = ((r.stop - r.start) / r.step + 1e-9).floor() + 1.0;
                if n > usize::MAX as f64 / 2.0 {
                    return Err(self.bad("range too long"));
                }
                Ok(n as usize)
            }
            (None, None, Some(d)) => Ok(d.count),
            _ => Err(self.bad("exactly one of `values`, `range` or `draw` is required")),
        }
    }

    fn materialize(&self, index: usize, seed: u64) -> Result<Vec<Value>, IoError> {
        if let Some(v) = &self.values {
            return Ok(v.clone());
        }
        if let Some(r) = &self.range {
            let n = self.len()?;
            return Ok((0..n).map(|i| Value::from(r.start + i as f64 * r.step)).collect());
        }
        let d = self.draw.as_ref().expect("axis shape checked by len");
        if d.param_ranges.iter().any(|[lo, hi]| !(lo <= hi && lo.is_finite() && hi.is_finite())) {
            return Err(self.bad("every param range needs finite lo ≤ hi"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        (0..d.count)
            .map(|_| {
                let params = d.param_ranges.iter().map(|&[lo, hi]| if lo == hi { lo } else { rng.gen_range(lo..hi) }).collect();
                let fd = match d.domain {
                    Some(dom) => FunctionDescriptor::with_domain(d.family, params, dom),
                    None => FunctionDescriptor::new(d.family, params),
                }
                .map_err(|e| self.bad(e.to_string()))?;
                Ok(serde_json::to_value(fd).expect("descriptor serializes"))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: BaseScenario,
    #[serde(default)]
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_budget() -> usize {
    SWEEP_BUDGET
}

impl SweepSpec {
    pub fn new(base: Scenario) -> Self {
        SweepSpec { base: BaseScenario::Inline(Box::new(base)), axes: vec![], seed: 0, budget: SWEEP_BUDGET }
    }

    /// Number of scenarios the sweep expands to.
    pub fn size(&self) -> Result<usize, IoError> {
        self.axes.iter().try_fold(1usize, |acc, a| Ok(acc.saturating_mul(a.len()?)))
    }
}

/// Reads a sweep file; a relative base path is taken relative to it.
pub fn load_sweep(path: impl AsRef<Path>) -> Result<SweepSpec, IoError> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| IoError::Parse {
        origin: origin.clone(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut spec: SweepSpec = serde_path_to_error::deserialize(doc).map_err(|e| IoError::Schema {
        origin,
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if let BaseScenario::File(base) = &mut spec.base {
        if base.is_relative() {
            *base = path.parent().unwrap_or(Path::new(".")).join(&*base);
        }
    }
    Ok(spec)
}

/// Expands the Cartesian product of the axes over the base scenario. The
/// first axis varies slowest. Every expanded scenario is validated.
pub fn expand_sweep(spec: &SweepSpec) -> Result<Vec<Scenario>, IoError> {
    let base = match &spec.base {
        BaseScenario::File(p) => load_scenario(p)?,
        BaseScenario::Inline(s) => check((**s).clone(), "sweep base")?,
    };
    let size = spec.size()?;
    if size > spec.budget {
        return Err(IoError::Budget { size, budget: spec.budget });
    }
    let doc = normalized_document(&base);
    for axis in &spec.axes {
        set_path(&mut doc.clone(), &axis.path, Value::Null)?;
    }
    let columns: Vec<Vec<Value>> =
        spec.axes.iter().enumerate().map(|(i, a)| a.materialize(i, spec.seed)).collect::<Result<_, _>>()?;

    let mut out = Vec::with_capacity(size);
    for k in 0..size {
        let mut d = doc.clone();
        let mut rest = k;
        for (axis, column) in spec.axes.iter().zip(&columns).rev() {
            set_path(&mut d, &axis.path, column[rest % column.len()].clone())?;
            rest /= column.len();
        }
        let origin = format!("sweep[{k}]");
        out.push(check(scenario_from_value(d, &origin)?, &origin)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Scenario {
        let mut s = Scenario::new(FunctionDescriptor::constant(1.0));
        s.power_cost = Some(FunctionDescriptor::quadratic(1.0));
        s
    }

    #[test]
    fn product_in_axis_order() {
        let mut spec = SweepSpec::new(base());
        spec.axes = vec![
            Axis::values("free_pool", vec![json!(0.0), json!(1.0), json!(2.0)]),
            Axis::range("power_cost.params.0", 0.25, 1.0, 0.25),
        ];
        let out = expand_sweep(&spec).unwrap();
        assert_eq!(out.len(), 12);
        let keys: Vec<(f64, f64)> = out.iter().map(|s| (s.free_pool, s.power_cost.as_ref().unwrap().params()[0])).collect();
        assert_eq!(keys[0], (0.0, 0.25));
        assert_eq!(keys[1], (0.0, 0.5));
        assert_eq!(keys[4], (1.0, 0.25));
        assert_eq!(keys[11], (2.0, 1.0));
    }

    #[test]
    fn no_axes_is_identity() {
        assert_eq!(expand_sweep(&SweepSpec::new(base())).unwrap(), vec![base()]);
    }

    #[test]
    fn draws_are_reproducible() {
        let mut spec = SweepSpec::new(base());
        spec.seed = 7;
        let draw = Draw { family: Family::Quadratic, param_ranges: vec![[0.1, 2.0]], count: 5, domain: None };
        spec.axes = vec![Axis::draw("power_cost", draw)];
        let a = expand_sweep(&spec).unwrap();
        assert_eq!(a, expand_sweep(&spec).unwrap());
        assert_eq!(a.len(), 5);
        spec.seed = 8;
        assert_ne!(a, expand_sweep(&spec).unwrap());
    }

    #[test]
    fn budget_reports_size() {
        let mut spec = SweepSpec::new(base());
        spec.budget = 10;
        spec.axes = vec![Axis::range("free_pool", 0.0, 1.0, 0.01), Axis::range("power_cost.params.0", 0.0, 1.0, 0.5)];
        assert!(matches!(expand_sweep(&spec), Err(IoError::Budget { size: 303, budget: 10 })));
    }

    #[test]
    fn axis_paths_must_resolve() {
        let mut spec = SweepSpec::new(base());
        spec.axes = vec![Axis::values("ai.strength", vec![json!(1.0)])];
        assert!(matches!(expand_sweep(&spec), Err(IoError::UnknownPath(_))));
        spec.axes = vec![Axis { path: "free_pool".into(), values: None, range: None, draw: None }];
        assert!(matches!(expand_sweep(&spec), Err(IoError::BadAxis { .. })));
    }
}
