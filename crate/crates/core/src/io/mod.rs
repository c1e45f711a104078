//! Scenario files, parameter sweeps and result persistence.

mod load;
mod record;
mod sweep;

pub use load::{
    apply_overrides, check, load_scenario, load_scenario_with, normalized_document, parse_scenario, scenario_from_value, set_path,
    Override,
};
pub use record::{
    canonical_json, csv_header, csv_table, digest, read_record, timestamp, write_results, Cell, Format, Manifest, ManifestEntry,
    RunRecord, CSV_COLUMNS, TOOL_VERSION,
};
pub use sweep::{expand_sweep, load_sweep, Axis, BaseScenario, Draw, Range, SweepSpec, SWEEP_BUDGET};
