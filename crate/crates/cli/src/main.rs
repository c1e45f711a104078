use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use junglesim::control::Action;
use junglesim::corpus::{self, Check};
use junglesim::io::{self, BaseScenario, Format, Override, RunRecord};
use junglesim::model::Scenario;
use junglesim::run::{run, Command, CommandResult, RunOutcome};

/// Simulator for resource appropriation in a jungle economy with a
/// goal-directed AI: equilibrium, technology, power accumulation, the control
/// problem and the activation game.
#[derive(Parser, Debug)]
#[command(name = "junglesim", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Jungle equilibrium: the strongest agent takes what it wants first.
    /// Also checks whether an AI stronger than every human and never satiated
    /// ends up holding all resources.
    Equilibrium(SolveArgs),
    /// Production technology: the investment θ maximizing min(r(θ), X) − θ.
    Tech(SolveArgs),
    /// Power accumulation: the power level y maximizing ∫₀^y f − c(y), with
    /// the sufficient conditions for taking all power.
    Power(SolveArgs),
    /// Accumulation path: whether power can be bootstrapped step by step
    /// from zero out of already appropriated resources.
    Path(SolveArgs),
    /// Control problem: whether an activated AI has different interests, is
    /// not satiated by the activator's resources and is stronger than it.
    Control(SolveArgs),
    /// Activation game: which offspring AIs a paperclip AI activates when
    /// research AIs are controllable and power accumulators are not.
    Game(SolveArgs),
    /// Parameter sweep: runs one command over every scenario of a sweep file.
    Sweep(SweepArgs),
    /// Runs every solver against its brute-force oracle on the golden corpus
    /// (or the scenarios in --scenario) and reports pass or fail.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Overrides {
    /// Override a scenario parameter, e.g. `--set power_cost.params.0=2`. Repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    set: Vec<String>,
    /// Override `grid_n`, the number of agents discretizing the endowment.
    #[arg(long, value_name = "INT")]
    grid_n: Option<usize>,
    /// Override `tolerances.dy`, the power step of the accumulation path.
    #[arg(long, value_name = "FLOAT")]
    dy: Option<f64>,
}

impl Overrides {
    fn collect(&self) -> Result<Vec<Override>> {
        let mut out = self.set.iter().map(|s| Override::parse(s)).collect::<Result<Vec<_>, _>>()?;
        if let Some(n) = self.grid_n {
            out.push(Override::new("grid_n", n.into()));
        }
        if let Some(dy) = self.dy {
            out.push(Override::new("tolerances.dy", dy.into()));
        }
        Ok(out)
    }
}

#[derive(Args, Debug)]
struct Output {
    /// Directory for run records and manifest.json.
    #[arg(long, env = "JUNGLESIM_OUT", value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_name = "csv|json")]
    format: Format,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Scenario file (JSON).
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Sweep file (JSON) naming a base scenario and its axes.
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Command to run on every scenario.
    #[arg(long = "run", value_name = "COMMAND")]
    command: Command,
    /// Seed of random draw axes; replaces the sweep file's seed.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, value_name = "INT")]
    jobs: Option<usize>,
    /// Applied to the base scenario before expansion.
    #[command(flatten)]
    overrides: Overrides,
    /// Without --out the results table goes to stdout.
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Scenario file or directory of scenario files instead of the golden corpus.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    #[arg(long, value_name = "INT")]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` is a reported infeasibility, violation or failed oracle check.
fn dispatch(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Equilibrium(a) => solve(Command::Equilibrium, a),
        Cmd::Tech(a) => solve(Command::Tech, a),
        Cmd::Power(a) => solve(Command::Power, a),
        Cmd::Path(a) => solve(Command::Path, a),
        Cmd::Control(a) => solve(Command::Control, a),
        Cmd::Game(a) => solve(Command::Game, a),
        Cmd::Sweep(a) => sweep(a),
        Cmd::Verify(a) => verify(a),
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

fn execute(command: Command, s: &Scenario) -> Result<(RunOutcome, RunRecord)> {
    let out = run(command, s).with_context(|| format!("{command} failed"))?;
    let record = RunRecord::new(s, command.as_str(), out.result.clone(), out.certification.clone());
    Ok((out, record))
}

fn solve(command: Command, a: SolveArgs) -> Result<bool> {
    let s = io::load_scenario_with(&a.scenario, &a.overrides.collect()?)?;
    let (out, record) = execute(command, &s)?;
    for (k, v) in describe(&out.result) {
        println!("{k}={v}");
    }
    for (k, ok) in &out.certification {
        println!("oracle.{k}={}", if *ok { "pass" } else { "FAIL" });
    }
    if let Some(dir) = &a.output.out {
        let manifest = io::write_results(&[record], dir, a.output.format)?;
        println!("manifest={}", manifest.display());
    }
    Ok(!out.failed())
}

/// Rounds away float noise for display; records keep full precision.
fn num(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        "0".into()
    } else {
        r.to_string()
    }
}

fn describe(r: &CommandResult) -> Vec<(&'static str, String)> {
    match r {
        CommandResult::Equilibrium { equilibrium, prop1 } => {
            let mut out: Vec<(&str, String)> = vec![("certified", equilibrium.certified.to_string())];
            let mut held = String::new();
            for h in equilibrium.allocation.holdings.iter().filter(|h| h.amount > 0.0) {
                if !held.is_empty() {
                    held.push(' ');
                }
                held.push_str(&format!("{}:{}", h.holder, num(h.amount)));
            }
            out.push(("holdings", held));
            out.push(("ai_holding", num(prop1.ai_holding)));
            out.push(("total", num(prop1.total)));
            out.push(("all_to_ai.premises", prop1.premises_hold.to_string()));
            out.push(("all_to_ai.conclusion", prop1.conclusion_holds.to_string()));
            out
        }
        CommandResult::Tech(t) => vec![
            ("theta*", num(t.theta_star)),
            ("extracted", num(t.extracted)),
            ("net", num(t.net)),
            ("corner", t.corner.to_string()),
            ("degenerate", t.degenerate.to_string()),
        ],
        CommandResult::Power(p) => vec![
            ("y*", num(p.y_star)),
            ("net", num(p.net_resources)),
            ("verdict", p.condition_verdict.to_string()),
            ("acquires_power", p.acquires_power.to_string()),
            ("satiated", p.satiated.to_string()),
        ],
        CommandResult::Path(p) => {
            let mut out = vec![("feasible", p.feasible.to_string()), ("steps", p.trajectory.len().to_string())];
            if let Some(k) = p.first_failure {
                out.push(("first_failure", k.to_string()));
            }
            out
        }
        CommandResult::Control(c) => vec![
            ("interests_differ", c.cond_interests_differ.to_string()),
            ("resources_exceed", c.cond_resources_exceed.to_string()),
            ("power_exceeds", c.cond_power_exceeds.to_string()),
            ("control_problem", c.control_problem.to_string()),
        ],
        CommandResult::Game { profile, prop3 } => {
            let path: Vec<String> = profile.path.iter().map(|(node, a)| format!("{node}:{}", tag(a))).collect();
            vec![
                ("path", path.join(" ")),
                ("root_payoff", num(profile.payoffs[0])),
                ("activates_research", profile.activates_research().to_string()),
                ("activates_power", profile.activates_power().to_string()),
                ("equilibrium", profile.equilibrium.to_string()),
                ("no_power_activation", prop3.holds.to_string()),
            ]
        }
    }
}

fn tag(a: &Action) -> String {
    serde_json::to_value(a).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn sweep(a: SweepArgs) -> Result<bool> {
    let mut spec = io::load_sweep(&a.scenario)?;
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let overrides = a.overrides.collect()?;
    if !overrides.is_empty() {
        let base = match &spec.base {
            BaseScenario::File(p) => io::load_scenario_with(p, &overrides)?,
            BaseScenario::Inline(s) => io::apply_overrides((**s).clone(), &overrides, "sweep base")?,
        };
        spec.base = BaseScenario::Inline(Box::new(base));
    }
    let scenarios = io::expand_sweep(&spec)?;
    let results: Vec<(RunOutcome, RunRecord)> =
        pool(a.jobs)?.install(|| scenarios.par_iter().map(|s| execute(a.command, s)).collect::<Result<_>>())?;
    let failed = results.iter().filter(|(o, _)| o.failed()).count();
    let records: Vec<RunRecord> = results.into_iter().map(|(_, r)| r).collect();
    match &a.output.out {
        Some(dir) => {
            let manifest = io::write_results(&records, dir, a.output.format)?;
            eprintln!("{} runs, {failed} infeasible or uncertified, manifest {}", records.len(), manifest.display());
        }
        None => match a.output.format {
            Format::Csv => print!("{}", io::csv_table(&records)),
            Format::Json => println!("{}", serde_json::to_string_pretty(&records)?),
        },
    }
    Ok(failed == 0)
}

fn scenarios_at(path: &Path) -> Result<Vec<(String, Scenario)>> {
    if path.is_dir() {
        return Ok(corpus::load_dir(path)?);
    }
    let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
    Ok(vec![(name, io::load_scenario(path)?)])
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let scenarios = match &a.scenario {
        Some(p) => scenarios_at(p)?,
        None => corpus::golden_all()?,
    };
    if scenarios.is_empty() {
        bail!("no scenarios to verify");
    }
    let checks: Vec<Check> =
        pool(a.jobs)?.install(|| scenarios.par_iter().flat_map_iter(|(name, s)| corpus::verify_scenario(name, s)).collect());
    for c in &checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        if c.detail.is_empty() {
            println!("{mark} {} {}", c.scenario, c.command);
        } else {
            println!("{mark} {} {}: {}", c.scenario, c.command, c.detail);
        }
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    println!("{passed} of {} checks passed over {} scenarios", checks.len(), scenarios.len());
    Ok(passed == checks.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn display_rounds_float_noise() {
        assert_eq!(num(0.5000000000001), "0.5");
        assert_eq!(num(-1e-12), "0");
        assert_eq!(num(2.0), "2");
    }

    #[test]
    fn shorthand_flags_become_overrides() {
        let o = Overrides { set: vec!["free_pool=1".into()], grid_n: Some(5), dy: Some(0.1) };
        let paths: Vec<String> = o.collect().unwrap().into_iter().map(|o| o.path).collect();
        assert_eq!(paths, ["free_pool", "grid_n", "tolerances.dy"]);
    }
}
