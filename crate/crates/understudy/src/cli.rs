//! Command-line front end: seeded experiment runs that leave auditable
//! artifacts behind.
//!
//! Three subcommands share one contract: every run echoes its fully
//! resolved configuration to `config.json` in the output directory, every
//! random draw descends from the recorded seeds, and rerunning the same
//! configuration reproduces every artifact byte for byte (the one exception
//! is `--timing`, which opts into real wall-clock numbers).
//!
//! * `toy-run` — travel-agency episodes over a list of seeds; writes
//!   `summary.csv`, `aggregate.csv`, and per-seed query records (text and,
//!   when the step count is a multiple of 256, a PBM bitmap with one pixel
//!   per step) plus posterior tables.
//! * `bounds-check` — the bound catalog: exact enumeration suite (T1–T5),
//!   statistical suites (T1–T3 on episodes, T6–T7/L1 on streams), and the
//!   pointwise inequality sweep; writes `reports.csv` and exits nonzero if
//!   any check fails.
//! * `smap-demo` — one sequence-prediction stream with every estimator
//!   evaluated on the realized next symbol; writes `estimators.csv`.
//!
//! Flags override config-file fields, which override defaults.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::exact::{run_exact_checks, standard_exact_configs, DEFAULT_EXACT_SLACK};
use crate::bounds::mc::{mc_imitation_checks, McConfig, McScenario};
use crate::bounds::sweep::{smap_inequality_checks, SweepConfig};
use crate::bounds::BoundReport;
use crate::bounds::mc::mc_sequence_checks;
use crate::policy::{sample_categorical, FixedActionPolicy, IidEnvironment};
use crate::posterior::{ContextSignature, WeightedModelClass};
use crate::smap::{IidCategorical, MarkovChain, Measure, MeasureClass, SequenceMcConfig};
use crate::toyworld::{
    run_many, toy_class, ToyDemonstrator, ToyRunConfig, ToyWorld, TruthSpec, DEFAULT_ALPHA,
    DEFAULT_CLIENTS, DEFAULT_STEPS, SHOWCASE_TRUTH,
};
use crate::{Error, PolicyModel, Result};

/// Generator recorded in every config echo.
pub const RNG_LABEL: &str = "chacha12";

const DEFAULT_SEED_COUNT: u64 = 20;
const MAX_SEED_COUNT: u64 = 100_000;

#[derive(Debug, Parser)]
#[command(
    name = "understudy",
    version,
    about = "Conservative Bayesian imitation: toy runs, bound checks, estimator traces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the travel-agency world over seeds and write per-seed artifacts.
    ToyRun(ToyRunArgs),
    /// Verify the bound catalog and write a report table.
    BoundsCheck(BoundsArgs),
    /// Trace the sequence-prediction estimators along one sampled stream.
    SmapDemo(SmapArgs),
}

/// Execute a parsed command line. Returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::ToyRun(args) => cmd_toy_run(&args),
        Command::BoundsCheck(args) => cmd_bounds_check(&args),
        Command::SmapDemo(args) => cmd_smap_demo(&args),
    }
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    if !out.is_dir() {
        return Err(Error::config(format!(
            "output directory {} does not exist",
            out.display()
        )));
    }
    Ok(())
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn write_echo<T: Serialize>(out: &Path, echo: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(echo)?;
    text.push('\n');
    fs::write(out.join("config.json"), text)?;
    Ok(())
}

fn prob(x: f64) -> String {
    format!("{x:.6e}")
}

// ---------------------------------------------------------------- toy-run

#[derive(Args, Debug)]
pub struct ToyRunArgs {
    /// JSON config file; explicit flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Clients the agency serves (1..=3).
    #[arg(long)]
    pub clients: Option<usize>,
    /// Interaction steps per seed.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Top-set confidence.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Run seeds 0..N (ignored when --seed-list is given).
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Explicit comma-separated seeds.
    #[arg(long, value_delimiter = ',', value_name = "SEEDS")]
    pub seed_list: Option<Vec<u64>>,
    /// "random", "showcase", or 4*clients comma-separated indices into the
    /// propensity grid.
    #[arg(long)]
    pub truth: Option<String>,
    /// Record real wall-clock times (sacrifices byte-identical reruns).
    #[arg(long)]
    pub timing: bool,
    /// Existing directory that receives the artifacts.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ToyFile {
    clients: Option<usize>,
    steps: Option<usize>,
    alpha: Option<f64>,
    seeds: Option<u64>,
    seed_list: Option<Vec<u64>>,
    truth: Option<String>,
    timing: Option<bool>,
}

#[derive(Debug, Serialize)]
struct ToyEcho {
    command: &'static str,
    rng: &'static str,
    clients: usize,
    steps: usize,
    alpha: f64,
    truth: String,
    timing: bool,
    seeds: Vec<u64>,
}

fn expand_seed_count(count: u64) -> Result<Vec<u64>> {
    if count == 0 || count > MAX_SEED_COUNT {
        return Err(Error::config(format!(
            "seed count must lie in 1..={MAX_SEED_COUNT}, got {count}"
        )));
    }
    Ok((0..count).collect())
}

/// Turn the `--truth` spelling into a [`TruthSpec`].
fn parse_truth(spec: &str, clients: usize) -> Result<TruthSpec> {
    match spec {
        "random" => Ok(TruthSpec::RandomPerSeed),
        "showcase" => {
            if clients != 3 {
                return Err(Error::config(
                    "the showcase truth is a three-client tuple; use --clients 3",
                ));
            }
            Ok(TruthSpec::Fixed(SHOWCASE_TRUTH.to_vec()))
        }
        list => {
            let values: std::result::Result<Vec<usize>, _> =
                list.split(',').map(|v| v.trim().parse::<usize>()).collect();
            match values {
                Ok(values) => Ok(TruthSpec::Fixed(values)),
                Err(_) => Err(Error::config(format!(
                    "truth must be \"random\", \"showcase\", or comma-separated indices, got {spec:?}"
                ))),
            }
        }
    }
}

fn cmd_toy_run(args: &ToyRunArgs) -> Result<i32> {
    ensure_out_dir(&args.out)?;
    let file: ToyFile = match &args.config {
        Some(path) => load_json(path)?,
        None => ToyFile::default(),
    };

    let clients = args.clients.or(file.clients).unwrap_or(DEFAULT_CLIENTS);
    let steps = args.steps.or(file.steps).unwrap_or(DEFAULT_STEPS);
    let alpha = args.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA);
    let timing = args.timing || file.timing.unwrap_or(false);
    let truth_text = args
        .truth
        .clone()
        .or(file.truth)
        .unwrap_or_else(|| "random".to_string());
    let seeds = match (&args.seed_list, &file.seed_list, args.seeds, file.seeds) {
        (Some(list), _, _, _) => list.clone(),
        (None, Some(list), _, _) => list.clone(),
        (None, None, Some(count), _) => expand_seed_count(count)?,
        (None, None, None, Some(count)) => expand_seed_count(count)?,
        (None, None, None, None) => expand_seed_count(DEFAULT_SEED_COUNT)?,
    };
    if seeds.is_empty() {
        return Err(Error::config("at least one seed is required"));
    }

    let truth = parse_truth(&truth_text, clients)?;
    let config = ToyRunConfig {
        clients,
        steps,
        alpha,
        truth,
    };
    let summaries = run_many(&config, &seeds)?;

    write_echo(
        &args.out,
        &ToyEcho {
            command: "toy-run",
            rng: RNG_LABEL,
            clients,
            steps,
            alpha,
            truth: truth_text,
            timing,
            seeds: seeds.clone(),
        },
    )?;

    // summary.csv: one row per seed.
    let mut summary = String::from("seed,steps,queries");
    for c in 1..=clients {
        summary.push_str(&format!(",quits_client{c}"));
    }
    summary.push_str(",final_truth_posterior,wall_time\n");
    for s in &summaries {
        summary.push_str(&format!("{},{},{}", s.seed, s.steps, s.queries));
        for &quit in &s.quits {
            summary.push_str(if quit { ",true" } else { ",false" });
        }
        let wall = if timing {
            format!("{:.3}", s.wall_seconds)
        } else {
            "0.000".to_string()
        };
        summary.push_str(&format!(",{},{}\n", prob(s.truth_posterior), wall));
    }
    fs::write(args.out.join("summary.csv"), summary)?;

    // aggregate.csv: the query statistics the world is judged by.
    let queries: Vec<f64> = summaries.iter().map(|s| s.queries as f64).collect();
    let (mean, sd, _) = crate::math::sample_stats(&queries);
    let total_quits: usize = summaries.iter().map(|s| s.quit_count()).sum();
    let total_violations: u64 = summaries.iter().map(|s| s.conservatism_violations).sum();
    let aggregate = format!(
        "seeds,mean_queries,sd_queries,min_queries,max_queries,total_quits,total_conservatism_violations\n{},{:.4},{:.4},{},{},{},{}\n",
        summaries.len(),
        mean,
        sd,
        summaries.iter().map(|s| s.queries).min().unwrap_or(0),
        summaries.iter().map(|s| s.queries).max().unwrap_or(0),
        total_quits,
        total_violations,
    );
    fs::write(args.out.join("aggregate.csv"), aggregate)?;

    for s in &summaries {
        let flags: String = s
            .query_flags
            .iter()
            .map(|&q| if q { '1' } else { '0' })
            .chain(std::iter::once('\n'))
            .collect();
        fs::write(args.out.join(format!("query_record_{}.txt", s.seed)), flags)?;
        if steps > 0 && steps % 256 == 0 {
            fs::write(
                args.out.join(format!("query_record_{}.pbm", s.seed)),
                pbm_query_record(&s.query_flags),
            )?;
        }
        fs::write(
            args.out.join(format!("posterior_{}.csv", s.seed)),
            &s.posterior_csv,
        )?;
    }

    for s in &summaries {
        println!(
            "seed {}: {} queries over {} steps, {} quits, truth posterior {:.4}",
            s.seed,
            s.queries,
            s.steps,
            s.quit_count(),
            s.truth_posterior
        );
    }
    println!(
        "aggregate: mean queries {:.2} (sd {:.2}) across {} seeds, {} quits, {} conservatism violations",
        mean,
        sd,
        summaries.len(),
        total_quits,
        total_violations
    );
    Ok(0)
}

/// Query record as a portable bitmap: 256 steps per pixel row, a queried
/// step painted black. Requires the flag count to be a multiple of 256.
fn pbm_query_record(flags: &[bool]) -> String {
    const WIDTH: usize = 256;
    const PER_LINE: usize = 64;
    debug_assert!(!flags.is_empty() && flags.len() % WIDTH == 0);
    let height = flags.len() / WIDTH;
    let mut out = format!("P1\n{WIDTH} {height}\n");
    for line in flags.chunks(PER_LINE) {
        for &bit in line {
            out.push(if bit { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

// ------------------------------------------------------------ bounds-check

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// JSON config file; explicit flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Run only the exact checks (enumeration suite and pointwise sweep),
    /// skipping the Monte Carlo suites.
    #[arg(long)]
    pub exact: bool,
    /// Comma-separated checks to run: theorem1..theorem5, theorem6i,
    /// theorem6ii, theorem7, lemma1, ineq7..ineq10, ineq_suite, phi_size.
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    pub checks: Option<Vec<String>>,
    /// Top-set confidence for the statistical imitation checks.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Episodes (or streams) per statistical check.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Steps per episode or stream.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Base seed for every statistical draw.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Numerical slack for exact comparisons.
    #[arg(long)]
    pub slack: Option<f64>,
    /// Random instances in the pointwise-inequality sweep.
    #[arg(long)]
    pub instances: Option<usize>,
    /// Existing directory that receives reports.csv and config.json.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

/// The model class and demonstrator the statistical imitation checks run
/// against.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    /// The travel-agency world with a fixed truth tuple.
    Toy { clients: usize, truth: Vec<usize> },
    /// Context-free action rows with an iid observation distribution.
    Synthetic {
        models: Vec<Vec<f64>>,
        prior: Option<Vec<f64>>,
        truth_index: usize,
        environment: Vec<f64>,
    },
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::Synthetic {
            models: vec![vec![0.7, 0.3], vec![0.3, 0.7]],
            prior: None,
            truth_index: 0,
            environment: vec![1.0],
        }
    }
}

struct BuiltScenario {
    class: WeightedModelClass,
    demonstrator: Box<dyn PolicyModel>,
    environment: Box<dyn crate::Environment>,
    truth_index: usize,
}

fn build_scenario(spec: &ScenarioSpec) -> Result<BuiltScenario> {
    match spec {
        ScenarioSpec::Toy { clients, truth } => {
            let demonstrator = ToyDemonstrator::new(*clients, truth.clone())?;
            let truth_index = demonstrator.model_index();
            Ok(BuiltScenario {
                class: toy_class(*clients)?,
                environment: Box::new(ToyWorld::new(*clients)?.environment()),
                demonstrator: Box::new(demonstrator),
                truth_index,
            })
        }
        ScenarioSpec::Synthetic {
            models,
            prior,
            truth_index,
            environment,
        } => {
            if *truth_index >= models.len() {
                return Err(Error::ModelIndexOutOfRange {
                    index: *truth_index,
                    count: models.len(),
                });
            }
            let rows: Vec<Arc<dyn PolicyModel>> = models
                .iter()
                .map(|row| {
                    FixedActionPolicy::new(row.clone()).map(|p| Arc::new(p) as Arc<dyn PolicyModel>)
                })
                .collect::<Result<_>>()?;
            let class = WeightedModelClass::dense(rows, prior.clone(), ContextSignature::Free)?;
            Ok(BuiltScenario {
                class,
                demonstrator: Box::new(FixedActionPolicy::new(models[*truth_index].clone())?),
                environment: Box::new(IidEnvironment::new(environment.clone())?),
                truth_index: *truth_index,
            })
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BoundsFile {
    exact: Option<bool>,
    checks: Option<Vec<String>>,
    alpha: Option<f64>,
    runs: Option<usize>,
    steps: Option<usize>,
    seed: Option<u64>,
    slack: Option<f64>,
    instances: Option<usize>,
    scenario: Option<ScenarioSpec>,
}

#[derive(Debug, Serialize)]
struct BoundsEcho {
    command: &'static str,
    rng: &'static str,
    exact: bool,
    checks: Option<Vec<String>>,
    alpha: f64,
    runs: usize,
    steps: usize,
    seed: u64,
    slack: f64,
    instances: usize,
    scenario: ScenarioSpec,
}

const VALID_CHECKS: [&str; 15] = [
    "theorem1", "theorem2", "theorem3", "theorem4", "theorem5", "theorem6i", "theorem6ii",
    "theorem7", "lemma1", "ineq7", "ineq8", "ineq9", "ineq10", "ineq_suite", "phi_size",
];

fn validate_checks(checks: &[String]) -> Result<()> {
    for name in checks {
        if !VALID_CHECKS.contains(&name.as_str()) {
            return Err(Error::config(format!(
                "unknown check {name:?}; valid names: {}",
                VALID_CHECKS.join(", ")
            )));
        }
    }
    Ok(())
}

/// Whether a report row named `name` survives the `--checks` filter.
fn selected(checks: &Option<Vec<String>>, name: &str) -> bool {
    match checks {
        None => true,
        Some(list) => {
            list.iter().any(|c| c == name)
                || (name.starts_with("ineq") && list.iter().any(|c| c == "ineq_suite"))
        }
    }
}

fn any_selected(checks: &Option<Vec<String>>, names: &[&str]) -> bool {
    names.iter().any(|name| selected(checks, name))
}

fn cmd_bounds_check(args: &BoundsArgs) -> Result<i32> {
    ensure_out_dir(&args.out)?;
    let file: BoundsFile = match &args.config {
        Some(path) => load_json(path)?,
        None => BoundsFile::default(),
    };

    let exact_only = args.exact || file.exact.unwrap_or(false);
    let checks = args.checks.clone().or(file.checks);
    if let Some(list) = &checks {
        validate_checks(list)?;
    }
    let alpha = args.alpha.or(file.alpha).unwrap_or(0.05);
    let runs = args.runs.or(file.runs).unwrap_or(400);
    let steps = args.steps.or(file.steps).unwrap_or(48);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let slack = args.slack.or(file.slack).unwrap_or(DEFAULT_EXACT_SLACK);
    let instances = args.instances.or(file.instances).unwrap_or(1000);
    let scenario = file.scenario.unwrap_or_default();

    let mut reports: Vec<BoundReport> = Vec::new();

    if any_selected(&checks, &["theorem1", "theorem2", "theorem3", "theorem4", "theorem5"]) {
        for cfg in standard_exact_configs()? {
            reports.extend(
                run_exact_checks(&cfg, slack)?
                    .into_iter()
                    .filter(|r| selected(&checks, &r.check)),
            );
        }
    }

    if !exact_only && any_selected(&checks, &["theorem1", "theorem2", "theorem3"]) {
        let built = build_scenario(&scenario)?;
        let mc_scenario = McScenario {
            label: "cli-scenario",
            class: &built.class,
            demonstrator: built.demonstrator.as_ref(),
            environment: built.environment.as_ref(),
            truth_index: built.truth_index,
        };
        let cfg = McConfig {
            runs,
            steps,
            alpha,
            base_seed: seed,
        };
        reports.extend(
            mc_imitation_checks(&mc_scenario, &cfg)?
                .into_iter()
                .filter(|r| selected(&checks, &r.check)),
        );
    }

    if !exact_only && any_selected(&checks, &["theorem6i", "theorem6ii", "theorem7", "lemma1"]) {
        let class = builtin_measure_class()?;
        let cfg = SequenceMcConfig {
            runs,
            steps,
            base_seed: seed,
        };
        reports.extend(
            mc_sequence_checks(&class, 0, 0.3, 2, &cfg, "builtin-trio")?
                .into_iter()
                .filter(|r| selected(&checks, &r.check)),
        );
    }

    if any_selected(&checks, &["ineq7", "ineq8", "ineq9", "ineq10", "phi_size"]) {
        let cfg = SweepConfig {
            instances,
            base_seed: seed,
            ..SweepConfig::default()
        };
        reports.extend(
            smap_inequality_checks(&cfg)?
                .into_iter()
                .filter(|r| selected(&checks, &r.check)),
        );
    }

    write_echo(
        &args.out,
        &BoundsEcho {
            command: "bounds-check",
            rng: RNG_LABEL,
            exact: exact_only,
            checks: checks.clone(),
            alpha,
            runs,
            steps,
            seed,
            slack,
            instances,
            scenario,
        },
    )?;

    let mut csv = String::from(BoundReport::CSV_HEADER);
    csv.push('\n');
    for report in &reports {
        csv.push_str(&report.csv_row());
        csv.push('\n');
    }
    fs::write(args.out.join("reports.csv"), csv)?;

    let mut failures = 0usize;
    for report in &reports {
        println!(
            "{:<10} [{}] lhs={:.4e} rhs={:.4e} {}",
            report.check,
            report.mode,
            report.lhs,
            report.rhs,
            if report.holds { "ok" } else { "FAILED" }
        );
        if !report.holds {
            failures += 1;
        }
    }
    if reports.is_empty() {
        println!("no checks selected");
    } else if failures == 0 {
        println!("all {} checks hold", reports.len());
    } else {
        println!("{failures} of {} checks FAILED", reports.len());
    }
    Ok(if failures == 0 { 0 } else { 1 })
}

/// Three binary iid measures used by the sequence checks and the demo when
/// no class is configured.
fn builtin_measure_class() -> Result<MeasureClass> {
    MeasureClass::new(
        vec![
            Arc::new(IidCategorical::new(vec![0.7, 0.3])?) as Arc<dyn Measure>,
            Arc::new(IidCategorical::new(vec![0.45, 0.55])?),
            Arc::new(IidCategorical::new(vec![0.2, 0.8])?),
        ],
        None,
    )
}

// -------------------------------------------------------------- smap-demo

#[derive(Args, Debug)]
pub struct SmapArgs {
    /// JSON config file; explicit flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Stream length.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Share threshold for the top-min predictor.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Rank for the rho-family estimators.
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Existing directory that receives estimators.csv and config.json.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

/// One measure in a JSON-configured class.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Iid { probs: Vec<f64> },
    Markov {
        initial: Vec<f64>,
        transitions: Vec<Vec<f64>>,
    },
}

impl MeasureSpec {
    fn build(&self) -> Result<Arc<dyn Measure>> {
        Ok(match self {
            MeasureSpec::Iid { probs } => Arc::new(IidCategorical::new(probs.clone())?),
            MeasureSpec::Markov { initial, transitions } => {
                Arc::new(MarkovChain::new(initial.clone(), transitions.clone())?)
            }
        })
    }
}

fn default_measure_specs() -> Vec<MeasureSpec> {
    vec![
        MeasureSpec::Iid { probs: vec![0.7, 0.3] },
        MeasureSpec::Iid { probs: vec![0.45, 0.55] },
        MeasureSpec::Iid { probs: vec![0.2, 0.8] },
    ]
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SmapFile {
    steps: Option<usize>,
    alpha: Option<f64>,
    top_n: Option<usize>,
    seed: Option<u64>,
    measures: Option<Vec<MeasureSpec>>,
    prior: Option<Vec<f64>>,
    truth_index: Option<usize>,
}

#[derive(Debug, Serialize)]
struct SmapEcho {
    command: &'static str,
    rng: &'static str,
    steps: usize,
    alpha: f64,
    top_n: usize,
    seed: u64,
    truth_index: usize,
    prior: Option<Vec<f64>>,
    measures: Vec<MeasureSpec>,
}

fn cmd_smap_demo(args: &SmapArgs) -> Result<i32> {
    ensure_out_dir(&args.out)?;
    let file: SmapFile = match &args.config {
        Some(path) => load_json(path)?,
        None => SmapFile::default(),
    };

    let steps = args.steps.or(file.steps).unwrap_or(200);
    let alpha = args.alpha.or(file.alpha).unwrap_or(0.2);
    let top_n = args.top_n.or(file.top_n).unwrap_or(2);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let specs = file.measures.unwrap_or_else(default_measure_specs);
    let prior = file.prior;
    let truth_index = file.truth_index.unwrap_or(0);

    let measures: Vec<Arc<dyn Measure>> =
        specs.iter().map(MeasureSpec::build).collect::<Result<_>>()?;
    let mut class = MeasureClass::new(measures, prior.clone())?;
    if truth_index >= class.measure_count() {
        return Err(Error::ModelIndexOutOfRange {
            index: truth_index,
            count: class.measure_count(),
        });
    }
    if top_n == 0 || top_n > class.measure_count() {
        return Err(Error::config(format!(
            "top-n rank must lie in 1..={}, got {top_n}",
            class.measure_count()
        )));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut csv = String::from("t,symbol,mu,xi,rho,rho_norm,rho_stat,top_min,missing_mass,top_count");
    for m in 0..class.measure_count() {
        csv.push_str(&format!(",posterior_{m}"));
    }
    csv.push('\n');

    // Cumulative log losses on the realized stream, for the estimators that
    // are actual probability assignments.
    let mut loss_mu = 0.0f64;
    let mut loss_xi = 0.0f64;
    let mut loss_norm = 0.0f64;
    let mut loss_stat = 0.0f64;
    let clamp_ln = |p: f64| p.max(f64::MIN_POSITIVE).ln();

    for t in 0..steps {
        let conditional = class.measure_conditional(truth_index)?;
        let symbol = sample_categorical(&mut rng, &conditional);
        let mu = conditional[symbol];
        let xi = class.xi_next(symbol)?;
        let rho = class.rho_next(top_n, symbol)?;
        let rho_norm = class.rho_norm_next(top_n, symbol)?;
        let rho_stat = class.rho_stat_next(top_n, symbol)?;
        let top_min = class.top_min_next(alpha, symbol)?;
        let missing = class.missing_mass(alpha)?;
        let top_count = class.top_count(alpha)?;
        loss_mu -= clamp_ln(mu);
        loss_xi -= clamp_ln(xi);
        loss_norm -= clamp_ln(rho_norm);
        loss_stat -= clamp_ln(rho_stat);

        csv.push_str(&format!(
            "{t},{symbol},{},{},{},{},{},{},{},{top_count}",
            prob(mu),
            prob(xi),
            prob(rho),
            prob(rho_norm),
            prob(rho_stat),
            prob(top_min),
            prob(missing),
        ));
        for w in class.posterior() {
            csv.push_str(&format!(",{}", prob(w)));
        }
        csv.push('\n');
        class.push(symbol)?;
    }
    fs::write(args.out.join("estimators.csv"), csv)?;

    write_echo(
        &args.out,
        &SmapEcho {
            command: "smap-demo",
            rng: RNG_LABEL,
            steps,
            alpha,
            top_n,
            seed,
            truth_index,
            prior,
            measures: specs,
        },
    )?;

    let final_posterior = class.posterior()[truth_index];
    println!(
        "{steps} steps; final posterior on the true measure {final_posterior:.4}"
    );
    println!(
        "cumulative log loss: truth {loss_mu:.3}, xi {loss_xi:.3}, rho_norm {loss_norm:.3}, rho_stat {loss_stat:.3}"
    );
    Ok(0)
}
