//! Command-line driver: `gen`, `run`, `sweep` and `verify`.
//!
//! Settings come from an optional TOML file holding a [`ScenarioConfig`];
//! flags override individual keys. Exit status is 0 on success, 1 when
//! `verify` finds a violated property, and 2 for bad input of any kind.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use crate::error::{Error, Result};
use crate::market::{check_feasibility, Contract, FeasibilityContext};
use crate::matching::{
    check_coalition_stability, check_rationality, find_blocking_pairs, individual_rationality, local_pareto_probe,
    BlockingKind, OfflineMarket, DEFAULT_SEARCH_BUDGET,
};
use crate::sim::{
    gen_synthetic, load_eua, offline_config, read_results, run_monte_carlo, scenario_bid_step, write_results,
    MonteCarloConfig, MonteCarloRun, OfflineStats, ResultRow, Scenario, ScenarioConfig, Strategy,
};

pub const SEED_ENV: &str = "ISAC_MARKET_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "isac-market",
    version,
    about = "Bandwidth and power trading between ISAC base stations and mobile users",
    after_help = "Precedence: built-in defaults < --config file < individual flags.\n\
                  The master seed may also be set through ISAC_MARKET_SEED."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a scenario and save it as JSON.
    Gen {
        #[command(flatten)]
        source: SourceArgs,
        /// Scenario file to write.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run strategies over Monte Carlo trials and write a results table.
    Run {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Repeat `run` over one axis and write a single table with axis columns.
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated axis points, e.g. 20,40,60 or 0,0.1,0.2.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
    },
    /// Audit a long-term matching, a contract file, or a results table.
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        /// Strategy whose long-term stage is audited.
        #[arg(long, default_value = "frbank")]
        strategy: Strategy,
        /// Audit these contracts (JSON list) instead of running the matching.
        #[arg(long)]
        contracts: Option<PathBuf>,
        /// Check a results table instead of a scenario.
        #[arg(long, conflicts_with = "contracts")]
        results: Option<PathBuf>,
        /// Subset evaluations allowed for the exhaustive searches.
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    NMus,
    Overbooking,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::NMus => "n_mus",
            Axis::Overbooking => "overbooking",
        }
    }
}

#[derive(Clone, Debug, Default, Args)]
pub struct SourceArgs {
    /// TOML file with scenario and trading settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Load a saved scenario instead of generating one.
    #[arg(long, conflicts_with_all = ["eua_bs", "eua_users"])]
    pub scenario: Option<PathBuf>,
    /// EUA-style base station table (latitude, longitude columns).
    #[arg(long, requires = "eua_users")]
    pub eua_bs: Option<PathBuf>,
    /// EUA-style user table.
    #[arg(long, requires = "eua_bs")]
    pub eua_users: Option<PathBuf>,
    #[arg(long, env = SEED_ENV, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub n_mus: Option<usize>,
    #[arg(long)]
    pub n_bss: Option<usize>,
    #[arg(long)]
    pub n_targets: Option<usize>,
    /// Overbooking rate of the overbooking strategies, both resources.
    #[arg(long)]
    pub overbooking: Option<f64>,
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long)]
    pub rho2: Option<f64>,
    #[arg(long)]
    pub rho3: Option<f64>,
    #[arg(long)]
    pub rho4: Option<f64>,
    #[arg(long)]
    pub bid_step: Option<f64>,
}

#[derive(Clone, Debug, Args)]
pub struct ExperimentArgs {
    /// Comma-separated strategy names.
    #[arg(long, value_delimiter = ',', default_value = "frbank,con_online,con_offline,hybrid,hybrid_o,greedy")]
    pub strategies: Vec<Strategy>,
    #[arg(long, default_value_t = 100)]
    pub n_trials: u64,
    /// Created if absent.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Skip the per-trial trace files.
    #[arg(long)]
    pub no_traces: bool,
}

impl SourceArgs {
    pub fn config(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            None => ScenarioConfig::default(),
            Some(p) => {
                let text =
                    fs::read_to_string(p).map_err(|e| Error::Input(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?
            }
        };
        let t = &mut cfg.trading;
        if let Some(v) = self.n_mus {
            cfg.n_mus = v;
        }
        if let Some(v) = self.n_bss {
            cfg.n_bss = v;
        }
        if let Some(v) = self.n_targets {
            cfg.n_targets = v;
        }
        if let Some(v) = self.overbooking {
            t.overbooking = v;
        }
        for (slot, v) in [
            (&mut t.risk.rho1, self.rho1),
            (&mut t.risk.rho2, self.rho2),
            (&mut t.risk.rho3, self.rho3),
            (&mut t.risk.rho4, self.rho4),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if self.bid_step.is_some() {
            t.bid_step = self.bid_step;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Saved scenario, EUA tables, or a synthetic draw, in that order.
    pub fn scenario(&self, cfg: &ScenarioConfig) -> Result<Scenario> {
        if let Some(p) = &self.scenario {
            let mut s = Scenario::load(p)?;
            if let Some(v) = self.overbooking {
                s.trading.overbooking = v;
            }
            return Ok(s);
        }
        match (&self.eua_bs, &self.eua_users) {
            (Some(b), Some(u)) => {
                for p in [b, u] {
                    if !p.exists() {
                        return Err(Error::Input(format!("EUA file {} not found", p.display())));
                    }
                }
                load_eua(b, u, cfg, self.seed)
            }
            _ => gen_synthetic(cfg, self.seed),
        }
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    scenario_id: &'a str,
    master_seed: u64,
    n_trials: u64,
    strategies: Vec<&'static str>,
    axis: Option<&'static str>,
    axis_values: Vec<f64>,
    units: Units,
    config: Option<&'a ScenarioConfig>,
    trading: &'a crate::sim::TradingConfig,
    long_term: Vec<PointStats>,
}

#[derive(Serialize)]
struct Units {
    rt_ms: &'static str,
    dibc_ms: &'static str,
    ecibc_w: &'static str,
    rdslc: &'static str,
}

const UNITS: Units = Units {
    rt_ms: "ms, wall clock of the practical-transaction stage only",
    dibc_ms: "ms, summed interaction delay per trial",
    ecibc_w: "J, sum over messages of sender transmit power (W) times delay (s)",
    rdslc: "present contracted demand over nominal supply",
};

#[derive(Serialize)]
struct PointStats {
    axis_value: Option<f64>,
    offline: Vec<OfflineStats>,
    online_worst_rounds: Vec<(Strategy, u32, u64, bool)>,
}

/// Parses arguments, runs the command, and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Runs one command. `Ok(false)` means a verified property failed.
pub fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Gen { source, out } => {
            let cfg = source.config()?;
            let s = source.scenario(&cfg)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            s.save(out)?;
            println!(
                "{}: {} base stations, {} users, {} targets -> {}",
                s.id,
                s.base_stations.len(),
                s.users.len(),
                s.targets.len(),
                out.display()
            );
            Ok(true)
        }
        Command::Run { source, exp } => {
            let cfg = source.config()?;
            let scenario = source.scenario(&cfg)?;
            let run = monte_carlo(&scenario, exp, source.seed, None)?;
            fs::create_dir_all(&exp.out_dir)?;
            if !exp.no_traces {
                write_traces(&exp.out_dir.join("traces"), &run)?;
            }
            print_report(&scenario, &run);
            let stats = vec![point_stats(None, &run)];
            finish(
                exp,
                source,
                "run",
                &scenario,
                (source.scenario.is_none()).then_some(&cfg),
                None,
                &[],
                run.rows,
                stats,
            )
        }
        Command::Sweep { source, exp, axis, values } => {
            if values.is_empty() {
                return Err(Error::Input("sweep needs at least one axis value".into()));
            }
            let cfg = source.config()?;
            if *axis == Axis::NMus && source.scenario.is_some() {
                return Err(Error::Input("an n_mus sweep needs a generated scenario, not --scenario".into()));
            }
            fs::create_dir_all(&exp.out_dir)?;
            let mut rows = Vec::new();
            let mut stats = Vec::new();
            let mut first: Option<Scenario> = None;
            for &v in values {
                let (scenario, ob) = match axis {
                    Axis::NMus => {
                        if v < 1.0 || v.fract() != 0.0 {
                            return Err(Error::Input(format!("n_mus value {v} is not a positive integer")));
                        }
                        let c = ScenarioConfig { n_mus: v as usize, ..cfg.clone() };
                        (source.scenario(&c)?, None)
                    }
                    Axis::Overbooking => (first.clone().map_or_else(|| source.scenario(&cfg), Ok)?, Some(v)),
                };
                let run = monte_carlo(&scenario, exp, source.seed, ob)?;
                eprintln!("{} = {v}", axis.name());
                print_report(&scenario, &run);
                if !exp.no_traces {
                    write_traces(&exp.out_dir.join("traces").join(format!("{}_{v}", axis.name())), &run)?;
                }
                stats.push(point_stats(Some(v), &run));
                rows.extend(run.rows.into_iter().map(|r| ResultRow { axis: Some((axis.name().to_string(), v)), ..r }));
                first.get_or_insert(scenario);
            }
            let Some(scenario) = first else { unreachable!("values is nonempty") };
            let cfg_ref = source.scenario.is_none().then_some(&cfg);
            finish(exp, source, "sweep", &scenario, cfg_ref, Some(axis.name()), values, rows, stats)
        }
        Command::Verify { source, strategy, contracts, results, budget } => {
            if let Some(p) = results {
                return verify_results(p);
            }
            let cfg = source.config()?;
            let scenario = source.scenario(&cfg)?;
            match contracts {
                Some(p) => verify_contracts(&scenario, *strategy, p),
                None => verify_matching(&scenario, *strategy, *budget),
            }
        }
    }
}

fn monte_carlo(
    scenario: &Scenario,
    exp: &ExperimentArgs,
    seed: u64,
    overbooking: Option<f64>,
) -> Result<MonteCarloRun> {
    let cfg =
        MonteCarloConfig { n_trials: exp.n_trials, master_seed: seed, overbooking, keep_outcomes: !exp.no_traces };
    run_monte_carlo(scenario, &exp.strategies, &cfg)
}

fn point_stats(axis_value: Option<f64>, run: &MonteCarloRun) -> PointStats {
    PointStats { axis_value, offline: run.offline.clone(), online_worst_rounds: run.online_rounds.clone() }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    exp: &ExperimentArgs,
    source: &SourceArgs,
    command: &'static str,
    scenario: &Scenario,
    config: Option<&ScenarioConfig>,
    axis: Option<&'static str>,
    axis_values: &[f64],
    rows: Vec<ResultRow>,
    long_term: Vec<PointStats>,
) -> Result<bool> {
    let path = exp.out_dir.join("results.csv");
    write_results(BufWriter::new(fs::File::create(&path)?), &rows)?;
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        scenario_id: &scenario.id,
        master_seed: source.seed,
        n_trials: exp.n_trials,
        strategies: exp.strategies.iter().map(|s| s.name()).collect(),
        axis,
        axis_values: axis_values.to_vec(),
        units: UNITS,
        config,
        trading: &scenario.trading,
        long_term,
    };
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(exp.out_dir.join("metadata.json"), text)?;
    println!("{} rows -> {}", rows.len(), path.display());
    Ok(true)
}

/// One JSON line per trial outcome, one file per strategy.
fn write_traces(dir: &Path, run: &MonteCarloRun) -> Result<()> {
    use std::io::Write;
    fs::create_dir_all(dir)?;
    let mut strategies: Vec<Strategy> = Vec::new();
    for o in &run.outcomes {
        if !strategies.contains(&o.strategy) {
            strategies.push(o.strategy);
        }
    }
    for s in strategies {
        let mut w = BufWriter::new(fs::File::create(dir.join(format!("{s}.jsonl")))?);
        for o in run.outcomes.iter().filter(|o| o.strategy == s) {
            serde_json::to_writer(&mut w, o)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    Ok(())
}

fn print_report(scenario: &Scenario, run: &MonteCarloRun) {
    println!("{}", scenario.id);
    println!(
        "  {:<16} {:>11} {:>11} {:>11} {:>11} {:>9} {:>8} {:>8}",
        "strategy", "sw", "mu", "bs", "ni", "rt_ms", "rdslc_b", "drlc"
    );
    for r in &run.report.strategies {
        println!(
            "  {:<16} {:>11.2} {:>11.2} {:>11.2} {:>11.1} {:>9.3} {:>8.3} {:>8.3}",
            r.strategy.name(),
            r.social_welfare.mean,
            r.mu_utility.mean,
            r.bs_utility.mean,
            r.ni.mean,
            r.rt_ms.mean,
            r.rdslc_b.mean,
            r.drlc.mean
        );
    }
}

fn report(name: &str, ok: bool, detail: impl std::fmt::Display) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn verify_matching(scenario: &Scenario, strategy: Strategy, budget: u64) -> Result<bool> {
    let shape = strategy.shape();
    if !shape.offline {
        return Err(Error::Input(format!("{strategy} signs no long-term contracts")));
    }
    let ob = if shape.overbooking { scenario.trading.overbooking } else { 0.0 };
    let market = scenario.market(shape.coalitions, ob)?;
    let cfg = offline_config(scenario, &shape, scenario_bid_step(scenario)?)?;
    let om = OfflineMarket::new(&market, &cfg)?;
    let out = om.run();
    let mut ok = true;
    let bound = om.round_bound();
    ok &= report(
        "convergence",
        out.negotiation.converged && u64::from(out.negotiation.rounds) <= bound,
        format!("{} rounds, bound {bound}", out.negotiation.rounds),
    );
    let contracts = om.contracts_of(&out.negotiation);
    let volunteer = om.volunteer_map(&out.negotiation);
    let ctx = FeasibilityContext { bounds: cfg.bounds, risk: cfg.risk, volunteer: &volunteer };
    let v = check_feasibility(&market, &contracts, &ctx);
    ok &= report("feasibility", v.is_empty(), summarize(v.iter().map(|x| format!("{x}"))));
    let ir = individual_rationality(&om, &out.negotiation);
    let rat = check_rationality(&om, &out.negotiation);
    ok &= report(
        "individual-rationality",
        ir.is_empty() && rat.is_empty(),
        summarize(
            ir.iter()
                .map(|x| format!("{x}"))
                .chain(rat.iter().map(|r| format!("{} at bs {}: {}", r.client, r.bs, r.detail))),
        ),
    );
    for (name, kind) in
        [("no-blocking-eviction", BlockingKind::Eviction), ("no-blocking-addition", BlockingKind::Addition)]
    {
        let found = find_blocking_pairs(&om, &out.negotiation, &[kind], budget)?;
        ok &= report(name, found.is_empty(), summarize(found.iter().map(|b| format!("{} with bs {}", b.client, b.bs))));
    }
    let coal = check_coalition_stability(&om, &out.negotiation);
    ok &= report("coalition-stability", coal.is_empty(), summarize(coal.iter().map(|c| c.detail.clone())));
    let probe = local_pareto_probe(&om, &out.negotiation, budget)?;
    let detail = format!(
        "{} welfare-raising single moves ({} voluntary) over {} subsets{}",
        probe.improvements.len(),
        probe.improvements.iter().filter(|d| d.voluntary).count(),
        probe.examined,
        if probe.partial { " (budget exhausted)" } else { "" }
    );
    ok &= report("local-pareto", probe.improvements.is_empty() && !probe.partial, detail);
    Ok(ok)
}

fn verify_contracts(scenario: &Scenario, strategy: Strategy, path: &Path) -> Result<bool> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let contracts: Vec<Contract> = serde_json::from_str(&text)
        .map_err(|e| Error::Input(format!("{}: invalid contract list: {e}", path.display())))?;
    let shape = strategy.shape();
    let ob = if shape.overbooking { scenario.trading.overbooking } else { 0.0 };
    let market = scenario.market(shape.coalitions, ob)?;
    let volunteer = Default::default();
    let ctx = FeasibilityContext {
        bounds: scenario.trading.bounds,
        risk: shape.risk.then_some(scenario.trading.risk),
        volunteer: &volunteer,
    };
    let v = check_feasibility(&market, &contracts, &ctx);
    for x in &v {
        println!("FAIL {}: {x}", x.constraint);
    }
    Ok(report("contracts", v.is_empty(), format!("{} contracts, {} violations", contracts.len(), v.len())))
}

fn verify_results(path: &Path) -> Result<bool> {
    let f = fs::File::open(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let rows = read_results(f)?;
    let mut ok = report("schema", true, format!("{} rows", rows.len()));
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| {
            let m = &r.metrics;
            !m.values().iter().all(|v| v.is_finite())
                || !(0.0..=1.0).contains(&m.drlc)
                || m.ni < 0.0
                || m.rdslc_b < 0.0
                || m.rdslc_p < 0.0
                || m.dibc_ms < 0.0
                || m.ecibc_w < 0.0
        })
        .map(|r| format!("{} trial {}", r.strategy, r.trial))
        .collect();
    ok &= report("metric-ranges", bad.is_empty(), summarize(bad.into_iter()));
    let sanity: Vec<String> = rows
        .iter()
        .filter(|r| match r.strategy {
            Strategy::ConOnline | Strategy::Greedy => r.metrics.rdslc_b != 0.0 || r.metrics.drlc != 0.0,
            _ => false,
        })
        .map(|r| format!("{} trial {} reports long-term metrics", r.strategy, r.trial))
        .collect();
    ok &= report("strategy-sanity", sanity.is_empty(), summarize(sanity.into_iter()));
    Ok(ok)
}

fn summarize(items: impl Iterator<Item = String>) -> String {
    let all: Vec<String> = items.collect();
    match all.len() {
        0 => "none".into(),
        n if n <= 3 => all.join("; "),
        n => format!("{} and {} more", all[..3].join("; "), n - 3),
    }
}
