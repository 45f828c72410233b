use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, MetricsReport, ResultRow, TrialMetrics};
use super::scenario::Scenario;
use super::transaction::{prepare, run_transaction, scenario_bid_step, PreparedStrategy, Strategy, TrialOutcome};
use crate::error::{Error, Result};
use crate::market::Realization;
use crate::online::sample_realization;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub n_trials: u64,
    pub master_seed: u64,
    /// Overrides the scenario's overbooking rate.
    pub overbooking: Option<f64>,
    /// Keep every `TrialOutcome` in the result.
    pub keep_outcomes: bool,
}

impl MonteCarloConfig {
    pub fn new(n_trials: u64, master_seed: u64) -> Self {
        Self { n_trials, master_seed, overbooking: None, keep_outcomes: false }
    }
}

/// Long-term stage statistics of one strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfflineStats {
    pub strategy: Strategy,
    pub contracts: usize,
    pub rounds: u32,
    pub round_bound: u64,
    pub converged: bool,
}

#[derive(Clone, Debug, Default)]
pub struct MonteCarloRun {
    pub report: MetricsReport,
    pub rows: Vec<ResultRow>,
    pub offline: Vec<OfflineStats>,
    /// Largest spot-market round count seen, with its bound.
    pub online_rounds: Vec<(Strategy, u32, u64, bool)>,
    pub outcomes: Vec<TrialOutcome>,
}

/// Random stream for the participation draw of `trial`.
pub fn realization_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial << 8);
    rng
}

/// Random stream for the interaction costs of `strategy` in `trial`.
pub fn cost_rng(master_seed: u64, trial: u64, strategy: Strategy) -> ChaCha8Rng {
    let k = Strategy::ALL.iter().position(|&s| s == strategy).unwrap_or(0) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((trial << 8) | (k + 1));
    rng
}

/// Runs the long-term stage of every strategy once.
pub fn prepare_all(
    scenario: &Scenario,
    strategies: &[Strategy],
    overbooking: Option<f64>,
) -> Result<Vec<PreparedStrategy>> {
    let step = scenario_bid_step(scenario)?;
    strategies.par_iter().map(|&s| prepare(scenario, s, overbooking, step)).collect()
}

/// Runs trials `0..n_trials` of already prepared strategies. Every strategy
/// sees the same participation draw in a given trial.
pub fn run_trials(
    scenario: &Scenario,
    prepared: &[PreparedStrategy],
    cfg: &MonteCarloConfig,
) -> Result<Vec<TrialOutcome>> {
    let per_trial: Vec<Vec<TrialOutcome>> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|t| {
            let base = prepared.first().map(|p| &p.market);
            let Some(base) = base else { return Ok(Vec::new()) };
            let alpha = sample_realization(base, &mut realization_rng(cfg.master_seed, t)).alpha;
            prepared
                .iter()
                .map(|p| {
                    let r = Realization::from_alpha(&p.market, alpha.clone());
                    run_transaction(scenario, p, t, &r, &mut cost_rng(cfg.master_seed, t, p.strategy))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

pub fn rows_of(scenario: &Scenario, outcomes: &[TrialOutcome]) -> Vec<ResultRow> {
    outcomes
        .iter()
        .map(|o| ResultRow {
            scenario_id: scenario.id.clone(),
            strategy: o.strategy,
            n_mus: scenario.users.len(),
            n_bss: scenario.base_stations.len(),
            trial: o.trial,
            metrics: TrialMetrics::of(o),
            axis: None,
        })
        .collect()
}

/// Long-term stage once per strategy, then `n_trials` practical transactions.
pub fn run_monte_carlo(scenario: &Scenario, strategies: &[Strategy], cfg: &MonteCarloConfig) -> Result<MonteCarloRun> {
    if cfg.n_trials == 0 {
        return Err(Error::arg("need at least one trial"));
    }
    if strategies.is_empty() {
        return Err(Error::arg("need at least one strategy"));
    }
    let prepared = prepare_all(scenario, strategies, cfg.overbooking)?;
    let outcomes = run_trials(scenario, &prepared, cfg)?;
    let mut rows = rows_of(scenario, &outcomes);
    rows.sort_by(|a, b| {
        let ka = strategies.iter().position(|&s| s == a.strategy);
        let kb = strategies.iter().position(|&s| s == b.strategy);
        ka.cmp(&kb).then(a.trial.cmp(&b.trial))
    });
    let mut report = compute_metrics(&outcomes);
    report.strategies.sort_by_key(|r| strategies.iter().position(|&s| s == r.strategy));
    let offline = prepared
        .iter()
        .filter_map(|p| {
            p.offline.as_ref().map(|o| OfflineStats {
                strategy: p.strategy,
                contracts: o.contracts.len(),
                rounds: o.rounds,
                round_bound: o.round_bound,
                converged: o.converged,
            })
        })
        .collect();
    let online_rounds = strategies
        .iter()
        .map(|&s| {
            let worst = outcomes
                .iter()
                .filter(|o| o.strategy == s)
                .max_by_key(|o| o.online_rounds)
                .map_or((0, 0, true), |o| (o.online_rounds, o.online_round_bound, o.online_converged));
            let all_conv = outcomes.iter().filter(|o| o.strategy == s).all(|o| o.online_converged);
            (s, worst.0, worst.1, all_conv)
        })
        .collect();
    Ok(MonteCarloRun {
        report,
        rows,
        offline,
        online_rounds,
        outcomes: if cfg.keep_outcomes { outcomes } else { Vec::new() },
    })
}
